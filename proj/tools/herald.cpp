// Copyright 2026 The herald authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "herald/experiments.hpp"

namespace {

using namespace herald;

constexpr double kThetaDefault = 0.7853981633974483;  // pi/4

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One sweep subcommand's flag set; `spec` is filled during parse and the
// string flags are decoded after.
struct SweepCmd {
  CLI::App* cmd = nullptr;
  SweepSpec spec;
  std::string grid = "0.02:0.98:0.02";
  std::string swept = "eta";
  std::string backend = "both";
  std::string out;
};

void add_common_flags(SweepCmd& sc, bool with_sweep_choice) {
  CLI::App* c = sc.cmd;
  c->add_option("--q", sc.spec.q, "prior probability of psi2")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--theta", sc.spec.theta, "psi2 angle in radians")
      ->capture_default_str()
      ->check(CLI::Number);
  c->add_option("--eta", sc.spec.eta,
                "beam splitter transmissivity (fixed value when not swept)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  if (with_sweep_choice) {
    c->add_option("--grid", sc.grid, "swept grid as start:stop:step")
        ->capture_default_str();
    c->add_option("--sweep", sc.swept, "parameter to sweep")
        ->capture_default_str()
        ->check(CLI::IsMember({"eta", "q"}));
    c->add_option("--backend", sc.backend, "rows to emit")
        ->capture_default_str()
        ->check(CLI::IsMember({"closed_form", "engine", "both"}));
  }
  c->add_option("--cutoff", sc.spec.cutoff, "Fock cutoff (0 = per-scenario default)")
      ->capture_default_str();
  c->add_option("--k-max", sc.spec.k_max, "largest herald count reported per row")
      ->capture_default_str();
  c->add_flag("--renormalize", sc.spec.renormalize,
              "divide p_aveme by the captured branch mass");
  c->add_option("--out", sc.out, "output CSV path")->required();
}

void decode_grid(SweepCmd& sc) {
  double a = 0, b = 0, s = 0;
  int consumed = -1;
  if (std::sscanf(sc.grid.c_str(), "%lf:%lf:%lf%n", &a, &b, &s, &consumed) != 3 ||
      consumed != int(sc.grid.size()))
    throw CLI::ValidationError("--grid", "expected start:stop:step, got '" + sc.grid + "'");
  if (!(s > 0.0)) throw CLI::ValidationError("--grid", "step must be positive");
  if (!(a >= 0.0 && b <= 1.0))
    throw CLI::ValidationError("--grid", "swept values must stay in [0, 1]");
  sc.spec.grid_start = a;
  sc.spec.grid_stop = b;
  sc.spec.grid_step = s;
  sc.spec.swept = sc.swept;
  sc.spec.backend = sc.backend == "closed_form" ? BackendSel::closed_form
                    : sc.backend == "engine"    ? BackendSel::engine
                                                : BackendSel::both;
}

int run_sweep_command(const char* name, SweepCmd& sc) {
  decode_grid(sc);
  const std::vector<SweepRow> rows = run_sweep(sc.spec);
  write_csv(sc.out, rows);
  validate_rows(read_csv(sc.out));

  double min_margin = std::numeric_limits<double>::infinity();
  double best_adv = -std::numeric_limits<double>::infinity();
  double adv_at = 0.0;
  std::size_t adv_k = 0;
  for (const SweepRow& r : rows) {
    min_margin = std::min(min_margin, r.margin);
    for (std::size_t k = 0; k < r.branch.size(); ++k) {
      if (r.branch[k].suppressed) continue;
      const double adv = r.p_me - r.branch[k].p_err;
      if (adv > best_adv) {
        best_adv = adv;
        adv_at = r.swept_value;
        adv_k = k;
      }
    }
  }
  std::string margin_txt = rows.empty() ? "n/a" : fmt17(min_margin);
  std::string adv_txt = std::isfinite(best_adv)
                            ? fmt17(best_adv) + " (" + rows.front().swept_name + "=" +
                                  fmt17(adv_at) + ", k=" + std::to_string(adv_k) + ")"
                            : "n/a";
  std::printf("%s: %zu rows -> %s | min margin %s | best advantage %s\n", name,
              rows.size(), sc.out.c_str(), margin_txt.c_str(), adv_txt.c_str());
  return 0;
}

struct VerifyFlags {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  std::size_t dims = 6;
  std::size_t n_povm = 4;
  std::size_t resolution = 400;
};

int run_verify(const VerifyFlags& vf) {
  double worst_margin = std::numeric_limits<double>::infinity();
  std::uint64_t worst_margin_seed = vf.seed;
  double worst_gap = 0.0;  // excess of the search over the bound
  std::uint64_t worst_gap_seed = vf.seed;
  double worst_undercut = 0.0;  // most negative search - bound, must be ~0

  for (std::size_t i = 0; i < vf.trials; ++i) {
    const std::uint64_t seed = vf.seed + i;
    // Deterministic size schedule covering every dim/POVM combination.
    const std::size_t dim_s = 2 + (vf.dims > 2 ? (i * 5 + 1) % (vf.dims - 1) : 0);
    const std::size_t dim_e = 2 + (vf.dims > 2 ? (i * 11 + 2) % (vf.dims - 1) : 0);
    const std::size_t n_povm = 1 + (i * 7 + 3) % vf.n_povm;
    try {
      const DiscriminationInstance inst = random_instance(seed, dim_s, dim_e, n_povm);
      const NoGoCertificate cert = nogo_certificate(inst);
      if (cert.margin < worst_margin) {
        worst_margin = cert.margin;
        worst_margin_seed = seed;
      }
      const double bound = helstrom_pure(inst.psi1, inst.psi2, inst.q);
      const double search =
          brute_force_min_error(inst.psi1, inst.psi2, inst.q, vf.resolution);
      const double gap = search - bound;
      worst_undercut = std::min(worst_undercut, gap);
      if (gap < -1e-12) {
        std::fprintf(stderr,
                     "verify: search undercut the bound by %s at seed %" PRIu64 "\n",
                     fmt17(-gap).c_str(), seed);
        return 3;
      }
      if (vf.resolution >= 400 && gap > 1e-5) {
        std::fprintf(stderr,
                     "verify: search missed the bound by %s at seed %" PRIu64 "\n",
                     fmt17(gap).c_str(), seed);
        return 3;
      }
      if (gap > worst_gap) {
        worst_gap = gap;
        worst_gap_seed = seed;
      }
    } catch (const InvariantError& e) {
      std::fprintf(stderr, "verify: invariant failed at seed %" PRIu64 ": %s\n", seed,
                   e.what());
      return 3;
    }
  }
  const double undercut = worst_undercut < 0.0 ? -worst_undercut : 0.0;
  std::printf("verify: %zu trials ok | worst margin %s (seed %" PRIu64
              ") | worst oracle gap %s (seed %" PRIu64 ") | max undercut %s\n",
              vf.trials, fmt17(worst_margin).c_str(), worst_margin_seed,
              fmt17(worst_gap).c_str(), worst_gap_seed, fmt17(undercut).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "heralded binary state discrimination in truncated Fock spaces: "
      "per-branch Helstrom sweeps, averaged-error certificates, oracles"};
  app.require_subcommand(1);

  SweepCmd ex1;
  ex1.cmd = app.add_subcommand("example1", "Fock |2> environment, ideal counting");
  ex1.spec.scenario = Scenario::example1;
  ex1.spec.k_max = 3;
  add_common_flags(ex1, true);

  SweepCmd ex2;
  ex2.cmd = app.add_subcommand("example2", "coherent |alpha> environment, ideal counting");
  ex2.spec.scenario = Scenario::example2;
  ex2.spec.k_max = 6;
  ex2.cmd->add_option("--alpha", ex2.spec.alpha, "coherent amplitude (real)")
      ->capture_default_str()
      ->check(CLI::Number);
  add_common_flags(ex2, true);

  SweepCmd lossy;
  lossy.cmd = app.add_subcommand("lossy", "Fock |2> environment, lossy counting");
  lossy.spec.scenario = Scenario::lossy;
  lossy.spec.k_max = 3;
  lossy.cmd->add_option("--tau", lossy.spec.tau, "detector-path transmissivity")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_common_flags(lossy, true);

  SweepCmd tmsv;
  tmsv.cmd = app.add_subcommand(
      "tmsv", "two-mode squeezed vacuum heralding of Fock environments");
  tmsv.spec.scenario = Scenario::tmsv;
  tmsv.spec.k_max = 4;
  tmsv.cmd->add_option("--r", tmsv.spec.r, "squeezing parameter")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_common_flags(tmsv, false);

  VerifyFlags vf;
  CLI::App* verify =
      app.add_subcommand("verify", "random-instance stress test and oracle comparison");
  verify->add_option("--trials", vf.trials, "number of random instances")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", vf.seed, "base seed; trial i uses seed + i")
      ->capture_default_str();
  verify->add_option("--dims", vf.dims, "largest system/environment dimension")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t(2), std::size_t(16)));
  verify->add_option("--n-povm", vf.n_povm, "largest POVM element count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--resolution", vf.resolution,
                     "oracle grid resolution (>= 400 enforces the 1e-5 agreement)")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t(2), std::size_t(100000)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (ex1.cmd->parsed()) return run_sweep_command("example1", ex1);
    if (ex2.cmd->parsed()) return run_sweep_command("example2", ex2);
    if (lossy.cmd->parsed()) return run_sweep_command("lossy", lossy);
    if (tmsv.cmd->parsed()) return run_sweep_command("tmsv", tmsv);
    if (verify->parsed()) return run_verify(vf);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const CrossCheckError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CutoffError& e) {
    std::fprintf(stderr, "error: %s (suggested cutoff: %zu)\n", e.what(),
                 e.suggested_cutoff);
    return 1;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
