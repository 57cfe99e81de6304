// Copyright 2026 The herald authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "herald/experiments.hpp"

namespace {

constexpr double kPi4 = 0.7853981633974483;

// Field-by-field row comparison used where the cross-check inside run_sweep
// has already passed; the tolerance here re-verifies it from the outside.
void check_rows_close(const herald::SweepRow& a, const herald::SweepRow& b,
                      double eps) {
  CHECK(a.swept_name == b.swept_name);
  CHECK(a.swept_value == b.swept_value);
  CHECK(std::abs(a.p_me - b.p_me) <= eps);
  CHECK(std::abs(a.p_aveme - b.p_aveme) <= eps);
  CHECK(std::abs(a.margin - b.margin) <= eps);
  CHECK(std::abs(a.captured_mass - b.captured_mass) <= eps);
  REQUIRE(a.branch.size() == b.branch.size());
  for (std::size_t k = 0; k < a.branch.size(); ++k) {
    CHECK(a.branch[k].suppressed == b.branch[k].suppressed);
    CHECK(std::abs(a.branch[k].p_k - b.branch[k].p_k) <= eps);
    if (!a.branch[k].suppressed)
      CHECK(std::abs(a.branch[k].p_err - b.branch[k].p_err) <= eps);
  }
}

}  // namespace

TEST_CASE("two-photon closed forms at the frozen reference point") {
  const auto d = herald::example1_closed_detail(0.5, 0.3, kPi4);
  const double pk1[4] = {0.25, 0.5, 0.25, 0.0};
  const double pk2[4] = {0.3125, 0.3125, 0.1875, 0.1875};
  const double pk[4] = {0.26875, 0.44375, 0.23125, 0.05625};
  const double perr[4] = {0.10107635352538508, 0.15839625815112957,
                          0.14323300587988957, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(d.pk1[k] - pk1[k]) <= 1e-15);
    CHECK(std::abs(d.pk2[k] - pk2[k]) <= 1e-15);
    CHECK(std::abs(d.pk[k] - pk[k]) <= 1e-15);
    CHECK(std::abs(d.err[k] - perr[k]) <= 1e-13);
    CHECK(d.kept[k]);
    CHECK(std::abs(d.prior1[k] + d.prior2[k] - 1.0) <= 1e-14);
  }
  CHECK(std::abs(d.p_me - 0.11921134470680461) <= 1e-13);
  CHECK(std::abs(d.p_aveme - 0.13057524217423544) <= 1e-13);
  CHECK(std::abs(d.captured - 1.0) <= 1e-13);
}

TEST_CASE("two-photon closed forms at a second frozen point") {
  const auto d = herald::example1_closed_detail(0.3, 0.5, kPi4);
  const double pk2[4] = {0.4655, 0.2135, 0.2265, 0.0945};
  const double perr[4] = {0.1557507286641654, 0.3261423317396731,
                          0.04221223116724382, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(d.pk2[k] - pk2[k]) <= 1e-15);
    CHECK(std::abs(d.err[k] - perr[k]) <= 1e-13);
  }
  CHECK(std::abs(d.p_me - 0.14644660940672627) <= 1e-13);
  CHECK(std::abs(d.p_aveme - 0.18439557978006282) <= 1e-13);
  CHECK(std::abs(d.p_aveme - d.p_me - 0.037948970373336555) <= 1e-13);
}

TEST_CASE("two-photon engine and closed-form rows agree") {
  for (double eta : {0.37, 0.5, 0.91}) {
    const auto cf = herald::example1_closed_form(eta, 0.3, kPi4);
    const auto en = herald::example1_engine(eta, 0.3, kPi4);
    CHECK(cf.backend == "closed_form");
    CHECK(en.backend == "engine");
    check_rows_close(cf, en, 1e-12);
  }
  const auto en = herald::example1_engine(0.5, 0.3, kPi4);
  CHECK(std::abs(en.p_me - 0.11921134470680461) <= 1e-13);
  CHECK(std::abs(en.margin - 0.011363897467430828) <= 1e-13);
}

TEST_CASE("beam splitter limits of the two-photon scenario") {
  const auto closed0 = herald::example1_closed_form(0.0, 0.3, kPi4);
  const auto engine0 = herald::example1_engine(0.0, 0.3, kPi4);
  CHECK(std::abs(closed0.margin - 0.03078865529319541) <= 1e-12);
  CHECK(std::abs(engine0.margin - 0.03078865529319541) <= 1e-12);
  const auto closed1 = herald::example1_closed_form(1.0, 0.3, kPi4);
  const auto engine1 = herald::example1_engine(1.0, 0.3, kPi4);
  CHECK(std::abs(closed1.margin) <= 1e-12);
  CHECK(std::abs(engine1.margin) <= 1e-12);
}

TEST_CASE("default eta sweep emits cross-checked row pairs") {
  herald::SweepSpec spec;
  const auto rows = herald::run_sweep(spec);
  REQUIRE(rows.size() == 98);
  herald::validate_rows(rows);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    CHECK(rows[i].backend == "closed_form");
    CHECK(rows[i + 1].backend == "engine");
    CHECK(rows[i].swept_name == "eta");
    check_rows_close(rows[i], rows[i + 1], 1e-10);
    if (i >= 2) CHECK(rows[i].swept_value > rows[i - 2].swept_value);
    CHECK(rows[i].margin >= -1e-9);
  }
  CHECK(std::abs(rows[0].swept_value - 0.02) <= 1e-15);
  CHECK(std::abs(rows[96].swept_value - 0.98) <= 1e-15);
}

TEST_CASE("prior sweep holds eta fixed and sweeps q") {
  herald::SweepSpec spec;
  spec.swept = "q";
  spec.grid_start = 0.1;
  spec.grid_stop = 0.9;
  spec.grid_step = 0.1;
  spec.eta = 0.5;
  const auto rows = herald::run_sweep(spec);
  REQUIRE(rows.size() == 18);
  herald::validate_rows(rows);
  bool saw_half = false;
  for (const auto& r : rows) {
    CHECK(r.swept_name == "q");
    if (std::abs(r.swept_value - 0.5) <= 1e-12) {
      saw_half = true;
      CHECK(std::abs(r.p_me - 0.14644660940672627) <= 1e-13);
    }
  }
  CHECK(saw_half);
}

TEST_CASE("backend selector controls which rows are emitted") {
  herald::SweepSpec spec;
  spec.backend = herald::BackendSel::engine;
  const auto engine_rows = herald::run_sweep(spec);
  REQUIRE(engine_rows.size() == 49);
  for (const auto& r : engine_rows) CHECK(r.backend == "engine");
  spec.backend = herald::BackendSel::closed_form;
  const auto closed_rows = herald::run_sweep(spec);
  REQUIRE(closed_rows.size() == 49);
  for (const auto& r : closed_rows) CHECK(r.backend == "closed_form");
}

TEST_CASE("an empty grid produces an empty row set that still round-trips") {
  herald::SweepSpec spec;
  spec.grid_start = 0.9;
  spec.grid_stop = 0.1;
  const auto rows = herald::run_sweep(spec);
  CHECK(rows.empty());
  const std::string path = "test_experiments_empty.csv";
  herald::write_csv(path, rows);
  const auto back = herald::read_csv(path);
  CHECK(back.empty());
  std::remove(path.c_str());
}

TEST_CASE("coherent-environment closed forms at the frozen reference point") {
  const auto d = herald::example2_closed_detail(0.3, 0.5, 0.3, kPi4, 33);
  CHECK(std::abs(d.pk1[0] - 0.95599748183309996) <= 1e-15);
  CHECK(std::abs(d.pk2[0] - 0.87115270532041245) <= 1e-15);
  CHECK(std::abs(d.err[0] - 0.17838390462327725) <= 1e-13);
  CHECK(std::abs(d.err[1] - 0.343286325756262) <= 1e-13);
  CHECK(std::abs(d.pk1[2] - 0.0009679474503560137) <= 1e-17);
  CHECK(std::abs(d.pk2[2] - 0.014971055002652235) <= 1e-16);
  CHECK(std::abs(d.err[2] - 0.12859825279175946) <= 1e-13);
  CHECK(std::abs(d.pk1[3] - 1.4519211755340204e-05) <= 1e-19);
  CHECK(std::abs(d.pk2[3] - 0.0005722202842926513) <= 1e-17);
  CHECK(std::abs(d.err[3] - 0.05551875675995327) <= 1e-13);
  CHECK(std::abs(d.p_aveme - 0.18867414189155748) <= 1e-13);

  // The heralding distribution under psi1 is Poisson over the scanned range.
  double mass1 = 0.0;
  for (double p : d.pk1) mass1 += p;
  CHECK(std::abs(mass1 - 1.0) <= 1e-12);
}

TEST_CASE("coherent-environment engine matches the closed forms") {
  for (double alpha : {0.3, 0.6, 1.2}) {
    const auto cf = herald::example2_closed_form(alpha, 0.5, 0.3, kPi4, 6);
    const auto en = herald::example2_engine(alpha, 0.5, 0.3, kPi4, 0, 6);
    check_rows_close(cf, en, 1e-10);
    CHECK(cf.branch.size() == 7);
  }
  const auto en = herald::example2_engine(0.3, 0.5, 0.3, kPi4);
  CHECK(std::abs(en.p_aveme - 0.18867414189155762) <= 1e-13);
}

TEST_CASE("identical hypotheses make every coherent branch a coin flip") {
  // theta = 0 collapses psi2 onto psi1.
  const auto d = herald::example2_closed_detail(0.4, 0.6, 0.3, 0.0, 30);
  for (std::size_t k = 0; k < d.err.size(); ++k) {
    if (!d.kept[k]) continue;
    CHECK(std::abs(d.err[k] - std::min(d.prior1[k], d.prior2[k])) <= 1e-14);
    CHECK(std::abs(d.pk1[k] - d.pk2[k]) <= 1e-14);
  }
  CHECK(std::abs(d.p_aveme - std::min(0.3, 0.7) * d.captured) <= 1e-12);
}

TEST_CASE("coherent tail policing raises CutoffError with a usable hint") {
  try {
    herald::example2_closed_detail(1.2, 0.5, 0.3, kPi4, 6);
    FAIL("expected CutoffError");
  } catch (const herald::CutoffError& e) {
    CHECK(e.suggested_cutoff > 7);
    const auto ok = herald::example2_closed_detail(1.2, 0.5, 0.3, kPi4,
                                                   e.suggested_cutoff - 1);
    CHECK(ok.p_aveme > 0.0);
  }
  CHECK_THROWS_AS(herald::example2_instance(1.2, 0.5, 0.3, kPi4, 16),
                  herald::CutoffError);
}

TEST_CASE("lossy closed forms at the frozen reference point") {
  const auto d = herald::lossy_closed_detail(0.5, 0.5, 0.3, kPi4);
  const double pk1[4] = {0.5625, 0.375, 0.0625, 0.0};
  const double pk2[4] = {0.5390625, 0.3203125, 0.1171875, 0.0234375};
  const double pk[4] = {0.55546875, 0.35859375, 0.07890625, 0.00703125};
  const double perr[4] = {0.17024959524356698, 0.23467989012055301,
                          0.35849895120835196, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(d.base.pk1[k] - pk1[k]) <= 1e-15);
    CHECK(std::abs(d.base.pk2[k] - pk2[k]) <= 1e-15);
    CHECK(std::abs(d.base.pk[k] - pk[k]) <= 1e-15);
    CHECK(std::abs(d.base.err[k] - perr[k]) <= 1e-13);
  }
  CHECK(std::abs(d.base.p_aveme - 0.20701087957465117) <= 1e-13);
  CHECK(std::abs(d.base.p_aveme - d.base.p_me - 0.087799534867846557) <=
        1e-13);
  // Conditional density matrices are unit-trace and PSD on the diagonal.
  for (std::size_t k = 0; k < 4; ++k) {
    for (const auto& rho : {d.rho1[k], d.rho2[k]}) {
      if (rho.empty()) continue;
      const double tr = rho[0] + rho[5] + rho[10] + rho[15];
      CHECK(std::abs(tr - 1.0) <= 1e-12);
      for (std::size_t i = 0; i < 4; ++i) CHECK(rho[i * 4 + i] >= -1e-12);
    }
  }
  CHECK(d.rho1[3].empty());  // psi1 never produces three counts
  CHECK(!d.rho2[3].empty());
}

TEST_CASE("lossy engine density matrices match the closed-form assembly") {
  const double tau = 0.5, eta = 0.7, q = 0.3;
  const auto d = herald::lossy_closed_detail(tau, eta, q, kPi4);
  const auto cert =
      herald::nogo_certificate(herald::lossy_instance(tau, eta, q, kPi4));
  REQUIRE(cert.branches.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& br = cert.branches[k];
    CHECK(std::abs(br.p_k_given.first - d.base.pk1[k]) <= 1e-12);
    CHECK(std::abs(br.p_k_given.second - d.base.pk2[k]) <= 1e-12);
    CHECK(std::abs(br.p_me_branch - d.base.err[k]) <= 1e-12);
    auto check_rho = [&](const std::optional<herald::ConditionalState>& cond,
                         const std::vector<double>& want) {
      if (want.empty()) {
        CHECK(!cond.has_value());
        return;
      }
      REQUIRE(cond.has_value());
      const auto& rho = std::get<herald::DensityMatrix>(*cond);
      rho.check_valid("lossy branch state");
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
          CHECK(std::abs(rho.at(r, c).real() - want[r * 4 + c]) <= 1e-9);
          CHECK(std::abs(rho.at(r, c).imag()) <= 1e-9);
        }
    };
    check_rho(br.cond1, d.rho1[k]);
    check_rho(br.cond2, d.rho2[k]);
  }
}

TEST_CASE("lossy sweep emits validated cross-checked pairs") {
  const auto rows = herald::lossy_sweep(0.5, 0.1, 0.9, 0.1, 0.3, kPi4);
  REQUIRE(rows.size() == 18);
  herald::validate_rows(rows);
  for (std::size_t i = 0; i < rows.size(); i += 2)
    check_rows_close(rows[i], rows[i + 1], 1e-9);
}

TEST_CASE("full transmission reduces the lossy scenario to the pure one") {
  for (double eta : {0.2, 0.5, 0.8}) {
    const auto lossy = herald::lossy_closed_detail(1.0, eta, 0.3, kPi4);
    const auto pure = herald::example1_closed_detail(eta, 0.3, kPi4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(lossy.base.pk1[k] - pure.pk1[k]) <= 1e-12);
      CHECK(std::abs(lossy.base.pk2[k] - pure.pk2[k]) <= 1e-12);
      CHECK(std::abs(lossy.base.err[k] - pure.err[k]) <= 1e-12);
    }
    CHECK(std::abs(lossy.base.p_aveme - pure.p_aveme) <= 1e-12);
    const auto cert =
        herald::nogo_certificate(herald::lossy_instance(1.0, eta, 0.3, kPi4));
    CHECK(std::abs(cert.p_aveme - pure.p_aveme) <= 1e-10);
  }
}

TEST_CASE("squeezed-vacuum heralding statistics and truncation policing") {
  CHECK(herald::tmsv_cutoff(0.8) == 34);
  const double probs[4] = {0.55905516773224384, 0.24651248716411658,
                           0.10869840730448881, 0.047930000976650067};
  double mass = 0.0;
  for (std::size_t k = 0; k < 34; ++k) {
    const auto h = herald::tmsv_herald(0.8, k, 34);
    if (k < 4) CHECK(std::abs(h.herald_prob - probs[k]) <= 1e-15);
    CHECK(h.env_state.amp[k] == herald::cdouble(1.0, 0.0));
    mass += h.herald_prob;
  }
  CHECK(mass >= 1.0 - 1e-12);
  CHECK(mass <= 1.0);

  // Requesting the same heralds in a too-small space names the right cutoff.
  try {
    herald::tmsv_herald(0.8, 2, 8);
    FAIL("expected CutoffError");
  } catch (const herald::CutoffError& e) {
    CHECK(e.suggested_cutoff == 34);
  }

  // r = 0: the idler is empty, only k = 0 can ever be heralded.
  const auto h0 = herald::tmsv_herald(0.0, 0, 4);
  CHECK(h0.herald_prob == 1.0);
  CHECK_THROWS_AS(herald::tmsv_herald(0.8, 40, 34), std::invalid_argument);
}

TEST_CASE("heralded two-photon input reproduces the |2> scenario exactly") {
  // Zero-padding the environment above |2> adds only exact-zero terms, so
  // the wider space must reproduce the cutoff-4 numbers bit for bit.
  const auto wide = herald::nogo_certificate(
      herald::fock_env_instance(2, 0.5, 0.3, kPi4, 34));
  const auto narrow =
      herald::nogo_certificate(herald::example1_instance(0.5, 0.3, kPi4));
  CHECK(wide.p_me == narrow.p_me);
  // Branches above k = 3 carry exactly zero mass and are not listed.
  REQUIRE(wide.branches.size() == narrow.branches.size());
  for (std::size_t k = 0; k < wide.branches.size(); ++k) {
    CHECK(wide.branches[k].p_k == narrow.branches[k].p_k);
    CHECK(wide.branches[k].p_me_branch == narrow.branches[k].p_me_branch);
  }
  CHECK(wide.p_aveme == narrow.p_aveme);
}

TEST_CASE("tmsv sweep is engine-only and cross-checks its k = 2 row") {
  herald::SweepSpec spec;
  spec.scenario = herald::Scenario::tmsv;
  spec.backend = herald::BackendSel::closed_form;
  CHECK_THROWS_AS(herald::run_sweep(spec), std::invalid_argument);
  spec.backend = herald::BackendSel::both;
  spec.k_max = 4;
  const auto rows = herald::run_sweep(spec);
  REQUIRE(rows.size() == 5);
  herald::validate_rows(rows);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(rows[k].swept_name == "k");
    CHECK(rows[k].swept_value == double(k));
    CHECK(rows[k].backend == "engine");
    CHECK(rows[k].margin >= -1e-9);
  }
  double min_margin = rows[0].margin;
  for (const auto& r : rows) min_margin = std::min(min_margin, r.margin);
  CHECK(std::abs(min_margin - 0.0091669158310290766) <= 1e-13);
}

TEST_CASE("csv round-trip is bit-exact and validated") {
  herald::SweepSpec spec;
  spec.grid_start = 0.1;
  spec.grid_stop = 0.9;
  spec.grid_step = 0.2;
  const auto rows = herald::run_sweep(spec);
  const std::string path = "test_experiments_roundtrip.csv";
  herald::write_csv(path, rows);
  const auto back = herald::read_csv(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].swept_name == rows[i].swept_name);
    CHECK(back[i].backend == rows[i].backend);
    CHECK(back[i].swept_value == rows[i].swept_value);
    CHECK(back[i].p_me == rows[i].p_me);
    CHECK(back[i].p_aveme == rows[i].p_aveme);
    CHECK(back[i].margin == rows[i].margin);
    CHECK(back[i].captured_mass == rows[i].captured_mass);
    REQUIRE(back[i].branch.size() == rows[i].branch.size());
    for (std::size_t k = 0; k < rows[i].branch.size(); ++k) {
      CHECK(back[i].branch[k].suppressed == rows[i].branch[k].suppressed);
      CHECK(back[i].branch[k].p_k == rows[i].branch[k].p_k);
      if (!rows[i].branch[k].suppressed)
        CHECK(back[i].branch[k].p_err == rows[i].branch[k].p_err);
      else
        CHECK(std::isnan(back[i].branch[k].p_err));
    }
  }
  herald::validate_rows(back);

  // A second write of the reloaded rows is byte-identical.
  const std::string path2 = "test_experiments_roundtrip2.csv";
  herald::write_csv(path2, back);
  FILE* f1 = std::fopen(path.c_str(), "rb");
  FILE* f2 = std::fopen(path2.c_str(), "rb");
  REQUIRE(f1 != nullptr);
  REQUIRE(f2 != nullptr);
  int c1, c2;
  do {
    c1 = std::fgetc(f1);
    c2 = std::fgetc(f2);
    CHECK(c1 == c2);
  } while (c1 != EOF && c2 != EOF);
  std::fclose(f1);
  std::fclose(f2);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("validate_rows rejects corrupted rows") {
  auto rows = herald::run_sweep([] {
    herald::SweepSpec s;
    s.grid_start = 0.5;
    s.grid_stop = 0.5;
    s.grid_step = 0.1;
    return s;
  }());
  REQUIRE(rows.size() == 2);
  auto broken = rows;
  broken[0].p_me = 0.7;
  CHECK_THROWS_AS(herald::validate_rows(broken), herald::InvariantError);
  broken = rows;
  broken[1].margin = -1e-3;
  CHECK_THROWS_AS(herald::validate_rows(broken), herald::InvariantError);
  broken = rows;
  broken[1].margin = broken[1].margin + 1e-6;  // inconsistent with p_aveme
  CHECK_THROWS_AS(herald::validate_rows(broken), herald::InvariantError);
  broken = rows;
  broken[0].backend = "oracle";
  CHECK_THROWS_AS(herald::validate_rows(broken), herald::InvariantError);
  broken = rows;
  broken[0].branch[0].suppressed = true;  // but p_k stays nonzero
  CHECK_THROWS_AS(herald::validate_rows(broken), herald::InvariantError);

  herald::validate_rows(rows);
}

TEST_CASE("write_csv and read_csv surface file problems") {
  CHECK_THROWS_AS(
      herald::write_csv("/nonexistent_dir_herald/x.csv", {}),
      std::invalid_argument);
  CHECK_THROWS_AS(herald::read_csv("/nonexistent_dir_herald/x.csv"),
                  std::invalid_argument);
  // Mixed branch counts cannot share one header.
  herald::SweepRow a, b;
  a.swept_name = b.swept_name = "eta";
  a.backend = b.backend = "engine";
  a.branch.resize(2);
  b.branch.resize(3);
  CHECK_THROWS_AS(herald::write_csv("test_experiments_bad.csv", {a, b}),
                  herald::InvariantError);
}

TEST_CASE("renormalized sweeps divide the average error by captured mass") {
  herald::SweepSpec spec;
  spec.scenario = herald::Scenario::example2;
  spec.alpha = 0.3;
  spec.grid_start = 0.5;
  spec.grid_stop = 0.5;
  spec.grid_step = 0.1;
  const auto plain = herald::run_sweep(spec);
  spec.renormalize = true;
  const auto renorm = herald::run_sweep(spec);
  REQUIRE(plain.size() == 2);
  REQUIRE(renorm.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(renorm[i].p_aveme -
                   plain[i].p_aveme / plain[i].captured_mass) <= 1e-15);
    CHECK(std::abs(renorm[i].margin -
                   (renorm[i].p_aveme - renorm[i].p_me)) <= 1e-15);
  }
}
