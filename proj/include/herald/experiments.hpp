// Copyright 2026 The herald authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HERALD_EXPERIMENTS_HPP
#define HERALD_EXPERIMENTS_HPP

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "herald/discrimination.hpp"

namespace herald {

// Raised when the closed-form and engine backends disagree beyond tolerance.
struct CrossCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One reported herald outcome inside a sweep row. A suppressed branch (mass
// below tol::prob_floor, or an outcome index the scenario cannot produce)
// keeps p_k = 0 and p_err = NaN.
struct BranchRow {
  double p_k = 0.0;
  double p_err = std::numeric_limits<double>::quiet_NaN();
  bool suppressed = true;
};

// One grid point of one backend. `branch[k]` reports herald outcome k for
// k = 0..k_max; outcomes beyond k_max still contribute to p_aveme and
// captured_mass but are not listed individually.
struct SweepRow {
  std::string swept_name;
  double swept_value = 0.0;
  double p_me = 0.0;
  double p_aveme = 0.0;
  double margin = 0.0;
  double captured_mass = 0.0;
  std::vector<BranchRow> branch;
  std::string backend;
};

// Closed-form per-branch breakdown of one grid point, indexed by herald
// outcome k. `kept[k]` mirrors the engine's branch floor: a branch is kept
// when its total mass reaches tol::prob_floor. For dropped branches the
// prior/error entries are zero.
struct PointDetail {
  std::vector<double> pk1;     // P(k|1)
  std::vector<double> pk2;     // P(k|2)
  std::vector<double> pk;      // P(k)
  std::vector<double> prior1;  // P'(1|k)
  std::vector<double> prior2;  // P'(2|k)
  std::vector<double> err;     // conditional Helstrom error in branch k
  std::vector<bool> kept;
  double p_me = 0.0;
  double p_aveme = 0.0;
  double captured = 0.0;
};

// Lossy-detector point: adds the conditional density matrices (4x4 real,
// row-major, system basis |0..3>). rho1[k]/rho2[k] are empty when P(k|i)
// is below the branch floor.
struct LossyPointDetail {
  PointDetail base;
  std::vector<std::vector<double>> rho1;
  std::vector<std::vector<double>> rho2;
};

// Scenario: eta beam splitter, psi1 = |0>, psi2 = cos(theta)|0> +
// sin(theta)|1>, environment mode prepared in |env_n>, ideal photon-number
// readout on the environment output. Cutoff must exceed env_n + 1 so every
// populated sector is represented exactly.
DiscriminationInstance fock_env_instance(std::size_t env_n, double eta, double q, double theta,
                                         std::size_t cutoff);

// |2> environment. Literal closed forms for the four herald branches.
PointDetail example1_closed_detail(double eta, double q, double theta);
DiscriminationInstance example1_instance(double eta, double q, double theta,
                                         std::size_t cutoff = 4);

// Coherent |alpha> environment (alpha real). Closed forms for branches
// k = 0..k_scan; k_scan should match the engine's environment cutoff - 1 so
// both backends aggregate the same branch set.
PointDetail example2_closed_detail(double alpha, double eta, double q, double theta,
                                   std::size_t k_scan);
// cutoff = 0 picks the coherent-state policy cutoff for the environment and
// one more for the system mode.
DiscriminationInstance example2_instance(double alpha, double eta, double q, double theta,
                                         std::size_t cutoff = 0);

// |2> environment with transmissivity-tau loss in front of the detector.
LossyPointDetail lossy_closed_detail(double tau, double eta, double q, double theta);
DiscriminationInstance lossy_instance(double tau, double eta, double q, double theta,
                                      std::size_t cutoff = 4);

// Two-mode squeezed vacuum heralding: measuring k photons on the idler
// prepares |k> on the signal with probability tanh(r)^{2k} / cosh(r)^2.
struct TmsvHerald {
  double herald_prob = 0.0;
  PureState env_state;
};
// Smallest cutoff whose discarded tail sum_{n >= c} |c_n|^2 = tanh(r)^{2c}
// is at most tol::coherent_tail.
std::size_t tmsv_cutoff(double r);
TmsvHerald tmsv_herald(double r, std::size_t k, std::size_t cutoff);

enum class Scenario { example1, example2, lossy, tmsv };
enum class BackendSel { closed_form, engine, both };

struct SweepSpec {
  Scenario scenario = Scenario::example1;
  std::string swept = "eta";  // "eta" or "q"; tmsv sweeps "k" regardless
  double grid_start = 0.02;
  double grid_stop = 0.98;
  double grid_step = 0.02;
  double eta = 0.5;    // fixed eta when sweeping q
  double q = 0.3;      // fixed prior when sweeping eta
  double theta = 0.7853981633974483;
  double alpha = 0.3;  // example2
  double tau = 0.5;    // lossy
  double r = 0.8;      // tmsv
  std::size_t cutoff = 0;  // 0 = per-scenario default
  std::size_t k_max = 3;   // branches reported per row
  BackendSel backend = BackendSel::both;
  bool renormalize = false;
};

// Evaluates the grid. For example1/example2/lossy both backends are always
// computed and cross-checked per point (CrossCheckError on disagreement);
// `backend` selects which rows are emitted. tmsv is engine-only and instead
// cross-checks its k = 2 row against the example1 closed form.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

// Single-point row builders. k_max bounds the branches reported in the row;
// aggregates (p_aveme, captured_mass) always run over every branch above the
// probability floor, scanning far enough that the discarded herald tail is
// within tol::coherent_tail.
SweepRow example1_closed_form(double eta, double q, double theta, std::size_t k_max = 3);
SweepRow example1_engine(double eta, double q, double theta, std::size_t cutoff = 4,
                         std::size_t k_max = 3);
SweepRow example2_closed_form(double alpha, double eta, double q, double theta,
                              std::size_t k_max);
SweepRow example2_engine(double alpha, double eta, double q, double theta,
                         std::size_t cutoff = 0, std::size_t k_max = 6);

// Cross-checked eta sweep of the lossy scenario, both backends emitted.
std::vector<SweepRow> lossy_sweep(double tau, double grid_start, double grid_stop,
                                  double grid_step, double q, double theta,
                                  std::size_t cutoff = 4);

// CSV layout: header
//   swept_name, swept_value, p_me, p_aveme, margin, captured_mass,
//   p_k0, p_err_k0, ..., p_k{K}, p_err_k{K}, backend
// with numbers printed to 17 significant digits so a reload reproduces the
// doubles bit for bit. All rows must report the same branch count.
void write_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_csv(const std::string& path);

// Range checks every row (probabilities in range, margin >= -tol::margin,
// NaN p_err only on suppressed branches). Throws InvariantError.
void validate_rows(const std::vector<SweepRow>& rows);

}  // namespace herald

#endif  // HERALD_EXPERIMENTS_HPP
