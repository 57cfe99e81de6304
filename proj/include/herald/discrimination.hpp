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

#ifndef HERALD_DISCRIMINATION_HPP
#define HERALD_DISCRIMINATION_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "herald/fock.hpp"
#include "herald/measurement.hpp"

namespace herald {

// A POVM drives the pure-conditional backend; a KrausStack drives the mixed
// (lossy) backend.
using Measurement = std::variant<Povm, KrausStack>;
using ConditionalState = std::variant<PureState, DensityMatrix>;

struct DiscriminationInstance {
  PureState psi1, psi2;     // system states to discriminate
  double q = 0.5;           // prior of psi2 (priors are 1-q, q)
  PureState env;            // environment state
  Operator unitary;         // on system (x) environment
  Measurement measurement;  // on the environment factor

  // Throws std::invalid_argument on any violated precondition. The unitarity
  // check is O(dim^3); constructors whose unitary is correct on the populated
  // photon-number sectors but truncated above them (beam splitters at high
  // cutoff) skip it.
  void validate(bool check_unitary = true) const;
};

struct BranchResult {
  Label k;
  double p_k = 0.0;                          // (1-q) P(k|1) + q P(k|2)
  std::pair<double, double> p_k_given{0, 0};  // (P(k|1), P(k|2))
  std::pair<double, double> priors{0, 0};     // (P'(1|k), P'(2|k))
  // Conditional states, present when the matching P(k|i) clears the
  // probability floor. Pure backend: PureState, on the system factor for PNR
  // projector elements, on the joint space for generic POVM elements. Kraus
  // backend: DensityMatrix on the system factor.
  std::optional<ConditionalState> cond1, cond2;
  double p_me_branch = 0.0;
  // Pure backend diagnostics (zero on the Kraus backend): overlap of the
  // normalized conditional states, and the unnormalized cross term
  // <Psi_1|(I (x) M_k)|Psi_2>.
  cdouble overlap{0.0, 0.0};
  cdouble cross{0.0, 0.0};
};

struct BranchSummary {
  std::vector<BranchResult> branches;  // in measurement label order
  double dropped_mass = 0.0;           // total p_k below the floor
  double truncation_deficit = 0.0;     // 1 - (1-q)||Psi_1||^2 - q||Psi_2||^2
};

// Helstrom bound for pure states: 1/2 - 1/2 sqrt(1 - 4(1-q)q |<psi1|psi2>|^2).
double helstrom_pure(const PureState& psi1, const PureState& psi2, double q);

// General bound: 1/2 - 1/2 ||(1-q) rho1 - q rho2||_1.
double helstrom_mixed(const DensityMatrix& rho1, const DensityMatrix& rho2,
                      double q);

// Optimal projectors (guess-rho1, guess-rho2): positive and negative
// eigenspaces of (1-q) rho1 - q rho2, zero eigenvalues assigned to guess-rho1.
std::pair<Operator, Operator> helstrom_projectors(const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2,
                                                  double q);

BranchSummary branch_decompose(const DiscriminationInstance& inst);

// (p_aveme, captured_mass): p_aveme = sum p_k * p_me_branch over kept
// branches, unnormalized unless renormalize divides by captured_mass.
std::pair<double, double> average_min_error(const std::vector<BranchResult>& branches,
                                            bool renormalize = false);

struct NoGoCertificate {
  double p_me = 0.0;
  double p_aveme = 0.0;
  double margin = 0.0;  // p_aveme - p_me, >= -1e-9 always
  double captured_mass = 0.0;
  double dropped_mass = 0.0;
  double truncation_deficit = 0.0;
  // Equality diagnostics over kept branches (pure backend; NaN on Kraus):
  // spread of r_k = |cross_k| / p_k, and the largest pairwise phase
  // difference of the complex ratios cross_k / p_k.
  double equality_spread = 0.0;
  double phase_spread = 0.0;
  std::vector<BranchResult> branches;
};

// Throws InvariantError if margin < -1e-9 (would falsify the proven bound).
NoGoCertificate nogo_certificate(const DiscriminationInstance& inst,
                                 bool renormalize = false);

// Grid minimization of the error probability over projective measurements in
// span{psi1, psi2}, parametrized by a mixing angle and a relative phase
// (resolution^2 points, then one zoomed refinement pass). Every grid point is
// a realizable measurement, so the result never beats helstrom_pure.
double brute_force_min_error(const PureState& psi1, const PureState& psi2,
                             double q, std::size_t resolution);

// Deterministic-from-seed instance: Gaussian random states, a Gram-Schmidt
// random unitary, and an n_povm-element random POVM (n_povm = 1 gives {I}).
DiscriminationInstance random_instance(std::uint64_t seed, std::size_t dim_s,
                                       std::size_t dim_e, std::size_t n_povm);

}  // namespace herald

#endif  // HERALD_DISCRIMINATION_HPP
