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

#ifndef HERALD_MEASUREMENT_HPP
#define HERALD_MEASUREMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "herald/fock.hpp"

namespace herald {

// Measurement outcome label: one photon count per environment mode.
using Label = std::vector<int>;
std::string label_str(const Label& k);

struct Povm {
  Space space;  // environment factor
  std::vector<Label> labels;
  std::vector<Operator> elements;
  // For elements that are exactly Fock-basis projectors |idx><idx|, the flat
  // basis index; -1 otherwise. Lets the pipeline skip the psd_sqrt path.
  std::vector<long> basis_index;

  std::size_t size() const { return elements.size(); }
};

struct PovmDiagnostics {
  double completeness_residual = 0.0;  // max |sum_k M_k - I| entry
  double min_eigenvalue = 0.0;         // most negative element eigenvalue
  bool pass = false;
};

// Product photon-number-resolving measurement: one projector per joint
// count tuple across the environment modes.
Povm pnr_povm(const Space& env);

// The trivial single-element POVM {I} (measure nothing).
Povm trivial_povm(const Space& env);

// Diagnostic only; never throws.
PovmDiagnostics validate_povm(const Povm& p);

struct KrausStack {
  Space space;  // environment factor
  std::vector<Operator> kraus;
  Povm readout;
};

// Pure-loss channel of transmissivity tau:
//   <n-l| A_l |n> = sqrt(C(n,l)) sqrt(tau^(n-l) (1-tau)^l),
// readout = pnr_povm. max_loss < 0 means cutoff-1 (completeness exact in the
// truncated space).
KrausStack pure_loss_kraus(double tau, const Space& env, long max_loss = -1);

struct LossyBranch {
  double prob = 0.0;
  bool suppressed = false;            // prob below the probability floor
  std::optional<DensityMatrix> rho;   // system-factor state, set unless suppressed
};

// Conditional system state after the Kraus channel and a projective PNR
// readout outcome: prob = sum_l ||(I (x) <k| A_l)|joint>||^2 and
// rho = sum_l y_l y_l^dag / prob.
LossyBranch lossy_conditional(const PureState& joint, const KrausStack& stack,
                              std::size_t readout_index);

}  // namespace herald

#endif  // HERALD_MEASUREMENT_HPP
