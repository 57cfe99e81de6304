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

#include "herald/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "herald/kernels.hpp"

namespace herald {

std::string label_str(const Label& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ':';
    s += std::to_string(k[i]);
  }
  return s;
}

Povm pnr_povm(const Space& env) {
  const std::size_t d = env.dim();
  Povm p;
  p.space = env;
  p.labels.reserve(d);
  p.elements.reserve(d);
  p.basis_index.reserve(d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    // Decode the flat index into per-mode counts (last mode fastest).
    Label k(env.n_modes());
    std::size_t rem = idx;
    for (std::size_t m = env.n_modes(); m-- > 0;) {
      k[m] = int(rem % env.cutoffs[m]);
      rem /= env.cutoffs[m];
    }
    Operator e = Operator::zero(env);
    e.m[idx * d + idx] = 1.0;
    p.labels.push_back(std::move(k));
    p.elements.push_back(std::move(e));
    p.basis_index.push_back(long(idx));
  }
  return p;
}

Povm trivial_povm(const Space& env) {
  Povm p;
  p.space = env;
  p.labels.push_back(Label{0});
  p.elements.push_back(Operator::identity(env));
  p.basis_index.push_back(-1);
  return p;
}

PovmDiagnostics validate_povm(const Povm& p) {
  PovmDiagnostics d;
  const std::size_t n = p.space.dim();
  std::vector<cdouble> sum(n * n, 0.0);
  bool hermitian_ok = true;
  bool eig_ok = true;
  d.min_eigenvalue = p.elements.empty() ? 0.0 : 1.0;
  for (const Operator& e : p.elements) {
    if (e.space != p.space || e.m.size() != n * n) {
      return PovmDiagnostics{1.0, -1.0, false};
    }
    if (e.hermiticity_residual() > tol::hermitian) hermitian_ok = false;
    for (std::size_t i = 0; i < n * n; ++i) sum[i] += e.m[i];
    // Eigenvalues of the symmetrized part; hermitian_eig would throw on a
    // grossly non-Hermitian element and this diagnostic must not.
    Operator sym{p.space, std::vector<cdouble>(n * n)};
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        sym.m[r * n + c] = 0.5 * (e.m[r * n + c] + std::conj(e.m[c * n + r]));
    try {
      const Eig eig = hermitian_eig(sym);
      if (!eig.values.empty())
        d.min_eigenvalue = std::min(d.min_eigenvalue, eig.values.back());
    } catch (const std::exception&) {
      eig_ok = false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) sum[i * n + i] -= 1.0;
  for (const cdouble& z : sum)
    d.completeness_residual = std::max(d.completeness_residual, std::abs(z));
  d.pass = hermitian_ok && eig_ok &&
           d.completeness_residual <= tol::completeness &&
           d.min_eigenvalue >= -tol::psd;
  return d;
}

KrausStack pure_loss_kraus(double tau, const Space& env, long max_loss) {
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("pure_loss_kraus: tau must be in [0, 1]");
  if (env.n_modes() != 1)
    throw std::invalid_argument("pure_loss_kraus: single-mode space required");
  const std::size_t c = env.cutoffs[0];
  if (max_loss < 0) max_loss = long(c) - 1;
  if (max_loss > long(c) - 1)
    throw std::invalid_argument("pure_loss_kraus: max_loss exceeds cutoff-1");

  KrausStack st;
  st.space = env;
  st.kraus.reserve(std::size_t(max_loss) + 1);
  std::vector<double> fact(c + 1);
  fact[0] = 1.0;
  for (std::size_t n = 1; n <= c; ++n) fact[n] = fact[n - 1] * double(n);
  for (long l = 0; l <= max_loss; ++l) {
    Operator a = Operator::zero(env);
    for (std::size_t n = std::size_t(l); n < c; ++n) {
      const std::size_t nl = std::size_t(l);
      const double binom = fact[n] / (fact[nl] * fact[n - nl]);
      a.m[(n - nl) * c + n] =
          std::sqrt(binom) *
          std::sqrt(std::pow(tau, double(n - nl)) * std::pow(1.0 - tau, double(l)));
    }
    st.kraus.push_back(std::move(a));
  }
  st.readout = pnr_povm(env);
  return st;
}

LossyBranch lossy_conditional(const PureState& joint, const KrausStack& stack,
                              std::size_t readout_index) {
  if (readout_index >= stack.readout.size())
    throw std::invalid_argument("lossy_conditional: readout index out of range");
  const long kflat = stack.readout.basis_index[readout_index];
  if (kflat < 0)
    throw std::invalid_argument("lossy_conditional: readout must be projective PNR");
  const std::size_t ds = system_dim_for(joint.space, stack.space);
  const std::size_t de = stack.space.dim();

  LossyBranch out;
  std::vector<cdouble> y(ds);
  std::vector<cdouble> rho(ds * ds, 0.0);
  for (const Operator& a : stack.kraus) {
    // y[s] = sum_m <k|A_l|m> joint[s, m]: row kflat of A_l against each
    // system slice, no conjugation (A_l acts as a matrix, <k| picks a row).
    const cdouble* row = a.m.data() + std::size_t(kflat) * de;
    bool all_zero = true;
    for (std::size_t m = 0; m < de; ++m) {
      if (row[m] != cdouble{0.0, 0.0}) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) continue;
    for (std::size_t s = 0; s < ds; ++s)
      y[s] = kernels::dot(de, row, joint.amp.data() + s * de);
    out.prob += kernels::norm_sq(ds, y.data());
    kernels::outer_acc(ds, 1.0, y.data(), rho.data());
  }
  if (out.prob < tol::prob_floor) {
    out.suppressed = true;
    return out;
  }
  for (cdouble& z : rho) z /= out.prob;
  out.rho = DensityMatrix{system_space_for(joint.space, stack.space), std::move(rho)};
  return out;
}

}  // namespace herald
