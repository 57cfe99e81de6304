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

#include "herald/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "herald/kernels.hpp"
#include "herald/rng.hpp"

namespace herald {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

double kraus_completeness_residual(const KrausStack& st) {
  const std::size_t n = st.space.dim();
  std::vector<cdouble> sum(n * n, 0.0);
  for (const Operator& a : st.kraus) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cdouble g = 0.0;
        for (std::size_t r = 0; r < n; ++r)
          g += std::conj(a.m[r * n + i]) * a.m[r * n + j];
        sum[i * n + j] += g;
      }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum[i * n + i] -= 1.0;
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(sum[i * n + j]));
  }
  return worst;
}

// Largest pairwise angular distance of a set of phases on the circle.
double max_pairwise_phase(const std::vector<double>& angles) {
  double worst = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    for (std::size_t j = i + 1; j < angles.size(); ++j) {
      const double d = angles[i] - angles[j];
      worst = std::max(worst, std::abs(std::atan2(std::sin(d), std::cos(d))));
    }
  }
  return worst;
}

}  // namespace

void DiscriminationInstance::validate(bool check_unitary) const {
  require(q >= 0.0 && q <= 1.0, "instance: q must be in [0, 1]");
  require(psi1.space == psi2.space, "instance: psi1/psi2 space mismatch");
  require(unitary.space == Space::product(psi1.space, env.space),
          "instance: unitary must live on system (x) environment");
  psi1.check_normalized("instance psi1");
  psi2.check_normalized("instance psi2");
  env.check_normalized("instance env");
  if (check_unitary) {
    const double r = unitary.unitarity_residual();
    require(r <= tol::unitary,
            "instance: unitary residual " + std::to_string(r) + " beyond tolerance");
  }
  if (const Povm* p = std::get_if<Povm>(&measurement)) {
    require(p->space == env.space, "instance: POVM space must match env");
    const PovmDiagnostics d = validate_povm(*p);
    require(d.pass, "instance: POVM failed validation (completeness " +
                        std::to_string(d.completeness_residual) + ", min eig " +
                        std::to_string(d.min_eigenvalue) + ")");
  } else {
    const KrausStack& st = std::get<KrausStack>(measurement);
    require(st.space == env.space, "instance: Kraus space must match env");
    const double r = kraus_completeness_residual(st);
    require(r <= tol::completeness,
            "instance: Kraus completeness residual " + std::to_string(r));
  }
}

double helstrom_pure(const PureState& psi1, const PureState& psi2, double q) {
  require(q >= 0.0 && q <= 1.0, "helstrom_pure: q must be in [0, 1]");
  require(psi1.space == psi2.space, "helstrom_pure: space mismatch");
  psi1.check_normalized("helstrom_pure psi1");
  psi2.check_normalized("helstrom_pure psi2");
  const double ov2 = std::norm(inner(psi1, psi2));
  const double rad = std::max(0.0, 1.0 - 4.0 * (1.0 - q) * q * ov2);
  return 0.5 - 0.5 * std::sqrt(rad);
}

double helstrom_mixed(const DensityMatrix& rho1, const DensityMatrix& rho2,
                      double q) {
  require(q >= 0.0 && q <= 1.0, "helstrom_mixed: q must be in [0, 1]");
  require(rho1.space == rho2.space, "helstrom_mixed: space mismatch");
  rho1.check_valid("helstrom_mixed rho1");
  rho2.check_valid("helstrom_mixed rho2");
  const std::size_t n = rho1.space.dim();
  Operator d{rho1.space, std::vector<cdouble>(n * n)};
  for (std::size_t i = 0; i < n * n; ++i)
    d.m[i] = (1.0 - q) * rho1.m[i] - q * rho2.m[i];
  return 0.5 - 0.5 * trace_norm(d);
}

std::pair<Operator, Operator> helstrom_projectors(const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2,
                                                  double q) {
  require(q >= 0.0 && q <= 1.0, "helstrom_projectors: q must be in [0, 1]");
  require(rho1.space == rho2.space, "helstrom_projectors: space mismatch");
  const std::size_t n = rho1.space.dim();
  Operator d{rho1.space, std::vector<cdouble>(n * n)};
  for (std::size_t i = 0; i < n * n; ++i)
    d.m[i] = (1.0 - q) * rho1.m[i] - q * rho2.m[i];
  const Eig e = hermitian_eig(d);
  Operator p1 = Operator::zero(rho1.space);
  std::vector<cdouble> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (e.values[j] < 0.0) continue;
    for (std::size_t r = 0; r < n; ++r) col[r] = e.vectors[r * n + j];
    kernels::outer_acc(n, 1.0, col.data(), p1.m.data());
  }
  Operator p2 = Operator::identity(rho1.space);
  for (std::size_t i = 0; i < n * n; ++i) p2.m[i] -= p1.m[i];
  return {std::move(p1), std::move(p2)};
}

namespace {

// Shared per-branch bookkeeping: fills everything that does not depend on
// the backend (probabilities, priors) and applies the floor rules.
struct BranchAccounting {
  double p_k;
  std::pair<double, double> priors;
  bool keep1, keep2;
};

BranchAccounting account(double q, double pk1, double pk2) {
  BranchAccounting a;
  a.p_k = (1.0 - q) * pk1 + q * pk2;
  a.priors = {a.p_k > 0.0 ? (1.0 - q) * pk1 / a.p_k : 0.0,
              a.p_k > 0.0 ? q * pk2 / a.p_k : 0.0};
  a.keep1 = pk1 >= tol::prob_floor;
  a.keep2 = pk2 >= tol::prob_floor;
  return a;
}

PureState normalized_conditional(PureState vec, double pk, const char* what) {
  const double inv = 1.0 / std::sqrt(pk);
  for (cdouble& z : vec.amp) z *= inv;
  vec.tail_bound = std::min(1.0, vec.tail_bound / pk);
  const double n2 = vec.norm_sq();
  if (std::abs(n2 - 1.0) > 1e-6) {
    throw InvariantError(std::string(what) +
                         ": conditional state failed to normalize, |amp|^2 = " +
                         std::to_string(n2));
  }
  return vec;
}

}  // namespace

BranchSummary branch_decompose(const DiscriminationInstance& inst) {
  const PureState big1 = apply(inst.unitary, tensor(inst.psi1, inst.env));
  const PureState big2 = apply(inst.unitary, tensor(inst.psi2, inst.env));
  const double q = inst.q;

  BranchSummary out;
  out.truncation_deficit =
      1.0 - (1.0 - q) * big1.norm_sq() - q * big2.norm_sq();

  if (const Povm* povm = std::get_if<Povm>(&inst.measurement)) {
    const std::size_t de = povm->space.dim();
    const std::size_t ds = system_dim_for(big1.space, povm->space);
    const Space sys_space = system_space_for(big1.space, povm->space);
    for (std::size_t e = 0; e < povm->size(); ++e) {
      PureState v1{sys_space, {}, big1.tail_bound};
      PureState v2{sys_space, {}, big2.tail_bound};
      cdouble cross;
      if (povm->basis_index[e] >= 0) {
        // PNR projector: the conditional lives on the system factor.
        const std::size_t idx = std::size_t(povm->basis_index[e]);
        v1.amp.resize(ds);
        v2.amp.resize(ds);
        for (std::size_t s = 0; s < ds; ++s) {
          v1.amp[s] = big1.amp[s * de + idx];
          v2.amp[s] = big2.amp[s * de + idx];
        }
      } else {
        // Generic element: (I (x) M_k^{1/2}) |Psi_i> on the joint space.
        const Operator root = psd_sqrt(povm->elements[e]);
        v1 = apply_env(root, big1);
        v2 = apply_env(root, big2);
      }
      const double pk1 = v1.norm_sq();
      const double pk2 = v2.norm_sq();
      cross = kernels::dot_conj(v1.amp.size(), v1.amp.data(), v2.amp.data());
      const BranchAccounting a = account(q, pk1, pk2);
      if (a.p_k < tol::prob_floor) {
        out.dropped_mass += a.p_k;
        continue;
      }
      BranchResult br;
      br.k = povm->labels[e];
      br.p_k = a.p_k;
      br.p_k_given = {pk1, pk2};
      br.priors = a.priors;
      br.cross = cross;
      if (a.keep1)
        br.cond1 = normalized_conditional(std::move(v1), pk1, "branch cond1");
      if (a.keep2)
        br.cond2 = normalized_conditional(std::move(v2), pk2, "branch cond2");
      if (a.keep1 && a.keep2) {
        br.overlap = cross / std::sqrt(pk1 * pk2);
        br.p_me_branch = helstrom_pure(std::get<PureState>(*br.cond1),
                                       std::get<PureState>(*br.cond2),
                                       br.priors.second);
      } else {
        br.p_me_branch = std::min(br.priors.first, br.priors.second);
      }
      out.branches.push_back(std::move(br));
    }
  } else {
    const KrausStack& st = std::get<KrausStack>(inst.measurement);
    for (std::size_t e = 0; e < st.readout.size(); ++e) {
      const LossyBranch b1 = lossy_conditional(big1, st, e);
      const LossyBranch b2 = lossy_conditional(big2, st, e);
      const BranchAccounting a = account(q, b1.prob, b2.prob);
      if (a.p_k < tol::prob_floor) {
        out.dropped_mass += a.p_k;
        continue;
      }
      BranchResult br;
      br.k = st.readout.labels[e];
      br.p_k = a.p_k;
      br.p_k_given = {b1.prob, b2.prob};
      br.priors = a.priors;
      if (!b1.suppressed) br.cond1 = *b1.rho;
      if (!b2.suppressed) br.cond2 = *b2.rho;
      if (!b1.suppressed && !b2.suppressed) {
        br.p_me_branch = helstrom_mixed(*b1.rho, *b2.rho, br.priors.second);
      } else {
        br.p_me_branch = std::min(br.priors.first, br.priors.second);
      }
      out.branches.push_back(std::move(br));
    }
  }
  return out;
}

std::pair<double, double> average_min_error(
    const std::vector<BranchResult>& branches, bool renormalize) {
  double ave = 0.0, captured = 0.0;
  for (const BranchResult& b : branches) {
    ave += b.p_k * b.p_me_branch;
    captured += b.p_k;
  }
  if (renormalize && captured > 0.0) ave /= captured;
  return {ave, captured};
}

NoGoCertificate nogo_certificate(const DiscriminationInstance& inst,
                                 bool renormalize) {
  NoGoCertificate cert;
  cert.p_me = helstrom_pure(inst.psi1, inst.psi2, inst.q);
  BranchSummary summary = branch_decompose(inst);
  const auto [ave, captured] = average_min_error(summary.branches, renormalize);
  cert.p_aveme = ave;
  cert.captured_mass = captured;
  cert.dropped_mass = summary.dropped_mass;
  cert.truncation_deficit = summary.truncation_deficit;
  cert.margin = cert.p_aveme - cert.p_me;

  if (std::holds_alternative<Povm>(inst.measurement)) {
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    std::vector<double> phases;
    for (const BranchResult& b : summary.branches) {
      const double r = std::abs(b.cross) / b.p_k;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      if (std::abs(b.cross) > 1e-15) phases.push_back(std::arg(b.cross));
    }
    cert.equality_spread = summary.branches.empty() ? 0.0 : rmax - rmin;
    cert.phase_spread = max_pairwise_phase(phases);
  } else {
    cert.equality_spread = std::numeric_limits<double>::quiet_NaN();
    cert.phase_spread = std::numeric_limits<double>::quiet_NaN();
  }
  cert.branches = std::move(summary.branches);

  if (cert.margin < -tol::margin) {
    throw InvariantError("nogo_certificate: margin " + std::to_string(cert.margin) +
                         " violates the averaged-error bound");
  }
  return cert;
}

double brute_force_min_error(const PureState& psi1, const PureState& psi2,
                             double q, std::size_t resolution) {
  require(q >= 0.0 && q <= 1.0, "brute_force_min_error: q must be in [0, 1]");
  require(psi1.space == psi2.space, "brute_force_min_error: space mismatch");
  require(resolution >= 2, "brute_force_min_error: resolution must be >= 2");
  psi1.check_normalized("brute_force psi1");
  psi2.check_normalized("brute_force psi2");

  // Orthonormal frame of the span: psi1 = (1, 0), psi2 = (c2, s2), s2 >= 0.
  const std::size_t n = psi1.amp.size();
  std::vector<cdouble> u(psi1.amp);
  const double nu = std::sqrt(kernels::norm_sq(n, u.data()));
  for (cdouble& z : u) z /= nu;
  const cdouble c2 = kernels::dot_conj(n, u.data(), psi2.amp.data());
  std::vector<cdouble> w(psi2.amp);
  kernels::axpy(n, -c2, u.data(), w.data());
  const double s2 = std::sqrt(kernels::norm_sq(n, w.data()));
  if (s2 <= 1e-9) return std::min(q, 1.0 - q);

  // Measurement ray |m> = cos t |u> + sin t e^{i phi} |v>; guessing psi1 on
  // outcome m gives error (1-q)(1 - cos^2 t) + q |cos t c2 + sin t e^{-i phi} s2|^2.
  const double a2 = std::norm(c2);
  const auto eval = [&](double t, double phi) {
    const double ct = std::cos(t), stn = std::sin(t);
    const double cross =
        2.0 * ct * stn * s2 * (c2.real() * std::cos(phi) - c2.imag() * std::sin(phi));
    return (1.0 - q) * stn * stn +
           q * (ct * ct * a2 + stn * stn * s2 * s2 + cross);
  };

  const double t_hi = 0.5 * M_PI;
  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0, best_phi = 0.0;
  const double dt = t_hi / double(resolution - 1);
  const double dphi = 2.0 * M_PI / double(resolution);
  for (std::size_t j = 0; j < resolution; ++j) {
    const double t = double(j) * dt;
    for (std::size_t l = 0; l < resolution; ++l) {
      const double phi = double(l) * dphi;
      const double err = eval(t, phi);
      if (err < best) {
        best = err;
        best_t = t;
        best_phi = phi;
      }
    }
  }
  // One zoomed pass around the coarse minimum (window = one coarse step each
  // way); every refined point is still a genuine measurement.
  const double t_lo2 = std::max(0.0, best_t - dt);
  const double t_hi2 = std::min(t_hi, best_t + dt);
  const double p_lo2 = best_phi - dphi, p_hi2 = best_phi + dphi;
  for (std::size_t j = 0; j < resolution; ++j) {
    const double t = t_lo2 + (t_hi2 - t_lo2) * double(j) / double(resolution - 1);
    for (std::size_t l = 0; l < resolution; ++l) {
      const double phi = p_lo2 + (p_hi2 - p_lo2) * double(l) / double(resolution - 1);
      best = std::min(best, eval(t, phi));
    }
  }
  return best;
}

DiscriminationInstance random_instance(std::uint64_t seed, std::size_t dim_s,
                                       std::size_t dim_e, std::size_t n_povm) {
  require(dim_s >= 2 && dim_e >= 2, "random_instance: dims must be >= 2");
  require(n_povm >= 1, "random_instance: n_povm must be >= 1");
  Rng rng(seed);
  const Space ss = Space::single(dim_s);
  const Space se = Space::single(dim_e);

  const auto random_state = [&](const Space& sp) {
    PureState s{sp, std::vector<cdouble>(sp.dim()), 0.0};
    double n2 = 0.0;
    do {
      for (cdouble& z : s.amp) z = rng.cgauss();
      n2 = s.norm_sq();
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (cdouble& z : s.amp) z *= inv;
    return s;
  };

  DiscriminationInstance inst;
  inst.psi1 = random_state(ss);
  inst.psi2 = random_state(ss);
  inst.env = random_state(se);

  // Haar-ish unitary: Gaussian matrix, two modified Gram-Schmidt passes over
  // the columns.
  const std::size_t d = dim_s * dim_e;
  const Space js = Space::product(ss, se);
  Operator u{js, std::vector<cdouble>(d * d)};
  for (cdouble& z : u.m) z = rng.cgauss();
  std::vector<cdouble> col(d), prev(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t r = 0; r < d; ++r) col[r] = u.m[r * d + j];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        for (std::size_t r = 0; r < d; ++r) prev[r] = u.m[r * d + i];
        const cdouble ov = kernels::dot_conj(d, prev.data(), col.data());
        kernels::axpy(d, -ov, prev.data(), col.data());
      }
    }
    const double nc = std::sqrt(kernels::norm_sq(d, col.data()));
    if (nc < 1e-12)
      throw InvariantError("random_instance: Gram-Schmidt degeneracy");
    for (std::size_t r = 0; r < d; ++r) u.m[r * d + j] = col[r] / nc;
  }
  inst.unitary = std::move(u);

  if (n_povm == 1) {
    inst.measurement = trivial_povm(se);
  } else {
    Povm p;
    p.space = se;
    std::vector<std::vector<cdouble>> gs;
    std::vector<cdouble> total(dim_e * dim_e, 0.0);
    for (std::size_t j = 0; j + 1 < n_povm; ++j) {
      // G = B B^dag from a Gaussian B: Hermitian PSD by construction.
      std::vector<cdouble> b(dim_e * dim_e);
      for (cdouble& z : b) z = rng.cgauss();
      std::vector<cdouble> g(dim_e * dim_e);
      for (std::size_t r = 0; r < dim_e; ++r)
        for (std::size_t c = 0; c < dim_e; ++c)
          g[r * dim_e + c] = kernels::dot_conj(dim_e, b.data() + c * dim_e,
                                               b.data() + r * dim_e);
      for (std::size_t i = 0; i < dim_e * dim_e; ++i) total[i] += g[i];
      gs.push_back(std::move(g));
    }
    const Eig esum = hermitian_eig(Operator{se, total});
    double scale = 0.9 / std::max(esum.values[0], 1e-12);
    for (int attempt = 0;; ++attempt) {
      Operator last = Operator::identity(se);
      for (std::size_t i = 0; i < dim_e * dim_e; ++i)
        last.m[i] -= scale * total[i];
      const Eig elast = hermitian_eig(last);
      if (elast.values.back() >= 0.0) {
        p.elements.clear();
        p.labels.clear();
        p.basis_index.clear();
        for (std::size_t j = 0; j + 1 < n_povm; ++j) {
          Operator e{se, gs[j]};
          for (cdouble& z : e.m) z *= scale;
          p.elements.push_back(std::move(e));
          p.labels.push_back(Label{int(j)});
          p.basis_index.push_back(-1);
        }
        p.elements.push_back(std::move(last));
        p.labels.push_back(Label{int(n_povm) - 1});
        p.basis_index.push_back(-1);
        break;
      }
      if (attempt >= 10)
        throw InvariantError("random_instance: POVM completion not PSD");
      scale *= 0.5;
    }
    inst.measurement = std::move(p);
  }

  double qv;
  do {
    qv = rng.uniform();
  } while (qv == 0.0);
  inst.q = qv;
  inst.validate(true);
  return inst;
}

}  // namespace herald
