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

#include "herald/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "herald/kernels.hpp"

namespace herald {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

std::vector<double> factorials(std::size_t up_to) {
  std::vector<double> f(up_to + 1);
  f[0] = 1.0;
  for (std::size_t n = 1; n <= up_to; ++n) f[n] = f[n - 1] * double(n);
  return f;
}

}  // namespace

Space Space::single(std::size_t cutoff) {
  require(cutoff >= 1, "Space::single: cutoff must be >= 1");
  return Space{{cutoff}};
}

Space Space::product(const Space& a, const Space& b) {
  Space s = a;
  s.cutoffs.insert(s.cutoffs.end(), b.cutoffs.begin(), b.cutoffs.end());
  return s;
}

std::size_t Space::dim() const {
  std::size_t d = 1;
  for (std::size_t c : cutoffs) d *= c;
  return d;
}

std::size_t system_dim_for(const Space& joint, const Space& env) {
  const std::size_t nj = joint.cutoffs.size(), ne = env.cutoffs.size();
  require(ne < nj, "system_dim_for: env must be a strict trailing factor");
  for (std::size_t i = 0; i < ne; ++i) {
    require(joint.cutoffs[nj - ne + i] == env.cutoffs[i],
            "system_dim_for: env is not the trailing factor of joint");
  }
  std::size_t d = 1;
  for (std::size_t i = 0; i < nj - ne; ++i) d *= joint.cutoffs[i];
  return d;
}

Space system_space_for(const Space& joint, const Space& env) {
  (void)system_dim_for(joint, env);
  Space s;
  s.cutoffs.assign(joint.cutoffs.begin(),
                   joint.cutoffs.end() - long(env.cutoffs.size()));
  return s;
}

double PureState::norm_sq() const {
  return kernels::norm_sq(amp.size(), amp.data());
}

void PureState::check_normalized(const char* what, double slack) const {
  const double n2 = norm_sq();
  if (n2 < 1.0 - tail_bound - slack || n2 > 1.0 + slack) {
    throw InvariantError(std::string(what) + ": state not normalized, |amp|^2 = " +
                         std::to_string(n2) + ", tail_bound = " +
                         std::to_string(tail_bound));
  }
}

Operator Operator::dagger() const {
  const std::size_t n = space.dim();
  Operator d{space, std::vector<cdouble>(n * n)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) d.m[c * n + r] = std::conj(m[r * n + c]);
  return d;
}

double Operator::hermiticity_residual() const {
  const std::size_t n = space.dim();
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c)
      worst = std::max(worst, std::abs(m[r * n + c] - std::conj(m[c * n + r])));
  return worst;
}

double Operator::unitarity_residual() const {
  const std::size_t n = space.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cdouble g = 0.0;
      for (std::size_t r = 0; r < n; ++r) g += std::conj(m[r * n + i]) * m[r * n + j];
      if (i == j) g -= 1.0;
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

bool Operator::is_hermitian(double eps) const { return hermiticity_residual() <= eps; }
bool Operator::is_unitary(double eps) const { return unitarity_residual() <= eps; }

Operator Operator::identity(const Space& space) {
  const std::size_t n = space.dim();
  Operator op{space, std::vector<cdouble>(n * n)};
  for (std::size_t i = 0; i < n; ++i) op.m[i * n + i] = 1.0;
  return op;
}

Operator Operator::zero(const Space& space) {
  const std::size_t n = space.dim();
  return Operator{space, std::vector<cdouble>(n * n)};
}

DensityDiagnostics DensityMatrix::validate(double psd_tol, double trace_tol) const {
  const std::size_t n = space.dim();
  DensityDiagnostics d;
  Operator sym{space, std::vector<cdouble>(n * n)};
  cdouble tr = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    tr += m[r * n + r];
    for (std::size_t c = 0; c < n; ++c) {
      d.hermiticity_residual = std::max(
          d.hermiticity_residual, std::abs(m[r * n + c] - std::conj(m[c * n + r])));
      sym.m[r * n + c] = 0.5 * (m[r * n + c] + std::conj(m[c * n + r]));
    }
  }
  d.trace_deviation = std::abs(tr - 1.0);
  const Eig eig = hermitian_eig(sym);
  d.min_eigenvalue = eig.values.empty() ? 0.0 : eig.values.back();
  d.pass = d.hermiticity_residual <= tol::hermitian &&
           d.min_eigenvalue >= -psd_tol && d.trace_deviation <= trace_tol;
  return d;
}

void DensityMatrix::check_valid(const char* what) const {
  const DensityDiagnostics d = validate();
  if (!d.pass) {
    throw InvariantError(std::string(what) + ": invalid density matrix (herm " +
                         std::to_string(d.hermiticity_residual) + ", min eig " +
                         std::to_string(d.min_eigenvalue) + ", trace dev " +
                         std::to_string(d.trace_deviation) + ")");
  }
}

PureState fock_state(std::size_t n, const Space& space) {
  require(n < space.dim(), "fock_state: index out of range for cutoff");
  PureState s{space, std::vector<cdouble>(space.dim()), 0.0};
  s.amp[n] = 1.0;
  return s;
}

std::size_t coherent_cutoff(double abs_alpha) {
  return static_cast<std::size_t>(
      std::ceil(abs_alpha * abs_alpha + 10.0 * abs_alpha + 20.0));
}

PureState coherent_state(cdouble alpha, const Space& space, double tail_target) {
  require(space.n_modes() == 1, "coherent_state: single-mode space required");
  const std::size_t cutoff = space.cutoffs[0];
  PureState s{space, std::vector<cdouble>(cutoff), 0.0};
  const double lam = std::norm(alpha);
  cdouble c = std::exp(-0.5 * lam);
  double mass = 0.0;
  for (std::size_t n = 0; n < cutoff; ++n) {
    s.amp[n] = c;
    mass += std::norm(c);
    c *= alpha / std::sqrt(double(n + 1));
  }
  s.tail_bound = std::max(0.0, 1.0 - mass);
  if (s.tail_bound > tail_target) {
    // Smallest cutoff whose Poisson tail meets the target.
    double term = std::exp(-lam);
    double cum = term;
    std::size_t c2 = 1;
    while (1.0 - cum > tail_target && c2 < 100000) {
      term *= lam / double(c2);
      cum += term;
      ++c2;
    }
    throw CutoffError("coherent_state: cutoff " + std::to_string(cutoff) +
                          " leaves tail " + std::to_string(s.tail_bound) +
                          " > target; use cutoff >= " + std::to_string(c2),
                      c2);
  }
  return s;
}

Operator annihilation(const Space& space) {
  require(space.n_modes() == 1, "annihilation: single-mode space required");
  const std::size_t n = space.dim();
  Operator op = Operator::zero(space);
  for (std::size_t k = 1; k < n; ++k) op.m[(k - 1) * n + k] = std::sqrt(double(k));
  return op;
}

Operator creation(const Space& space) { return annihilation(space).dagger(); }

Operator number_op(const Space& space) {
  require(space.n_modes() == 1, "number_op: single-mode space required");
  const std::size_t n = space.dim();
  Operator op = Operator::zero(space);
  for (std::size_t k = 0; k < n; ++k) op.m[k * n + k] = double(k);
  return op;
}

PureState tensor(const PureState& a, const PureState& b) {
  const std::size_t da = a.amp.size(), db = b.amp.size();
  PureState s{Space::product(a.space, b.space), std::vector<cdouble>(da * db),
              a.tail_bound + b.tail_bound};
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j) s.amp[i * db + j] = a.amp[i] * b.amp[j];
  return s;
}

Operator tensor(const Operator& a, const Operator& b) {
  const std::size_t da = a.space.dim(), db = b.space.dim();
  const std::size_t d = da * db;
  Operator op{Space::product(a.space, b.space), std::vector<cdouble>(d * d)};
  for (std::size_t ra = 0; ra < da; ++ra)
    for (std::size_t rb = 0; rb < db; ++rb)
      for (std::size_t ca = 0; ca < da; ++ca)
        for (std::size_t cb = 0; cb < db; ++cb)
          op.m[(ra * db + rb) * d + (ca * db + cb)] =
              a.m[ra * da + ca] * b.m[rb * db + cb];
  return op;
}

Operator beam_splitter(double eta, const Space& space_a, const Space& space_b) {
  require(eta >= 0.0 && eta <= 1.0, "beam_splitter: eta must be in [0, 1]");
  require(space_a.n_modes() == 1 && space_b.n_modes() == 1,
          "beam_splitter: single-mode factors required");
  const std::size_t ca = space_a.cutoffs[0], cb = space_b.cutoffs[0];
  const std::size_t dim = ca * cb;
  const double t = std::sqrt(eta);
  const double r = std::sqrt(1.0 - eta);
  const std::size_t pmax = ca + cb;  // power/factorial table size
  const std::vector<double> fact = factorials(pmax);
  std::vector<double> tpow(pmax + 1), rpow(pmax + 1);
  tpow[0] = rpow[0] = 1.0;
  for (std::size_t k = 1; k <= pmax; ++k) {
    tpow[k] = tpow[k - 1] * t;
    rpow[k] = rpow[k - 1] * r;
  }
  const auto binom = [&](std::size_t n, std::size_t k) {
    return fact[n] / (fact[k] * fact[n - k]);
  };

  Operator u = Operator::zero(Space::product(space_a, space_b));
  // Column |m,n> maps into the total-photon-number sector N = m + n:
  //   U|m,n> = (t a^dag - r b^dag)^m (r a^dag + t b^dag)^n |0,0> / sqrt(m! n!)
  // expanded binomially over output |p, N-p>.
  for (std::size_t m = 0; m < ca; ++m) {
    for (std::size_t n = 0; n < cb; ++n) {
      const std::size_t col = m * cb + n;
      const std::size_t big_n = m + n;
      const std::size_t p_lo = big_n >= cb ? big_n - (cb - 1) : 0;
      const std::size_t p_hi = std::min(ca - 1, big_n);
      for (std::size_t p = p_lo; p <= p_hi; ++p) {
        const std::size_t q = big_n - p;
        const std::size_t i_lo = p > n ? p - n : 0;
        const std::size_t i_hi = std::min(m, p);
        double sum = 0.0;
        for (std::size_t i = i_lo; i <= i_hi; ++i) {
          const double term = binom(m, i) * binom(n, p - i) *
                              tpow[n - p + 2 * i] * rpow[m + p - 2 * i];
          sum += ((m - i) % 2 == 0) ? term : -term;
        }
        const double norm = std::sqrt((fact[p] * fact[q]) / (fact[m] * fact[n]));
        u.m[(p * cb + q) * dim + col] = norm * sum;
      }
    }
  }
  return u;
}

PureState apply(const Operator& u, const PureState& x) {
  require(u.space == x.space, "apply: operator/state space mismatch");
  const std::size_t n = x.amp.size();
  PureState y{x.space, std::vector<cdouble>(n), x.tail_bound};
  kernels::matvec(n, n, u.m.data(), x.amp.data(), y.amp.data());
  y.tail_bound += std::max(0.0, x.norm_sq() - y.norm_sq());
  return y;
}

PureState apply_env(const Operator& m_env, const PureState& joint) {
  const std::size_t ds = system_dim_for(joint.space, m_env.space);
  const std::size_t de = m_env.space.dim();
  PureState y{joint.space, std::vector<cdouble>(joint.amp.size()), joint.tail_bound};
  for (std::size_t s = 0; s < ds; ++s) {
    kernels::matvec(de, de, m_env.m.data(), joint.amp.data() + s * de,
                    y.amp.data() + s * de);
  }
  return y;
}

PureState env_contract(const PureState& joint, const PureState& env_bra) {
  const std::size_t ds = system_dim_for(joint.space, env_bra.space);
  const std::size_t de = env_bra.amp.size();
  PureState out{system_space_for(joint.space, env_bra.space),
                std::vector<cdouble>(ds), joint.tail_bound};
  for (std::size_t s = 0; s < ds; ++s) {
    out.amp[s] = kernels::dot_conj(de, env_bra.amp.data(), joint.amp.data() + s * de);
  }
  return out;
}

DensityMatrix reduced_density_system(const PureState& joint, const Space& env) {
  const std::size_t ds = system_dim_for(joint.space, env);
  const std::size_t de = env.dim();
  DensityMatrix rho{system_space_for(joint.space, env),
                    std::vector<cdouble>(ds * ds)};
  for (std::size_t r = 0; r < ds; ++r)
    for (std::size_t c = 0; c < ds; ++c)
      rho.m[r * ds + c] = kernels::dot_conj(de, joint.amp.data() + c * de,
                                            joint.amp.data() + r * de);
  return rho;
}

cdouble inner(const PureState& a, const PureState& b) {
  require(a.space == b.space, "inner: space mismatch");
  return kernels::dot_conj(a.amp.size(), a.amp.data(), b.amp.data());
}

Eig hermitian_eig(const Operator& a) {
  const std::size_t n = a.space.dim();
  const double herm = a.hermiticity_residual();
  if (herm > tol::hermitian) {
    throw std::invalid_argument("hermitian_eig: input not Hermitian, residual " +
                                std::to_string(herm));
  }
  // Work on the symmetrized copy so round-off asymmetry cannot accumulate.
  std::vector<cdouble> w(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      w[r * n + c] = 0.5 * (a.m[r * n + c] + std::conj(a.m[c * n + r]));
  std::vector<cdouble> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double scale = 0.0;
  for (const cdouble& z : w) scale = std::max(scale, std::abs(z));
  const double stop = std::max(5e-15 * scale, 1e-300);

  // Cyclic complex Jacobi: each pivot (p, q) is phased real and rotated away.
  bool converged = n <= 1;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        off = std::max(off, std::abs(w[p * n + q]));
    if (off <= stop) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble apq = w[p * n + q];
        const double mag = std::abs(apq);
        if (mag <= 0.1 * stop) continue;
        const cdouble u = apq / mag;  // e^{i phi}
        const double app = w[p * n + p].real();
        const double aqq = w[q * n + q].real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double tr = theta >= 0.0
                              ? -1.0 / (theta + std::sqrt(theta * theta + 1.0))
                              : 1.0 / (-theta + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tr * tr + 1.0);
        const double s = tr * c;
        const cdouble su = s * u;
        const cdouble suc = s * std::conj(u);
        const cdouble cu = c * u;
        const cdouble cuc = c * std::conj(u);
        // Columns: A <- A J with J[p][p]=c, J[p][q]=-s, J[q][p]=s e^{-i phi},
        // J[q][q]=c e^{-i phi}.
        for (std::size_t r = 0; r < n; ++r) {
          const cdouble arp = w[r * n + p], arq = w[r * n + q];
          w[r * n + p] = c * arp + suc * arq;
          w[r * n + q] = -s * arp + cuc * arq;
        }
        // Rows: A <- J^dag A.
        for (std::size_t cc = 0; cc < n; ++cc) {
          const cdouble apc = w[p * n + cc], aqc = w[q * n + cc];
          w[p * n + cc] = c * apc + su * aqc;
          w[q * n + cc] = -s * apc + cu * aqc;
        }
        // Eigenvector accumulation: V <- V J.
        for (std::size_t r = 0; r < n; ++r) {
          const cdouble vrp = v[r * n + p], vrq = v[r * n + q];
          v[r * n + p] = c * vrp + suc * vrq;
          v[r * n + q] = -s * vrp + cuc * vrq;
        }
      }
    }
  }
  if (!converged) throw InvariantError("hermitian_eig: Jacobi failed to converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = w[i * n + i].real();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  Eig e;
  e.values.resize(n);
  e.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    e.values[j] = diag[order[j]];
    for (std::size_t r = 0; r < n; ++r) e.vectors[r * n + j] = v[r * n + order[j]];
  }
  return e;
}

double trace_norm(const Operator& a) {
  const Eig e = hermitian_eig(a);
  double s = 0.0;
  for (double lam : e.values) s += std::abs(lam);
  return s;
}

Operator psd_sqrt(const Operator& a, double psd_tol) {
  const std::size_t n = a.space.dim();
  const Eig e = hermitian_eig(a);
  if (!e.values.empty() && e.values.back() < -psd_tol) {
    throw InvariantError("psd_sqrt: input not PSD, min eigenvalue " +
                         std::to_string(e.values.back()));
  }
  Operator b = Operator::zero(a.space);
  std::vector<cdouble> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lam = std::max(0.0, e.values[j]);
    if (lam == 0.0) continue;
    for (std::size_t r = 0; r < n; ++r) col[r] = e.vectors[r * n + j];
    kernels::outer_acc(n, std::sqrt(lam), col.data(), b.m.data());
  }
  return b;
}

}  // namespace herald
