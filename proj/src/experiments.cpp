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

#include "herald/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "herald/measurement.hpp"

namespace herald {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// The closed-form evaluators below are deliberate re-derivations: plain
// scalar arithmetic, no engine code paths, so that agreement with the
// pipeline is a genuine cross-check rather than a tautology.

// Applies the same floor rules as the engine brancher to literal P(k|i)
// tables. ov2[k] is the squared overlap of the normalized conditional
// states; it is read only when both sides of branch k survive the floor.
PointDetail assemble_point(double q, double p_me, const std::vector<double>& pk1,
                           const std::vector<double>& pk2,
                           const std::vector<double>& ov2) {
  const std::size_t n = pk1.size();
  PointDetail d;
  d.pk1 = pk1;
  d.pk2 = pk2;
  d.pk.assign(n, 0.0);
  d.prior1.assign(n, 0.0);
  d.prior2.assign(n, 0.0);
  d.err.assign(n, 0.0);
  d.kept.assign(n, false);
  d.p_me = p_me;
  for (std::size_t k = 0; k < n; ++k) {
    const double pk = (1.0 - q) * pk1[k] + q * pk2[k];
    d.pk[k] = pk;
    if (pk < tol::prob_floor) continue;
    d.kept[k] = true;
    const double pr1 = (1.0 - q) * pk1[k] / pk;
    const double pr2 = q * pk2[k] / pk;
    d.prior1[k] = pr1;
    d.prior2[k] = pr2;
    if (pk1[k] >= tol::prob_floor && pk2[k] >= tol::prob_floor) {
      const double rad = std::max(0.0, 1.0 - 4.0 * pr1 * pr2 * ov2[k]);
      d.err[k] = 0.5 - 0.5 * std::sqrt(rad);
    } else {
      d.err[k] = std::min(pr1, pr2);
    }
    d.p_aveme += pk * d.err[k];
    d.captured += pk;
  }
  return d;
}

// Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.
// Local to the closed-form backend on purpose: the engine's trace norms come
// from the complex solver in fock.cpp, and the two must not share numerics.
std::vector<double> sym_jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      scale = std::max(scale, std::abs(a[p * n + p]));
      for (std::size_t r = p + 1; r < n; ++r)
        off = std::max(off, std::abs(a[p * n + r]));
    }
    if (off <= std::max(1e-15 * std::max(scale, off), 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = a[p * n + r];
        if (std::abs(apq) <= 1e-300) continue;
        const double th = (a[r * n + r] - a[p * n + p]) / (2.0 * apq);
        const double t = th >= 0.0 ? 1.0 / (th + std::sqrt(th * th + 1.0))
                                   : -1.0 / (-th + std::sqrt(th * th + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double taurot = s / (1.0 + c);
        a[p * n + p] -= t * apq;
        a[r * n + r] += t * apq;
        a[p * n + r] = 0.0;
        a[r * n + p] = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == p || j == r) continue;
          const double ajp = a[j * n + p];
          const double ajr = a[j * n + r];
          a[j * n + p] = ajp - s * (ajr + taurot * ajp);
          a[j * n + r] = ajr + s * (ajp - taurot * ajr);
          a[p * n + j] = a[j * n + p];
          a[r * n + j] = a[j * n + r];
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t p = 0; p < n; ++p) ev[p] = a[p * n + p];
  return ev;
}

double sym_trace_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (double v : sym_jacobi_eigenvalues(a, n)) sum += std::abs(v);
  return sum;
}

double pure_error(double q, double overlap_sq) {
  const double rad = std::max(0.0, 1.0 - 4.0 * (1.0 - q) * q * overlap_sq);
  return 0.5 - 0.5 * std::sqrt(rad);
}

void check_ranges(double eta, double q) {
  require(eta >= 0.0 && eta <= 1.0, "closed form: eta must be in [0, 1]");
  require(q >= 0.0 && q <= 1.0, "closed form: q must be in [0, 1]");
}

}  // namespace

PointDetail example1_closed_detail(double eta, double q, double theta) {
  check_ranges(eta, q);
  const double c = std::cos(theta), s = std::sin(theta);
  const double c2 = c * c, s2 = s * s;
  const double oe = 1.0 - eta;
  const double se = std::sqrt(eta), soe = std::sqrt(oe);

  const std::vector<double> pk1 = {oe * oe, 2.0 * eta * oe, eta * eta, 0.0};

  // psi2 three-photon output coefficients (the sin(theta) part).
  const double d21 = 2.0 * eta * soe - oe * soe;
  const double d12 = eta * se - 2.0 * oe * se;
  const std::vector<double> pk2 = {
      oe * oe * c2 + 3.0 * eta * oe * oe * s2,
      2.0 * eta * oe * c2 + d21 * d21 * s2,
      eta * eta * c2 + d12 * d12 * s2,
      3.0 * eta * eta * oe * s2,
  };

  // <Psi1_k|Psi2_k> = numer_k cos(theta) / sqrt(P(k|2)); the psi1 branch
  // normalizes to a bare Fock state, so only P(k|2) appears.
  const std::array<double, 3> numer = {oe, std::sqrt(2.0 * eta * oe), eta};
  std::vector<double> ov2(4, 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    if (pk2[k] > 0.0) ov2[k] = numer[k] * numer[k] * c2 / pk2[k];
  }
  return assemble_point(q, pure_error(q, c2), pk1, pk2, ov2);
}

PointDetail example2_closed_detail(double alpha, double eta, double q, double theta,
                                   std::size_t k_scan) {
  check_ranges(eta, q);
  const double c = std::cos(theta), s = std::sin(theta);
  const double beta = std::sqrt(1.0 - eta) * alpha;
  const double gamma = std::sqrt(eta) * alpha;
  const double eg = std::exp(-gamma * gamma);

  // Discarded herald mass beyond k_scan must be negligible, or the
  // closed-form aggregate would not be comparable with the engine's.
  {
    double tail = 1.0, gk2 = 1.0;  // running e^{gamma^2} partial remainder
    for (std::size_t k = 0; k <= k_scan; ++k) {
      tail -= eg * gk2;
      gk2 *= gamma * gamma / double(k + 1);
    }
    if (tail > tol::coherent_tail) {
      std::size_t kk = k_scan;
      double t = tail, g = gk2;  // g = herald mass at kk + 1
      while (t > tol::coherent_tail && kk < 100000) {
        ++kk;
        t -= eg * g;
        g *= gamma * gamma / double(kk + 1);
      }
      throw CutoffError("example2 closed form: herald mass " + fmt17(tail) +
                            " beyond k = " + std::to_string(k_scan) +
                            " exceeds the tail target",
                        kk + 1);
    }
  }

  std::vector<double> pk1(k_scan + 1), pk2(k_scan + 1), ov2(k_scan + 1, 0.0);
  double gk = 1.0, gk_prev = 0.0;  // gamma^k / sqrt(k!)
  for (std::size_t k = 0; k <= k_scan; ++k) {
    const double a = k == 0 ? c * gk
                            : c * gk - s * std::sqrt(1.0 - eta) * std::sqrt(double(k)) * gk_prev;
    const double b = s * std::sqrt(eta) * gk;
    pk1[k] = eg * gk * gk;
    pk2[k] = eg * std::max(0.0, a * a + b * b * (beta * beta + 1.0) + 2.0 * a * b * beta);
    const double denom = (a + b * beta) * (a + b * beta) + b * b;
    if (denom > 0.0) ov2[k] = (a + b * beta) * (a + b * beta) / denom;
    gk_prev = gk;
    gk *= gamma / std::sqrt(double(k + 1));
  }
  return assemble_point(q, pure_error(q, c * c), pk1, pk2, ov2);
}

LossyPointDetail lossy_closed_detail(double tau, double eta, double q, double theta) {
  check_ranges(eta, q);
  require(tau >= 0.0 && tau <= 1.0, "closed form: tau must be in [0, 1]");
  const double c = std::cos(theta), s = std::sin(theta);
  const double oe = 1.0 - eta, ot = 1.0 - tau;
  const double se = std::sqrt(eta), soe = std::sqrt(oe);
  const double d21 = 2.0 * eta * soe - oe * soe;
  const double d12 = eta * se - 2.0 * oe * se;

  using Vec4 = std::array<double, 4>;
  // y_i^(k)(j): unnormalized conditional coefficient vectors in the system
  // Fock basis |0..3>, one per photon count j lost in front of the detector.
  std::array<std::vector<Vec4>, 4> y1, y2;
  y1[0] = {Vec4{0.0, 0.0, oe, 0.0},
           Vec4{0.0, std::sqrt(2.0 * eta * oe * ot), 0.0, 0.0},
           Vec4{eta * ot, 0.0, 0.0, 0.0}};
  y1[1] = {Vec4{0.0, std::sqrt(2.0 * eta * tau * oe), 0.0, 0.0},
           Vec4{eta * std::sqrt(2.0 * tau * ot), 0.0, 0.0, 0.0}};
  y1[2] = {Vec4{eta * tau, 0.0, 0.0, 0.0}};

  y2[0] = {Vec4{0.0, 0.0, oe * c, std::sqrt(3.0 * eta) * oe * s},
           Vec4{0.0, std::sqrt(2.0 * eta * oe * ot) * c, std::sqrt(ot) * d21 * s, 0.0},
           Vec4{eta * ot * c, ot * d12 * s, 0.0, 0.0},
           Vec4{-eta * std::sqrt(3.0 * ot * ot * ot * oe) * s, 0.0, 0.0, 0.0}};
  y2[1] = {Vec4{0.0, std::sqrt(2.0 * eta * tau * oe) * c, std::sqrt(tau) * d21 * s, 0.0},
           Vec4{eta * std::sqrt(2.0 * tau * ot) * c, std::sqrt(2.0 * tau * ot) * d12 * s, 0.0,
                0.0},
           Vec4{-3.0 * eta * ot * std::sqrt(tau * oe) * s, 0.0, 0.0, 0.0}};
  y2[2] = {Vec4{eta * tau * c, tau * d12 * s, 0.0, 0.0},
           Vec4{-3.0 * eta * tau * std::sqrt(oe * ot) * s, 0.0, 0.0, 0.0}};
  y2[3] = {Vec4{-eta * std::sqrt(3.0 * tau * tau * tau * oe) * s, 0.0, 0.0, 0.0}};

  const auto prob_of = [](const std::vector<Vec4>& ys) {
    double p = 0.0;
    for (const Vec4& y : ys)
      for (double v : y) p += v * v;
    return p;
  };
  const auto rho_of = [](const std::vector<Vec4>& ys, double pk) {
    std::vector<double> rho(16, 0.0);
    for (const Vec4& y : ys)
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t col = 0; col < 4; ++col) rho[r * 4 + col] += y[r] * y[col] / pk;
    return rho;
  };

  LossyPointDetail out;
  PointDetail& d = out.base;
  d.pk1.assign(4, 0.0);
  d.pk2.assign(4, 0.0);
  d.pk.assign(4, 0.0);
  d.prior1.assign(4, 0.0);
  d.prior2.assign(4, 0.0);
  d.err.assign(4, 0.0);
  d.kept.assign(4, false);
  out.rho1.resize(4);
  out.rho2.resize(4);
  d.p_me = pure_error(q, c * c);
  for (std::size_t k = 0; k < 4; ++k) {
    const double pk1 = prob_of(y1[k]);
    const double pk2 = prob_of(y2[k]);
    d.pk1[k] = pk1;
    d.pk2[k] = pk2;
    const double pk = (1.0 - q) * pk1 + q * pk2;
    d.pk[k] = pk;
    if (pk < tol::prob_floor) continue;
    d.kept[k] = true;
    const double pr1 = (1.0 - q) * pk1 / pk;
    const double pr2 = q * pk2 / pk;
    d.prior1[k] = pr1;
    d.prior2[k] = pr2;
    const bool have1 = pk1 >= tol::prob_floor;
    const bool have2 = pk2 >= tol::prob_floor;
    if (have1) out.rho1[k] = rho_of(y1[k], pk1);
    if (have2) out.rho2[k] = rho_of(y2[k], pk2);
    if (have1 && have2) {
      std::vector<double> diff(16);
      for (std::size_t i = 0; i < 16; ++i)
        diff[i] = pr1 * out.rho1[k][i] - pr2 * out.rho2[k][i];
      d.err[k] = 0.5 - 0.5 * sym_trace_norm(diff, 4);
    } else {
      d.err[k] = std::min(pr1, pr2);
    }
    d.p_aveme += pk * d.err[k];
    d.captured += pk;
  }
  return out;
}

DiscriminationInstance fock_env_instance(std::size_t env_n, double eta, double q,
                                         double theta, std::size_t cutoff) {
  check_ranges(eta, q);
  require(cutoff >= env_n + 2,
          "fock_env_instance: cutoff must cover env_n + 1 photons in one mode");
  const Space s = Space::single(cutoff);
  DiscriminationInstance inst;
  inst.q = q;
  inst.psi1 = fock_state(0, s);
  inst.psi2 = PureState{s, std::vector<cdouble>(cutoff, 0.0), 0.0};
  inst.psi2.amp[0] = std::cos(theta);
  inst.psi2.amp[1] = std::sin(theta);
  inst.env = fock_state(env_n, s);
  inst.unitary = beam_splitter(eta, s, s);
  inst.measurement = pnr_povm(s);
  inst.validate(false);
  return inst;
}

DiscriminationInstance example1_instance(double eta, double q, double theta,
                                         std::size_t cutoff) {
  return fock_env_instance(2, eta, q, theta, cutoff);
}

DiscriminationInstance example2_instance(double alpha, double eta, double q, double theta,
                                         std::size_t cutoff) {
  check_ranges(eta, q);
  const std::size_t ce = cutoff ? cutoff : coherent_cutoff(std::abs(alpha));
  require(ce >= 2, "example2_instance: cutoff must be at least 2");
  const Space env_space = Space::single(ce);
  const Space sys_space = Space::single(ce + 1);
  DiscriminationInstance inst;
  inst.q = q;
  inst.psi1 = fock_state(0, sys_space);
  inst.psi2 = PureState{sys_space, std::vector<cdouble>(ce + 1, 0.0), 0.0};
  inst.psi2.amp[0] = std::cos(theta);
  inst.psi2.amp[1] = std::sin(theta);
  inst.env = coherent_state(alpha, env_space);
  inst.unitary = beam_splitter(eta, sys_space, env_space);
  inst.measurement = pnr_povm(env_space);
  inst.validate(false);
  return inst;
}

DiscriminationInstance lossy_instance(double tau, double eta, double q, double theta,
                                      std::size_t cutoff) {
  check_ranges(eta, q);
  require(cutoff >= 4, "lossy_instance: cutoff must cover 3 photons in one mode");
  const Space s = Space::single(cutoff);
  DiscriminationInstance inst;
  inst.q = q;
  inst.psi1 = fock_state(0, s);
  inst.psi2 = PureState{s, std::vector<cdouble>(cutoff, 0.0), 0.0};
  inst.psi2.amp[0] = std::cos(theta);
  inst.psi2.amp[1] = std::sin(theta);
  inst.env = fock_state(2, s);
  inst.unitary = beam_splitter(eta, s, s);
  inst.measurement = pure_loss_kraus(tau, s);
  inst.validate(false);
  return inst;
}

std::size_t tmsv_cutoff(double r) {
  require(r >= 0.0, "tmsv: r must be >= 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  std::size_t c = 1;
  double tail = t2;  // discarded mass = tanh(r)^{2c}
  while (tail > tol::coherent_tail && c < 100000) {
    tail *= t2;
    ++c;
  }
  return c;
}

TmsvHerald tmsv_herald(double r, std::size_t k, std::size_t cutoff) {
  require(r >= 0.0, "tmsv_herald: r must be >= 0");
  require(cutoff >= 1 && k < cutoff, "tmsv_herald: need k < cutoff");
  const double th = std::tanh(r);
  const double tail = std::pow(th, 2.0 * double(cutoff));
  if (tail > tol::coherent_tail) {
    throw CutoffError("tmsv_herald: discarded tail " + fmt17(tail) +
                          " exceeds the tail target",
                      tmsv_cutoff(r));
  }
  TmsvHerald out;
  const double ch = std::cosh(r);
  out.herald_prob = std::pow(th, 2.0 * double(k)) / (ch * ch);
  out.env_state = fock_state(k, Space::single(cutoff));
  return out;
}

namespace {

SweepRow row_from_detail(const PointDetail& d, const std::string& name, double value,
                         std::size_t k_max, bool renormalize) {
  SweepRow r;
  r.swept_name = name;
  r.swept_value = value;
  r.p_me = d.p_me;
  r.p_aveme = renormalize && d.captured > 0.0 ? d.p_aveme / d.captured : d.p_aveme;
  r.margin = r.p_aveme - r.p_me;
  r.captured_mass = d.captured;
  r.branch.resize(k_max + 1);
  for (std::size_t k = 0; k <= k_max && k < d.pk.size(); ++k) {
    if (!d.kept[k]) continue;
    r.branch[k] = BranchRow{d.pk[k], d.err[k], false};
  }
  r.backend = "closed_form";
  return r;
}

SweepRow row_from_cert(const NoGoCertificate& cert, const std::string& name, double value,
                       std::size_t k_max) {
  SweepRow r;
  r.swept_name = name;
  r.swept_value = value;
  r.p_me = cert.p_me;
  r.p_aveme = cert.p_aveme;
  r.margin = cert.margin;
  r.captured_mass = cert.captured_mass;
  r.branch.resize(k_max + 1);
  for (const BranchResult& b : cert.branches) {
    if (b.k.size() != 1 || b.k[0] < 0) continue;
    const std::size_t k = std::size_t(b.k[0]);
    if (k > k_max) continue;
    r.branch[k] = BranchRow{b.p_k, b.p_me_branch, false};
  }
  r.backend = "engine";
  return r;
}

void cross_check(const SweepRow& cf, const SweepRow& en, double cc_tol,
                 const std::string& where) {
  const auto fail = [&](const std::string& field, double a, double b) {
    throw CrossCheckError("cross-check failed (" + where + "): " + field +
                          " closed_form=" + fmt17(a) + " engine=" + fmt17(b));
  };
  const auto near = [&](const std::string& field, double a, double b) {
    if (!(std::abs(a - b) <= cc_tol)) fail(field, a, b);
  };
  near("p_me", cf.p_me, en.p_me);
  near("p_aveme", cf.p_aveme, en.p_aveme);
  near("margin", cf.margin, en.margin);
  near("captured_mass", cf.captured_mass, en.captured_mass);
  for (std::size_t k = 0; k < cf.branch.size() && k < en.branch.size(); ++k) {
    const BranchRow& a = cf.branch[k];
    const BranchRow& b = en.branch[k];
    const std::string tag = "_k" + std::to_string(k);
    if (a.suppressed != b.suppressed) {
      // A branch straddling the floor may be dropped by one backend only;
      // then its mass must be borderline on both sides.
      const double mass = a.suppressed ? b.p_k : a.p_k;
      if (mass > 10.0 * tol::prob_floor) fail("suppression" + tag, a.p_k, b.p_k);
      continue;
    }
    if (a.suppressed) continue;
    near("p_k" + tag, a.p_k, b.p_k);
    near("p_err" + tag, a.p_err, b.p_err);
  }
}

std::vector<double> grid_values(const SweepSpec& s) {
  require(s.grid_step > 0.0, "sweep: grid step must be positive");
  std::vector<double> g;
  for (std::size_t i = 0;; ++i) {
    const double v = s.grid_start + double(i) * s.grid_step;
    if (v > s.grid_stop + 1e-12) break;
    g.push_back(v);
  }
  return g;
}

}  // namespace

SweepRow example1_closed_form(double eta, double q, double theta, std::size_t k_max) {
  return row_from_detail(example1_closed_detail(eta, q, theta), "eta", eta, k_max, false);
}

SweepRow example1_engine(double eta, double q, double theta, std::size_t cutoff,
                         std::size_t k_max) {
  const NoGoCertificate cert = nogo_certificate(example1_instance(eta, q, theta, cutoff));
  return row_from_cert(cert, "eta", eta, k_max);
}

SweepRow example2_closed_form(double alpha, double eta, double q, double theta,
                              std::size_t k_max) {
  // Aggregate past the reported branches until the herald tail is negligible.
  const std::size_t k_scan = std::max(k_max, coherent_cutoff(std::abs(alpha)) - 1);
  return row_from_detail(example2_closed_detail(alpha, eta, q, theta, k_scan), "eta", eta,
                         k_max, false);
}

SweepRow example2_engine(double alpha, double eta, double q, double theta,
                         std::size_t cutoff, std::size_t k_max) {
  const NoGoCertificate cert =
      nogo_certificate(example2_instance(alpha, eta, q, theta, cutoff));
  return row_from_cert(cert, "eta", eta, k_max);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  require(spec.q >= 0.0 && spec.q <= 1.0, "sweep: q must be in [0, 1]");
  require(spec.eta >= 0.0 && spec.eta <= 1.0, "sweep: eta must be in [0, 1]");
  require(spec.tau >= 0.0 && spec.tau <= 1.0, "sweep: tau must be in [0, 1]");
  require(std::isfinite(spec.theta), "sweep: theta must be finite");
  require(std::isfinite(spec.alpha), "sweep: alpha must be finite");

  std::vector<SweepRow> out;

  if (spec.scenario == Scenario::tmsv) {
    require(spec.backend != BackendSel::closed_form,
            "sweep: tmsv has no closed-form backend");
    const std::size_t herald_cutoff = spec.cutoff ? spec.cutoff : tmsv_cutoff(spec.r);
    const std::size_t pipe_cutoff = spec.k_max + 2;
    for (std::size_t k = 0; k <= spec.k_max; ++k) {
      const TmsvHerald h = tmsv_herald(spec.r, k, herald_cutoff);
      (void)h;  // validates r and the heralding truncation per row
      const DiscriminationInstance inst =
          fock_env_instance(k, spec.eta, spec.q, spec.theta, pipe_cutoff);
      const NoGoCertificate cert = nogo_certificate(inst, spec.renormalize);
      SweepRow row = row_from_cert(cert, "k", double(k), spec.k_max);
      if (k == 2) {
        const SweepRow cf = row_from_detail(example1_closed_detail(spec.eta, spec.q, spec.theta),
                                            "k", 2.0, spec.k_max, spec.renormalize);
        cross_check(cf, row, 1e-10, "tmsv k=2 vs |2> closed form");
      }
      out.push_back(std::move(row));
    }
    return out;
  }

  const bool sweep_q = spec.swept == "q";
  require(sweep_q || spec.swept == "eta", "sweep: swept parameter must be eta or q");
  const std::string& name = spec.swept;

  std::size_t env_cutoff = 0;  // example2 only
  if (spec.scenario == Scenario::example2) {
    env_cutoff = spec.cutoff ? spec.cutoff : coherent_cutoff(std::abs(spec.alpha));
  }

  for (const double v : grid_values(spec)) {
    const double eta = sweep_q ? spec.eta : v;
    const double q = sweep_q ? v : spec.q;
    PointDetail cf;
    NoGoCertificate cert;
    double cc_tol = 1e-10;
    switch (spec.scenario) {
      case Scenario::example1: {
        cf = example1_closed_detail(eta, q, spec.theta);
        cert = nogo_certificate(
            example1_instance(eta, q, spec.theta, spec.cutoff ? spec.cutoff : 4),
            spec.renormalize);
        break;
      }
      case Scenario::example2: {
        cf = example2_closed_detail(spec.alpha, eta, q, spec.theta, env_cutoff - 1);
        cert = nogo_certificate(
            example2_instance(spec.alpha, eta, q, spec.theta, env_cutoff),
            spec.renormalize);
        break;
      }
      case Scenario::lossy: {
        cf = lossy_closed_detail(spec.tau, eta, q, spec.theta).base;
        cert = nogo_certificate(
            lossy_instance(spec.tau, eta, q, spec.theta, spec.cutoff ? spec.cutoff : 4),
            spec.renormalize);
        cc_tol = 1e-9;
        break;
      }
      case Scenario::tmsv:
        break;  // handled above
    }
    SweepRow rcf = row_from_detail(cf, name, v, spec.k_max, spec.renormalize);
    SweepRow ren = row_from_cert(cert, name, v, spec.k_max);
    cross_check(rcf, ren, cc_tol, name + "=" + fmt17(v));
    if (spec.backend != BackendSel::engine) out.push_back(std::move(rcf));
    if (spec.backend != BackendSel::closed_form) out.push_back(std::move(ren));
  }
  return out;
}

std::vector<SweepRow> lossy_sweep(double tau, double grid_start, double grid_stop,
                                  double grid_step, double q, double theta,
                                  std::size_t cutoff) {
  SweepSpec spec;
  spec.scenario = Scenario::lossy;
  spec.swept = "eta";
  spec.grid_start = grid_start;
  spec.grid_stop = grid_stop;
  spec.grid_step = grid_step;
  spec.q = q;
  spec.theta = theta;
  spec.tau = tau;
  spec.cutoff = cutoff;
  spec.backend = BackendSel::both;
  return run_sweep(spec);
}

void write_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::size_t n_branch = rows.empty() ? 0 : rows.front().branch.size();
  for (const SweepRow& r : rows) {
    if (r.branch.size() != n_branch)
      throw InvariantError("write_csv: rows report differing branch counts");
  }
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "write_csv: cannot open " + path);
  f << "swept_name,swept_value,p_me,p_aveme,margin,captured_mass";
  for (std::size_t k = 0; k < n_branch; ++k)
    f << ",p_k" << k << ",p_err_k" << k;
  f << ",backend\n";
  for (const SweepRow& r : rows) {
    f << r.swept_name << ',' << fmt17(r.swept_value) << ',' << fmt17(r.p_me) << ','
      << fmt17(r.p_aveme) << ',' << fmt17(r.margin) << ',' << fmt17(r.captured_mass);
    for (const BranchRow& b : r.branch) {
      if (b.suppressed)
        f << ",0,nan";
      else
        f << ',' << fmt17(b.p_k) << ',' << fmt17(b.p_err);
    }
    f << ',' << r.backend << '\n';
  }
  require(f.good(), "write_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + s.size())
    throw InvariantError("read_csv: bad number in " + what + ": '" + s + "'");
  return v;
}

}  // namespace

std::vector<SweepRow> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw InvariantError("read_csv: missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 7 || (header.size() - 7) % 2 != 0 ||
      header.front() != "swept_name" || header.back() != "backend")
    throw InvariantError("read_csv: unrecognized header");
  const std::size_t n_branch = (header.size() - 7) / 2;
  for (std::size_t k = 0; k < n_branch; ++k) {
    if (header[6 + 2 * k] != "p_k" + std::to_string(k) ||
        header[7 + 2 * k] != "p_err_k" + std::to_string(k))
      throw InvariantError("read_csv: unexpected branch columns");
  }

  std::vector<SweepRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> field = split_csv_line(line);
    if (field.size() != header.size())
      throw InvariantError("read_csv: row with " + std::to_string(field.size()) +
                           " fields, expected " + std::to_string(header.size()));
    SweepRow r;
    r.swept_name = field[0];
    r.swept_value = parse_double(field[1], "swept_value");
    r.p_me = parse_double(field[2], "p_me");
    r.p_aveme = parse_double(field[3], "p_aveme");
    r.margin = parse_double(field[4], "margin");
    r.captured_mass = parse_double(field[5], "captured_mass");
    r.branch.resize(n_branch);
    for (std::size_t k = 0; k < n_branch; ++k) {
      BranchRow& b = r.branch[k];
      b.p_k = parse_double(field[6 + 2 * k], "p_k" + std::to_string(k));
      b.p_err = parse_double(field[7 + 2 * k], "p_err_k" + std::to_string(k));
      b.suppressed = std::isnan(b.p_err);
    }
    r.backend = field.back();
    rows.push_back(std::move(r));
  }
  return rows;
}

void validate_rows(const std::vector<SweepRow>& rows) {
  const auto bad = [](std::size_t i, const std::string& what) {
    throw InvariantError("row " + std::to_string(i) + ": " + what);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (r.swept_name.empty()) bad(i, "empty swept_name");
    if (r.backend != "closed_form" && r.backend != "engine")
      bad(i, "unknown backend '" + r.backend + "'");
    if (!std::isfinite(r.swept_value)) bad(i, "swept_value not finite");
    if (!(r.p_me >= 0.0 && r.p_me <= 0.5 + 1e-12)) bad(i, "p_me out of range");
    if (!(r.p_aveme >= 0.0 && r.p_aveme <= 0.5 + 1e-9)) bad(i, "p_aveme out of range");
    if (!(r.captured_mass >= 0.0 && r.captured_mass <= 1.0 + 1e-9))
      bad(i, "captured_mass out of range");
    if (!(r.margin >= -tol::margin)) bad(i, "margin below -1e-9");
    if (std::abs(r.margin - (r.p_aveme - r.p_me)) > 1e-12)
      bad(i, "margin inconsistent with p_aveme - p_me");
    double reported = 0.0;
    for (std::size_t k = 0; k < r.branch.size(); ++k) {
      const BranchRow& b = r.branch[k];
      const std::string tag = " in branch " + std::to_string(k);
      if (b.suppressed) {
        if (b.p_k != 0.0) bad(i, "suppressed branch with nonzero p_k" + tag);
        if (!std::isnan(b.p_err)) bad(i, "suppressed branch with finite p_err" + tag);
        continue;
      }
      if (!(b.p_k > 0.0 && b.p_k <= 1.0 + 1e-12)) bad(i, "p_k out of range" + tag);
      if (!(b.p_err >= 0.0 && b.p_err <= 0.5 + 1e-12)) bad(i, "p_err out of range" + tag);
      reported += b.p_k;
    }
    if (reported > r.captured_mass + 1e-9) bad(i, "branch masses exceed captured_mass");
  }
}

}  // namespace herald
