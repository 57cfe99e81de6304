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
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "herald/fock.hpp"
#include "herald/measurement.hpp"
#include "herald/rng.hpp"

namespace {

using herald::cdouble;
using herald::Space;

herald::PureState random_joint(herald::Rng& rng, const Space& joint) {
  herald::PureState s{joint, std::vector<cdouble>(joint.dim()), 0.0};
  for (auto& a : s.amp) a = rng.cgauss();
  const double n = std::sqrt(s.norm_sq());
  for (auto& a : s.amp) a /= n;
  return s;
}

herald::PureState heralded_joint(double eta, const Space& s4) {
  const auto u = herald::beam_splitter(eta, s4, s4);
  return herald::apply(
      u, herald::tensor(herald::fock_state(0, s4), herald::fock_state(2, s4)));
}

}  // namespace

TEST_CASE("pnr_povm builds one exact Fock projector per count") {
  const Space s4 = Space::single(4);
  const auto p = herald::pnr_povm(s4);
  REQUIRE(p.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(p.labels[k] == herald::Label{int(k)});
    CHECK(p.basis_index[k] == long(k));
    // Projector: idempotent with a single diagonal 1.
    const auto& e = p.elements[k];
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        const cdouble want =
            (r == k && c == k) ? cdouble(1, 0) : cdouble(0, 0);
        CHECK(e.at(r, c) == want);
      }
  }
  const auto d = herald::validate_povm(p);
  CHECK(d.pass);
  CHECK(d.completeness_residual == 0.0);
  CHECK(d.min_eigenvalue >= -1e-12);
}

TEST_CASE("pnr_povm on a two-mode environment labels counts per mode") {
  const Space env = Space::product(Space::single(2), Space::single(3));
  const auto p = herald::pnr_povm(env);
  REQUIRE(p.size() == 6);
  std::size_t idx = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(p.labels[idx] == (herald::Label{i, j}));
      CHECK(p.basis_index[idx] == long(idx));
      ++idx;
    }
  CHECK(herald::validate_povm(p).pass);
  CHECK(herald::label_str(p.labels[5]) == "1:2");
}

TEST_CASE("trivial_povm measures nothing") {
  const Space s5 = Space::single(5);
  const auto p = herald::trivial_povm(s5);
  REQUIRE(p.size() == 1);
  CHECK(p.basis_index[0] == -1);
  const auto id = herald::Operator::identity(s5);
  for (std::size_t i = 0; i < id.m.size(); ++i)
    CHECK(p.elements[0].m[i] == id.m[i]);
  const auto d = herald::validate_povm(p);
  CHECK(d.pass);
  CHECK(d.completeness_residual == 0.0);
}

TEST_CASE("validate_povm reports completeness and positivity failures") {
  const Space s2 = Space::single(2);
  herald::Povm bad;
  bad.space = s2;
  for (double scale : {0.5, 0.6}) {
    auto e = herald::Operator::identity(s2);
    for (auto& z : e.m) z *= scale;
    bad.elements.push_back(std::move(e));
    bad.labels.push_back(herald::Label{int(scale * 10)});
    bad.basis_index.push_back(-1);
  }
  const auto d = herald::validate_povm(bad);
  CHECK(std::abs(d.completeness_residual - 0.1) <= 1e-12);
  CHECK(!d.pass);
  CHECK(d.min_eigenvalue >= 0.5 - 1e-12);

  // Completeness can hold while an element fails positivity.
  herald::Povm neg;
  neg.space = s2;
  neg.labels = {herald::Label{0}, herald::Label{1}};
  neg.basis_index = {-1, -1};
  herald::Operator a{s2, {cdouble(1.05, 0), cdouble(0, 0),
                          cdouble(0, 0), cdouble(1.0, 0)}};
  herald::Operator b{s2, {cdouble(-0.05, 0), cdouble(0, 0),
                          cdouble(0, 0), cdouble(0.0, 0)}};
  neg.elements = {a, b};
  const auto dn = herald::validate_povm(neg);
  CHECK(dn.completeness_residual <= 1e-12);
  CHECK(std::abs(dn.min_eigenvalue + 0.05) <= 1e-12);
  CHECK(!dn.pass);
}

TEST_CASE("pure_loss_kraus matches the binomial amplitude law") {
  const Space s6 = Space::single(6);

  const auto lossless = herald::pure_loss_kraus(1.0, s6);
  REQUIRE(lossless.kraus.size() == 6);
  const auto id = herald::Operator::identity(s6);
  for (std::size_t i = 0; i < id.m.size(); ++i)
    CHECK(std::abs(lossless.kraus[0].m[i] - id.m[i]) <= 1e-15);
  for (std::size_t l = 1; l < 6; ++l)
    for (const auto& z : lossless.kraus[l].m) CHECK(std::abs(z) == 0.0);

  const double tau = 0.37;
  const auto stack = herald::pure_loss_kraus(tau, s6);
  // A_0 attenuates each level by tau^(n/2).
  for (std::size_t n = 0; n < 6; ++n)
    CHECK(std::abs(stack.kraus[0].at(n, n) -
                   cdouble(std::pow(tau, 0.5 * double(n)), 0.0)) <= 1e-14);
  // Losing both photons of |2>: amplitude 1 - tau.
  CHECK(std::abs(stack.kraus[2].at(0, 2) - cdouble(1.0 - tau, 0.0)) <= 1e-14);
  CHECK(std::abs(stack.kraus[2].at(0, 2) - cdouble(0.63, 0.0)) <= 1e-14);
  // General entry: sqrt(C(n,l) tau^(n-l) (1-tau)^l).
  auto binom = [](std::size_t n, std::size_t l) {
    double b = 1.0;
    for (std::size_t i = 0; i < l; ++i)
      b = b * double(n - i) / double(i + 1);
    return b;
  };
  for (std::size_t l = 0; l < 6; ++l)
    for (std::size_t n = l; n < 6; ++n) {
      const double want = std::sqrt(binom(n, l) *
                                    std::pow(tau, double(n - l)) *
                                    std::pow(1.0 - tau, double(l)));
      CHECK(std::abs(stack.kraus[l].at(n - l, n) - cdouble(want, 0.0)) <=
            1e-13);
    }

  // Completeness: sum_l A_l^dag A_l = I in the truncated space.
  const std::size_t d = 6;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cdouble sum(0.0, 0.0);
      for (const auto& a : stack.kraus)
        for (std::size_t k = 0; k < d; ++k)
          sum += std::conj(a.m[k * d + r]) * a.m[k * d + c];
      const cdouble want = (r == c) ? cdouble(1, 0) : cdouble(0, 0);
      CHECK(std::abs(sum - want) <= 1e-10);
    }

  CHECK(stack.readout.size() == 6);
  CHECK(herald::validate_povm(stack.readout).pass);

  CHECK_THROWS_AS(herald::pure_loss_kraus(1.2, s6), std::invalid_argument);
  CHECK_THROWS_AS(herald::pure_loss_kraus(-0.1, s6), std::invalid_argument);
  CHECK_THROWS_AS(herald::pure_loss_kraus(0.5, s6, 6), std::invalid_argument);
  CHECK_THROWS_AS(
      herald::pure_loss_kraus(0.5, Space::product(s6, s6)),
      std::invalid_argument);
}

TEST_CASE("lossy_conditional with tau = 1 reduces to the pure branches") {
  const double eta = 0.4;
  const Space s4 = Space::single(4);
  const auto joint = heralded_joint(eta, s4);
  const auto stack = herald::pure_loss_kraus(1.0, s4);
  const double pk1[4] = {(1 - eta) * (1 - eta), 2 * eta * (1 - eta),
                         eta * eta, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto br = herald::lossy_conditional(joint, stack, k);
    CHECK(std::abs(br.prob - pk1[k]) <= 1e-12);
    if (k == 3) {
      CHECK(br.suppressed);
      CHECK(!br.rho.has_value());
      continue;
    }
    REQUIRE(br.rho.has_value());
    br.rho->check_valid("tau=1 branch");
    // The branch state is the pure heralded conditional.
    auto psi = herald::env_contract(joint, herald::fock_state(k, s4));
    const double n = std::sqrt(psi.norm_sq());
    for (auto& z : psi.amp) z /= n;
    cdouble fid(0.0, 0.0);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        fid += std::conj(psi.amp[r]) * br.rho->at(r, c) * psi.amp[c];
    CHECK(std::abs(fid - cdouble(1, 0)) <= 1e-12);
  }
}

TEST_CASE("lossy_conditional closed forms for the two-photon environment") {
  const double eta = 0.4;
  const double tau = 0.6;
  const Space s4 = Space::single(4);
  const auto joint = heralded_joint(eta, s4);
  const auto stack = herald::pure_loss_kraus(tau, s4);

  // Detecting both photons survives only the |0>|2> component.
  const auto b2 = herald::lossy_conditional(joint, stack, 2);
  CHECK(std::abs(b2.prob - eta * eta * tau * tau) <= 1e-12);
  REQUIRE(b2.rho.has_value());
  CHECK(std::abs(b2.rho->at(0, 0) - cdouble(1, 0)) <= 1e-12);

  // Detecting zero photons mixes three loss histories with known weights.
  const auto b0 = herald::lossy_conditional(joint, stack, 0);
  const double w2 = (1 - eta) * (1 - eta);
  const double w1 = 2 * eta * (1 - eta) * (1 - tau);
  const double w0 = eta * eta * (1 - tau) * (1 - tau);
  CHECK(std::abs(b0.prob - (w0 + w1 + w2)) <= 1e-12);
  REQUIRE(b0.rho.has_value());
  b0.rho->check_valid("k=0 branch");
  herald::Operator rho_op{s4, b0.rho->m};
  auto eig = herald::hermitian_eig(rho_op);
  std::vector<double> want = {w2 / b0.prob, w1 / b0.prob, w0 / b0.prob};
  std::sort(want.begin(), want.end(), std::greater<>());
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(eig.values[j] - want[j]) <= 1e-12);
  CHECK(std::abs(eig.values[3]) <= 1e-12);
}

TEST_CASE("kraus readout agrees with the effective POVM on the environment") {
  herald::Rng rng(51);
  const Space sys = Space::single(5);
  const Space env = Space::single(4);
  const Space joint_space = Space::product(sys, env);
  const auto joint = random_joint(rng, joint_space);
  const double tau = 0.42;
  const auto stack = herald::pure_loss_kraus(tau, env);

  const std::size_t de = 4;
  double total = 0.0;
  for (std::size_t k = 0; k < de; ++k) {
    // M_k^eff = sum_l A_l^dag |k><k| A_l.
    std::vector<cdouble> meff(de * de, cdouble(0, 0));
    for (const auto& a : stack.kraus)
      for (std::size_t r = 0; r < de; ++r)
        for (std::size_t c = 0; c < de; ++c)
          meff[r * de + c] += std::conj(a.m[k * de + r]) * a.m[k * de + c];
    cdouble expect(0.0, 0.0);
    const std::size_t ds = 5;
    for (std::size_t s = 0; s < ds; ++s)
      for (std::size_t r = 0; r < de; ++r)
        for (std::size_t c = 0; c < de; ++c)
          expect += std::conj(joint.amp[s * de + r]) * meff[r * de + c] *
                    joint.amp[s * de + c];
    const auto br = herald::lossy_conditional(joint, stack, k);
    CHECK(std::abs(br.prob - expect.real()) <= 1e-10);
    total += br.prob;
    if (br.rho.has_value()) {
      const auto diag = br.rho->validate(1e-10, 1e-10);
      CHECK(diag.pass);
    }
  }
  CHECK(std::abs(total - 1.0) <= 1e-10);
}

TEST_CASE("lossy_conditional suppresses branches below the floor") {
  const Space s4 = Space::single(4);
  // Environment in |0>: no photons can ever be detected.
  const auto joint =
      herald::tensor(herald::fock_state(1, s4), herald::fock_state(0, s4));
  const auto stack = herald::pure_loss_kraus(0.7, s4);
  const auto b3 = herald::lossy_conditional(joint, stack, 3);
  CHECK(b3.suppressed);
  CHECK(b3.prob <= 1e-12);
  CHECK(!b3.rho.has_value());
  const auto b0 = herald::lossy_conditional(joint, stack, 0);
  CHECK(!b0.suppressed);
  CHECK(std::abs(b0.prob - 1.0) <= 1e-12);
}
