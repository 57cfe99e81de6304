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

#ifndef HERALD_FOCK_HPP
#define HERALD_FOCK_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace herald {

using cdouble = std::complex<double>;

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double psd = 1e-10;
inline constexpr double completeness = 1e-10;
inline constexpr double norm = 1e-10;
inline constexpr double prob_floor = 1e-12;
inline constexpr double coherent_tail = 1e-12;
inline constexpr double margin = 1e-9;
}  // namespace tol

// Truncation cutoff too small for the requested state; carries the smallest
// cutoff that would satisfy the tail target.
struct CutoffError : std::runtime_error {
  CutoffError(const std::string& what, std::size_t suggested)
      : std::runtime_error(what), suggested_cutoff(suggested) {}
  std::size_t suggested_cutoff;
};

// A mathematical invariant the implementation guarantees failed to hold;
// always indicates a bug, never a bad user input.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated Fock space, possibly a tensor product of modes. cutoffs[i] is
// the dimension of factor i; flat indices run with the last factor fastest.
struct Space {
  std::vector<std::size_t> cutoffs;

  static Space single(std::size_t cutoff);
  static Space product(const Space& a, const Space& b);

  std::size_t dim() const;
  std::size_t n_modes() const { return cutoffs.size(); }
  bool operator==(const Space&) const = default;
};

// Checks that `env` is the trailing factor group of `joint` and returns the
// dimension of the leading (system) part.
std::size_t system_dim_for(const Space& joint, const Space& env);
Space system_space_for(const Space& joint, const Space& env);

struct PureState {
  Space space;
  std::vector<cdouble> amp;
  // Upper bound on probability mass lost to truncation so far.
  double tail_bound = 0.0;

  double norm_sq() const;
  // Throws InvariantError unless ||amp||^2 is within [1 - tail_bound - slack,
  // 1 + slack].
  void check_normalized(const char* what, double slack = tol::norm) const;
};

struct Operator {
  Space space;
  std::vector<cdouble> m;  // row-major, dim x dim

  cdouble at(std::size_t r, std::size_t c) const {
    return m[r * space.dim() + c];
  }
  Operator dagger() const;
  double hermiticity_residual() const;  // max |A - A^dag| entry
  double unitarity_residual() const;    // max |U^dag U - I| entry
  bool is_hermitian(double eps = tol::hermitian) const;
  bool is_unitary(double eps = tol::unitary) const;

  static Operator identity(const Space& space);
  static Operator zero(const Space& space);
};

struct DensityDiagnostics {
  double hermiticity_residual = 0.0;
  double min_eigenvalue = 0.0;
  double trace_deviation = 0.0;  // |tr - 1|
  bool pass = false;
};

struct DensityMatrix {
  Space space;
  std::vector<cdouble> m;  // row-major, dim x dim

  cdouble at(std::size_t r, std::size_t c) const {
    return m[r * space.dim() + c];
  }
  DensityDiagnostics validate(double psd_tol = tol::psd,
                              double trace_tol = tol::norm) const;
  void check_valid(const char* what) const;  // throws InvariantError on fail
};

// States and operators.
PureState fock_state(std::size_t n, const Space& space);

// Default cutoff policy for coherent states: ceil(|alpha|^2 + 10|alpha| + 20).
std::size_t coherent_cutoff(double abs_alpha);
PureState coherent_state(cdouble alpha, const Space& space,
                         double tail_target = tol::coherent_tail);

Operator annihilation(const Space& space);
Operator creation(const Space& space);
Operator number_op(const Space& space);

PureState tensor(const PureState& a, const PureState& b);
Operator tensor(const Operator& a, const Operator& b);

// Two-mode beam splitter on space_a (x) space_b with Heisenberg convention
//   a^dag -> sqrt(eta) a^dag - sqrt(1-eta) b^dag
//   b^dag -> sqrt(1-eta) a^dag + sqrt(eta) b^dag
// Photon-number conserving; exactly unitary on the subspace of total photon
// number <= min(cutoffs) - 1, truncated above it.
Operator beam_splitter(double eta, const Space& space_a, const Space& space_b);

// y = U x; the output tail_bound grows by any norm lost to truncation.
PureState apply(const Operator& u, const PureState& x);

// (I (x) m_env) |joint>, where m_env acts on the trailing env factor.
PureState apply_env(const Operator& m_env, const PureState& joint);

// <env_bra| contracted against the env factor of |joint>: returns the
// unnormalized system-factor vector sum_m conj(env_bra[m]) joint[:, m].
PureState env_contract(const PureState& joint, const PureState& env_bra);

// rho_s = tr_env |joint><joint| on the system factor.
DensityMatrix reduced_density_system(const PureState& joint, const Space& env);

cdouble inner(const PureState& a, const PureState& b);  // <a|b>

// Eigendecomposition of a Hermitian operator (cyclic complex Jacobi).
// values sorted descending; vectors row-major with eigenvector j in column j,
// so A = V diag(values) V^dag.
struct Eig {
  std::vector<double> values;
  std::vector<cdouble> vectors;
};
Eig hermitian_eig(const Operator& a);

double trace_norm(const Operator& a);  // sum |eigenvalue|, Hermitian input

// Hermitian square root with eigenvalue clamp: eigenvalues in [-psd_tol, 0)
// are treated as 0; below -psd_tol throws InvariantError.
Operator psd_sqrt(const Operator& a, double psd_tol = tol::psd);

}  // namespace herald

#endif  // HERALD_FOCK_HPP
