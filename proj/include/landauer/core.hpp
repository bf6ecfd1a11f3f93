// core.hpp — dense finite-dimensional quantum primitives: density matrices
// with tensor-factor metadata, Hermitian operators, unitaries, entropic
// functionals, and seeded random generators.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace landauer {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Tolerances shared across the library.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kSupportTol = 1e-10;   // support membership
inline constexpr double kLogZeroTol = 1e-15;   // below this, 0*log 0 = 0

// Kronecker products are rejected beyond this total dimension (settable).
Index max_total_dimension();
void set_max_total_dimension(Index d);

// x*log(x) with the 0*log 0 = 0 convention.
double xlogx(double x);

// Complex matrix with the given real diagonal.
Matrix diag_matrix(const RealVector& v);

// Shannon entropy of a nonnegative vector (need not be normalized), in nat.
double entropy_of_spectrum(const RealVector& p);

// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
struct EigenSystem {
  RealVector values;
  Matrix vectors;  // column i pairs with values[i]
};
EigenSystem hermitian_eig(const Matrix& m);

// ---------------------------------------------------------------------------
// Domain types. All are immutable after construction and validate their
// invariants eagerly, so every instance in flight is well-formed.
// ---------------------------------------------------------------------------

class HermitianOp {
 public:
  explicit HermitianOp(Matrix m);

  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  const RealVector& eigenvalues() const { return eig_.values; }  // descending
  const Matrix& eigenvectors() const { return eig_.vectors; }
  double min_eigenvalue() const { return eig_.values(dim() - 1); }
  double max_eigenvalue() const { return eig_.values(0); }
  double operator_norm() const;

 private:
  Matrix m_;
  EigenSystem eig_;
};

/// Density matrix with ordered tensor-factor dimensions.
class QState {
 public:
  QState(Matrix m, std::vector<Index> dims);
  explicit QState(Matrix m);  // single factor

  const Matrix& matrix() const { return m_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim() const { return m_.rows(); }
  Index num_factors() const { return static_cast<Index>(dims_.size()); }

  const RealVector& spectrum() const { return eig_.values; }  // descending, clamped
  const Matrix& eigenvectors() const { return eig_.vectors; }
  double lambda_min() const { return eig_.values(dim() - 1); }
  double lambda_max() const { return eig_.values(0); }
  Index rank(double tol = kSupportTol) const;

  // Same matrix, re-tagged factor structure; product(dims) must match.
  QState with_dims(std::vector<Index> dims) const;

 private:
  Matrix m_;
  std::vector<Index> dims_;
  EigenSystem eig_;
};

class Unitary {
 public:
  explicit Unitary(Matrix m);
  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

// ---------------------------------------------------------------------------
// State constructors
// ---------------------------------------------------------------------------

QState diagonal_state(const RealVector& probs, std::vector<Index> dims = {});
QState pure_state(const Vector& psi, std::vector<Index> dims = {});
QState maximally_mixed(Index d);
// |omega><omega| with |omega> = sum_i |ii>/sqrt(d), factor dims [d, d].
QState maximally_entangled_pair(Index d);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

QState tensor(const QState& a, const QState& b);
Unitary tensor(const Unitary& a, const Unitary& b);

// Reduced state on the given factors (kept in original order).
QState partial_trace(const QState& s, const std::vector<int>& keep);

// Reorder tensor factors: factor i of the result is factor perm[i] of s.
QState permute_factors(const QState& s, const std::vector<int>& perm);

Unitary identity_unitary(Index d);
// Unitary exchanging factors i and j (must agree in dimension).
Unitary swap_unitary(const std::vector<Index>& dims, int i, int j);
// Embed u (acting on the listed factors, in that order) into the full space.
Unitary expand_unitary(const Unitary& u, const std::vector<Index>& dims,
                       const std::vector<int>& targets);

QState apply_unitary(const QState& s, const Unitary& u);

// ---------------------------------------------------------------------------
// Entropic functionals (all in nat)
// ---------------------------------------------------------------------------

double von_neumann_entropy(const QState& s);

// D(sigma||rho); +infinity when sigma's support leaves rho's support.
double relative_entropy(const QState& sigma, const QState& rho);

// I(A:B) for the factor partition (part_a, part_b); the two sets must
// partition all factors of s.
double mutual_information(const QState& s, const std::vector<int>& part_a,
                          const std::vector<int>& part_b);

// S(A|B) = S(AB) - S(B), target factors conditioned on the rest.
double conditional_entropy(const QState& s, const std::vector<int>& target,
                           const std::vector<int>& condition);

// ---------------------------------------------------------------------------
// Seeded random generators (deterministic across platforms)
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform();       // [0, 1)
  double normal();        // standard Gaussian via Box-Muller
  Complex complex_normal();
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

QState random_state(Index d, Index rank, std::uint64_t seed);
Unitary haar_unitary(Index d, std::uint64_t seed);
HermitianOp random_hermitian(Index d, std::uint64_t seed, double scale = 1.0);

}  // namespace landauer
