#include "landauer/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace landauer {

namespace {

std::atomic<Index> g_max_total_dim{4096};

Index product_of(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

void check_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
}

double hermitian_deviation(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Linear-index strides for a factor list, row-major (factor 0 slowest).
std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> st(dims.size());
  Index acc = 1;
  for (int f = static_cast<int>(dims.size()) - 1; f >= 0; --f) {
    st[f] = acc;
    acc *= dims[f];
  }
  return st;
}

void check_factor_indices(const std::vector<int>& idx, Index n_factors, const char* what) {
  std::vector<bool> seen(static_cast<size_t>(n_factors), false);
  for (int f : idx) {
    if (f < 0 || f >= n_factors)
      throw std::invalid_argument(std::string(what) + ": factor index out of range");
    if (seen[static_cast<size_t>(f)])
      throw std::invalid_argument(std::string(what) + ": duplicate factor index");
    seen[static_cast<size_t>(f)] = true;
  }
}

}  // namespace

Index max_total_dimension() { return g_max_total_dim.load(); }
void set_max_total_dimension(Index d) {
  if (d < 1) throw std::invalid_argument("max_total_dimension must be >= 1");
  g_max_total_dim.store(d);
}

double xlogx(double x) {
  if (x <= kLogZeroTol) return 0.0;
  return x * std::log(x);
}

Matrix diag_matrix(const RealVector& v) {
  Matrix m = Matrix::Zero(v.size(), v.size());
  for (Index i = 0; i < v.size(); ++i) m(i, i) = v(i);
  return m;
}

double entropy_of_spectrum(const RealVector& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) s -= xlogx(p(i));
  return s;
}

EigenSystem hermitian_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian eigendecomposition failed");
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

// ---------------------------------------------------------------------------
// HermitianOp
// ---------------------------------------------------------------------------

HermitianOp::HermitianOp(Matrix m) : m_(std::move(m)) {
  check_square(m_, "HermitianOp");
  if (!m_.allFinite()) throw std::invalid_argument("HermitianOp: entries must be finite");
  if (hermitian_deviation(m_) > kHermitianTol)
    throw std::invalid_argument("HermitianOp: matrix is not Hermitian");
  m_ = ((m_ + m_.adjoint()) / 2.0).eval();
  eig_ = hermitian_eig(m_);
}

double HermitianOp::operator_norm() const {
  return std::max(std::abs(min_eigenvalue()), std::abs(max_eigenvalue()));
}

// ---------------------------------------------------------------------------
// QState
// ---------------------------------------------------------------------------

QState::QState(Matrix m, std::vector<Index> dims) : m_(std::move(m)), dims_(std::move(dims)) {
  check_square(m_, "QState");
  if (!m_.allFinite()) throw std::invalid_argument("QState: entries must be finite");
  if (dims_.empty()) dims_ = {m_.rows()};
  for (Index d : dims_)
    if (d < 1) throw std::invalid_argument("QState: factor dimensions must be >= 1");
  if (product_of(dims_) != m_.rows())
    throw std::invalid_argument("QState: product of factor dims must equal matrix dimension");
  if (hermitian_deviation(m_) > kHermitianTol)
    throw std::invalid_argument("QState: matrix is not Hermitian");
  m_ = ((m_ + m_.adjoint()) / 2.0).eval();
  double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol)
    throw std::invalid_argument("QState: trace deviates from 1 by " + std::to_string(tr - 1.0));
  eig_ = hermitian_eig(m_);
  for (Index i = 0; i < eig_.values.size(); ++i) {
    if (eig_.values(i) < -kPsdTol)
      throw std::invalid_argument("QState: negative eigenvalue " + std::to_string(eig_.values(i)));
    if (eig_.values(i) < 0.0) eig_.values(i) = 0.0;
  }
}

QState::QState(Matrix m) : QState(std::move(m), {}) {}

Index QState::rank(double tol) const {
  Index r = 0;
  for (Index i = 0; i < eig_.values.size(); ++i)
    if (eig_.values(i) > tol) ++r;
  return r;
}

QState QState::with_dims(std::vector<Index> dims) const { return QState(m_, std::move(dims)); }

// ---------------------------------------------------------------------------
// Unitary
// ---------------------------------------------------------------------------

Unitary::Unitary(Matrix m) : m_(std::move(m)) {
  check_square(m_, "Unitary");
  if (!m_.allFinite()) throw std::invalid_argument("Unitary: entries must be finite");
  Matrix gram = m_.adjoint() * m_;
  gram.diagonal().array() -= 1.0;
  if (gram.cwiseAbs().maxCoeff() > kUnitaryTol)
    throw std::invalid_argument("Unitary: U^dag U deviates from identity");
}

// ---------------------------------------------------------------------------
// State constructors
// ---------------------------------------------------------------------------

QState diagonal_state(const RealVector& probs, std::vector<Index> dims) {
  Matrix m = Matrix::Zero(probs.size(), probs.size());
  for (Index i = 0; i < probs.size(); ++i) m(i, i) = probs(i);
  return QState(std::move(m), std::move(dims));
}

QState pure_state(const Vector& psi, std::vector<Index> dims) {
  double n = psi.norm();
  if (n < 1e-14) throw std::invalid_argument("pure_state: zero vector");
  Vector v = psi / n;
  return QState(v * v.adjoint(), std::move(dims));
}

QState maximally_mixed(Index d) {
  return QState(Matrix::Identity(d, d) / static_cast<double>(d));
}

QState maximally_entangled_pair(Index d) {
  Vector psi = Vector::Zero(d * d);
  for (Index i = 0; i < d; ++i) psi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return pure_state(psi, {d, d});
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

QState tensor(const QState& a, const QState& b) {
  Index total = a.dim() * b.dim();
  if (total > max_total_dimension())
    throw std::length_error("tensor: total dimension " + std::to_string(total) +
                            " exceeds limit " + std::to_string(max_total_dimension()));
  std::vector<Index> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  Matrix m = Eigen::kroneckerProduct(a.matrix(), b.matrix());
  return QState(std::move(m), std::move(dims));
}

Unitary tensor(const Unitary& a, const Unitary& b) {
  return Unitary(Eigen::kroneckerProduct(a.matrix(), b.matrix()));
}

QState partial_trace(const QState& s, const std::vector<int>& keep) {
  const auto& dims = s.dims();
  const Index nf = s.num_factors();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be nonempty");
  check_factor_indices(keep, nf, "partial_trace");

  std::vector<int> keep_sorted(keep);
  std::sort(keep_sorted.begin(), keep_sorted.end());
  std::vector<bool> kept(static_cast<size_t>(nf), false);
  for (int f : keep_sorted) kept[static_cast<size_t>(f)] = true;
  std::vector<int> traced;
  for (int f = 0; f < nf; ++f)
    if (!kept[static_cast<size_t>(f)]) traced.push_back(f);

  const auto strides = strides_of(dims);
  std::vector<Index> keep_dims, traced_dims;
  for (int f : keep_sorted) keep_dims.push_back(dims[static_cast<size_t>(f)]);
  for (int f : traced) traced_dims.push_back(dims[static_cast<size_t>(f)]);
  const Index dk = product_of(keep_dims);
  const Index dt = product_of(traced_dims);

  // base offsets of each kept (resp. traced) multi-index in the full space
  std::vector<Index> keep_offset(static_cast<size_t>(dk), 0);
  {
    std::vector<Index> digit(keep_dims.size(), 0);
    for (Index lin = 0; lin < dk; ++lin) {
      Index off = 0;
      for (size_t q = 0; q < keep_dims.size(); ++q)
        off += digit[q] * strides[static_cast<size_t>(keep_sorted[q])];
      keep_offset[static_cast<size_t>(lin)] = off;
      for (int q = static_cast<int>(keep_dims.size()) - 1; q >= 0; --q) {
        if (++digit[static_cast<size_t>(q)] < keep_dims[static_cast<size_t>(q)]) break;
        digit[static_cast<size_t>(q)] = 0;
      }
    }
  }
  std::vector<Index> traced_offset(static_cast<size_t>(dt), 0);
  {
    std::vector<Index> digit(traced_dims.size(), 0);
    for (Index lin = 0; lin < dt; ++lin) {
      Index off = 0;
      for (size_t q = 0; q < traced_dims.size(); ++q)
        off += digit[q] * strides[static_cast<size_t>(traced[q])];
      traced_offset[static_cast<size_t>(lin)] = off;
      for (int q = static_cast<int>(traced_dims.size()) - 1; q >= 0; --q) {
        if (++digit[static_cast<size_t>(q)] < traced_dims[static_cast<size_t>(q)]) break;
        digit[static_cast<size_t>(q)] = 0;
      }
    }
  }

  const Matrix& full = s.matrix();
  Matrix out = Matrix::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r) {
    for (Index c = 0; c < dk; ++c) {
      Complex acc(0.0, 0.0);
      for (Index t = 0; t < dt; ++t) {
        acc += full(keep_offset[static_cast<size_t>(r)] + traced_offset[static_cast<size_t>(t)],
                    keep_offset[static_cast<size_t>(c)] + traced_offset[static_cast<size_t>(t)]);
      }
      out(r, c) = acc;
    }
  }
  return QState(std::move(out), keep_dims);
}

namespace {

// old linear index corresponding to each new linear index under factor reorder
std::vector<Index> reorder_map(const std::vector<Index>& dims, const std::vector<int>& perm) {
  const Index total = product_of(dims);
  std::vector<Index> new_dims;
  for (int f : perm) new_dims.push_back(dims[static_cast<size_t>(f)]);
  const auto old_strides = strides_of(dims);
  std::vector<Index> map(static_cast<size_t>(total), 0);
  std::vector<Index> digit(new_dims.size(), 0);
  for (Index lin = 0; lin < total; ++lin) {
    Index old_lin = 0;
    for (size_t q = 0; q < new_dims.size(); ++q)
      old_lin += digit[q] * old_strides[static_cast<size_t>(perm[q])];
    map[static_cast<size_t>(lin)] = old_lin;
    for (int q = static_cast<int>(new_dims.size()) - 1; q >= 0; --q) {
      if (++digit[static_cast<size_t>(q)] < new_dims[static_cast<size_t>(q)]) break;
      digit[static_cast<size_t>(q)] = 0;
    }
  }
  return map;
}

}  // namespace

QState permute_factors(const QState& s, const std::vector<int>& perm) {
  if (static_cast<Index>(perm.size()) != s.num_factors())
    throw std::invalid_argument("permute_factors: permutation size mismatch");
  check_factor_indices(perm, s.num_factors(), "permute_factors");
  const auto map = reorder_map(s.dims(), perm);
  const Index total = s.dim();
  Matrix out(total, total);
  for (Index r = 0; r < total; ++r)
    for (Index c = 0; c < total; ++c)
      out(r, c) = s.matrix()(map[static_cast<size_t>(r)], map[static_cast<size_t>(c)]);
  std::vector<Index> new_dims;
  for (int f : perm) new_dims.push_back(s.dims()[static_cast<size_t>(f)]);
  return QState(std::move(out), std::move(new_dims));
}

Unitary identity_unitary(Index d) { return Unitary(Matrix::Identity(d, d)); }

Unitary swap_unitary(const std::vector<Index>& dims, int i, int j) {
  const Index nf = static_cast<Index>(dims.size());
  if (i < 0 || j < 0 || i >= nf || j >= nf || i == j)
    throw std::invalid_argument("swap_unitary: bad factor indices");
  if (dims[static_cast<size_t>(i)] != dims[static_cast<size_t>(j)])
    throw std::invalid_argument("swap_unitary: swapped factors must have equal dimension");
  std::vector<int> perm(dims.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  const auto map = reorder_map(dims, perm);
  const Index total = product_of(dims);
  Matrix u = Matrix::Zero(total, total);
  // basis |x_new> = |x_old with factors i,j exchanged>
  for (Index lin = 0; lin < total; ++lin) u(lin, map[static_cast<size_t>(lin)]) = 1.0;
  return Unitary(std::move(u));
}

Unitary expand_unitary(const Unitary& u, const std::vector<Index>& dims,
                       const std::vector<int>& targets) {
  const Index nf = static_cast<Index>(dims.size());
  check_factor_indices(targets, nf, "expand_unitary");
  Index d_t = 1;
  for (int f : targets) d_t *= dims[static_cast<size_t>(f)];
  if (u.dim() != d_t)
    throw std::invalid_argument("expand_unitary: unitary dimension does not match target factors");
  std::vector<int> perm(targets);
  for (int f = 0; f < nf; ++f)
    if (std::find(targets.begin(), targets.end(), f) == targets.end()) perm.push_back(f);
  // map: new order = [targets..., rest...]; new linear index -> old linear index
  const auto map = reorder_map(dims, perm);
  const Index total = product_of(dims);
  const Index d_rest = total / d_t;
  Matrix big = Matrix::Zero(total, total);
  for (Index r = 0; r < d_t; ++r) {
    for (Index c = 0; c < d_t; ++c) {
      const Complex v = u.matrix()(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      for (Index t = 0; t < d_rest; ++t)
        big(map[static_cast<size_t>(r * d_rest + t)], map[static_cast<size_t>(c * d_rest + t)]) = v;
    }
  }
  return Unitary(std::move(big));
}

QState apply_unitary(const QState& s, const Unitary& u) {
  if (u.dim() != s.dim()) throw std::invalid_argument("apply_unitary: dimension mismatch");
  Matrix m = u.matrix() * s.matrix() * u.matrix().adjoint();
  return QState(std::move(m), s.dims());
}

// ---------------------------------------------------------------------------
// Entropic functionals
// ---------------------------------------------------------------------------

double von_neumann_entropy(const QState& s) { return entropy_of_spectrum(s.spectrum()); }

double relative_entropy(const QState& sigma, const QState& rho) {
  if (sigma.dim() != rho.dim())
    throw std::invalid_argument("relative_entropy: dimension mismatch");

  const RealVector& q = rho.spectrum();
  const Matrix& v = rho.eigenvectors();

  // support test: significant sigma-eigenvectors must avoid the rho-kernel
  std::vector<Index> kernel;
  for (Index j = 0; j < q.size(); ++j)
    if (q(j) <= kSupportTol) kernel.push_back(j);
  if (!kernel.empty()) {
    const RealVector& p = sigma.spectrum();
    const Matrix& u = sigma.eigenvectors();
    for (Index i = 0; i < p.size(); ++i) {
      if (p(i) <= kSupportTol) continue;
      double overlap = 0.0;
      for (Index j : kernel) overlap += std::norm(v.col(j).dot(u.col(i)));
      if (overlap > kSupportTol) return std::numeric_limits<double>::infinity();
    }
  }

  // two-tier tolerance: support membership was judged at kSupportTol above,
  // but eigenvalues down to kLogZeroTol still contribute to the sum
  double tr_sigma_log_sigma = -von_neumann_entropy(sigma);
  double tr_sigma_log_rho = 0.0;
  for (Index j = 0; j < q.size(); ++j) {
    if (q(j) <= kLogZeroTol) continue;
    double w = (v.col(j).adjoint() * sigma.matrix() * v.col(j)).value().real();
    if (w < 0.0) w = 0.0;
    tr_sigma_log_rho += w * std::log(q(j));
  }
  double d = tr_sigma_log_sigma - tr_sigma_log_rho;
  return d > 0.0 ? d : 0.0;  // Klein: clip eigensolver noise
}

namespace {

void check_partition(const QState& s, const std::vector<int>& a, const std::vector<int>& b,
                     const char* what) {
  std::vector<int> all(a);
  all.insert(all.end(), b.begin(), b.end());
  check_factor_indices(all, s.num_factors(), what);
  if (static_cast<Index>(all.size()) != s.num_factors())
    throw std::invalid_argument(std::string(what) + ": sets must partition all factors");
}

}  // namespace

double mutual_information(const QState& s, const std::vector<int>& part_a,
                          const std::vector<int>& part_b) {
  check_partition(s, part_a, part_b, "mutual_information");
  double sa = von_neumann_entropy(partial_trace(s, part_a));
  double sb = von_neumann_entropy(partial_trace(s, part_b));
  return sa + sb - von_neumann_entropy(s);
}

double conditional_entropy(const QState& s, const std::vector<int>& target,
                           const std::vector<int>& condition) {
  check_partition(s, target, condition, "conditional_entropy");
  if (condition.empty()) return von_neumann_entropy(s);
  return von_neumann_entropy(s) - von_neumann_entropy(partial_trace(s, condition));
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

double Rng::uniform() {
  // 53-bit mantissa mapping; avoids implementation-defined distributions
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  double re = normal();
  double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

QState random_state(Index d, Index rank, std::uint64_t seed) {
  if (d < 1 || rank < 1 || rank > d)
    throw std::invalid_argument("random_state: need 1 <= rank <= d");
  Rng rng(seed);
  Matrix g(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = rng.complex_normal();
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return QState(std::move(m));
}

Unitary haar_unitary(Index d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("haar_unitary: need d >= 1");
  Rng rng(seed);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix phases so the distribution is Haar, not just unitary
  for (Index j = 0; j < d; ++j) {
    Complex rj = r(j, j);
    Complex phase = std::abs(rj) > 0.0 ? rj / std::abs(rj) : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return Unitary(std::move(q));
}

HermitianOp random_hermitian(Index d, std::uint64_t seed, double scale) {
  Rng rng(seed);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  Matrix h = (g + g.adjoint()) * (scale / 2.0);
  return HermitianOp(std::move(h));
}

}  // namespace landauer
