#include "landauer/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace landauer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// populations of the thermal state over the (descending) eigenvalues of H
RealVector thermal_populations(const RealVector& energies, InverseTemp beta) {
  const Index d = energies.size();
  RealVector p = RealVector::Zero(d);
  if (beta.is_pos_inf() || beta.is_neg_inf()) {
    const double extreme =
        beta.is_pos_inf() ? energies.minCoeff() : energies.maxCoeff();
    Index count = 0;
    for (Index i = 0; i < d; ++i)
      if (std::abs(energies(i) - extreme) <= kDegeneracyTol) ++count;
    for (Index i = 0; i < d; ++i)
      if (std::abs(energies(i) - extreme) <= kDegeneracyTol)
        p(i) = 1.0 / static_cast<double>(count);
    return p;
  }
  // shift by the dominant level to avoid overflow
  const double ref = beta.value >= 0.0 ? energies.minCoeff() : energies.maxCoeff();
  double z = 0.0;
  for (Index i = 0; i < d; ++i) {
    p(i) = std::exp(-beta.value * (energies(i) - ref));
    z += p(i);
  }
  p /= z;
  return p;
}

}  // namespace

InverseTemp InverseTemp::plus_infinity() { return InverseTemp(kInf); }
InverseTemp InverseTemp::minus_infinity() { return InverseTemp(-kInf); }
bool InverseTemp::is_finite() const { return std::isfinite(value); }
bool InverseTemp::is_pos_inf() const { return std::isinf(value) && value > 0.0; }
bool InverseTemp::is_neg_inf() const { return std::isinf(value) && value < 0.0; }

bool is_trivial_hamiltonian(const HermitianOp& h) {
  const double spread = h.max_eigenvalue() - h.min_eigenvalue();
  return spread < 1e-10 * std::max(1.0, h.operator_norm());
}

QState thermal_state(const HermitianOp& h, InverseTemp beta) {
  RealVector p = thermal_populations(h.eigenvalues(), beta);
  const Matrix& v = h.eigenvectors();
  Matrix m = v * p.cast<Complex>().asDiagonal() * v.adjoint();
  return QState(std::move(m));
}

double thermal_energy(const HermitianOp& h, InverseTemp beta) {
  RealVector p = thermal_populations(h.eigenvalues(), beta);
  return p.dot(h.eigenvalues());
}

double thermal_entropy(const HermitianOp& h, InverseTemp beta) {
  return entropy_of_spectrum(thermal_populations(h.eigenvalues(), beta));
}

double thermal_variance(const HermitianOp& h, InverseTemp beta) {
  RealVector p = thermal_populations(h.eigenvalues(), beta);
  const RealVector& e = h.eigenvalues();
  const double mean = p.dot(e);
  double var = 0.0;
  for (Index i = 0; i < e.size(); ++i) var += p(i) * (e(i) - mean) * (e(i) - mean);
  return var;
}

double heat_capacity_T(const HermitianOp& h, InverseTemp beta) {
  if (!beta.is_finite()) return 0.0;  // var_gamma(gamma H) -> 0 at gamma = +-inf
  return beta.value * beta.value * thermal_variance(h, beta);
}

InverseTemp beta_of_energy(const HermitianOp& h, double energy) {
  if (is_trivial_hamiltonian(h))
    throw std::domain_error("beta_of_energy: undefined for H proportional to identity");
  const double e_min = h.min_eigenvalue();
  const double e_max = h.max_eigenvalue();
  const double range = e_max - e_min;
  if (energy < e_min - 1e-9 * range || energy > e_max + 1e-9 * range)
    throw std::invalid_argument("beta_of_energy: energy outside [E_min, E_max]");
  const double rel = (energy - e_min) / range;
  if (rel <= 1e-10) return InverseTemp::plus_infinity();
  if (rel >= 1.0 - 1e-10) return InverseTemp::minus_infinity();

  // coarse bisection on the compactified axis t = tanh(beta/scale)
  const double scale = std::max(1.0, range);
  auto energy_at = [&](double beta) { return thermal_energy(h, InverseTemp(beta)); };
  double t_lo = -1.0, t_hi = 1.0;  // E decreasing in beta: E(t=-1)=E_max, E(t=1)=E_min
  for (int it = 0; it < 90; ++it) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const double b = scale * std::atanh(std::clamp(t_mid, -1.0 + 1e-16, 1.0 - 1e-16));
    if (energy_at(b) > energy)
      t_lo = t_mid;
    else
      t_hi = t_mid;
    if (t_hi - t_lo < 1e-16) break;
  }
  double beta = scale * std::atanh(std::clamp(0.5 * (t_lo + t_hi), -1.0 + 1e-16, 1.0 - 1e-16));

  // Newton polish in raw beta; the tanh grid alone cannot resolve the target
  // to 1e-10*range once |beta| is large
  const double tol = 1e-12 * std::max(1.0, range);
  for (int it = 0; it < 60; ++it) {
    const double f = energy_at(beta) - energy;
    if (std::abs(f) <= tol) break;
    const double var = thermal_variance(h, InverseTemp(beta));
    if (!(var > 0.0)) break;
    const double step = f / var;  // dE/dbeta = -var
    if (!std::isfinite(step)) break;
    beta += std::clamp(step, -2.0 * scale, 2.0 * scale);
  }
  return InverseTemp(beta);
}

double free_energy(const QState& rho, const HermitianOp& h, InverseTemp beta) {
  if (rho.dim() != h.dim()) throw std::invalid_argument("free_energy: dimension mismatch");
  const double e = (h.matrix() * rho.matrix()).trace().real();
  const double s = von_neumann_entropy(rho);
  if (beta.is_finite()) return beta.value * e - s;
  if (e == 0.0) return -s;  // 0 * inf treated as 0
  return (e > 0.0) == beta.is_pos_inf() ? kInf : -kInf;
}

double relative_entropy_to_thermal(const QState& sigma, const HermitianOp& h,
                                   InverseTemp beta,
                                   const std::vector<Index>& masked_levels) {
  if (sigma.dim() != h.dim())
    throw std::invalid_argument("relative_entropy_to_thermal: dimension mismatch");

  if (!masked_levels.empty()) {
    double masked_pop = 0.0;
    for (Index i : masked_levels) masked_pop += sigma.matrix()(i, i).real();
    if (masked_pop > kSupportTol) return kInf;
    std::vector<bool> masked(static_cast<size_t>(h.dim()), false);
    for (Index i : masked_levels) masked[static_cast<size_t>(i)] = true;
    double e_ref = kInf;
    for (Index i = 0; i < h.dim(); ++i)
      if (!masked[static_cast<size_t>(i)])
        e_ref = std::min(e_ref, h.matrix()(i, i).real());
    double z = 0.0, energy = 0.0;
    for (Index i = 0; i < h.dim(); ++i) {
      if (masked[static_cast<size_t>(i)]) continue;
      z += std::exp(-beta.value * (h.matrix()(i, i).real() - e_ref));
      energy += h.matrix()(i, i).real() * sigma.matrix()(i, i).real();
    }
    return -von_neumann_entropy(sigma) + beta.value * (energy - e_ref) + std::log(z);
  }

  if (!beta.is_finite()) {
    // rho is the normalized projector onto the extreme eigenspace
    const double extreme = beta.is_pos_inf() ? h.min_eigenvalue() : h.max_eigenvalue();
    double inside = 0.0;
    Index degeneracy = 0;
    for (Index i = 0; i < h.dim(); ++i) {
      if (std::abs(h.eigenvalues()(i) - extreme) > kDegeneracyTol) continue;
      ++degeneracy;
      inside += (h.eigenvectors().col(i).adjoint() * sigma.matrix() * h.eigenvectors().col(i))
                    .value()
                    .real();
    }
    if (1.0 - inside > kSupportTol) return kInf;
    return -von_neumann_entropy(sigma) + std::log(static_cast<double>(degeneracy));
  }

  const double e_ref =
      beta.value >= 0.0 ? h.min_eigenvalue() : h.max_eigenvalue();
  double z = 0.0;
  for (Index i = 0; i < h.dim(); ++i)
    z += std::exp(-beta.value * (h.eigenvalues()(i) - e_ref));
  const double energy = (h.matrix() * sigma.matrix()).trace().real();
  const double d = -von_neumann_entropy(sigma) + beta.value * (energy - e_ref) + std::log(z);
  return d > 0.0 ? d : 0.0;
}

double integrate_beta_dE(const HermitianOp& h, double e_start, double e_end) {
  if (is_trivial_hamiltonian(h)) return 0.0;
  const double e_min = h.min_eigenvalue();
  const double e_max = h.max_eigenvalue();
  const double slop = 1e-9 * (e_max - e_min);
  for (double e : {e_start, e_end})
    if (e < e_min - slop || e > e_max + slop)
      throw std::invalid_argument("integrate_beta_dE: energy outside [E_min, E_max]");
  if (e_start == e_end) return 0.0;
  // d/dE S(E) = beta(E), so the integral is the entropy difference
  return thermal_entropy(h, beta_of_energy(h, std::clamp(e_end, e_min, e_max))) -
         thermal_entropy(h, beta_of_energy(h, std::clamp(e_start, e_min, e_max)));
}

ThermoProfile::ThermoProfile(HermitianOp h) : h_(std::move(h)) {}

// ---------------------------------------------------------------------------
// Reservoir
// ---------------------------------------------------------------------------

Reservoir::Reservoir(HermitianOp h, InverseTemp beta, std::vector<Index> state_dims)
    : h_(std::move(h)), beta_(beta), mask_(),
      state_(thermal_state(h_, beta_)) {
  if (!state_dims.empty()) state_ = state_.with_dims(std::move(state_dims));
}

namespace {

QState masked_thermal_state(const HermitianOp& h, InverseTemp beta,
                            const std::vector<Index>& mask) {
  const Index d = h.dim();
  if (!beta.is_finite() || beta.value <= 0.0)
    throw std::invalid_argument("Reservoir: masked levels require finite beta > 0");
  // masked levels are basis indices, so H must be diagonal in that basis
  Matrix off = h.matrix();
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("Reservoir: infinite mask requires a diagonal Hamiltonian");
  std::vector<bool> masked(static_cast<size_t>(d), false);
  for (Index i : mask) {
    if (i < 0 || i >= d) throw std::invalid_argument("Reservoir: mask index out of range");
    masked[static_cast<size_t>(i)] = true;
  }
  double e_ref = kInf;
  for (Index i = 0; i < d; ++i)
    if (!masked[static_cast<size_t>(i)]) e_ref = std::min(e_ref, h.matrix()(i, i).real());
  if (!std::isfinite(e_ref))
    throw std::invalid_argument("Reservoir: all levels masked");
  RealVector p = RealVector::Zero(d);
  double z = 0.0;
  for (Index i = 0; i < d; ++i) {
    if (masked[static_cast<size_t>(i)]) continue;
    p(i) = std::exp(-beta.value * (h.matrix()(i, i).real() - e_ref));
    z += p(i);
  }
  p /= z;
  return diagonal_state(p);
}

}  // namespace

Reservoir::Reservoir(HermitianOp h, InverseTemp beta, std::vector<Index> masked_levels,
                     std::vector<Index> state_dims)
    : h_(std::move(h)), beta_(beta), mask_(std::move(masked_levels)),
      state_(mask_.empty() ? thermal_state(h_, beta_)
                           : masked_thermal_state(h_, beta_, mask_)) {
  if (!state_dims.empty()) state_ = state_.with_dims(std::move(state_dims));
}

PythagorasDecomposition pythagoras_decompose(const QState& rho_prime_R, const Reservoir& r) {
  if (rho_prime_R.dim() != r.dim())
    throw std::invalid_argument("pythagoras_decompose: dimension mismatch");
  if (r.has_mask())
    throw std::invalid_argument("pythagoras_decompose: masked reservoirs not supported");

  const HermitianOp& h = r.hamiltonian();
  PythagorasDecomposition out{};
  out.total = relative_entropy_to_thermal(rho_prime_R, h, r.beta());

  if (is_trivial_hamiltonian(h)) {
    // all thermal states coincide; the heat is forced to 0
    out.beta_prime = r.beta();
    out.thermal = 0.0;
    out.nonthermal = out.total;
    return out;
  }

  double e_prime = (h.matrix() * rho_prime_R.matrix()).trace().real();
  e_prime = std::clamp(e_prime, h.min_eigenvalue(), h.max_eigenvalue());
  out.beta_prime = beta_of_energy(h, e_prime);
  out.nonthermal = relative_entropy_to_thermal(rho_prime_R, h, out.beta_prime);
  out.thermal = relative_entropy_to_thermal(thermal_state(h, out.beta_prime), h, r.beta());
  return out;
}

}  // namespace landauer
