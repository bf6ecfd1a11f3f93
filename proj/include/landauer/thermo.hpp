// thermo.hpp — thermodynamics of finite-dimensional systems: thermal states
// at extended-real inverse temperature, the E(beta)/S(beta) profile and its
// inverse beta(E), free energy, and the Pythagoras split of relative entropy.

#pragma once

#include "landauer/core.hpp"

#include <optional>
#include <vector>

namespace landauer {

// Extended-real inverse temperature, beta in [-inf, +inf].
struct InverseTemp {
  double value = 0.0;

  InverseTemp() = default;
  explicit InverseTemp(double v) : value(v) {}
  static InverseTemp plus_infinity();
  static InverseTemp minus_infinity();

  bool is_finite() const;
  bool is_pos_inf() const;
  bool is_neg_inf() const;
};

// Eigenvalues within this of the extreme are grouped into the ground/top space
// when evaluating thermal states at beta = +-infinity.
inline constexpr double kDegeneracyTol = 1e-9;

// H proportional to identity, judged at spectral spread 1e-10 * max(1, ||H||).
bool is_trivial_hamiltonian(const HermitianOp& h);

QState thermal_state(const HermitianOp& h, InverseTemp beta);

double thermal_energy(const HermitianOp& h, InverseTemp beta);
double thermal_entropy(const HermitianOp& h, InverseTemp beta);
double thermal_variance(const HermitianOp& h, InverseTemp beta);

// Heat capacity C(T) = var_beta(beta H); 0 at beta = 0 and beta = +-infinity.
double heat_capacity_T(const HermitianOp& h, InverseTemp beta);

// Inverse of the strictly decreasing E(beta). Requires H not proportional to
// the identity; E within 1e-10 (relative to the spectral range) of an endpoint
// maps to the corresponding infinite temperature.
InverseTemp beta_of_energy(const HermitianOp& h, double energy);

// Dimensionless free energy beta*F = beta*tr[H rho] - S(rho), extended real.
double free_energy(const QState& rho, const HermitianOp& h, InverseTemp beta);

// D(sigma || rho_beta) through the exact representation
// log rho_beta = -beta H - log Z, which stays accurate when thermal
// populations underflow the eigensolver resolution. Handles beta = +-inf
// (infinite when sigma leaves the extreme eigenspace) and masked levels.
double relative_entropy_to_thermal(const QState& sigma, const HermitianOp& h,
                                   InverseTemp beta,
                                   const std::vector<Index>& masked_levels = {});

// Integral of beta(E) dE, evaluated as the thermal entropy difference
// S(beta(e_end)) - S(beta(e_start)); defined as 0 when H is trivial.
double integrate_beta_dE(const HermitianOp& h, double e_start, double e_end);

// Evaluator bundle for one Hamiltonian.
class ThermoProfile {
 public:
  explicit ThermoProfile(HermitianOp h);

  double e_min() const { return h_.min_eigenvalue(); }
  double e_max() const { return h_.max_eigenvalue(); }
  double energy(InverseTemp beta) const { return thermal_energy(h_, beta); }
  double entropy(InverseTemp beta) const { return thermal_entropy(h_, beta); }
  double variance(InverseTemp beta) const { return thermal_variance(h_, beta); }
  InverseTemp beta_of_energy(double e) const { return landauer::beta_of_energy(h_, e); }
  const HermitianOp& hamiltonian() const { return h_; }

 private:
  HermitianOp h_;
};

// Thermal reservoir: Hamiltonian, inverse temperature, cached thermal state,
// and an optional set of basis levels whose energy is formally infinite
// (those levels carry exactly zero population; requires diagonal H, beta > 0).
class Reservoir {
 public:
  Reservoir(HermitianOp h, InverseTemp beta, std::vector<Index> state_dims = {});
  Reservoir(HermitianOp h, InverseTemp beta, std::vector<Index> masked_levels,
            std::vector<Index> state_dims);

  const HermitianOp& hamiltonian() const { return h_; }
  InverseTemp beta() const { return beta_; }
  const QState& state() const { return state_; }
  Index dim() const { return h_.dim(); }
  const std::vector<Index>& infinite_mask() const { return mask_; }
  bool has_mask() const { return !mask_.empty(); }

 private:
  HermitianOp h_;
  InverseTemp beta_;
  std::vector<Index> mask_;
  QState state_;
};

struct PythagorasDecomposition {
  double total;       // D(rho'_R || rho_R), may be +inf
  double nonthermal;  // D(rho'_R || rho'_{R,th}), always finite
  double thermal;     // D(rho'_{R,th} || rho_R), may be +inf
  InverseTemp beta_prime;
};

PythagorasDecomposition pythagoras_decompose(const QState& rho_prime_R, const Reservoir& r);

}  // namespace landauer
