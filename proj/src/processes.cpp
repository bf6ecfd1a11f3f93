#include "landauer/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace landauer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaskPopulationTol = 1e-12;

std::vector<int> iota_range(int from, int to) {  // [from, to)
  std::vector<int> v(static_cast<size_t>(to - from));
  std::iota(v.begin(), v.end(), from);
  return v;
}

double trace_product(const Matrix& a, const Matrix& b) {
  return (a * b).trace().real();
}

// population of rho outside the ground (beta=+inf) or top (beta=-inf) space
double mass_outside_extreme_space(const HermitianOp& h, const QState& rho, bool ground) {
  const RealVector& e = h.eigenvalues();
  const double extreme = ground ? h.min_eigenvalue() : h.max_eigenvalue();
  double inside = 0.0;
  for (Index i = 0; i < e.size(); ++i) {
    if (std::abs(e(i) - extreme) > kDegeneracyTol) continue;
    inside += (h.eigenvectors().col(i).adjoint() * rho.matrix() * h.eigenvectors().col(i))
                  .value()
                  .real();
  }
  return std::max(0.0, 1.0 - inside);
}

double masked_population(const Reservoir& r, const QState& rho) {
  double pop = 0.0;
  for (Index i : r.infinite_mask()) pop += rho.matrix()(i, i).real();
  return pop;
}

// heat over the unmasked levels only (diagonal H whenever a mask is present)
double finite_heat(const Reservoir& r, const QState& rho_R_final) {
  if (!r.has_mask())
    return trace_product(r.hamiltonian().matrix(), rho_R_final.matrix()) -
           trace_product(r.hamiltonian().matrix(), r.state().matrix());
  std::vector<bool> masked(static_cast<size_t>(r.dim()), false);
  for (Index i : r.infinite_mask()) masked[static_cast<size_t>(i)] = true;
  double dq = 0.0;
  for (Index i = 0; i < r.dim(); ++i) {
    if (masked[static_cast<size_t>(i)]) continue;
    dq += r.hamiltonian().matrix()(i, i).real() *
          (rho_R_final.matrix()(i, i).real() - r.state().matrix()(i, i).real());
  }
  return dq;
}

// extended-real beta*DeltaQ, honoring the masked-level and beta=+-inf rules
double extended_beta_delta_q(const Reservoir& r, const QState& rho_R_final, double delta_q) {
  if (r.has_mask()) {
    if (masked_population(r, rho_R_final) > kMaskPopulationTol) return kInf;
    return r.beta().value * delta_q;
  }
  if (r.beta().is_finite()) return r.beta().value * delta_q;
  // beta = +-inf: infinite iff the final state leaves the extreme eigenspace
  const double outside = mass_outside_extreme_space(r.hamiltonian(), rho_R_final,
                                                    r.beta().is_pos_inf());
  return outside > kSupportTol ? kInf : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// run_process
// ---------------------------------------------------------------------------

ProcessReport run_process(const ProcessSpec& spec) {
  const QState& rho_S = spec.rho_S;
  const Reservoir& res = spec.reservoir;
  const QState& rho_R = res.state();

  const QState joint = tensor(rho_S, rho_R);
  if (spec.u.dim() != joint.dim())
    throw std::invalid_argument("run_process: unitary dimension does not match S x R");
  const QState after = apply_unitary(joint, spec.u);

  const int n_s = static_cast<int>(rho_S.num_factors());
  const int n_tot = static_cast<int>(joint.num_factors());
  QState rho_S_final = partial_trace(after, iota_range(0, n_s));
  QState rho_R_final = partial_trace(after, iota_range(n_s, n_tot));

  ProcessReport rep{.delta_S = 0,
                    .delta = 0,
                    .delta_Q = 0,
                    .beta_delta_Q = 0,
                    .mutual_info_final = 0,
                    .rel_ent_final = 0,
                    .equality_residual = 0,
                    .second_law_residual = 0,
                    .margins = {},
                    .rho_S_final = std::move(rho_S_final),
                    .rho_R_final = std::move(rho_R_final)};

  const double s_S = von_neumann_entropy(rho_S);
  const double s_S_final = von_neumann_entropy(rep.rho_S_final);
  const double s_R = von_neumann_entropy(rho_R);
  const double s_R_final = von_neumann_entropy(rep.rho_R_final);

  rep.delta_S = s_S - s_S_final;
  rep.delta = s_R_final - s_R;
  rep.mutual_info_final = s_S_final + s_R_final - von_neumann_entropy(after);
  // the exact log of a thermal state keeps D accurate when populations are
  // below eigensolver resolution
  rep.rel_ent_final = relative_entropy_to_thermal(rep.rho_R_final, res.hamiltonian(),
                                                  res.beta(), res.infinite_mask());

  const double dq_finite = finite_heat(res, rep.rho_R_final);
  rep.beta_delta_Q = extended_beta_delta_q(res, rep.rho_R_final, dq_finite);
  rep.delta_Q = (res.has_mask() && std::isinf(rep.beta_delta_Q)) ? kInf : dq_finite;

  // Theorem-1 balance; both sides may be consistently infinite
  const double rhs = rep.delta_S + rep.mutual_info_final + rep.rel_ent_final;
  if (std::isinf(rep.beta_delta_Q) || std::isinf(rhs))
    rep.equality_residual = (std::isinf(rep.beta_delta_Q) && std::isinf(rhs)) ? 0.0 : kInf;
  else
    rep.equality_residual = std::abs(rep.beta_delta_Q - rhs);
  rep.second_law_residual = std::abs(rep.delta - rep.delta_S - rep.mutual_info_final);

  rep.margins.landauer = std::isinf(rep.beta_delta_Q) ? kInf : rep.beta_delta_Q - rep.delta_S;

  const double bound = finite_size_bound(rep.delta_S, BoundParams{res.dim(), NChoice::exact});
  if (std::isinf(rep.beta_delta_Q) || std::isinf(bound))
    rep.margins.finite_size = (std::isinf(rep.beta_delta_Q) && std::isinf(bound))
                               ? 0.0
                               : (std::isinf(rep.beta_delta_Q) ? kInf : -kInf);
  else
    rep.margins.finite_size = rep.beta_delta_Q - bound;

  if (rep.beta_delta_Q <= 0.0) {
    const HeatExtractionCheck t3 = deltaQ_bound_check(rep.delta, rep.beta_delta_Q, res.dim());
    rep.margins.heat_extraction = t3.margin;
  }

  const InverseTemp beta = res.beta();
  if (beta.value >= 0.0) {
    double factor;
    if (res.has_mask()) {
      factor = 0.0;  // formally infinite levels, e^{-beta(Hmax-Hmin)} = 0
    } else {
      const double gap = res.hamiltonian().max_eigenvalue() - res.hamiltonian().min_eigenvalue();
      if (beta.is_pos_inf())
        factor = gap > kDegeneracyTol ? 0.0 : 1.0;
      else
        factor = std::exp(-beta.value * gap);
    }
    rep.margins.pureness = rep.rho_S_final.lambda_min() - factor * rho_S.lambda_min();
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

EqualityDiagnosis check_equality_case(const ProcessReport& report, const ProcessSpec& spec) {
  EqualityDiagnosis d{};
  d.gap = std::isinf(report.beta_delta_Q) ? kInf
                                          : std::abs(report.beta_delta_Q - report.delta_S);
  d.equality = d.gap <= kEqualityTol;
  d.reservoir_unchanged =
      (report.rho_R_final.matrix() - spec.reservoir.state().matrix()).cwiseAbs().maxCoeff() <=
      1e-6;
  d.mutual_info_zero = report.mutual_info_final <= 1e-6;
  d.spectra_match =
      (report.rho_S_final.spectrum() - spec.rho_S.spectrum()).cwiseAbs().maxCoeff() <= 1e-6;
  return d;
}

std::optional<double> pureness_bound_margin(const ProcessSpec&,
                                            const ProcessReport& report) {
  return report.margins.pureness;
}

double integral_version_residual(const ProcessSpec& spec, const ProcessReport& report) {
  const Reservoir& res = spec.reservoir;
  if (res.has_mask())
    throw std::invalid_argument("integral_version_residual: masked reservoirs not supported");
  const PythagorasDecomposition py = pythagoras_decompose(report.rho_R_final, res);
  const HermitianOp& h = res.hamiltonian();
  double integral = 0.0;
  if (!is_trivial_hamiltonian(h)) {
    const double e_init = trace_product(h.matrix(), res.state().matrix());
    const double e_final = trace_product(h.matrix(), report.rho_R_final.matrix());
    integral = integrate_beta_dE(h, std::clamp(e_init, h.min_eigenvalue(), h.max_eigenvalue()),
                                 std::clamp(e_final, h.min_eigenvalue(), h.max_eigenvalue()));
  }
  const double lhs = report.delta_S + report.mutual_info_final + py.nonthermal;
  return std::abs(lhs - integral);
}

// ---------------------------------------------------------------------------
// Swap constructions
// ---------------------------------------------------------------------------

SwapProcess build_swap_process(const QState& rho_S, const QState& rho_R_target,
                               const SwapPartition& part) {
  if (part.d_sw < 1 || part.d_s2 < 1 || part.d_r2 < 1)
    throw std::invalid_argument("build_swap_process: partition dims must be >= 1");
  if (rho_S.dim() != part.d_sw * part.d_s2)
    throw std::invalid_argument("build_swap_process: system dim does not match partition");
  if (rho_R_target.dim() != part.d_sw * part.d_r2)
    throw std::invalid_argument("build_swap_process: reservoir dim does not match partition");
  if (rho_R_target.lambda_min() <= 1e-12)
    throw std::invalid_argument("build_swap_process: target reservoir state must be full rank");

  // every full-rank state is thermal: H = -log(rho_R) at beta = 1
  const Matrix& v = rho_R_target.eigenvectors();
  RealVector energies(rho_R_target.dim());
  for (Index i = 0; i < energies.size(); ++i) energies(i) = -std::log(rho_R_target.spectrum()(i));
  Matrix h = v * energies.cast<Complex>().asDiagonal() * v.adjoint();
  Reservoir reservoir(HermitianOp(std::move(h)), InverseTemp(1.0), {part.d_sw, part.d_r2});

  QState sys = rho_S.with_dims({part.d_sw, part.d_s2});
  const std::vector<Index> joint_dims{part.d_sw, part.d_s2, part.d_sw, part.d_r2};
  Unitary u = swap_unitary(joint_dims, 0, 2);

  SwapProcess out{ProcessSpec{sys, reservoir, std::move(u)}, part, 0, 0, 0, 0};

  const QState& rho_R = reservoir.state();
  const QState rho_s1 = partial_trace(sys, {0});
  const QState rho_s2 = partial_trace(sys, {1});
  const QState rho_r1 = partial_trace(rho_R, {0});
  const QState rho_r2 = partial_trace(rho_R, {1});

  out.delta_S = von_neumann_entropy(sys) - von_neumann_entropy(rho_s2) -
                von_neumann_entropy(rho_r1);
  out.delta = -von_neumann_entropy(rho_R) + von_neumann_entropy(rho_r2) +
              von_neumann_entropy(rho_s1);
  const Matrix swapped_in = Eigen::kroneckerProduct(rho_s1.matrix(), rho_r2.matrix());
  out.delta_Q = trace_product(reservoir.hamiltonian().matrix(), swapped_in) -
                trace_product(reservoir.hamiltonian().matrix(), rho_R.matrix());
  out.mutual_info_final =
      mutual_information(sys, {0}, {1}) + mutual_information(rho_R, {0}, {1});
  return out;
}

TightProcess build_tight_process(double delta_s, Index d) {
  if (d < 2) throw std::invalid_argument("build_tight_process: need d >= 2");
  const double log_d = std::log(static_cast<double>(d));
  if (delta_s < -1e-12 || delta_s > log_d - 1e-6)
    throw std::invalid_argument(
        "build_tight_process: delta_S must lie in [0, log d - 1e-6]");
  delta_s = std::max(delta_s, 0.0);

  const MOptimum opt = compute_M(delta_s, d);
  auto spectrum_of = [&](double s) {
    RealVector p(d);
    p(0) = 1.0 - s;
    for (Index i = 1; i < d; ++i) p(i) = s / static_cast<double>(d - 1);
    return p;
  };
  QState rho_S = diagonal_state(spectrum_of(opt.s_star));
  QState rho_R = diagonal_state(spectrum_of(opt.r_star));
  SwapProcess swap = build_swap_process(rho_S, rho_R, SwapPartition{d, 1, 1});
  return TightProcess{std::move(swap), opt, std::move(rho_S), std::move(rho_R)};
}

std::vector<RangeWitness> deltaS_range_witnesses(Index d) {
  if (d < 2) throw std::invalid_argument("deltaS_range_witnesses: need d >= 2");
  const double log_d = std::log(static_cast<double>(d));
  std::vector<RangeWitness> out;

  {  // dS = +log d: swap maximally mixed system into a pure reservoir
    RealVector e = RealVector::Ones(d);
    e(0) = 0.0;
    Reservoir res(HermitianOp(diag_matrix(e)), InverseTemp::plus_infinity());
    ProcessSpec spec{maximally_mixed(d), std::move(res),
                     swap_unitary({d, d}, 0, 1)};
    out.push_back({std::move(spec), log_d, std::nullopt, "upper"});
  }
  {  // dS = -log d: swap a pure system into the maximally mixed reservoir
    Vector e0 = Vector::Zero(d);
    e0(0) = 1.0;
    Reservoir res(HermitianOp(Matrix::Zero(d, d)), InverseTemp(1.0));
    ProcessSpec spec{pure_state(e0), std::move(res), swap_unitary({d, d}, 0, 1)};
    out.push_back({std::move(spec), -log_d, 0.0, "classical-lower"});
  }
  {  // dS = -2 log d: swap half of a maximally entangled pair; no heat flows
    Reservoir res(HermitianOp(Matrix::Zero(d, d)), InverseTemp(1.0));
    ProcessSpec spec{maximally_entangled_pair(d), std::move(res),
                     swap_unitary({d, d, d}, 0, 2)};
    out.push_back({std::move(spec), -2.0 * log_d, 0.0, "quantum-lower"});
  }
  {  // intermediate dS in (-2 log d, -log d): non-uniform entangled pair
    RealVector p(d);
    double z = 0.0;
    for (Index i = 0; i < d; ++i) {
      p(i) = std::pow(0.5, static_cast<double>(i));
      z += p(i);
    }
    p /= z;
    Vector phi = Vector::Zero(d * d);
    for (Index i = 0; i < d; ++i) phi(i * d + i) = std::sqrt(p(i));
    QState sys = pure_state(phi, {d, d});
    RealVector energies(d);
    for (Index i = 0; i < d; ++i) energies(i) = -std::log(p(i));
    Reservoir res(HermitianOp(diag_matrix(energies)), InverseTemp(1.0));
    ProcessSpec spec{std::move(sys), std::move(res), swap_unitary({d, d, d}, 0, 2)};
    out.push_back({std::move(spec), -2.0 * entropy_of_spectrum(p), 0.0, "entangled-variant"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-step staircase
// ---------------------------------------------------------------------------

namespace {

double scalar_kl(const RealVector& p, const RealVector& q) {
  double d = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= kLogZeroTol) continue;
    if (q(i) <= kLogZeroTol) return kInf;
    d += p(i) * std::log(p(i) / q(i));
  }
  return std::max(d, 0.0);
}

}  // namespace

KStepReport build_kstep_process(const KStepSpec& spec) {
  if (spec.k < 1) throw std::invalid_argument("build_kstep_process: need k >= 1");
  if (spec.rho_S.dim() != spec.rho_S_final.dim())
    throw std::invalid_argument("build_kstep_process: state dimensions differ");
  const Index r = spec.rho_S_final.rank();
  if (spec.rho_S.rank() > r)
    throw std::invalid_argument(
        "build_kstep_process: rank may not decrease; rank-decreasing erasure needs the "
        "masked-reservoir construction (pure_erasure_truncated)");
  if (spec.rho_S_final.spectrum()(r - 1) <= 1e-12)
    throw std::invalid_argument("build_kstep_process: final spectrum too close to singular");

  // support rotation aligns the system eigenbasis with the target support,
  // after which every intermediate lives on the same r-dimensional block
  RealVector p0 = spec.rho_S.spectrum().head(r);
  RealVector pk = spec.rho_S_final.spectrum().head(r);

  KStepReport rep{};
  rep.rank = r;
  rep.delta_S = von_neumann_entropy(spec.rho_S) - von_neumann_entropy(spec.rho_S_final);

  const int k = spec.k;
  double divergence_sum = 0.0;
  rep.step_divergences.reserve(static_cast<size_t>(k));

  if (spec.interpolation == Interpolation::linear_mixture) {
    RealVector prev = p0;
    for (int i = 1; i <= k; ++i) {
      const double t = static_cast<double>(i) / k;
      RealVector cur = (1.0 - t) * p0 + t * pk;
      const double div = scalar_kl(prev, cur);
      rep.step_divergences.push_back(div);
      divergence_sum += div;
      prev = std::move(cur);
    }
    const double fwd = scalar_kl(p0, pk);
    const double bwd = scalar_kl(pk, p0);
    rep.upper_bound = (fwd + bwd) / k;
  } else {
    if (static_cast<int>(spec.custom_curve.size()) != k - 1)
      throw std::invalid_argument("build_kstep_process: custom curve needs k-1 interior states");
    std::vector<QState> states;
    states.emplace_back(diagonal_state(p0));
    for (const Matrix& m : spec.custom_curve) {
      if (m.rows() != r)
        throw std::invalid_argument("build_kstep_process: curve states must be rank x rank");
      states.emplace_back(QState(m));
      if (states.back().rank() < r)
        throw std::invalid_argument(
            "build_kstep_process: curve states must be supported on the full target support");
    }
    states.emplace_back(diagonal_state(pk));
    for (int i = 1; i <= k; ++i) {
      const double div = relative_entropy(states[static_cast<size_t>(i - 1)],
                                          states[static_cast<size_t>(i)]);
      rep.step_divergences.push_back(div);
      divergence_sum += div;
    }
    rep.upper_bound = kInf;  // the closed-form bound is specific to the linear mixture
  }

  rep.beta_delta_Q = rep.delta_S + divergence_sum;
  rep.gap = divergence_sum;
  rep.lower_bound = r >= 2 ? k * compute_M(rep.delta_S / k, r).value : 0.0;
  return rep;
}

ProcessReport kstep_dense_oracle(const KStepSpec& spec) {
  if (spec.k < 1 || spec.k > 3)
    throw std::invalid_argument("kstep_dense_oracle: dense evaluation only for k <= 3");
  if (spec.interpolation != Interpolation::linear_mixture)
    throw std::invalid_argument("kstep_dense_oracle: linear mixture only");
  const Index d_s = spec.rho_S.dim();
  const Index r = spec.rho_S_final.rank();
  if (r != d_s)
    throw std::invalid_argument("kstep_dense_oracle: requires a full-rank final state");

  const RealVector p0 = spec.rho_S.spectrum();
  const RealVector pk = spec.rho_S_final.spectrum();
  const int k = spec.k;

  // reservoir: k subsystems of dimension r, slot i thermal at rho_i
  std::vector<RealVector> steps;
  for (int i = 1; i <= k; ++i) {
    const double t = static_cast<double>(i) / k;
    steps.push_back(((1.0 - t) * p0 + t * pk).eval());
  }
  Index d_r = 1;
  for (int i = 0; i < k; ++i) d_r *= r;
  RealVector joint_energy = RealVector::Zero(d_r);
  for (Index lin = 0; lin < d_r; ++lin) {
    Index rem = lin;
    for (int slot = k - 1; slot >= 0; --slot) {
      const Index digit = rem % r;
      rem /= r;
      joint_energy(lin) += -std::log(steps[static_cast<size_t>(slot)](digit));
    }
  }
  std::vector<Index> r_dims(static_cast<size_t>(k), r);
  Reservoir reservoir(HermitianOp(diag_matrix(joint_energy)), InverseTemp(1.0), r_dims);

  // support rotation, then successive swaps in the rotated frame
  std::vector<Index> joint_dims{d_s};
  joint_dims.insert(joint_dims.end(), r_dims.begin(), r_dims.end());
  const Matrix v_final = spec.rho_S_final.eigenvectors();
  const Matrix u0 = v_final * spec.rho_S.eigenvectors().adjoint();
  Matrix total = expand_unitary(Unitary(u0), joint_dims, {0}).matrix();
  const Matrix tilt = expand_unitary(Unitary(v_final), joint_dims, {0}).matrix();
  for (int i = 1; i <= k; ++i) {
    const Matrix swap_i = swap_unitary(joint_dims, 0, i).matrix();
    total = (tilt * swap_i * tilt.adjoint() * total).eval();
  }

  ProcessSpec dense{spec.rho_S, std::move(reservoir), Unitary(std::move(total))};
  return run_process(dense);
}

// ---------------------------------------------------------------------------
// Memory-assisted processes
// ---------------------------------------------------------------------------

MemoryReport memory_process_report(const MemoryProcessSpec& spec) {
  if (spec.rho_SM.num_factors() != 2)
    throw std::invalid_argument("memory_process_report: rho_SM needs factors [S, M]");
  if (spec.reservoir.has_mask())
    throw std::invalid_argument("memory_process_report: masked reservoirs not supported");
  if (spec.ancilla_dim < 1)
    throw std::invalid_argument("memory_process_report: ancilla dimension must be >= 1");

  const Index d_r = spec.reservoir.dim();
  const QState rho_R = spec.reservoir.state().with_dims({d_r});

  // layout [S, R, M] (+ ancilla A for noisy operations)
  QState joint = permute_factors(tensor(spec.rho_SM, rho_R), {0, 2, 1});
  if (spec.ancilla_dim > 1) joint = tensor(joint, maximally_mixed(spec.ancilla_dim));
  if (spec.u.dim() != joint.dim())
    throw std::invalid_argument("memory_process_report: unitary dimension mismatch");

  QState after_all = apply_unitary(joint, spec.u);
  const QState after = spec.ancilla_dim > 1 ? partial_trace(after_all, {0, 1, 2})
                                            : std::move(after_all);

  const QState rho_SM_final = partial_trace(after, {0, 2});
  QState rho_R_final = partial_trace(after, {1});
  QState rho_M_final = partial_trace(after, {2});
  QState rho_S_final = partial_trace(after, {0});
  const QState rho_M = partial_trace(spec.rho_SM, {1});

  MemoryReport rep{.delta_S_cond = 0,
                   .delta = 0,
                   .delta_Q = 0,
                   .beta_delta_Q = 0,
                   .mutual_info_SM_R = 0,
                   .rel_ent_final = 0,
                   .entropy_M_initial = 0,
                   .entropy_M_final = 0,
                   .memory_condition = false,
                   .second_law_margin = 0,
                   .landauer_margin = 0,
                   .rho_S_final = std::move(rho_S_final),
                   .rho_M_final = std::move(rho_M_final)};

  const double cond_initial =
      von_neumann_entropy(spec.rho_SM) - von_neumann_entropy(rho_M);
  const double cond_final =
      von_neumann_entropy(rho_SM_final) - von_neumann_entropy(rep.rho_M_final);
  rep.delta_S_cond = cond_initial - cond_final;

  rep.delta = von_neumann_entropy(rho_R_final) - von_neumann_entropy(rho_R);
  rep.mutual_info_SM_R = von_neumann_entropy(rho_SM_final) +
                         von_neumann_entropy(rho_R_final) - von_neumann_entropy(after);
  rep.rel_ent_final =
      relative_entropy_to_thermal(rho_R_final, spec.reservoir.hamiltonian(),
                                  spec.reservoir.beta());
  rep.delta_Q = trace_product(spec.reservoir.hamiltonian().matrix(), rho_R_final.matrix()) -
                trace_product(spec.reservoir.hamiltonian().matrix(), rho_R.matrix());
  rep.beta_delta_Q = extended_beta_delta_q(spec.reservoir, rho_R_final, rep.delta_Q);

  rep.entropy_M_initial = von_neumann_entropy(rho_M);
  rep.entropy_M_final = von_neumann_entropy(rep.rho_M_final);
  rep.memory_condition = rep.entropy_M_final <= rep.entropy_M_initial + 1e-9;

  rep.second_law_margin = rep.delta - rep.delta_S_cond - rep.mutual_info_SM_R;
  const double rhs = rep.delta_S_cond + rep.mutual_info_SM_R + rep.rel_ent_final;
  rep.landauer_margin =
      std::isinf(rep.beta_delta_Q) ? kInf : rep.beta_delta_Q - rhs;
  return rep;
}

namespace {

// controlled erasure unitary on S (x) M: |i>_S |i>_M -> |0>_S |i>_M, completed
// by the transposition (0 i) on S in each memory sector
Unitary controlled_erasure(Index n) {
  Matrix u = Matrix::Zero(n * n, n * n);
  for (Index m = 0; m < n; ++m) {
    for (Index s = 0; s < n; ++s) {
      Index target = s;
      if (s == m)
        target = 0;
      else if (s == 0)
        target = m;
      u(target * n + m, s * n + m) = 1.0;
    }
  }
  return Unitary(std::move(u));
}

QState classical_correlated_state(const RealVector& p) {
  const Index n = p.size();
  Matrix m = Matrix::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i) m(i * n + i, i * n + i) = p(i);
  return QState(std::move(m), {n, n});
}

Reservoir default_qubit_reservoir() {
  RealVector e(2);
  e << 0.0, 1.0;
  return Reservoir(HermitianOp(diag_matrix(e)), InverseTemp(1.0));
}

}  // namespace

MemoryProcessSpec classical_memory_example(const RealVector& probs) {
  const Index n = probs.size();
  if (n < 2) throw std::invalid_argument("classical_memory_example: need >= 2 outcomes");
  Reservoir res = default_qubit_reservoir();
  Unitary u = expand_unitary(controlled_erasure(n), {n, res.dim(), n}, {0, 2});
  return MemoryProcessSpec{classical_correlated_state(probs), std::move(res), std::move(u)};
}

MemoryProcessSpec entangled_memory_example(const RealVector& probs) {
  const Index n = probs.size();
  if (n < 2) throw std::invalid_argument("entangled_memory_example: need >= 2 outcomes");
  Vector psi = Vector::Zero(n * n);
  for (Index i = 0; i < n; ++i) psi(i * n + i) = std::sqrt(probs(i));
  Reservoir res = default_qubit_reservoir();
  Unitary u = expand_unitary(controlled_erasure(n), {n, res.dim(), n}, {0, 2});
  return MemoryProcessSpec{pure_state(psi, {n, n}), std::move(res), std::move(u)};
}

TwoStageResult entangled_two_stage_attempt(const RealVector& probs, int lambda_grid) {
  const Index n = probs.size();
  if (n < 2) throw std::invalid_argument("entangled_two_stage_attempt: need >= 2 outcomes");
  if (lambda_grid < 2) throw std::invalid_argument("entangled_two_stage_attempt: grid too small");

  // after stage one the memory is pure |phi> = sum sqrt(p_i)|i>; stage two
  // swaps it with a reservoir drawn from the family (1-l)|phi><phi| + l*1/n
  auto spectrum_at = [&](double l) {
    RealVector mu(n);
    mu(0) = 1.0 - l + l / static_cast<double>(n);
    for (Index i = 1; i < n; ++i) mu(i) = l / static_cast<double>(n);
    return mu;
  };
  auto predicted = [&](double l) {
    const RealVector mu = spectrum_at(l);
    return -std::log(mu(0)) - entropy_of_spectrum(mu);
  };

  double best_l = 0.5, best_v = kInf;
  for (int i = 1; i < lambda_grid; ++i) {
    const double l = static_cast<double>(i) / lambda_grid;
    const double v = predicted(l);
    if (v < best_v) {
      best_v = v;
      best_l = l;
    }
  }
  {  // golden-section refinement around the grid minimum
    const double step = 1.0 / lambda_grid;
    double a = std::max(1e-6, best_l - step), b = std::min(1.0 - 1e-6, best_l + step);
    constexpr double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = predicted(x1), f2 = predicted(x2);
    while (b - a > 1e-12) {
      if (f1 <= f2) {
        b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); f1 = predicted(x1);
      } else {
        a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); f2 = predicted(x2);
      }
    }
    best_l = 0.5 * (a + b);
  }

  Vector phi_vec = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) phi_vec(i) = std::sqrt(probs(i));
  Matrix rho_r = (1.0 - best_l) * (phi_vec * phi_vec.adjoint());
  rho_r += (best_l / static_cast<double>(n)) * Matrix::Identity(n, n);
  QState reservoir_state(std::move(rho_r));

  RealVector energies(n);
  const Matrix& vr = reservoir_state.eigenvectors();
  for (Index i = 0; i < n; ++i) energies(i) = -std::log(reservoir_state.spectrum()(i));
  Reservoir res(HermitianOp(Matrix(vr * energies.cast<Complex>().asDiagonal() * vr.adjoint())),
                InverseTemp(1.0));

  const std::vector<Index> dims{n, n, n};
  const Matrix stage1 = expand_unitary(controlled_erasure(n), dims, {0, 2}).matrix();
  const Matrix stage2 = swap_unitary(dims, 1, 2).matrix();
  Unitary u(Matrix(stage2 * stage1));

  Vector psi = Vector::Zero(n * n);
  for (Index i = 0; i < n; ++i) psi(i * n + i) = std::sqrt(probs(i));
  MemoryProcessSpec spec{pure_state(psi, {n, n}), std::move(res), std::move(u)};
  MemoryReport rep = memory_process_report(spec);

  TwoStageResult out{rep.beta_delta_Q, -entropy_of_spectrum(probs), best_l, std::move(rep)};
  return out;
}

// ---------------------------------------------------------------------------
// Correlation counterexamples
// ---------------------------------------------------------------------------

CorrelationCounterexamples correlation_counterexamples(Index d) {
  if (d < 2) throw std::invalid_argument("correlation_counterexamples: need d >= 2");
  CorrelationCounterexamples out{};

  {  // (i) swap S with a reservoir equal to rho_S while M holds a perfect copy
    RealVector p(2);
    p << 0.5, 0.5;
    QState rho_sm = classical_correlated_state(p);
    Reservoir res(HermitianOp(diag_matrix(std::log(2.0) * RealVector::Ones(2))),
                  InverseTemp(1.0));
    QState joint = permute_factors(tensor(rho_sm, res.state()), {0, 2, 1});
    QState after = apply_unitary(joint, swap_unitary({2, 2, 2}, 0, 1));
    const double i_initial = mutual_information(rho_sm, {0}, {1});
    const double i_final = mutual_information(partial_trace(after, {0, 2}), {0}, {1});
    out.delta_I = i_initial - i_final;
    QState rho_r_final = partial_trace(after, {1});
    out.beta_delta_Q_corr =
        trace_product(res.hamiltonian().matrix(), rho_r_final.matrix()) -
        trace_product(res.hamiltonian().matrix(), res.state().matrix());
  }

  {  // (ii) product-state swap against (1-l)|psi><psi| + l*1/d
    auto beta_dq = [&](double l) {
      RealVector mu(d);
      mu(0) = 1.0 - l + l / static_cast<double>(d);
      for (Index i = 1; i < d; ++i) mu(i) = l / static_cast<double>(d);
      return -std::log(mu(0)) - entropy_of_spectrum(mu);
    };
    const int n_grid = 200;
    double best_l = 0.5, best_v = kInf;
    out.floor_respected = true;
    out.scan_floor = 0.2 - std::log(static_cast<double>(d));
    for (int i = 1; i < n_grid; ++i) {
      const double l = static_cast<double>(i) / n_grid;
      const double v = beta_dq(l);
      if (v <= out.scan_floor) out.floor_respected = false;
      if (v < best_v) {
        best_v = v;
        best_l = l;
      }
    }
    const double step = 1.0 / n_grid;
    double a = std::max(1e-9, best_l - step), b = std::min(1.0 - 1e-9, best_l + step);
    constexpr double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = beta_dq(x1), f2 = beta_dq(x2);
    while (b - a > 1e-12) {
      if (f1 <= f2) {
        b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); f1 = beta_dq(x1);
      } else {
        a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); f2 = beta_dq(x2);
      }
    }
    out.lambda_star = 0.5 * (a + b);
    if (beta_dq(out.lambda_star) <= out.scan_floor) out.floor_respected = false;

    // dense confirmation at the optimizer
    RealVector mu(d);
    mu(0) = 1.0 - out.lambda_star + out.lambda_star / static_cast<double>(d);
    for (Index i = 1; i < d; ++i) mu(i) = out.lambda_star / static_cast<double>(d);
    Vector e0 = Vector::Zero(d);
    e0(0) = 1.0;
    SwapProcess swap = build_swap_process(pure_state(e0), diagonal_state(mu),
                                          SwapPartition{d, 1, 1});
    out.beta_delta_Q_min = run_process(swap.spec).beta_delta_Q;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-system processes
// ---------------------------------------------------------------------------

MultiSystemComparison multi_system_check(const std::vector<ProcessSpec>& singles,
                                         const ProcessSpec& joint) {
  const int k = static_cast<int>(singles.size());
  if (k < 1) throw std::invalid_argument("multi_system_check: need at least one system");
  if (joint.rho_S.num_factors() != k)
    throw std::invalid_argument("multi_system_check: joint system needs one factor per process");
  for (int i = 0; i < k; ++i)
    if (singles[static_cast<size_t>(i)].rho_S.dim() != joint.rho_S.dims()[static_cast<size_t>(i)])
      throw std::invalid_argument("multi_system_check: factor dimension mismatch");

  const ProcessReport joint_rep = run_process(joint);
  std::vector<ProcessReport> reps;
  reps.reserve(static_cast<size_t>(k));
  for (const ProcessSpec& s : singles) reps.push_back(run_process(s));

  MultiSystemComparison out{};
  out.max_marginal_mismatch = 0.0;
  for (int i = 0; i < k; ++i) {
    const QState marginal = partial_trace(joint_rep.rho_S_final, {i});
    const double mismatch =
        (marginal.matrix() - reps[static_cast<size_t>(i)].rho_S_final.matrix())
            .cwiseAbs()
            .maxCoeff();
    out.max_marginal_mismatch = std::max(out.max_marginal_mismatch, mismatch);
  }
  if (out.max_marginal_mismatch > 1e-8)
    throw std::invalid_argument("multi_system_check: joint final marginals do not match targets");

  out.joint_beta_delta_Q = joint_rep.beta_delta_Q;
  out.sum_delta_S = 0.0;
  out.sum_beta_delta_Q_singles = 0.0;
  for (const ProcessReport& r : reps) {
    out.sum_delta_S += r.delta_S;
    out.sum_beta_delta_Q_singles += r.beta_delta_Q;
  }
  out.heat_margin = out.joint_beta_delta_Q - out.sum_delta_S;

  // chaining: S(rho'_S) = sum_i S_i - sum_i I(S_i : S_{i+1}..S_k)
  double chain = 0.0;
  for (int i = 0; i < k; ++i)
    chain += von_neumann_entropy(reps[static_cast<size_t>(i)].rho_S_final);
  for (int i = 0; i + 1 < k; ++i) {
    QState rest = partial_trace(joint_rep.rho_S_final, iota_range(i, k));
    std::vector<int> tail = iota_range(1, k - i);
    chain -= mutual_information(rest, {0}, tail);
  }
  out.chaining_residual = std::abs(von_neumann_entropy(joint_rep.rho_S_final) - chain);
  return out;
}

// ---------------------------------------------------------------------------
// Erasure towards a pure state
// ---------------------------------------------------------------------------

int pure_erasure_required_level(double epsilon, double tail_bound) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("pure_erasure_required_level: epsilon must be in (0, 1)");
  return static_cast<int>(std::floor(std::log(tail_bound) / std::log1p(-epsilon))) + 1;
}

PureErasureReport pure_erasure_truncated(double s1, double epsilon, int truncation_level) {
  if (!(s1 > 0.0 && s1 < 1.0))
    throw std::invalid_argument("pure_erasure_truncated: s1 must be in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("pure_erasure_truncated: epsilon must be in (0, 1)");
  if (truncation_level < 0)
    throw std::invalid_argument("pure_erasure_truncated: truncation level must be >= 0");

  const double log_1me = std::log1p(-epsilon);
  const double tail = std::exp(truncation_level * log_1me);  // (1-eps)^K
  if (tail >= 1e-10)
    throw std::invalid_argument(
        "pure_erasure_truncated: tail mass " + std::to_string(tail) +
        " exceeds 1e-10; required truncation level >= " +
        std::to_string(pure_erasure_required_level(epsilon)));

  const double s2 = 1.0 - s1;
  const double log_s1 = std::log(s1);
  const double log_s2 = std::log(s2);
  const double log_eps = std::log(epsilon);

  // Level populations follow the self-similar recursion: the class (g, j)
  // holds C(g, j) levels of value eps*(1-eps)^g * s1^j * s2^(g-j); the eroded
  // state shifts every class by one factor of (1-eps).
  double mass_r = 0.0, mass_rp = 0.0;
  double entropy_r = 0.0, entropy_rp = 0.0;
  double rel_ent = 0.0, beta_dq = 0.0;
  long long classes = 0;
  const int k_max = truncation_level;
  for (int g = 0; g <= k_max; ++g) {
    for (int j = 0; j <= g; ++j) {
      const double log_count =
          std::lgamma(g + 1.0) - std::lgamma(j + 1.0) - std::lgamma(g - j + 1.0);
      const double log_r = log_eps + g * log_1me + j * log_s1 + (g - j) * log_s2;
      const double m = std::exp(log_count + log_r);  // class mass in rho_R
      ++classes;
      if (m <= 0.0) continue;
      mass_r += m;
      entropy_r -= m * log_r;
      if (g >= 1) {
        const double mp = m / (1.0 - epsilon);  // class mass in rho'_R
        const double log_rp = log_r - log_1me;
        mass_rp += mp;
        entropy_rp -= mp * log_rp;
        rel_ent += mp * (log_rp - log_r);
        beta_dq += (m - mp) * log_r;
      } else {
        beta_dq += m * log_r;  // the eps level empties completely
      }
    }
  }

  PureErasureReport rep{};
  rep.truncation_level = truncation_level;
  rep.class_count = classes;
  rep.tail_mass = tail;
  rep.expected_rel_ent = -log_1me;
  rep.entropy_R_initial = entropy_r;
  rep.entropy_R_final = entropy_rp;
  rep.rel_ent = rel_ent;
  rep.beta_delta_Q = beta_dq;
  // the untransported population is exactly the generations beyond the cut,
  // a clean geometric tail; the kept-side sum would cancel to noise
  rep.final_purity_deficit = tail;
  rep.delta_S = binary_entropy(s1) - (-xlogx(1.0 - tail));
  (void)mass_rp;
  return rep;
}

}  // namespace landauer
