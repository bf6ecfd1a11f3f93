#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "landauer/processes.hpp"

#include <array>
#include <cmath>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

using namespace landauer;

namespace {

RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

ProcessSpec random_process(std::uint64_t seed, Index d_s, Index d_r, double beta) {
  Rng pick(seed * 1000003 + 17);
  const Index rank = 1 + static_cast<Index>(pick.raw() % static_cast<std::uint64_t>(d_s));
  return ProcessSpec{random_state(d_s, rank, seed * 7 + 1),
                     Reservoir(random_hermitian(d_r, seed * 7 + 2), InverseTemp(beta)),
                     haar_unitary(d_s * d_r, seed * 7 + 3)};
}

}  // namespace

TEST_CASE("the identity process does nothing") {
  ProcessSpec spec{random_state(2, 2, 3),
                   Reservoir(random_hermitian(3, 4), InverseTemp(1.0)),
                   identity_unitary(6)};
  const ProcessReport rep = run_process(spec);
  CHECK(std::abs(rep.delta_S) < 1e-12);
  CHECK(std::abs(rep.delta_Q) < 1e-12);
  CHECK(std::abs(rep.delta) < 1e-12);
  CHECK(std::abs(rep.mutual_info_final) < 1e-10);
  CHECK(std::abs(rep.rel_ent_final) < 1e-10);

  const EqualityDiagnosis diag = check_equality_case(rep, spec);
  CHECK(diag.equality);
  CHECK(diag.reservoir_unchanged);
  CHECK(diag.mutual_info_zero);
  CHECK(diag.spectra_match);
}

TEST_CASE("system-local unitaries attain the Landauer equality") {
  Reservoir res(random_hermitian(3, 11), InverseTemp(0.8));
  Unitary u = tensor(haar_unitary(4, 12), identity_unitary(3));
  ProcessSpec spec{random_state(4, 3, 13), std::move(res), std::move(u)};
  const ProcessReport rep = run_process(spec);
  const EqualityDiagnosis diag = check_equality_case(rep, spec);
  CHECK(diag.equality);
  CHECK(diag.reservoir_unchanged);
  CHECK(diag.mutual_info_zero);
  CHECK(diag.spectra_match);
}

TEST_CASE("a generic swap sits strictly above Landauer by at least M") {
  RealVector q(4);
  q << 0.4, 0.3, 0.2, 0.1;
  const SwapProcess swap =
      build_swap_process(maximally_mixed(4), diagonal_state(q), SwapPartition{4, 1, 1});
  const ProcessReport rep = run_process(swap.spec);
  CHECK(rep.delta_S > 0.0);

  const EqualityDiagnosis diag = check_equality_case(rep, swap.spec);
  CHECK_FALSE(diag.equality);
  CHECK(rep.beta_delta_Q - rep.delta_S >= compute_M(rep.delta_S, 4).value - 1e-8);
}

TEST_CASE("full swap against a cold two-level reservoir, finite and infinite beta") {
  RealVector e(2);
  e << 0.0, 1.0;
  const HermitianOp h(diag_matrix(e));

  {  // beta = 5 keeps every term finite and balanced
    ProcessSpec spec{maximally_mixed(2), Reservoir(h, InverseTemp(5.0)),
                     swap_unitary({2, 2}, 0, 1)};
    const ProcessReport rep = run_process(spec);
    CHECK(std::isfinite(rep.beta_delta_Q));
    CHECK(rep.equality_residual <= 1e-8);
    CHECK(rep.delta_S ==
          doctest::Approx(std::log(2.0) - von_neumann_entropy(spec.reservoir.state()))
              .epsilon(1e-10));
  }
  {  // beta = +inf: the swap pushes population out of the ground space
    ProcessSpec spec{maximally_mixed(2), Reservoir(h, InverseTemp::plus_infinity()),
                     swap_unitary({2, 2}, 0, 1)};
    const ProcessReport rep = run_process(spec);
    CHECK(rep.delta_S == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(std::isinf(rep.beta_delta_Q));
    CHECK(std::isinf(rep.rel_ent_final));
    CHECK(rep.equality_residual == 0.0);  // consistently infinite
    CHECK(rep.second_law_residual <= 1e-9);
  }
}

TEST_CASE("random processes balance the equality and the bounds") {
  const double betas[] = {-2.0, 0.5, 3.0};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng pick(seed + 5000);
    const Index d_s = 2 + static_cast<Index>(pick.raw() % 5);
    const Index d_r = 2 + static_cast<Index>(pick.raw() % 5);
    ProcessSpec spec = random_process(seed, d_s, d_r, betas[seed % 3]);
    const ProcessReport rep = run_process(spec);
    CHECK(rep.equality_residual <= 1e-8);
    CHECK(rep.second_law_residual <= 1e-9);
    CHECK(rep.mutual_info_final >= -1e-12);
    CHECK(rep.margins.landauer >= -1e-8);
    CHECK(rep.margins.finite_size >= -1e-8);
    if (rep.margins.heat_extraction) CHECK(*rep.margins.heat_extraction >= -1e-8);
    if (rep.margins.pureness) CHECK(*rep.margins.pureness >= -1e-10);
    CHECK(rep.delta >= -std::log(static_cast<double>(d_r)) - 1e-9);
    CHECK(rep.delta <= std::log(static_cast<double>(d_r)) + 1e-9);
    // no total entropy increase iff the final state is a product state
    if (std::abs(rep.delta - rep.delta_S) <= 1e-8) CHECK(rep.mutual_info_final <= 1e-8);
    if (rep.mutual_info_final <= 1e-9) CHECK(std::abs(rep.delta - rep.delta_S) <= 1e-8);
  }
}

TEST_CASE("pureness margins: unit prefactor at beta = 0, absent for beta < 0") {
  ProcessSpec spec = random_process(3, 3, 3, 0.0);
  const ProcessReport rep = run_process(spec);
  REQUIRE(rep.margins.pureness.has_value());
  CHECK(rep.rho_S_final.lambda_min() >= spec.rho_S.lambda_min() - 1e-10);

  ProcessSpec negative = random_process(4, 3, 3, -1.0);
  CHECK_FALSE(run_process(negative).margins.pureness.has_value());

  // beta = +inf against a nondegenerate H: the prefactor degenerates to 0
  RealVector e(2);
  e << 0.0, 1.0;
  ProcessSpec cold{random_state(2, 2, 31),
                   Reservoir(HermitianOp(diag_matrix(e)), InverseTemp::plus_infinity()),
                   haar_unitary(4, 32)};
  const ProcessReport cold_rep = run_process(cold);
  REQUIRE(cold_rep.margins.pureness.has_value());
  CHECK(*cold_rep.margins.pureness == doctest::Approx(cold_rep.rho_S_final.lambda_min()));
}

TEST_CASE("swap closed forms agree with the dense evaluation") {
  {  // identical states: nothing happens
    QState rho = random_state(3, 3, 41);
    const SwapProcess swap = build_swap_process(rho, rho, SwapPartition{3, 1, 1});
    const ProcessReport rep = run_process(swap.spec);
    CHECK(std::abs(rep.delta_S) < 1e-10);
    CHECK(std::abs(rep.delta_Q) < 1e-10);
  }
  {  // full swap: beta*dQ = dS + D(rho_S || rho_R)
    QState rho_s = random_state(4, 2, 42);
    QState rho_r = random_state(4, 4, 43);
    const SwapProcess swap = build_swap_process(rho_s, rho_r, SwapPartition{4, 1, 1});
    const ProcessReport rep = run_process(swap.spec);
    CHECK(std::abs(rep.beta_delta_Q - rep.delta_S -
                   relative_entropy(rho_s, swap.spec.reservoir.state())) < 1e-9);
    CHECK(rep.mutual_info_final < 1e-9);
  }
  {  // partial swap on 4 = 2 x 2, closed forms against run_process
    QState rho_s = random_state(4, 3, 44);
    QState rho_r = random_state(4, 4, 45);
    const SwapProcess swap = build_swap_process(rho_s, rho_r, SwapPartition{2, 2, 2});
    const ProcessReport rep = run_process(swap.spec);
    CHECK(std::abs(rep.delta_S - swap.delta_S) < 1e-9);
    CHECK(std::abs(rep.delta - swap.delta) < 1e-9);
    CHECK(std::abs(rep.delta_Q - swap.delta_Q) < 1e-9);
    CHECK(std::abs(rep.mutual_info_final - swap.mutual_info_final) < 1e-9);
  }
  CHECK_THROWS_AS(build_swap_process(maximally_mixed(2), random_state(2, 1, 46),
                                     SwapPartition{2, 1, 1}),
                  std::invalid_argument);
}

TEST_CASE("tight processes meet the finite-size bound") {
  {  // dS = 0 degenerates to identical states
    const TightProcess tight = build_tight_process(0.0, 4);
    CHECK(tight.optimum.s_star == tight.optimum.r_star);
    const ProcessReport rep = run_process(tight.swap.spec);
    CHECK(std::abs(rep.beta_delta_Q) < 1e-9);
    CHECK(std::abs(rep.delta_S) < 1e-9);
  }
  {  // d = 16, dS = log 2
    const double x = std::log(2.0);
    const TightProcess tight = build_tight_process(x, 16);
    const ProcessReport rep = run_process(tight.swap.spec);
    CHECK(std::abs(rep.delta_S - x) < 1e-9);
    const double bound = finite_size_bound(rep.delta_S, BoundParams{16, NChoice::exact});
    CHECK(std::abs(rep.beta_delta_Q - bound) < 1e-5);
    CHECK(std::abs(relative_entropy(tight.rho_S, tight.rho_R) -
                   binary_relative_entropy(tight.optimum.s_star, tight.optimum.r_star)) < 1e-9);
    // the extremal pair is classical: both states diagonal
    Matrix off_s = tight.rho_S.matrix();
    off_s.diagonal().setZero();
    Matrix off_r = tight.rho_R.matrix();
    off_r.diagonal().setZero();
    CHECK(off_s.cwiseAbs().maxCoeff() == 0.0);
    CHECK(off_r.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(build_tight_process(std::log(4.0), 4), std::invalid_argument);
  CHECK_THROWS_AS(build_tight_process(-0.5, 4), std::invalid_argument);
}

TEST_CASE("the extremal dS constructions hit their bounds") {
  for (Index d : {Index(2), Index(4)}) {
    for (const RangeWitness& w : deltaS_range_witnesses(d)) {
      const ProcessReport rep = run_process(w.spec);
      CHECK(std::abs(rep.delta_S - w.expected_delta_S) <= 1e-8);
      if (w.expected_delta_Q) CHECK(std::abs(rep.delta_Q - *w.expected_delta_Q) <= 1e-8);
      CHECK(rep.second_law_residual <= 1e-9);
      CHECK(rep.equality_residual <= 1e-8);
      CHECK(rep.margins.landauer >= -1e-8);
      CHECK(rep.margins.finite_size >= -1e-8);
      if (rep.margins.heat_extraction) CHECK(*rep.margins.heat_extraction >= -1e-8);
    }
  }
}

TEST_CASE("k-step staircase: one step is a plain swap") {
  const KStepSpec spec{diagonal_state(vec2(0.5, 0.5)), diagonal_state(vec2(0.9, 0.1)), 1,
                       Interpolation::linear_mixture, {}};
  const KStepReport rep = build_kstep_process(spec);
  const double d01 = relative_entropy(spec.rho_S, spec.rho_S_final);
  CHECK(rep.beta_delta_Q == doctest::Approx(rep.delta_S + d01).epsilon(1e-12));
  CHECK(rep.step_divergences.size() == 1);
}

TEST_CASE("k-step staircase: gap obeys both bounds and decays as 1/k") {
  const QState from = diagonal_state(vec2(0.5, 0.5));
  const QState to = diagonal_state(vec2(0.9, 0.1));
  double gap100 = 0.0, gap200 = 0.0;
  for (int k : {10, 100, 200, 1000}) {
    const KStepReport rep =
        build_kstep_process(KStepSpec{from, to, k, Interpolation::linear_mixture, {}});
    CHECK(rep.gap >= rep.lower_bound - 1e-12);
    CHECK(rep.gap <= rep.upper_bound + 1e-12);
    if (k == 100) gap100 = rep.gap;
    if (k == 200) gap200 = rep.gap;
  }
  CHECK(gap100 / gap200 >= 1.8);
  CHECK(gap100 / gap200 <= 2.2);
}

TEST_CASE("k-step staircase: dense simulation confirms the analytic path") {
  const QState from = diagonal_state(vec2(0.5, 0.5));
  const QState to = diagonal_state(vec2(0.9, 0.1));
  for (int k : {1, 2, 3}) {
    const KStepSpec spec{from, to, k, Interpolation::linear_mixture, {}};
    const KStepReport analytic = build_kstep_process(spec);
    const ProcessReport dense = kstep_dense_oracle(spec);
    CHECK(std::abs(dense.beta_delta_Q - analytic.beta_delta_Q) < 1e-8);
    CHECK(std::abs(dense.delta_S - analytic.delta_S) < 1e-8);
    CHECK(dense.mutual_info_final < 1e-9);
    CHECK(std::abs(dense.rel_ent_final - analytic.gap) < 1e-8);
    CHECK(dense.equality_residual < 1e-8);
  }
  // a rotated initial state exercises the support rotation in the oracle
  const QState rotated = apply_unitary(diagonal_state(vec2(0.7, 0.3)), haar_unitary(2, 99));
  const KStepSpec spec{rotated, to, 2, Interpolation::linear_mixture, {}};
  CHECK(std::abs(kstep_dense_oracle(spec).beta_delta_Q -
                 build_kstep_process(spec).beta_delta_Q) < 1e-8);
}

TEST_CASE("k-step staircase: rank decrease is rejected, custom curves accepted") {
  CHECK_THROWS_AS(build_kstep_process(KStepSpec{diagonal_state(vec2(0.5, 0.5)),
                                                diagonal_state(vec2(1.0, 0.0)), 10,
                                                Interpolation::linear_mixture, {}}),
                  std::invalid_argument);

  // a custom curve through the linear midpoint reproduces the linear mixture
  const QState from = diagonal_state(vec2(0.5, 0.5));
  const QState to = diagonal_state(vec2(0.9, 0.1));
  Matrix mid = (from.matrix() + to.matrix()) / 2.0;
  const KStepReport custom =
      build_kstep_process(KStepSpec{from, to, 2, Interpolation::custom_curve, {mid}});
  const KStepReport linear =
      build_kstep_process(KStepSpec{from, to, 2, Interpolation::linear_mixture, {}});
  CHECK(custom.beta_delta_Q == doctest::Approx(linear.beta_delta_Q).epsilon(1e-12));
}

TEST_CASE("rank-increasing staircases work from a rank-deficient start") {
  const QState from = diagonal_state(vec2(1.0, 0.0));
  const QState to = diagonal_state(vec2(0.6, 0.4));
  const KStepReport rep =
      build_kstep_process(KStepSpec{from, to, 50, Interpolation::linear_mixture, {}});
  CHECK(rep.delta_S < 0.0);  // entropy grows
  CHECK(rep.gap >= rep.lower_bound - 1e-12);
  CHECK(std::isinf(rep.upper_bound));  // D(to || from) = inf at rank deficiency
  CHECK(rep.beta_delta_Q >= rep.delta_S - 1e-10);
}

TEST_CASE("classical memory erasure costs nothing") {
  RealVector p(3);
  p << 0.5, 0.3, 0.2;
  const MemoryProcessSpec spec = classical_memory_example(p);
  const MemoryReport rep = memory_process_report(spec);
  CHECK(std::abs(rep.delta_Q) < 1e-12);
  CHECK(von_neumann_entropy(rep.rho_S_final) < 1e-10);
  CHECK(std::abs(rep.delta_S_cond) < 1e-9);
  CHECK(rep.memory_condition);
  CHECK(rep.landauer_margin >= -1e-8);
  CHECK(rep.second_law_margin >= -1e-8);
  CHECK(std::abs(rep.entropy_M_final - rep.entropy_M_initial) < 1e-9);

  // the reservoir-memory pair is untouched as a whole
  const QState rho_r = spec.reservoir.state().with_dims({spec.reservoir.dim()});
  QState joint = permute_factors(tensor(spec.rho_SM, rho_r), {0, 2, 1});
  QState after = apply_unitary(joint, spec.u);
  CHECK(max_abs_diff(partial_trace(after, {1, 2}).matrix(),
                     partial_trace(joint, {1, 2}).matrix()) < 1e-12);
}

TEST_CASE("entangled memory erasure purifies the memory") {
  RealVector p(2);
  p << 0.5, 0.5;
  const MemoryReport rep = memory_process_report(entangled_memory_example(p));
  const double s_p = std::log(2.0);
  CHECK(rep.delta_S_cond == doctest::Approx(-s_p).epsilon(1e-9));  // S(S|M) = -S(S), final 0
  CHECK(rep.entropy_M_initial == doctest::Approx(s_p).epsilon(1e-9));
  CHECK(rep.entropy_M_final < 1e-9);
  CHECK(rep.memory_condition);
  CHECK(std::abs(rep.delta_Q) < 1e-12);
  CHECK(rep.landauer_margin >= -1e-8);
  // not tight: the slack is exactly the entropy drop of the memory
  CHECK(rep.landauer_margin == doctest::Approx(s_p).epsilon(1e-8));
}

TEST_CASE("a trivial memory reduces to the plain process") {
  QState rho_s = random_state(3, 2, 61);
  Reservoir res(random_hermitian(2, 62), InverseTemp(1.5));
  Unitary u = haar_unitary(6, 63);
  ProcessSpec plain{rho_s, res, u};
  const ProcessReport direct = run_process(plain);

  MemoryProcessSpec with_memory{rho_s.with_dims({3, 1}), res,
                                expand_unitary(u, {3, 2, 1}, {0, 1}), 1};
  const MemoryReport rep = memory_process_report(with_memory);
  CHECK(rep.delta_S_cond == doctest::Approx(direct.delta_S).epsilon(1e-10));
  CHECK(rep.delta_Q == doctest::Approx(direct.delta_Q).epsilon(1e-10));
  CHECK(rep.mutual_info_SM_R == doctest::Approx(direct.mutual_info_final).epsilon(1e-9));
  CHECK(rep.rel_ent_final == doctest::Approx(direct.rel_ent_final).epsilon(1e-9));
}

TEST_CASE("noisy operations keep the generalized second law") {
  RealVector p(2);
  p << 0.6, 0.4;
  MemoryProcessSpec base = entangled_memory_example(p);
  // a haphazard unitary over system, reservoir, memory, and a mixed ancilla
  const Index total = base.rho_SM.dim() * base.reservoir.dim() * 3;
  MemoryProcessSpec noisy{base.rho_SM, base.reservoir, haar_unitary(total, 64), 3};
  const MemoryReport rep = memory_process_report(noisy);
  if (rep.memory_condition) {
    CHECK(rep.second_law_margin >= -1e-8);
    CHECK(rep.landauer_margin >= -1e-8);
  }
}

TEST_CASE("two-stage recovery pulls heat out of the reservoir") {
  RealVector p(2);
  p << 0.5, 0.5;
  const TwoStageResult result = entangled_two_stage_attempt(p, 100);
  CHECK(result.achieved_beta_delta_Q < -0.2);  // strictly extracts heat
  CHECK(result.achieved_beta_delta_Q > result.target - 1e-9);  // cannot beat -S(S)
  CHECK(result.target == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(result.report.memory_condition);
  // the generalized bound still holds for the combined two-stage process
  CHECK(result.report.landauer_margin >= -1e-8);
}

TEST_CASE("correlation counterexamples behave as advertised") {
  const CorrelationCounterexamples ce = correlation_counterexamples(4);
  CHECK(ce.delta_I == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(std::abs(ce.beta_delta_Q_corr) < 1e-10);
  CHECK(ce.beta_delta_Q_min < -0.4 * std::log(4.0));
  CHECK(ce.beta_delta_Q_min > 0.2 - std::log(4.0));
  CHECK(ce.floor_respected);
  CHECK(ce.lambda_star > 0.0);
  CHECK(ce.lambda_star < 1.0);
}

TEST_CASE("initially correlated system-reservoir pairs obey the weakened bound") {
  // with correlations the entropy balance picks up an I(S:R) credit:
  // Delta >= dS - I(S:R), and I(S:R) <= ||rho_SR - rho_S x rho_R||_1 (log d_S + log d)
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    QState joint = random_state(2 * 3, 4, 900 + seed).with_dims({2, 3});
    QState rho_s = partial_trace(joint, {0});
    QState rho_r = partial_trace(joint, {1});
    Unitary u = haar_unitary(6, 950 + seed);
    QState after = apply_unitary(joint, u);

    const double delta = von_neumann_entropy(partial_trace(after, {1})) -
                         von_neumann_entropy(rho_r);
    const double delta_s = von_neumann_entropy(rho_s) -
                           von_neumann_entropy(partial_trace(after, {0}));
    const double i_sr = mutual_information(joint, {0}, {1});
    CHECK(delta >= delta_s - i_sr - 1e-8);

    Eigen::JacobiSVD<Matrix> svd(joint.matrix() - tensor(rho_s, rho_r).matrix());
    const double trace_norm = svd.singularValues().sum();
    CHECK(i_sr <= trace_norm * (std::log(2.0) + std::log(3.0)) + 1e-8);
  }
}

TEST_CASE("integral version: identity process and random processes") {
  {
    ProcessSpec spec{random_state(2, 2, 71),
                     Reservoir(random_hermitian(3, 72), InverseTemp(0.9)),
                     identity_unitary(6)};
    CHECK(integral_version_residual(spec, run_process(spec)) < 1e-10);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double betas[] = {-1.5, 0.6, 2.5};
    ProcessSpec spec =
        random_process(8000 + seed, 2 + seed % 3, 2 + (seed / 2) % 3, betas[seed % 3]);
    const ProcessReport rep = run_process(spec);
    CHECK(integral_version_residual(spec, rep) < 1e-6);
  }
}

TEST_CASE("integral version stays finite where the equality form diverges") {
  RealVector e(2);
  e << 0.0, 1.0;
  ProcessSpec spec{diagonal_state(vec2(0.7, 0.3)),
                   Reservoir(HermitianOp(diag_matrix(e)), InverseTemp::plus_infinity()),
                   swap_unitary({2, 2}, 0, 1)};
  const ProcessReport rep = run_process(spec);
  CHECK(rep.delta_Q > 0.0);
  CHECK(std::isinf(rep.beta_delta_Q));
  CHECK(std::isinf(rep.rel_ent_final));
  CHECK(integral_version_residual(spec, rep) < 1e-6);
}

TEST_CASE("independent processes: the joint heat matches the sum") {
  RealVector p1 = vec2(0.7, 0.3), p2 = vec2(0.6, 0.4);
  Vector ground = Vector::Zero(2);
  ground(0) = 1.0;

  const SwapProcess s1 =
      build_swap_process(pure_state(ground), diagonal_state(p1), SwapPartition{2, 1, 1});
  const SwapProcess s2 =
      build_swap_process(pure_state(ground), diagonal_state(p2), SwapPartition{2, 1, 1});

  // joint process: both swaps side by side
  RealVector joint_e(4);
  for (Index r1 = 0; r1 < 2; ++r1)
    for (Index r2 = 0; r2 < 2; ++r2)
      joint_e(r1 * 2 + r2) = -std::log(p1(r1)) - std::log(p2(r2));
  Reservoir joint_res(HermitianOp(diag_matrix(joint_e)), InverseTemp(1.0), {2, 2});
  Matrix u = swap_unitary({2, 2, 2, 2}, 0, 2).matrix() *
             swap_unitary({2, 2, 2, 2}, 1, 3).matrix();
  ProcessSpec joint{tensor(pure_state(ground), pure_state(ground)), joint_res,
                    Unitary(std::move(u))};

  const MultiSystemComparison cmp = multi_system_check({s1.spec, s2.spec}, joint);
  CHECK(cmp.max_marginal_mismatch < 1e-10);
  CHECK(cmp.joint_beta_delta_Q == doctest::Approx(cmp.sum_beta_delta_Q_singles).epsilon(1e-9));
  CHECK(cmp.heat_margin >= -1e-8);
  CHECK(cmp.chaining_residual < 1e-9);
}

TEST_CASE("correlating the outputs keeps the joint heat above the sum of dS") {
  // singles: swap |0> against diag(p1) resp. diag(pb), where pb is the
  // distribution of r1 xor r2 under p1 x p2
  RealVector p1 = vec2(0.7, 0.3), p2 = vec2(0.6, 0.4);
  RealVector pb(2);
  pb(0) = p1(0) * p2(0) + p1(1) * p2(1);
  pb(1) = 1.0 - pb(0);
  Vector ground = Vector::Zero(2);
  ground(0) = 1.0;
  const SwapProcess s1 =
      build_swap_process(pure_state(ground), diagonal_state(p1), SwapPartition{2, 1, 1});
  const SwapProcess s2 =
      build_swap_process(pure_state(ground), diagonal_state(pb), SwapPartition{2, 1, 1});

  // joint permutation: (s1, s2, r1, r2) -> (r1, r1^r2, s1, s1^s2)
  Matrix u = Matrix::Zero(16, 16);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 2; ++b)
      for (Index r1 = 0; r1 < 2; ++r1)
        for (Index r2 = 0; r2 < 2; ++r2)
          u(r1 * 8 + (r1 ^ r2) * 4 + a * 2 + (a ^ b), a * 8 + b * 4 + r1 * 2 + r2) = 1.0;
  RealVector joint_e(4);
  for (Index r1 = 0; r1 < 2; ++r1)
    for (Index r2 = 0; r2 < 2; ++r2)
      joint_e(r1 * 2 + r2) = -std::log(p1(r1)) - std::log(p2(r2));
  Reservoir joint_res(HermitianOp(diag_matrix(joint_e)), InverseTemp(1.0), {2, 2});
  ProcessSpec joint{tensor(pure_state(ground), pure_state(ground)), joint_res,
                    Unitary(std::move(u))};

  const MultiSystemComparison cmp = multi_system_check({s1.spec, s2.spec}, joint);
  CHECK(cmp.max_marginal_mismatch < 1e-10);
  CHECK(cmp.chaining_residual < 1e-9);
  CHECK(cmp.heat_margin >= -1e-8);

  // the joint final system state is genuinely correlated
  const ProcessReport joint_rep = run_process(joint);
  CHECK(mutual_information(joint_rep.rho_S_final, {0}, {1}) > 1e-3);
}

TEST_CASE("a single-system joint process reduces to run_process") {
  Vector ground = Vector::Zero(2);
  ground(0) = 1.0;
  const SwapProcess s1 = build_swap_process(pure_state(ground), diagonal_state(vec2(0.7, 0.3)),
                                            SwapPartition{2, 1, 1});
  ProcessSpec joint{s1.spec.rho_S.with_dims({2}), s1.spec.reservoir, s1.spec.u};
  const MultiSystemComparison cmp = multi_system_check({s1.spec}, joint);
  const ProcessReport direct = run_process(s1.spec);
  CHECK(cmp.joint_beta_delta_Q == doctest::Approx(direct.beta_delta_Q).epsilon(1e-12));
  CHECK(cmp.sum_delta_S == doctest::Approx(direct.delta_S).epsilon(1e-12));
  CHECK(cmp.chaining_residual < 1e-12);
}

TEST_CASE("multi-system check validates marginals") {
  Vector ground = Vector::Zero(2);
  ground(0) = 1.0;
  const SwapProcess s1 = build_swap_process(pure_state(ground), diagonal_state(vec2(0.7, 0.3)),
                                            SwapPartition{2, 1, 1});
  RealVector joint_e(4);
  joint_e << 0.0, 1.0, 1.0, 2.0;
  Reservoir joint_res(HermitianOp(diag_matrix(joint_e)), InverseTemp(1.0), {2, 2});
  ProcessSpec joint{tensor(pure_state(ground), pure_state(ground)), joint_res,
                    identity_unitary(16)};
  CHECK_THROWS_AS(multi_system_check({s1.spec, s1.spec}, joint), std::invalid_argument);
}

TEST_CASE("processes and bound caches are safe under concurrent use") {
  std::vector<std::thread> workers;
  std::array<double, 4> worst{};
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([t, &worst] {
      double w = 0.0;
      for (int i = 0; i < 10; ++i) {
        const std::uint64_t seed = 70000 + t * 100 + i;
        ProcessSpec spec = random_process(seed, 3, 4, 0.7 + 0.1 * t);
        const ProcessReport rep = run_process(spec);
        w = std::max(w, rep.equality_residual);
        compute_N(4 + t);  // concurrent cache reads and inserts
        compute_M(0.1 * (i + 1), 4 + t);
      }
      worst[static_cast<size_t>(t)] = w;
    });
  }
  for (auto& th : workers) th.join();
  for (double w : worst) CHECK(w <= 1e-8);
}

// -- erasure towards a pure state --------------------------------------------

namespace {

struct ErasureOracle {
  double entropy_r, entropy_rp, rel_ent, beta_dq, mass_rp;
};

// direct enumeration of the level recursion, no binomial aggregation
ErasureOracle enumerate_levels(double s1, double eps, int level) {
  const double s2 = 1.0 - s1;
  const Index n = Index(1) << (level + 1);  // generations 0..level
  std::vector<double> r(static_cast<size_t>(n) + 1, 0.0);
  r[2] = eps;
  for (Index k = 2; 2 * k <= n; ++k) {
    r[static_cast<size_t>(2 * k - 1)] = (1.0 - eps) * s1 * r[static_cast<size_t>(k)];
    r[static_cast<size_t>(2 * k)] = (1.0 - eps) * s2 * r[static_cast<size_t>(k)];
  }
  std::vector<double> rp(static_cast<size_t>(n) + 1, 0.0);
  for (Index k = 1; 2 * k <= n; ++k) {
    rp[static_cast<size_t>(2 * k - 1)] = s1 * r[static_cast<size_t>(k)];
    rp[static_cast<size_t>(2 * k)] = s2 * r[static_cast<size_t>(k)];
  }
  ErasureOracle out{0, 0, 0, 0, 0};
  for (Index k = 1; k <= n; ++k) {
    const double rv = r[static_cast<size_t>(k)];
    const double rpv = rp[static_cast<size_t>(k)];
    if (rv > 0.0) {
      out.entropy_r -= rv * std::log(rv);
      out.beta_dq += (rv - rpv) * std::log(rv);
    }
    if (rpv > 0.0) {
      out.entropy_rp -= rpv * std::log(rpv);
      out.rel_ent += rpv * (std::log(rpv) - std::log(rv));
      out.mass_rp += rpv;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("pure-state erasure: aggregated sums match direct level enumeration") {
  for (auto [s1, eps, level] : {std::tuple{0.3, 0.9, 12}, std::tuple{0.55, 0.75, 19}}) {
    const PureErasureReport rep = pure_erasure_truncated(s1, eps, level);
    const ErasureOracle oracle = enumerate_levels(s1, eps, level);
    CHECK(std::abs(rep.entropy_R_initial - oracle.entropy_r) < 1e-10);
    CHECK(std::abs(rep.entropy_R_final - oracle.entropy_rp) < 1e-10);
    CHECK(std::abs(rep.rel_ent - oracle.rel_ent) < 1e-10);
    CHECK(std::abs(rep.beta_delta_Q - oracle.beta_dq) < 1e-10);
    CHECK(std::abs(rep.final_purity_deficit - (1.0 - oracle.mass_rp)) < 1e-9);
  }
}

TEST_CASE("pure-state erasure approaches the Landauer bound") {
  const PureErasureReport rep = pure_erasure_truncated(0.3, 0.1, 300);
  CHECK(std::abs(rep.rel_ent + std::log(0.9)) < 1e-6);
  CHECK(rep.final_purity_deficit <= 1e-8);
  CHECK(std::abs(rep.beta_delta_Q - rep.delta_S - rep.rel_ent) < 1e-6);
  CHECK(std::abs(rep.delta_S - binary_entropy(0.3)) < 1e-8);
  // the reservoir entropy difference carries exactly the erased entropy
  CHECK(std::abs(rep.entropy_R_final - rep.entropy_R_initial - binary_entropy(0.3)) < 1e-8);
  // closed form for the reservoir entropy
  const double closed = (binary_entropy(0.1) + 0.9 * binary_entropy(0.3)) / 0.1;
  CHECK(std::abs(rep.entropy_R_initial - closed) < 1e-7);

  // the dissipation shrinks to zero with eps
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.3, 0.1, 0.03}) {
    const int level = pure_erasure_required_level(eps, 1e-12);
    const PureErasureReport r = pure_erasure_truncated(0.3, eps, level);
    const double gap = r.beta_delta_Q - r.delta_S;
    CHECK(std::abs(gap + std::log1p(-eps)) < 1e-6);
    CHECK(gap < prev);
    prev = gap;
  }

  try {
    pure_erasure_truncated(0.3, 0.1, 50);
    FAIL("tail-mass precondition not enforced");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("required truncation level") != std::string::npos);
  }
  CHECK_THROWS_AS(pure_erasure_truncated(1.0, 0.1, 300), std::invalid_argument);
  CHECK_THROWS_AS(pure_erasure_truncated(0.3, 1.5, 300), std::invalid_argument);
}

TEST_CASE("masked reservoirs: dense mini erasure and the infinite-heat rule") {
  const double eps = 0.5, s1 = 0.3, s2 = 0.7;
  // occupied level indices 2..16 (generations 0..3); the empty root level is
  // left out of the representation entirely
  const Index max_level = 16;
  std::vector<double> r(static_cast<size_t>(max_level) + 1, 0.0);
  r[2] = eps;
  for (Index k = 2; 2 * k <= max_level; ++k) {
    r[static_cast<size_t>(2 * k - 1)] = (1.0 - eps) * s1 * r[static_cast<size_t>(k)];
    r[static_cast<size_t>(2 * k)] = (1.0 - eps) * s2 * r[static_cast<size_t>(k)];
  }
  double kept = 0.0;
  for (double v : r) kept += v;

  // renormalized truncation as an honest finite-dimensional masked reservoir
  const Index n_occ = max_level - 1;  // levels 2..16
  const Index dim = 2 * n_occ;
  auto slot_of = [&](Index level) { return 2 * (level - 2); };
  RealVector energies = RealVector::Zero(dim);
  std::vector<Index> mask;
  for (Index level = 2; level <= max_level; ++level) {
    energies(slot_of(level)) = -std::log(r[static_cast<size_t>(level)] / kept);
    mask.push_back(slot_of(level) + 1);  // interleaved unoccupied levels
  }
  Reservoir res(HermitianOp(diag_matrix(energies)), InverseTemp(1.0), mask, {});

  // permutation: (i, level j) -> (0, level 2j-1+i) while children stay in
  // range; the last generation has no kept children and is parked on the
  // leftover rows; masked slots stay put
  Matrix u = Matrix::Zero(2 * dim, 2 * dim);
  auto joint_index = [&](Index sys, Index slot) { return sys * dim + slot; };
  std::vector<std::pair<Index, Index>> parked_targets;
  parked_targets.emplace_back(0, slot_of(2));  // the one row children skip
  for (Index level = 2; level <= max_level; ++level)
    parked_targets.emplace_back(1, slot_of(level));
  size_t next_parked = 0;
  for (Index level = 2; level <= max_level; ++level) {
    for (Index i = 0; i < 2; ++i) {
      const Index child = 2 * level - 1 + i;
      if (child <= max_level) {
        u(joint_index(0, slot_of(child)), joint_index(i, slot_of(level))) = 1.0;
      } else {
        const auto [sys, slot] = parked_targets.at(next_parked++);
        u(joint_index(sys, slot), joint_index(i, slot_of(level))) = 1.0;
      }
      u(joint_index(i, slot_of(level) + 1), joint_index(i, slot_of(level) + 1)) = 1.0;
    }
  }

  ProcessSpec spec{diagonal_state(vec2(s1, s2)), res, Unitary(u)};
  const ProcessReport rep = run_process(spec);
  CHECK(std::isfinite(rep.beta_delta_Q));  // no masked level is ever populated
  CHECK(rep.equality_residual <= 1e-8);
  CHECK(rep.second_law_residual <= 1e-9);
  // the kept generations carry most of the population to the pure target
  CHECK(rep.rho_S_final.matrix()(0, 0).real() > 0.9);
  // coarse truncation, so the divergence only roughly matches -log(1-eps)
  CHECK(std::abs(rep.rel_ent_final + std::log1p(-eps)) < 0.2);

  // deliberately park population on a masked level: infinite heat
  Matrix bad = u;
  bad.col(joint_index(0, slot_of(3))).swap(bad.col(joint_index(0, slot_of(3) + 1)));
  ProcessSpec bad_spec{diagonal_state(vec2(s1, s2)), res, Unitary(bad)};
  const ProcessReport bad_rep = run_process(bad_spec);
  CHECK(std::isinf(bad_rep.beta_delta_Q));
  CHECK(std::isinf(bad_rep.rel_ent_final));
  CHECK(bad_rep.equality_residual == 0.0);
}
