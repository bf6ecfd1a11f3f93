// processes.hpp — construction, execution, and verification of
// system/reservoir processes: the full derived quantity set, equality and
// bound diagnostics, memory and correlation scenarios, k-step staircases,
// and the masked-reservoir erasure construction.

#pragma once

#include "landauer/bounds.hpp"
#include "landauer/core.hpp"
#include "landauer/thermo.hpp"

#include <optional>
#include <vector>

namespace landauer {

// ---------------------------------------------------------------------------
// Process specification and report
// ---------------------------------------------------------------------------

struct ProcessSpec {
  QState rho_S;        // system state, any factor structure
  Reservoir reservoir; // initially thermal, possibly masked
  Unitary u;           // acts on the joint space [S factors..., R factors...]
};

struct BoundMargins {
  double landauer;                  // beta*dQ - dS
  double finite_size;               // beta*dQ - finite_size_bound(dS, d)
  std::optional<double> heat_extraction;  // only when beta*dQ <= 0
  std::optional<double> pureness;   // only when beta >= 0
};

struct ProcessReport {
  double delta_S;            // S(rho_S) - S(rho'_S)
  double delta;              // S(rho'_R) - S(rho_R)
  double delta_Q;            // tr[H(rho'_R - rho_R)], +inf on masked-level population
  double beta_delta_Q;       // extended real
  double mutual_info_final;  // I(S':R')
  double rel_ent_final;      // D(rho'_R || rho_R), extended real
  double equality_residual;  // |beta*dQ - (dS + I + D)|; 0 when consistently infinite
  double second_law_residual;
  BoundMargins margins;
  QState rho_S_final;
  QState rho_R_final;
};

ProcessReport run_process(const ProcessSpec& spec);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct EqualityDiagnosis {
  bool equality;            // |beta*dQ - dS| <= tol_eq, both finite
  double gap;
  bool reservoir_unchanged; // witnesses, evaluated when equality holds
  bool mutual_info_zero;
  bool spectra_match;       // mspec(rho'_S) = mspec(rho_S)
};

inline constexpr double kEqualityTol = 1e-7;

EqualityDiagnosis check_equality_case(const ProcessReport& report, const ProcessSpec& spec);

// lambda_min(rho'_S) - e^{-beta(H_max - H_min)} lambda_min(rho_S);
// empty for beta < 0, where the bound does not apply.
std::optional<double> pureness_bound_margin(const ProcessSpec& spec,
                                            const ProcessReport& report);

// |(dS + I(S':R') + D(rho'_R||rho'_th)) - integral of beta(E) dE|; all terms
// finite even when beta*dQ is not.
double integral_version_residual(const ProcessSpec& spec, const ProcessReport& report);

// ---------------------------------------------------------------------------
// Swap constructions
// ---------------------------------------------------------------------------

struct SwapPartition {
  Index d_sw;   // swapped subsystem dimension (S1 and R1)
  Index d_s2;   // spectator part of S
  Index d_r2;   // spectator part of R
};

struct SwapProcess {
  ProcessSpec spec;
  SwapPartition partition;
  // closed forms predicted by the swap algebra
  double delta_S;
  double delta;
  double delta_Q;
  double mutual_info_final;
};

// Swap process against the given full-rank target reservoir state, realized
// as the thermal state of H = -log(rho_R) at beta = 1.
SwapProcess build_swap_process(const QState& rho_S, const QState& rho_R_target,
                               const SwapPartition& partition);

struct TightProcess {
  SwapProcess swap;
  MOptimum optimum;       // the M(delta_S, d) optimizer the states are built from
  QState rho_S;
  QState rho_R;
};

// Full-swap process attaining beta*dQ = dS + M(dS, d); dS in [0, log d - 1e-6].
TightProcess build_tight_process(double delta_s, Index d);

// The extremal dS-range processes: dS = log d, -log d, -2 log d (the latter
// with no heat flow), plus the intermediate entangled variant.
struct RangeWitness {
  ProcessSpec spec;
  double expected_delta_S;
  std::optional<double> expected_delta_Q;
  const char* label;
};
std::vector<RangeWitness> deltaS_range_witnesses(Index d);

// ---------------------------------------------------------------------------
// k-step staircase (rank-non-decreasing processes)
// ---------------------------------------------------------------------------

enum class Interpolation { linear_mixture, custom_curve };

struct KStepSpec {
  QState rho_S;
  QState rho_S_final;  // rank(rho_S_final) >= rank(rho_S)
  int k = 1;
  Interpolation interpolation = Interpolation::linear_mixture;
  // for custom_curve: the k-1 interior states on the support of rho_S_final,
  // given as matrices on the restricted (rank x rank) space
  std::vector<Matrix> custom_curve;
};

struct KStepReport {
  double delta_S;
  double beta_delta_Q;               // dS + sum of per-step divergences
  double gap;                        // beta_delta_Q - delta_S
  std::vector<double> step_divergences;
  double upper_bound;                // (D(rho_0||rho'_S)+D(rho'_S||rho_0))/k
  double lower_bound;                // k * M(dS/k, r)
  Index rank;
};

// Analytic evaluation from the per-step reservoir marginals; the joint
// space (dimension d_S * r^k) is never materialized.
KStepReport build_kstep_process(const KStepSpec& spec);

// Dense brute-force evaluation for k <= 3 (requires full-rank rho_S_final);
// builds the joint unitary product and runs it through run_process.
ProcessReport kstep_dense_oracle(const KStepSpec& spec);

// ---------------------------------------------------------------------------
// Memory-assisted processes
// ---------------------------------------------------------------------------

struct MemoryProcessSpec {
  QState rho_SM;        // factors [S, M]
  Reservoir reservoir;
  Unitary u;            // acts on [S, R, M] (times ancilla when present)
  Index ancilla_dim = 1;  // > 1 turns the process into a noisy operation
};

struct MemoryReport {
  double delta_S_cond;       // S(S|M) - S(S'|M')
  double delta;              // reservoir entropy change
  double delta_Q;
  double beta_delta_Q;
  double mutual_info_SM_R;   // I(S'M':R')
  double rel_ent_final;      // D(rho'_R||rho_R)
  double entropy_M_initial;
  double entropy_M_final;
  bool memory_condition;     // S(M') <= S(M) + tol, required by the bounds
  double second_law_margin;  // delta - (dS_cond + I)
  double landauer_margin;    // beta*dQ - (dS_cond + I + D)
  QState rho_S_final;
  QState rho_M_final;
};

MemoryReport memory_process_report(const MemoryProcessSpec& spec);

// The canonical erasure-with-memory examples: classical perfect correlation
// and maximal entanglement between S and M, erased by a controlled unitary
// that leaves R untouched. probs is the spectrum of rho_S.
MemoryProcessSpec classical_memory_example(const RealVector& probs);
MemoryProcessSpec entangled_memory_example(const RealVector& probs);

// Two-stage attempt at recovering heat from the purified memory: stage one
// erases S using the entanglement with M, stage two swaps the now-pure M
// with an engineered reservoir. Reports the best beta*dQ over the reservoir
// family against the in-principle target -S(S).
struct TwoStageResult {
  double achieved_beta_delta_Q;
  double target;              // -S(rho_S)
  double lambda_star;         // optimizing mixing weight of the reservoir
  MemoryReport report;        // full report at lambda_star
};
TwoStageResult entangled_two_stage_attempt(const RealVector& probs, int lambda_grid = 200);

// ---------------------------------------------------------------------------
// Correlation counterexamples
// ---------------------------------------------------------------------------

struct CorrelationCounterexamples {
  // (i) swap against rho_R = rho_S with a correlated memory:
  //     information about S drops by delta_I while no heat flows
  double delta_I;
  double beta_delta_Q_corr;
  // (ii) product-state swap with pure rho_S against (1-l)psi + l*1/d:
  //      delta_I = 0 yet beta*dQ < 0 at the reported lambda
  double lambda_star;
  double beta_delta_Q_min;
  double scan_floor;          // 0.2 - log d; every scanned value stays above
  bool floor_respected;
};

CorrelationCounterexamples correlation_counterexamples(Index d = 16);

// ---------------------------------------------------------------------------
// Processes on several independent systems
// ---------------------------------------------------------------------------

struct MultiSystemComparison {
  double joint_beta_delta_Q;
  double sum_delta_S;
  double sum_beta_delta_Q_singles;
  double heat_margin;          // joint beta*dQ - sum dS_i
  double chaining_residual;    // |S(rho'_S) - sum S_i + sum I_i|
  double max_marginal_mismatch;
};

// The joint system must carry one factor per single process, with final
// marginals matching the single-process targets.
MultiSystemComparison multi_system_check(const std::vector<ProcessSpec>& singles,
                                         const ProcessSpec& joint);

// ---------------------------------------------------------------------------
// Erasure towards a pure state (masked reservoir, truncated)
// ---------------------------------------------------------------------------

struct PureErasureReport {
  double delta_S;             // = S(rho_S) up to truncation
  double rel_ent;             // D(rho'_R||rho_R) on the truncation
  double beta_delta_Q;
  double final_purity_deficit;  // 1 - lambda_max(rho'_S)
  double tail_mass;             // population beyond the truncation level
  double expected_rel_ent;      // -log(1-eps)
  double entropy_R_initial;
  double entropy_R_final;
  int truncation_level;
  long long class_count;        // aggregated level classes represented
};

// Erasure of the qubit diag(s1, 1-s1) to a pure state against the
// self-similar masked reservoir, truncated at the given recursion level.
// The level populations are tracked in aggregated form, so the truncation
// level may be large; tail mass above 1e-10 is rejected with the required
// level in the message.
PureErasureReport pure_erasure_truncated(double s1, double epsilon, int truncation_level);

// Smallest truncation level with tail mass below the given bound.
int pure_erasure_required_level(double epsilon, double tail_bound = 1e-10);

}  // namespace landauer
