// bounds.hpp — the finite-size bound functions N(d) and M(x,d), the analytic
// lower-bound chain, and the dimension-dependent heat bounds built from them.

#pragma once

#include "landauer/core.hpp"

namespace landauer {

// Binary entropy binH(s) = S(diag(s, 1-s)), s in [0, 1].
double binary_entropy(double s);

// Binary relative entropy binrel(s||r) = D(diag(s,1-s) || diag(r,1-r));
// +infinity iff r lies in {0,1} while s != r.
double binary_relative_entropy(double s, double r);

struct NResult {
  double value;
  double r_star;
  double stationarity_residual;  // |(1-2r)L(r) - 2| at the optimizer
};

// N(d) = max_{0<r<1/2} r(1-r) log^2((1-r)(d-1)/r), d >= 2.
NResult compute_N_detailed(Index d);
double compute_N(Index d);  // cached

// Admissible choices of N >= N(d) in the closed-form bounds.
enum class NChoice { exact, quarter_log_sq_plus_one, log_sq };

struct BoundParams {
  Index d = 2;  // reservoir dimension
  NChoice n_choice = NChoice::exact;
  double n_value() const;
};

struct MOptimum {
  double x;
  double value;   // M(x, d); +infinity within 1e-9 of x = log d
  double s_star;  // optimizing spectra parameters, in [0, (d-1)/d]
  double r_star;
};

// M(x,d) = min { binrel(s||r) : binH(s)-binH(r)+(s-r)log(d-1) = x },
// x in [-log d, log d].
MOptimum compute_M(double x, Index d);

struct LowerBoundChain {
  double exp_bound;        // N e^{x/N} - N - x
  double cubic_bound;      // x^2/2N + x^3/6N^2
  double quadratic_bound;  // x^2/2N
};
LowerBoundChain lower_bound_chain(double x, double n);

// Lower bound on beta*DeltaQ as a function of DeltaS:
//   DeltaS >= 0: max(DeltaS + M(DeltaS,d), DeltaS + DeltaS^2/2N)
//   DeltaS <= 0: N - sqrt(N^2 - 2 N DeltaS)
// For d = 1 all processes have DeltaS = DeltaQ = 0 and the bound is 0.
double finite_size_bound(double delta_s, const BoundParams& params);

struct HeatExtractionCheck {
  bool applicable;  // false when beta*DeltaQ > 0
  double rhs;       // beta*DeltaQ - (beta*DeltaQ)^2 / 2N(d)
  double margin;    // rhs - Delta
};

// Check Delta <= beta*DeltaQ - (beta*DeltaQ)^2/2N(d), valid for
// beta*DeltaQ <= 0 only.
HeatExtractionCheck deltaQ_bound_check(double delta, double beta_delta_q, Index d);

// D(sigma||rho) - M(S(sigma)-S(rho), d); nonnegative up to tolerance for all
// state pairs of equal dimension d >= 2.
double relent_floor_margin(const QState& sigma, const QState& rho);

}  // namespace landauer
