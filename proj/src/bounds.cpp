#include "landauer/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace landauer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double check_unit_interval(double s, const char* what) {
  if (!(s >= -1e-12 && s <= 1.0 + 1e-12))
    throw std::invalid_argument(std::string(what) + ": argument outside [0, 1]");
  return std::clamp(s, 0.0, 1.0);
}

// golden-section minimization on [a, b]; f may return +inf
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
  constexpr double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

double phi_entropy(double s, double log_dm1) { return binary_entropy(s) + s * log_dm1; }

// inverse of the strictly increasing phi on [0, (d-1)/d]
double phi_inverse(double y, double s_max, double log_dm1) {
  const double top = phi_entropy(s_max, log_dm1);
  if (y <= 0.0) return 0.0;
  if (y >= top) return s_max;
  double lo = 0.0, hi = s_max;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_entropy(mid, log_dm1) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double binary_entropy(double s) {
  s = check_unit_interval(s, "binary_entropy");
  return -xlogx(s) - xlogx(1.0 - s);
}

double binary_relative_entropy(double s, double r) {
  s = check_unit_interval(s, "binary_relative_entropy");
  r = check_unit_interval(r, "binary_relative_entropy");
  double d = 0.0;
  if (s > 0.0) {
    if (r == 0.0) return kInf;
    d += s * std::log(s / r);
  }
  if (s < 1.0) {
    if (r == 1.0) return kInf;
    d += (1.0 - s) * std::log((1.0 - s) / (1.0 - r));
  }
  return std::max(d, 0.0);
}

NResult compute_N_detailed(Index d) {
  if (d < 2) throw std::invalid_argument("compute_N: need d >= 2");
  const double log_dm1 = std::log(static_cast<double>(d - 1));
  auto objective = [&](double r) {
    const double lv = std::log((1.0 - r) / r) + log_dm1;
    return r * (1.0 - r) * lv * lv;
  };

  // log-spaced scan guards against missing the interior maximum
  const int n_grid = 4000;
  const double r_min = 1e-12, r_max = 0.5 - 1e-12;
  double best_r = r_min, best_f = -kInf;
  const double ratio = std::log(r_max / r_min);
  for (int i = 0; i <= n_grid; ++i) {
    const double r = r_min * std::exp(ratio * static_cast<double>(i) / n_grid);
    const double f = objective(r);
    if (f > best_f) {
      best_f = f;
      best_r = r;
    }
  }
  const double lo = best_r * std::exp(-ratio / n_grid);
  const double hi = std::min(r_max, best_r * std::exp(ratio / n_grid));
  double r_star = golden_min([&](double r) { return -objective(r); }, lo, hi, 1e-13);

  // polish on the stationarity condition (1-2r) L(r) = 2, which has a unique
  // root since its LHS is strictly decreasing on (0, 1/2)
  auto stat = [&](double r) {
    return (1.0 - 2.0 * r) * (std::log((1.0 - r) / r) + log_dm1) - 2.0;
  };
  {
    double a = std::max(r_min, r_star / 2.0), b = std::min(r_max, r_star * 2.0 + 1e-12);
    if (stat(a) > 0.0 && stat(b) < 0.0) {
      for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
        const double mid = 0.5 * (a + b);
        if (stat(mid) > 0.0)
          a = mid;
        else
          b = mid;
      }
      r_star = 0.5 * (a + b);
    }
  }
  return NResult{objective(r_star), r_star, std::abs(stat(r_star))};
}

double compute_N(Index d) {
  static std::map<Index, double> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
  }
  const double value = compute_N_detailed(d).value;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(d, value);
  return value;
}

double BoundParams::n_value() const {
  switch (n_choice) {
    case NChoice::exact:
      return compute_N(d);
    case NChoice::quarter_log_sq_plus_one: {
      const double l = std::log(static_cast<double>(d - 1));
      return 0.25 * l * l + 1.0;
    }
    case NChoice::log_sq: {
      const double l = std::log(static_cast<double>(d));
      return l * l;
    }
  }
  throw std::logic_error("BoundParams: unknown N choice");
}

MOptimum compute_M(double x, Index d) {
  if (d < 2) throw std::invalid_argument("compute_M: need d >= 2");
  const double log_d = std::log(static_cast<double>(d));
  if (x < -log_d - 1e-12 || x > log_d + 1e-12)
    throw std::invalid_argument("compute_M: x outside [-log d, log d]");
  x = std::clamp(x, -log_d, log_d);

  const double s_max = static_cast<double>(d - 1) / static_cast<double>(d);
  const double log_dm1 = std::log(static_cast<double>(d - 1));

  if (x == 0.0) return MOptimum{0.0, 0.0, 0.5 * s_max, 0.5 * s_max};
  if (x >= log_d - 1e-9) return MOptimum{x, kInf, s_max, 0.0};

  // the constraint pins s for each r: phi(s) = phi(r) + x with phi increasing
  auto pinned_s = [&](double r) { return phi_inverse(phi_entropy(r, log_dm1) + x, s_max, log_dm1); };
  auto objective = [&](double r) { return binary_relative_entropy(pinned_s(r), r); };

  double r_lo, r_hi;
  if (x > 0.0) {
    r_lo = 0.0;
    r_hi = phi_inverse(log_d - x, s_max, log_dm1);
  } else {
    r_lo = phi_inverse(-x, s_max, log_dm1);
    r_hi = s_max;
  }

  double r_star;
  if (r_hi - r_lo < 1e-14) {
    r_star = 0.5 * (r_lo + r_hi);
  } else {
    const int n_grid = 2000;
    double best_r = r_hi, best_f = kInf;
    for (int i = 0; i <= n_grid; ++i) {
      const double r = r_lo + (r_hi - r_lo) * static_cast<double>(i) / n_grid;
      const double f = objective(r);
      if (f < best_f) {
        best_f = f;
        best_r = r;
      }
    }
    const double step = (r_hi - r_lo) / n_grid;
    r_star = golden_min(objective, std::max(r_lo, best_r - step),
                        std::min(r_hi, best_r + step), 1e-10);
  }
  const double s_star = pinned_s(r_star);
  return MOptimum{x, binary_relative_entropy(s_star, r_star), s_star, r_star};
}

LowerBoundChain lower_bound_chain(double x, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("lower_bound_chain: need N > 0");
  LowerBoundChain out{};
  out.exp_bound = n * std::expm1(x / n) - x;
  out.quadratic_bound = x * x / (2.0 * n);
  out.cubic_bound = out.quadratic_bound + x * x * x / (6.0 * n * n);
  return out;
}

double finite_size_bound(double delta_s, const BoundParams& params) {
  if (params.d < 1) throw std::invalid_argument("finite_size_bound: need d >= 1");
  if (params.d == 1) return 0.0;  // only DeltaS = DeltaQ = 0 is possible
  const double n = params.n_value();
  if (delta_s <= 0.0) return n - std::sqrt(n * n - 2.0 * n * delta_s);
  const double m = compute_M(delta_s, params.d).value;
  const double quad = delta_s + delta_s * delta_s / (2.0 * n);
  return std::max(delta_s + m, quad);
}

HeatExtractionCheck deltaQ_bound_check(double delta, double beta_delta_q, Index d) {
  HeatExtractionCheck out{};
  if (!(beta_delta_q <= 0.0)) {
    out.applicable = false;
    out.rhs = 0.0;
    out.margin = 0.0;
    return out;
  }
  out.applicable = true;
  out.rhs = beta_delta_q - beta_delta_q * beta_delta_q / (2.0 * compute_N(d));
  out.margin = out.rhs - delta;
  return out;
}

double relent_floor_margin(const QState& sigma, const QState& rho) {
  if (sigma.dim() != rho.dim())
    throw std::invalid_argument("relent_floor_margin: dimension mismatch");
  if (sigma.dim() < 2) throw std::invalid_argument("relent_floor_margin: need d >= 2");
  const double div = relative_entropy(sigma, rho);
  if (std::isinf(div)) return kInf;
  const double log_d = std::log(static_cast<double>(sigma.dim()));
  const double x = std::clamp(von_neumann_entropy(sigma) - von_neumann_entropy(rho),
                              -log_d, log_d);
  return div - compute_M(x, sigma.dim()).value;
}

}  // namespace landauer
