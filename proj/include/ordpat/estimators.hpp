#pragma once

// Zero-crossing (ZC) Hurst estimator H_hat = g(c_hat_n) with plug-in
// confidence interval, and the autocorrelation-based HEAF estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordpat/errors.hpp"
#include "ordpat/fbm.hpp"
#include "ordpat/patterns.hpp"
#include "ordpat/variance.hpp"

namespace ordpat {

inline constexpr double kTwoThirds = 2.0 / 3.0;

/// g(x) = log2 sin(pi (1 - x) / 2) + 1 on [0, 2/3), 0 on [2/3, 1].
inline double g(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("g is defined on [0, 1]");
  if (x >= kTwoThirds) return 0.0;
  const double v = std::log2(std::sin(std::numbers::pi * (1.0 - x) / 2.0)) + 1.0;
  return std::clamp(v, 0.0, 1.0);
}

inline double g_prime(double x) {
  if (!(x > 0.0 && x < kTwoThirds)) throw DomainError("g' is defined on (0, 2/3)");
  const double theta = std::numbers::pi * (1.0 - x) / 2.0;
  return -std::numbers::pi / (2.0 * std::numbers::ln2) / std::tan(theta);
}

inline double g_second(double x) {
  if (!(x > 0.0 && x < kTwoThirds)) throw DomainError("g'' is defined on (0, 2/3)");
  const double s = std::sin(std::numbers::pi * (1.0 - x) / 2.0);
  return -std::numbers::pi * std::numbers::pi / (4.0 * std::numbers::ln2) / (s * s);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Limiting coverage 2 Phi(1.96) - 1 of the interval K_n.
inline double coverage_limit() { return 2.0 * normal_cdf(1.96) - 1.0; }

/// Delta-method expectation H + g''(c(H)) Var_H(c_hat_n) / 2.
inline double asymptotic_expectation(HurstParam h, double var_c) {
  if (h.is_one()) return 1.0;
  return h.value() + 0.5 * g_second(change_prob(h)) * var_c;
}

/// Delta-method variance g'(c(H))^2 Var_H(c_hat_n).
inline double asymptotic_variance(HurstParam h, double var_c) {
  if (h.is_one()) return 0.0;
  const double d = g_prime(change_prob(h));
  return d * d * var_c;
}

enum class Method { kZc, kHeaf };

inline std::string to_string(Method m) { return m == Method::kZc ? "zc" : "heaf"; }

struct EstimateReport {
  Method method = Method::kZc;
  double h_hat = 0.0;
  double statistic = 0.0;  // c_hat for ZC, rho_hat for HEAF
  std::uint64_t n = 0;     // windows (ZC) or increments (HEAF)
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> s_n;
  std::optional<double> asymptotic_bias;
  std::optional<double> asymptotic_variance;
  bool degenerate = false;
};

/// Hurst value at which s_n(0) is evaluated.
inline constexpr double kZeroHurstProxy = 1e-4;

namespace detail {

inline void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("input contains a non-finite value");
  }
}

}  // namespace detail

/// Default variance source: var_c_approx with a fresh covariance per call.
struct ApproxVariance {
  VarianceApproxConfig approx{};
  QuadratureConfig quad{};

  double operator()(HurstParam h, std::uint64_t n) const {
    ChangeCovariance cov(h, quad);
    return var_c_approx(cov, n, approx);
  }
};

/// Fills s_n, K_n and the asymptotic diagnostics of a report whose h_hat and
/// n are set. `var_c(h, n)` returns Var_h(c_hat_n).
template <class VarFn>
void attach_interval(EstimateReport& rep, VarFn&& var_c) {
  if (rep.h_hat >= 1.0) {
    rep.s_n = 0.0;
    rep.asymptotic_bias = 0.0;
    rep.asymptotic_variance = 0.0;
  } else {
    const HurstParam at(std::max(rep.h_hat, kZeroHurstProxy));
    const double v = var_c(at, rep.n);
    rep.s_n = asymptotic_variance(at, v);
    rep.asymptotic_variance = rep.s_n;
    rep.asymptotic_bias = asymptotic_expectation(at, v) - at.value();
  }
  const double half = 1.96 * std::sqrt(*rep.s_n);
  rep.ci_low = std::max(0.0, rep.h_hat - half);
  rep.ci_high = std::min(1.0, rep.h_hat + half);
}

template <class VarFn>
EstimateReport zc_report(double c_hat, std::uint64_t n, VarFn&& var_c) {
  EstimateReport rep;
  rep.method = Method::kZc;
  rep.statistic = c_hat;
  rep.n = n;
  rep.h_hat = g(c_hat);
  attach_interval(rep, std::forward<VarFn>(var_c));
  return rep;
}

template <class VarFn>
EstimateReport zc_estimate(std::span<const double> x, VarFn&& var_c) {
  detail::require_finite(x);
  const auto cc = change_indicator_count(x);
  return zc_report(cc.c_hat(), cc.windows, std::forward<VarFn>(var_c));
}

inline EstimateReport zc_estimate(std::span<const double> x, const ApproxVariance& var_c = {}) {
  return zc_estimate(x, [&](HurstParam h, std::uint64_t n) { return var_c(h, n); });
}

/// HEAF estimate from increments y (at least 2).
inline EstimateReport heaf_from_increments(std::span<const double> y) {
  if (y.size() < 2) throw BadLength("HEAF needs at least 2 increments");
  detail::require_finite(y);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double nd = static_cast<double>(y.size());
  double mean = 0.0;
  double num = 0.0, den = 0.0;
  if (scale > 0.0) {
    for (double v : y) mean += v / scale;
    mean /= nd;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double a = y[k] / scale - mean;
      den += a * a;
      if (k + 1 < y.size()) num += a * (y[k + 1] / scale - mean);
    }
  }

  EstimateReport rep;
  rep.method = Method::kHeaf;
  rep.n = y.size();
  if (!(den > 0.0)) {
    rep.statistic = 1.0;
    rep.h_hat = 1.0;
    rep.degenerate = true;
    return rep;
  }
  rep.statistic = num / den;
  const double r = std::max(-0.5, rep.statistic);
  rep.h_hat = std::clamp(0.5 * (1.0 + std::log2(1.0 + r)), 0.0, 1.0);
  return rep;
}

/// HEAF estimate from a series of levels x (at least 3 values).
inline EstimateReport heaf_estimate(std::span<const double> x) {
  if (x.size() < 3) throw BadLength("HEAF needs at least 3 values");
  detail::require_finite(x);
  // halved differences stay finite for any finite input; rho_hat is scale free
  std::vector<double> y(x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) y[k] = x[k + 1] / 2.0 - x[k] / 2.0;
  return heaf_from_increments(y);
}

}  // namespace ordpat
