#pragma once

// Autocovariance gamma_H(k) = Cov(C_0, C_k) of the change indicators of fBm,
// and the variance of their sample mean c_hat_n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ordpat/errors.hpp"
#include "ordpat/fbm.hpp"
#include "ordpat/orthant.hpp"
#include "ordpat/quadrature.hpp"

namespace ordpat {

/// Probability c(H) = 1 - (2/pi) arcsin 2^{H-1} that the middle of three
/// consecutive fBm values is a turning point.
inline double change_prob(HurstParam h) {
  if (h.is_one()) return 0.0;
  return 1.0 - 2.0 / std::numbers::pi * std::asin(std::exp2(h.value() - 1.0));
}

/// Probability of each of the two monotone patterns of order 2.
inline double monotone_pattern_prob(HurstParam h) {
  return std::asin(std::exp2(h.value() - 1.0)) / std::numbers::pi;
}

/// Probability of each of the four turning-point patterns of order 2.
inline double change_pattern_prob(HurstParam h) { return change_prob(h) / 4.0; }

inline double gamma0(HurstParam h) {
  const double c = change_prob(h);
  return c * (1.0 - c);
}

inline double gamma1(HurstParam h) {
  if (h.is_half() || h.is_one()) return 0.0;
  constexpr double pi = std::numbers::pi;
  const double a1 = std::asin(rho(h, 1));
  return std::asin(rho(h, 2)) / (2.0 * pi) - a1 * a1 / (pi * pi);
}

/// Correlation parameters of (Y_1, Y_2, sign*Y_{k+1}, sign*Y_{k+2}).
inline OrthantSpec4 lag_spec(HurstParam h, std::uint64_t k, double sign = 1.0) {
  return OrthantSpec4(rho(h, 1), sign * rho(h, k), sign * rho(h, k + 1),
                      sign * rho(h, k - 1));
}

/// gamma_H(k) for k >= 2 through the orthant probabilities of lag_spec,
/// evaluated as one symmetric path integral.
inline double gamma_exact(HurstParam h, std::uint64_t k, const QuadratureConfig& q = {}) {
  if (k < 2) throw DomainError("gamma_exact requires k >= 2");
  if (h.is_half() || h.is_one()) return 0.0;
  return 2.0 * orthant4_symmetric_increment(lag_spec(h, k), q);
}

/// Leading term 2(1-rho)/(pi^2 (1+rho)) H^2 (2H-1)^2 k^{4H-4}, rho = rho_H(1).
inline double gamma_asymptotic(HurstParam h, std::uint64_t k) {
  if (k < 1) throw DomainError("gamma_asymptotic requires k >= 1");
  if (h.is_one() || h.is_half()) return 0.0;
  const double r = rho(h, 1);
  const double hv = h.value();
  const double a = hv * (2.0 * hv - 1.0);
  return 2.0 * (1.0 - r) / (std::numbers::pi * std::numbers::pi * (1.0 + r)) *
         a * a * std::pow(static_cast<double>(k), 4.0 * hv - 4.0);
}

/// Even derivatives in r2 of F(r1, r2) = Phi(S(r1, r2, r2, r2)) at (rho_H(1), 0).
struct TaylorCoefficients {
  double d2;
  double d4;
  double d6;
};

inline TaylorCoefficients taylor_coefficients(double r) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double q = 7.0 + 6.0 * r + 2.0 * r * r;
  return {(1.0 - r) / (pi2 * (1.0 + r)),
          4.0 * (1.0 - r) * (2.0 + r) * (2.0 + r) / (pi2 * std::pow(1.0 + r, 3)),
          16.0 * (1.0 - r) * q * q / (pi2 * std::pow(1.0 + r, 5))};
}

inline TaylorCoefficients taylor_coefficients(HurstParam h) {
  if (h.is_one()) return {0.0, 0.0, 0.0};
  return taylor_coefficients(rho(h, 1));
}

/// Order-m Taylor approximation of gamma_H(k) in the asymptotic lag
/// correlation H(2H-1)k^{2H-2}; m in {1, 2, 3}.
inline double gamma_taylor(HurstParam h, std::uint64_t k, int m) {
  if (m < 1 || m > 3) {
    throw UnsupportedOrder("Taylor order must be 1, 2 or 3, got " + std::to_string(m));
  }
  if (k < 1) throw DomainError("gamma_taylor requires k >= 1");
  if (h.is_one() || h.is_half()) return 0.0;
  const auto c = taylor_coefficients(h);
  const double x = rho_asymptotic(h, k);
  const double x2 = x * x;
  double sum = c.d2 / 2.0 * x2;
  if (m >= 2) sum += c.d4 / 24.0 * x2 * x2;
  if (m >= 3) sum += c.d6 / 720.0 * x2 * x2 * x2;
  return 4.0 * sum;
}

enum class GammaSource { kClosedForm, kQuadrature, kTaylor };

/// gamma_H(k) for one H with memoized quadrature values. Safe for concurrent
/// use; a value computed twice by racing threads is identical.
class ChangeCovariance {
 public:
  explicit ChangeCovariance(HurstParam h, QuadratureConfig q = {})
      : h_(h), q_(q), gamma0_(ordpat::gamma0(h)), gamma1_(ordpat::gamma1(h)) {
    q_.validate();
  }

  ChangeCovariance(const ChangeCovariance&) = delete;
  ChangeCovariance& operator=(const ChangeCovariance&) = delete;

  HurstParam hurst() const noexcept { return h_; }
  const QuadratureConfig& quadrature() const noexcept { return q_; }

  double gamma(std::uint64_t k) const {
    if (k == 0) return gamma0_;
    if (k == 1) return gamma1_;
    if (h_.is_half() || h_.is_one()) return 0.0;
    {
      std::lock_guard lock(mutex_);
      if (k < memo_.size() && memo_[k]) return *memo_[k];
    }
    const double v = gamma_exact(h_, k, q_);
    std::lock_guard lock(mutex_);
    if (memo_.size() <= k) memo_.resize(k + 1);
    memo_[k] = v;
    return v;
  }

  static GammaSource source(std::uint64_t k, HurstParam h) {
    if (k < 2 || h.is_half() || h.is_one()) return GammaSource::kClosedForm;
    return GammaSource::kQuadrature;
  }

 private:
  HurstParam h_;
  QuadratureConfig q_;
  double gamma0_;
  double gamma1_;
  mutable std::mutex mutex_;
  mutable std::vector<std::optional<double>> memo_;
};

namespace detail {

inline bool taylor_within(const ChangeCovariance& cov, std::uint64_t k, int m, double eps) {
  const double exact = cov.gamma(k);
  const double approx = gamma_taylor(cov.hurst(), k, m);
  return std::abs(approx - exact) < eps * std::abs(exact);
}

// Least k in [2, bound) passing the relative-error test, or nullopt.
inline std::optional<std::uint64_t> find_threshold(const ChangeCovariance& cov, int m,
                                                   double eps, std::uint64_t bound) {
  for (std::uint64_t k = 2; k < bound; ++k) {
    if (taylor_within(cov, k, m, eps)) return k;
  }
  return std::nullopt;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultThresholdCap = 100000;

/// Least k >= 2 with |gamma_taylor - gamma| / |gamma| < eps.
inline std::uint64_t k_threshold(const ChangeCovariance& cov, int m, double eps,
                                 std::uint64_t k_max = kDefaultThresholdCap) {
  if (!(eps > 0.0)) throw DomainError("eps must be > 0");
  if (m < 1 || m > 3) throw UnsupportedOrder("Taylor order must be 1, 2 or 3");
  const HurstParam h = cov.hurst();
  if (h.is_half() || h.is_one()) {
    throw DomainError("threshold undefined for H = 1/2 and H = 1");
  }
  if (auto k = detail::find_threshold(cov, m, eps, k_max + 1)) return *k;
  throw CapReached("no k <= " + std::to_string(k_max) + " reaches relative error " +
                       std::to_string(eps),
                   static_cast<long long>(k_max));
}

inline std::uint64_t k_threshold(HurstParam h, int m, double eps,
                                 const QuadratureConfig& q = {},
                                 std::uint64_t k_max = kDefaultThresholdCap) {
  ChangeCovariance cov(h, q);
  return k_threshold(cov, m, eps, k_max);
}

/// Var_H(c_hat_n) from gamma_H(0..n-1), all lags by quadrature.
inline double var_c_exact(const ChangeCovariance& cov, std::uint64_t n) {
  if (n < 1) throw DomainError("n must be >= 1");
  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (std::uint64_t k = 1; k < n; ++k) {
    sum += (nd - static_cast<double>(k)) * cov.gamma(k);
  }
  return (nd * cov.gamma(0) + 2.0 * sum) / (nd * nd);
}

inline double var_c_exact(HurstParam h, std::uint64_t n, const QuadratureConfig& q = {}) {
  ChangeCovariance cov(h, q);
  return var_c_exact(cov, n);
}

struct VarianceApproxConfig {
  int m = 3;
  double eps = 0.01;
  std::uint64_t n_tilde_cap = 250;
  // true: exact values for k <= n_tilde, Taylor from n_tilde + 1;
  // false: Taylor already at k = n_tilde.
  bool exact_at_n_tilde = true;

  void validate() const {
    if (m < 1 || m > 3) throw UnsupportedOrder("Taylor order must be 1, 2 or 3");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
    if (n_tilde_cap < 2) throw DomainError("n_tilde_cap must be >= 2");
  }
};

/// Switch-over lag min{k_H^(m)(eps), cap, n}.
inline std::uint64_t n_tilde(const ChangeCovariance& cov, std::uint64_t n,
                             const VarianceApproxConfig& cfg) {
  const std::uint64_t bound = std::min(cfg.n_tilde_cap, n);
  if (cov.hurst().is_half() || cov.hurst().is_one()) return bound;
  return detail::find_threshold(cov, cfg.m, cfg.eps, bound).value_or(bound);
}

/// Var_H(c_hat_n) with quadrature values up to n_tilde and the order-m
/// Taylor approximation beyond (see VarianceApproxConfig::exact_at_n_tilde).
inline double var_c_approx(const ChangeCovariance& cov, std::uint64_t n,
                           const VarianceApproxConfig& cfg = {}) {
  if (n < 1) throw DomainError("n must be >= 1");
  cfg.validate();
  const HurstParam h = cov.hurst();
  const double nd = static_cast<double>(n);
  if (h.is_one()) return 0.0;
  if (h.is_half()) return cov.gamma(0) / nd;

  const std::uint64_t switch_k = n_tilde(cov, n, cfg) + (cfg.exact_at_n_tilde ? 1 : 0);
  double sum = 0.0;
  for (std::uint64_t k = 1; k < switch_k; ++k) {
    sum += (nd - static_cast<double>(k)) * cov.gamma(k);
  }
  for (std::uint64_t k = switch_k; k < n; ++k) {
    sum += (nd - static_cast<double>(k)) * gamma_taylor(h, k, cfg.m);
  }
  return (nd * cov.gamma(0) + 2.0 * sum) / (nd * nd);
}

inline double var_c_approx(HurstParam h, std::uint64_t n,
                           const VarianceApproxConfig& cfg = {},
                           const QuadratureConfig& q = {}) {
  ChangeCovariance cov(h, q);
  return var_c_approx(cov, n, cfg);
}

/// Long-memory asymptotics of Var_H(c_hat_n) for H >= 3/4:
///   d_H ln(n) / n                              at H = 3/4,
///   d_H n^{4H-4} / ((4H-3)(4H-2))              for H > 3/4,
/// with d_H = 4(1-rho)H^2(2H-1)^2 / (pi^2 (1+rho)), rho = rho_H(1).
inline double var_c_asymptotic(HurstParam h, double n) {
  const double hv = h.value();
  if (hv < 0.75) throw DomainError("var_c_asymptotic requires H >= 3/4");
  if (h.is_one()) return 0.0;
  const double r = rho(h, 1);
  const double a = hv * (2.0 * hv - 1.0);
  const double d = 4.0 * (1.0 - r) * a * a /
                   (std::numbers::pi * std::numbers::pi * (1.0 + r));
  if (hv == 0.75) return d * std::log(n) / n;
  return d * std::pow(n, 4.0 * hv - 4.0) / ((4.0 * hv - 3.0) * (4.0 * hv - 2.0));
}

/// n * Var_H(c_hat_n).
inline double f_n(const ChangeCovariance& cov, std::uint64_t n,
                  const VarianceApproxConfig& cfg = {}) {
  return static_cast<double>(n) * var_c_approx(cov, n, cfg);
}

namespace detail {

// sum_{k >= a} k^{-s} for s > 1, a >= 1, by Euler-Maclaurin.
inline double hurwitz_zeta(double s, double a) {
  constexpr int kDirect = 16;
  constexpr double kBernoulli[] = {1.0 / 6.0,  -1.0 / 30.0, 1.0 / 42.0,
                                   -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0};
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(a + k, -s);
  const double x = a + kDirect;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  double rising = s;      // s (s+1) ... (s + 2j - 2)
  double fact = 2.0;      // (2j)!
  double xpow = std::pow(x, -s - 1.0);
  for (int j = 1; j <= 6; ++j) {
    sum += kBernoulli[j - 1] / fact * rising * xpow;
    rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    xpow /= x * x;
  }
  return sum;
}

// sum_{k >= start} gamma_taylor(h, k, 3)
inline double taylor_tail(HurstParam h, std::uint64_t start) {
  const double hv = h.value();
  const auto c = taylor_coefficients(h);
  const double a = hv * (2.0 * hv - 1.0);
  const double a2 = a * a;
  const double e = 4.0 - 4.0 * hv;  // exponent of k^{-1} per a^2
  const double ks = static_cast<double>(start);
  return 4.0 * (c.d2 / 2.0 * a2 * hurwitz_zeta(e, ks) +
                c.d4 / 24.0 * a2 * a2 * hurwitz_zeta(2.0 * e, ks) +
                c.d6 / 720.0 * a2 * a2 * a2 * hurwitz_zeta(3.0 * e, ks));
}

}  // namespace detail

/// Limit of n * Var_H(c_hat_n) for H < 3/4, i.e. gamma(0) + 2 sum_k gamma(k).
///
/// Lags below K are summed exactly; the tail from K on uses the order-3 Taylor
/// approximation summed in closed form. K is doubled until the tail error
/// estimate (relative Taylor error at K times the tail) is below tail_tol.
inline double f_infinity(const ChangeCovariance& cov, double tail_tol = 1e-10,
                         std::uint64_t k_cap = 1u << 14) {
  const HurstParam h = cov.hurst();
  if (h.value() >= 0.75) throw DomainError("f_infinity requires H < 3/4");
  if (h.is_half()) return cov.gamma(0);

  std::uint64_t k_switch = std::max<std::uint64_t>(
      8, detail::find_threshold(cov, 3, 1e-3, 2000).value_or(2000));
  for (;;) {
    double head = 0.0;
    for (std::uint64_t k = 1; k < k_switch; ++k) head += cov.gamma(k);
    const double tail = detail::taylor_tail(h, k_switch);
    const double exact_at = cov.gamma(k_switch);
    const double rel_err =
        std::abs(gamma_taylor(h, k_switch, 3) - exact_at) / std::abs(exact_at);
    if (rel_err * std::abs(tail) <= tail_tol || k_switch >= k_cap) {
      return cov.gamma(0) + 2.0 * (head + tail);
    }
    k_switch *= 2;
  }
}

inline double f_infinity(HurstParam h, double tail_tol = 1e-10,
                         const QuadratureConfig& q = {}) {
  ChangeCovariance cov(h, q);
  return f_infinity(cov, tail_tol);
}

}  // namespace ordpat
