#pragma once

// Gaussian orthant probabilities. Dimensions 2 and 3 are closed form; the
// structured 4-dimensional correlation matrix
//
//           | 1   r1  r2  r3 |
//   S(r) =  | r1  1   r4  r2 |
//           | r2  r4  1   r1 |
//           | r3  r2  r1  1  |
//
// is handled with Plackett's reduction formula for the first partial
// derivatives in r2, r3, r4, integrated along the straight path from the
// block-diagonal matrix S(r1, 0, 0, 0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "ordpat/errors.hpp"
#include "ordpat/quadrature.hpp"

namespace ordpat {

using Matrix4 = std::array<std::array<double, 4>, 4>;

namespace detail {

inline constexpr double kPdTol = 1e-12;
inline constexpr double kAsinTol = 1e-12;

inline double clamped_asin(double x) {
  if (x > 1.0 + kAsinTol || x < -1.0 - kAsinTol) {
    throw NotPositiveDefinite("arcsin argument " + std::to_string(x) +
                              " outside [-1, 1]");
  }
  return std::asin(std::clamp(x, -1.0, 1.0));
}

inline double det3(double a00, double a01, double a02,
                   double a10, double a11, double a12,
                   double a20, double a21, double a22) {
  return a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) +
         a02 * (a10 * a21 - a11 * a20);
}

// Determinant of m with row i and column j removed (0-based).
inline double minor_det(const Matrix4& m, int i, int j) {
  std::array<double, 9> a{};
  int p = 0;
  for (int r = 0; r < 4; ++r) {
    if (r == i) continue;
    for (int c = 0; c < 4; ++c) {
      if (c == j) continue;
      a[static_cast<std::size_t>(p++)] =
          m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return det3(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]);
}

inline double det4(const Matrix4& m) {
  double d = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    d += sign * m[0][static_cast<std::size_t>(j)] * minor_det(m, 0, j);
  }
  return d;
}

}  // namespace detail

inline Matrix4 structured_sigma(const std::array<double, 4>& r) {
  return {{{1.0, r[0], r[1], r[2]},
           {r[0], 1.0, r[3], r[1]},
           {r[1], r[3], 1.0, r[0]},
           {r[2], r[1], r[0], 1.0}}};
}

/// Leading principal minors of a symmetric 4x4 matrix.
inline std::array<double, 4> leading_minors(const Matrix4& m) {
  const double d1 = m[0][0];
  const double d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double d3 = detail::det3(m[0][0], m[0][1], m[0][2], m[1][0], m[1][1],
                                 m[1][2], m[2][0], m[2][1], m[2][2]);
  return {d1, d2, d3, detail::det4(m)};
}

/// Correlation parameters (r1, r2, r3, r4) of a strictly positive definite
/// structured matrix S(r).
class OrthantSpec4 {
 public:
  explicit OrthantSpec4(std::array<double, 4> r) : r_(r) {
    for (double v : r_) {
      if (!(v >= -1.0 && v <= 1.0)) {
        throw NotPositiveDefinite("correlation entry outside [-1, 1]");
      }
    }
    for (double m : leading_minors(sigma())) {
      if (!(m > detail::kPdTol)) {
        throw NotPositiveDefinite("structured correlation matrix is not positive definite");
      }
    }
  }

  OrthantSpec4(double r1, double r2, double r3, double r4)
      : OrthantSpec4(std::array<double, 4>{r1, r2, r3, r4}) {}

  const std::array<double, 4>& r() const noexcept { return r_; }
  double operator[](std::size_t i) const { return r_[i]; }
  Matrix4 sigma() const { return structured_sigma(r_); }

  /// (r1, -r2, -r3, -r4); congruent to S(r) via diag(1, 1, -1, -1).
  OrthantSpec4 mirrored() const {
    return OrthantSpec4(std::array<double, 4>{r_[0], -r_[1], -r_[2], -r_[3]});
  }

 private:
  std::array<double, 4> r_;
};

/// P(Z1 > 0, Z2 > 0) for unit-variance Z with correlation rho12.
inline double orthant2(double rho12) {
  return 0.25 + detail::clamped_asin(rho12) / (2.0 * std::numbers::pi);
}

/// P(Z1 > 0, Z2 > 0, Z3 > 0) for a unit-variance Gaussian vector.
inline double orthant3(double rho12, double rho13, double rho23) {
  const double det = 1.0 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23 +
                     2.0 * rho12 * rho13 * rho23;
  if (!(std::abs(rho12) < 1.0 && det > detail::kPdTol)) {
    throw NotPositiveDefinite("3x3 correlation matrix is not positive definite");
  }
  return 0.125 + (std::asin(rho12) + std::asin(rho13) + std::asin(rho23)) /
                     (4.0 * std::numbers::pi);
}

struct PlackettPartials {
  double d2;
  double d3;
  double d4;
};

namespace detail {

// Partials without the positive-definiteness check, for use on quadrature
// paths whose endpoints have already been validated.
inline PlackettPartials plackett_partials_unchecked(const std::array<double, 4>& s) {
  constexpr double pi = std::numbers::pi;
  const Matrix4 m = structured_sigma(s);
  const double m11 = minor_det(m, 0, 0);
  const double m22 = minor_det(m, 1, 1);
  const double m13 = minor_det(m, 0, 2);
  const double m23 = minor_det(m, 1, 2);
  const double m14 = minor_det(m, 0, 3);

  PlackettPartials p{};
  p.d2 = (0.25 - clamped_asin(m13 / std::sqrt(m11 * m22)) / (2.0 * pi)) /
         (pi * std::sqrt(1.0 - s[1] * s[1]));
  p.d3 = (0.25 + clamped_asin(m23 / m22) / (2.0 * pi)) /
         (2.0 * pi * std::sqrt(1.0 - s[2] * s[2]));
  p.d4 = (0.25 + clamped_asin(m14 / m11) / (2.0 * pi)) /
         (2.0 * pi * std::sqrt(1.0 - s[3] * s[3]));
  return p;
}

// Directional derivative of the orthant probability along (0, s2, s3, s4)
// evaluated at (s1, t*s2, t*s3, t*s4).
inline double path_derivative(const std::array<double, 4>& s, double t) {
  const auto p = plackett_partials_unchecked({s[0], t * s[1], t * s[2], t * s[3]});
  return s[1] * p.d2 + s[2] * p.d3 + s[3] * p.d4;
}

}  // namespace detail

/// First partial derivatives of the orthant probability of S(s) in r2, r3, r4.
inline PlackettPartials plackett_partials(const OrthantSpec4& s) {
  return detail::plackett_partials_unchecked(s.r());
}

/// Phi(S(s)) - Phi(S(s1, 0, 0, 0)).
inline double orthant4_increment(const OrthantSpec4& s, const QuadratureConfig& q = {}) {
  const auto& r = s.r();
  return integrate_unit_interval(
      [&](double t) { return detail::path_derivative(r, t); }, q);
}

/// Phi(S(s)) + Phi(S(mirrored s)) - 2 Phi(S(s1, 0, 0, 0)).
///
/// The integrand is odd in the path direction, so the O(|s|) terms cancel
/// inside the integral instead of after it.
inline double orthant4_symmetric_increment(const OrthantSpec4& s,
                                           const QuadratureConfig& q = {}) {
  const auto& r = s.r();
  return integrate_unit_interval(
      [&](double t) {
        return detail::path_derivative(r, t) - detail::path_derivative(r, -t);
      },
      q);
}

/// Phi(S(s)) by path integration from the block-diagonal start, whose value
/// is orthant2(s1)^2.
inline double orthant4(const OrthantSpec4& s, const QuadratureConfig& q = {}) {
  const double start = orthant2(s[0]);
  return start * start + orthant4_increment(s, q);
}

struct MonteCarloEstimate {
  double probability;
  double std_error;
};

/// Brute-force Monte Carlo estimate of Phi(S(s)) with binomial standard error.
inline MonteCarloEstimate orthant4_mc(const OrthantSpec4& s, std::uint64_t draws,
                                      std::uint64_t seed) {
  if (draws == 0) throw DomainError("need at least one draw");
  const Matrix4 m = s.sigma();
  Matrix4 l{};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) throw NotPositiveDefinite("Cholesky failed");
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }

  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::uint64_t hits = 0;
  for (std::uint64_t d = 0; d < draws; ++d) {
    const double z0 = normal(engine), z1 = normal(engine), z2 = normal(engine),
                 z3 = normal(engine);
    const double x0 = l[0][0] * z0;
    const double x1 = l[1][0] * z0 + l[1][1] * z1;
    const double x2 = l[2][0] * z0 + l[2][1] * z1 + l[2][2] * z2;
    const double x3 = l[3][0] * z0 + l[3][1] * z1 + l[3][2] * z2 + l[3][3] * z3;
    hits += static_cast<std::uint64_t>(x0 > 0.0 && x1 > 0.0 && x2 > 0.0 && x3 > 0.0);
  }
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

}  // namespace ordpat
