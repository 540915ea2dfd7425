#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "ordpat/errors.hpp"

namespace ordpat {

struct QuadratureConfig {
  int nodes = 48;          // Gauss-Legendre nodes on [0, 1]
  double abs_tol = 1e-12;  // allowed change when the node count is doubled
  int max_refinements = 4;

  void validate() const {
    if (nodes < 4) throw DomainError("quadrature needs at least 4 nodes");
    if (!(abs_tol > 0.0)) throw DomainError("quadrature abs_tol must be > 0");
    if (max_refinements < 1) throw DomainError("max_refinements must be >= 1");
  }
};

struct GaussRule {
  std::vector<double> nodes;    // in (0, 1)
  std::vector<double> weights;  // sum to 1
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // map [-1, 1] -> [0, 1]
    const double w = 1.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + z);
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

}  // namespace detail

/// Cached n-point Gauss-Legendre rule on [0, 1].
inline std::shared_ptr<const GaussRule> gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaussRule>(detail::compute_gauss_legendre(n));
  return slot;
}

template <class F>
double gauss_legendre_sum(const GaussRule& rule, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(rule.nodes[i]);
  }
  return sum;
}

/// Integral of f over [0, 1], doubling the node count until two successive
/// rules agree to q.abs_tol.
template <class F>
double integrate_unit_interval(F&& f, const QuadratureConfig& q) {
  q.validate();
  int n = q.nodes;
  double prev = gauss_legendre_sum(*gauss_legendre(n), f);
  for (int refinement = 1;; ++refinement) {
    n *= 2;
    const double next = gauss_legendre_sum(*gauss_legendre(n), f);
    if (std::abs(next - prev) <= q.abs_tol) return next;
    if (refinement >= q.max_refinements) {
      throw QuadratureNotConverged(
          "Gauss-Legendre rule did not settle: |I_" + std::to_string(n) +
          " - I_" + std::to_string(n / 2) + "| = " +
          std::to_string(std::abs(next - prev)));
    }
    prev = next;
  }
}

}  // namespace ordpat
