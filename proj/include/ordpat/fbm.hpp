#pragma once

// Fractional Gaussian noise covariance and exact fBm synthesis by circulant
// embedding (Davies-Harte).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ordpat/errors.hpp"

namespace ordpat {

/// Hurst parameter H in (0, 1].
class HurstParam {
 public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.0 && h <= 1.0)) {
      throw DomainError("Hurst parameter must lie in (0, 1], got " +
                        std::to_string(h));
    }
  }

  double value() const noexcept { return h_; }
  bool is_half() const noexcept { return h_ == 0.5; }
  bool is_one() const noexcept { return h_ == 1.0; }

  friend bool operator==(HurstParam a, HurstParam b) noexcept {
    return a.h_ == b.h_;
  }

 private:
  double h_;
};

/// Autocovariance of unit-variance fGn at lag k:
///   rho_H(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
///
/// For k >= 2 the second difference is evaluated through its binomial series
///   rho_H(k) = k^{2H} * sum_{j>=1} binom(2H, 2j) k^{-2j},
/// which avoids the cancellation of three O(k^{2H}) terms at large lags.
inline double rho(HurstParam hp, std::uint64_t k) {
  const double h = hp.value();
  if (k == 0 || hp.is_one()) return 1.0;
  if (k == 1) return std::expm1((2.0 * h - 1.0) * std::numbers::ln2);

  const double a = 2.0 * h;
  const double x = 1.0 / static_cast<double>(k);
  double binom = 1.0;
  double xpow = 1.0;
  double sum = 0.0;
  for (int m = 1; m < 1000; ++m) {
    binom *= (a - m + 1.0) / m;
    xpow *= x;
    if (binom == 0.0) break;
    if (m % 2 == 0) {
      const double term = binom * xpow;
      sum += term;
      if (m > a + 2.0 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
  }
  return std::pow(static_cast<double>(k), a) * sum;
}

/// Leading-order behaviour H(2H-1)k^{2H-2} of rho_H(k).
inline double rho_asymptotic(HurstParam hp, std::uint64_t k) {
  if (k == 0) throw DomainError("rho_asymptotic requires k >= 1");
  const double h = hp.value();
  return h * (2.0 * h - 1.0) * std::pow(static_cast<double>(k), 2.0 * h - 2.0);
}

/// Lazily evaluated autocovariance sequence of fGn.
class FgnCovariance {
 public:
  explicit FgnCovariance(HurstParam h) : h_(h) {}
  HurstParam hurst() const noexcept { return h_; }
  double operator()(std::uint64_t k) const { return rho(h_, k); }

 private:
  HurstParam h_;
};

struct SamplePath {
  HurstParam h_used;
  std::uint64_t seed;
  std::vector<double> increments;
  std::vector<double> levels;  // levels[0] = 0, size increments.size() + 1
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwArray = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwArray<T> fftw_array(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwArray<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::shared_ptr<fftw_plan_s>;

}  // namespace detail

/// Reusable Davies-Harte generator for a fixed (H, n). Eigenvalues of the
/// circulant embedding are computed once; each draw costs one c2r FFT.
///
/// Thread-safe for concurrent draw() calls.
class FgnSynthesizer {
 public:
  FgnSynthesizer(HurstParam h, std::size_t n) : h_(h), n_(n) {
    if (n < 2) throw BadLength("fBm synthesis requires n >= 2");
    if (h.is_one()) return;

    std::size_t m = 1;
    while (m < n - 1) m <<= 1;
    size_ = 2 * m;

    auto row = detail::fftw_array<double>(size_);
    auto spec = detail::fftw_array<fftw_complex>(m + 1);
    for (std::size_t j = 0; j <= m; ++j) row[j] = rho(h, j);
    for (std::size_t j = m + 1; j < size_; ++j) row[j] = row[size_ - j];

    auto in_c = detail::fftw_array<fftw_complex>(m + 1);
    auto out_r = detail::fftw_array<double>(size_);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(size_), row.get(),
                                           spec.get(), FFTW_ESTIMATE);
      fftw_execute(fwd);
      fftw_destroy_plan(fwd);
      plan_ = detail::Plan(
          fftw_plan_dft_c2r_1d(static_cast<int>(size_), in_c.get(),
                               out_r.get(), FFTW_ESTIMATE),
          detail::PlanDeleter{});
    }

    double lmax = 0.0;
    double lmin = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      lmax = std::max(lmax, spec[k][0]);
      lmin = std::min(lmin, spec[k][0]);
    }
    if (lmin < -1e-10 * lmax) {
      throw EmbeddingNotPSD("circulant embedding has eigenvalue " +
                            std::to_string(lmin) + " for H=" +
                            std::to_string(h.value()) +
                            ", n=" + std::to_string(n));
    }
    const double size = static_cast<double>(size_);
    scale_.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      const double lam = std::max(spec[k][0], 0.0);
      const bool real_mode = (k == 0 || k == m);
      scale_[k] = std::sqrt(lam / (real_mode ? size : 2.0 * size));
    }
  }

  HurstParam hurst() const noexcept { return h_; }
  std::size_t length() const noexcept { return n_; }
  /// Circulant size 2m (0 for the degenerate H = 1 generator).
  std::size_t embedding_size() const noexcept { return size_; }

  /// Writes n increments into `out` (out.size() must equal n).
  void draw_increments(std::uint64_t seed, std::span<double> out) const {
    if (out.size() != n_) throw BadLength("output span has wrong length");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal;

    if (h_.is_one()) {
      std::fill(out.begin(), out.end(), normal(engine));
      return;
    }

    const std::size_t m = size_ / 2;
    auto in = detail::fftw_array<fftw_complex>(m + 1);
    auto res = detail::fftw_array<double>(size_);
    in[0][0] = scale_[0] * normal(engine);
    in[0][1] = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      in[k][0] = scale_[k] * normal(engine);
      in[k][1] = scale_[k] * normal(engine);
    }
    in[m][0] = scale_[m] * normal(engine);
    in[m][1] = 0.0;
    fftw_execute_dft_c2r(plan_.get(), in.get(), res.get());
    std::copy_n(res.get(), n_, out.begin());
  }

  SamplePath draw(std::uint64_t seed) const {
    SamplePath path{h_, seed, std::vector<double>(n_), {}};
    draw_increments(seed, path.increments);
    path.levels.resize(n_ + 1);
    path.levels[0] = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      path.levels[i + 1] = path.levels[i] + path.increments[i];
    }
    return path;
  }

 private:
  HurstParam h_;
  std::size_t n_;
  std::size_t size_ = 0;
  std::vector<double> scale_;
  detail::Plan plan_;
};

/// One-shot synthesis of n fGn increments and the corresponding fBm levels.
inline SamplePath synthesize(HurstParam h, std::size_t n, std::uint64_t seed) {
  return FgnSynthesizer(h, n).draw(seed);
}

}  // namespace ordpat
