#pragma once

// Monte Carlo campaigns over (H, n) cells with per-replication seeds, and
// the deterministic tables behind the published figures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ordpat/errors.hpp"
#include "ordpat/estimators.hpp"
#include "ordpat/fbm.hpp"
#include "ordpat/patterns.hpp"
#include "ordpat/variance.hpp"

namespace ordpat {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of replication `rep` in cell (h_index, n_index).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t h_index,
                                 std::uint64_t n_index, std::uint64_t rep) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ h_index);
  s = splitmix64(s ^ n_index);
  return splitmix64(s ^ rep);
}

inline unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on `workers` threads. The first exception
/// thrown by any call is rethrown after all threads have joined.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise summation; the result depends only on the order of `x`.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when count < 2
};

inline SampleSummary summarize(std::span<const double> x) {
  SampleSummary s;
  s.count = x.size();
  if (x.empty()) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() < 2) return s;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - s.mean) * (x[i] - s.mean);
  s.variance = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
  return s;
}

/// Var_H(c_hat_n) tabulated on an equidistant H-grid over [0, 1] for a fixed
/// set of window counts, linearly interpolated.
class VarianceGrid {
 public:
  VarianceGrid(std::vector<std::uint64_t> lengths, double step = 0.001,
               const VarianceApproxConfig& approx = {}, const QuadratureConfig& quad = {},
               unsigned workers = 0)
      : lengths_(std::move(lengths)), step_(step) {
    if (lengths_.empty()) throw DomainError("variance grid needs at least one n");
    if (!(step > 0.0 && step <= 0.5)) throw DomainError("grid step must lie in (0, 0.5]");
    points_ = static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9)) + 1;
    values_.assign(lengths_.size(), std::vector<double>(points_, 0.0));
    parallel_for(points_, workers, [&](std::size_t i) {
      const double h = hurst_at(i);
      if (h >= 1.0) return;  // Var_1(c_hat_n) = 0
      ChangeCovariance cov(HurstParam(std::max(h, kZeroHurstProxy)), quad);
      for (std::size_t j = 0; j < lengths_.size(); ++j) {
        values_[j][i] = var_c_approx(cov, lengths_[j], approx);
      }
    });
  }

  double step() const noexcept { return step_; }
  const std::vector<std::uint64_t>& lengths() const noexcept { return lengths_; }

  double operator()(HurstParam h, std::uint64_t n) const {
    const auto it = std::find(lengths_.begin(), lengths_.end(), n);
    if (it == lengths_.end()) {
      throw DomainError("n = " + std::to_string(n) + " not tabulated in variance grid");
    }
    const auto& v = values_[static_cast<std::size_t>(it - lengths_.begin())];
    const double pos = h.value() / step_;
    const auto i = std::min(static_cast<std::size_t>(pos), points_ - 2);
    const double w = std::min(1.0, (h.value() - hurst_at(i)) / (hurst_at(i + 1) - hurst_at(i)));
    return (1.0 - w) * v[i] + w * v[i + 1];
  }

 private:
  double hurst_at(std::size_t i) const {
    return i + 1 == points_ ? 1.0 : static_cast<double>(i) * step_;
  }

  std::vector<std::uint64_t> lengths_;
  double step_;
  std::size_t points_ = 0;
  std::vector<std::vector<double>> values_;
};

struct CampaignSpec {
  std::vector<double> hurst_grid;
  std::vector<std::uint64_t> lengths;  // ZC window counts n
  std::uint64_t replications = 5000;
  std::uint64_t base_seed = 1;
  std::vector<Method> estimators{Method::kZc, Method::kHeaf};
  bool keep_standardized = false;
  unsigned workers = 0;
  double grid_step = 0.001;
  VarianceApproxConfig approx{};
  QuadratureConfig quad{};

  void validate() const {
    if (hurst_grid.empty() || lengths.empty()) throw DomainError("empty campaign grid");
    if (estimators.empty()) throw DomainError("no estimator selected");
    if (replications < 1) throw DomainError("replications must be >= 1");
    for (double h : hurst_grid) (void)HurstParam(h);
    for (auto n : lengths) {
      if (n < 2) throw BadLength("campaign lengths must be >= 2");
    }
    approx.validate();
    quad.validate();
  }
};

struct CellResult {
  double hurst = 0.0;
  std::uint64_t n = 0;
  Method method = Method::kZc;
  std::uint64_t replications = 0;  // effective, after failures
  std::uint64_t failures = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> coverage;              // ZC only
  std::optional<double> asymptotic_expectation;  // ZC only
  std::optional<double> asymptotic_variance;     // ZC only
  std::vector<double> standardized;  // ZC only, (H_hat - mean) / sd
  double wall_time = 0.0;
};

struct CampaignResult {
  std::vector<CellResult> cells;
  double wall_time = 0.0;

  const CellResult& at(double h, std::uint64_t n, Method m) const {
    for (const auto& c : cells) {
      if (c.hurst == h && c.n == n && c.method == m) return c;
    }
    throw DomainError("no such campaign cell");
  }
};

namespace detail {

struct Replicate {
  bool ok = false;
  double zc = 0.0;
  bool covered = false;
  double heaf = 0.0;
};

}  // namespace detail

/// Runs every (H, n) cell of the spec. ZC uses n + 1 synthesized increments
/// (n windows of three levels); HEAF uses the first n of them. Results are
/// independent of the worker count.
inline CampaignResult run_campaign(const CampaignSpec& spec, std::ostream* log = &std::cerr) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const bool want_zc = std::count(spec.estimators.begin(), spec.estimators.end(), Method::kZc) > 0;
  const bool want_heaf =
      std::count(spec.estimators.begin(), spec.estimators.end(), Method::kHeaf) > 0;

  std::optional<VarianceGrid> grid;
  if (want_zc) grid.emplace(spec.lengths, spec.grid_step, spec.approx, spec.quad, spec.workers);

  CampaignResult result;
  for (std::size_t hi = 0; hi < spec.hurst_grid.size(); ++hi) {
    const HurstParam h(spec.hurst_grid[hi]);
    for (std::size_t ni = 0; ni < spec.lengths.size(); ++ni) {
      const auto tc = std::chrono::steady_clock::now();
      const std::uint64_t n = spec.lengths[ni];
      std::vector<detail::Replicate> reps(spec.replications);
      std::optional<FgnSynthesizer> synth;
      try {
        synth.emplace(h, static_cast<std::size_t>(n) + 1);
      } catch (const NumericalError& e) {
        if (log) *log << "cell H=" << h.value() << " n=" << n << " skipped: " << e.what() << '\n';
      }

      if (synth) {
        parallel_for(reps.size(), spec.workers, [&](std::size_t r) {
          auto& out = reps[r];
          try {
            const auto path = synth->draw(derive_seed(spec.base_seed, hi, ni, r));
            if (want_zc) {
              const auto cc = change_indicator_count(path.levels);
              const auto rep = zc_report(cc.c_hat(), cc.windows, *grid);
              out.zc = rep.h_hat;
              out.covered = *rep.ci_low <= h.value() && h.value() <= *rep.ci_high;
            }
            if (want_heaf) {
              out.heaf = heaf_from_increments(std::span(path.increments).first(n)).h_hat;
            }
            out.ok = true;
          } catch (const NumericalError& e) {
            if (log) *log << "replication " << r << " failed: " << e.what() << '\n';
          }
        });
      }

      std::vector<double> zc, heaf;
      std::uint64_t covered = 0;
      for (const auto& r : reps) {
        if (!r.ok) continue;
        zc.push_back(r.zc);
        heaf.push_back(r.heaf);
        covered += r.covered ? 1 : 0;
      }
      const std::uint64_t good = zc.size();
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - tc).count();

      for (Method m : spec.estimators) {
        CellResult cell;
        cell.hurst = h.value();
        cell.n = n;
        cell.method = m;
        cell.replications = good;
        cell.failures = spec.replications - good;
        cell.wall_time = wall;
        const auto& xs = m == Method::kZc ? zc : heaf;
        const auto s = summarize(xs);
        cell.mean = s.mean;
        cell.variance = s.variance;
        if (m == Method::kZc) {
          ChangeCovariance cov(h, spec.quad);
          const double v = var_c_approx(cov, n, spec.approx);
          cell.asymptotic_expectation = asymptotic_expectation(h, v);
          cell.asymptotic_variance = asymptotic_variance(h, v);
          if (good > 0) {
            cell.coverage = static_cast<double>(covered) / static_cast<double>(good);
          }
          if (spec.keep_standardized && s.variance > 0.0) {
            const double sd = std::sqrt(s.variance);
            cell.standardized.reserve(xs.size());
            for (double x : xs) cell.standardized.push_back((x - s.mean) / sd);
          }
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// ---------------------------------------------------------------- CSV output

/// Formats a double with 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header)
      : out_(out), columns_(header.size()) {
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw DomainError("CSV row has wrong column count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// hurst,n,estimator,replications,failures,mean,variance,coverage,
/// asymptotic_expectation,asymptotic_variance
inline void write_campaign_csv(std::ostream& out, const CampaignResult& result) {
  CsvWriter csv(out, {"hurst", "n", "estimator", "replications", "failures", "mean",
                      "variance", "coverage", "asymptotic_expectation",
                      "asymptotic_variance"});
  for (const auto& c : result.cells) {
    csv.write_row({format_double(c.hurst), std::to_string(c.n), to_string(c.method),
                   std::to_string(c.replications), std::to_string(c.failures),
                   format_double(c.mean), format_double(c.variance),
                   format_optional(c.coverage), format_optional(c.asymptotic_expectation),
                   format_optional(c.asymptotic_variance)});
  }
}

// ------------------------------------------------------------- table 1

struct ThresholdCell {
  double hurst;
  double eps;
  std::optional<std::uint64_t> k;  // empty when the cap was reached
  std::uint64_t cap;
};

inline std::vector<double> default_table1_hurst_grid() {
  std::vector<double> h;
  for (int i = 0; i < 10; ++i) h.push_back(0.05 + 0.1 * i);
  return h;
}

inline std::vector<ThresholdCell> table1(const std::vector<double>& eps_list = {0.01, 0.001},
                                         const std::vector<double>& hurst_grid =
                                             default_table1_hurst_grid(),
                                         const QuadratureConfig& q = {},
                                         std::uint64_t k_max = kDefaultThresholdCap,
                                         unsigned workers = 0) {
  std::vector<ThresholdCell> cells(eps_list.size() * hurst_grid.size());
  parallel_for(hurst_grid.size(), workers, [&](std::size_t hi) {
    ChangeCovariance cov(HurstParam(hurst_grid[hi]), q);
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
      auto& cell = cells[ei * hurst_grid.size() + hi];
      cell = {hurst_grid[hi], eps_list[ei], std::nullopt, k_max};
      try {
        cell.k = k_threshold(cov, 3, eps_list[ei], k_max);
      } catch (const CapReached&) {
      }
    }
  });
  return cells;
}

/// hurst,eps,k,note
inline void write_table1_csv(std::ostream& out, const std::vector<ThresholdCell>& cells) {
  CsvWriter csv(out, {"hurst", "eps", "k", "note"});
  for (const auto& c : cells) {
    csv.write_row({format_double(c.hurst), format_double(c.eps),
                   c.k ? std::to_string(*c.k) : std::string{},
                   c.k ? std::string{} : "cap " + std::to_string(c.cap) + " reached"});
  }
}

// ------------------------------------------------------------- figure 1

struct IntervalRow {
  std::uint64_t n;
  double x;  // value of H_hat
  double ci_low;
  double ci_high;
  double asymptotic_bias;
  double asymptotic_variance;
};

/// Confidence interval K_n, asymptotic bias and variance as functions of
/// H_hat = x on [0, 1].
inline std::vector<IntervalRow> figure1_data(const std::vector<std::uint64_t>& n_list = {128, 1024,
                                                                                         8192},
                                             double grid_step = 0.01,
                                             const VarianceApproxConfig& approx = {},
                                             const QuadratureConfig& quad = {},
                                             unsigned workers = 0) {
  if (!(grid_step > 0.0 && grid_step <= 0.5)) throw DomainError("grid step must lie in (0, 0.5]");
  const auto points = static_cast<std::size_t>(std::llround(1.0 / grid_step)) + 1;
  std::vector<IntervalRow> rows(points * n_list.size());
  parallel_for(points, workers, [&](std::size_t i) {
    const double x = std::min(1.0, static_cast<double>(i) * grid_step);
    std::optional<ChangeCovariance> cov;
    if (x < 1.0) cov.emplace(HurstParam(std::max(x, kZeroHurstProxy)), quad);
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      EstimateReport rep;
      rep.h_hat = x;
      rep.n = n_list[j];
      attach_interval(rep, [&](HurstParam, std::uint64_t m) {
        return var_c_approx(*cov, m, approx);
      });
      rows[j * points + i] = {n_list[j], x, *rep.ci_low, *rep.ci_high, *rep.asymptotic_bias,
                              *rep.asymptotic_variance};
    }
  });
  return rows;
}

/// n,x,ci_low,ci_high,asymptotic_bias,asymptotic_variance
inline void write_figure1_csv(std::ostream& out, const std::vector<IntervalRow>& rows) {
  CsvWriter csv(out, {"n", "x", "ci_low", "ci_high", "asymptotic_bias", "asymptotic_variance"});
  for (const auto& r : rows) {
    csv.write_row({std::to_string(r.n), format_double(r.x), format_double(r.ci_low),
                   format_double(r.ci_high), format_double(r.asymptotic_bias),
                   format_double(r.asymptotic_variance)});
  }
}

// ------------------------------------------------------------- figure 3

/// P(sqrt(N) D > lambda) in the Kolmogorov limit.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t count = 0;
  bool rejects(double alpha) const noexcept { return p_value < alpha; }
};

/// One-sample Kolmogorov-Smirnov test of z against N(0, 1).
inline KsResult ks_normal(std::vector<double> z) {
  if (z.empty()) throw BadLength("KS test needs at least one sample");
  std::sort(z.begin(), z.end());
  const double nd = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
  }
  const double sq = std::sqrt(nd);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d), z.size()};
}

struct StandardizedSample {
  double hurst;
  std::uint64_t n;
  std::vector<double> z;
  KsResult ks;
};

/// Sample-standardized ZC estimates per H, with a KS normality diagnostic.
inline std::vector<StandardizedSample> figure3_data(const std::vector<double>& h_list = {0.55, 0.75,
                                                                                       0.95},
                                                    std::uint64_t n = 8192,
                                                    std::uint64_t replications = 5000,
                                                    std::uint64_t seed = 1, unsigned workers = 0,
                                                    std::ostream* log = &std::cerr) {
  if (replications < 1000) throw DomainError("figure3_data needs at least 1000 replications");
  CampaignSpec spec;
  spec.hurst_grid = h_list;
  spec.lengths = {n};
  spec.replications = replications;
  spec.base_seed = seed;
  spec.estimators = {Method::kZc};
  spec.keep_standardized = true;
  spec.workers = workers;
  const auto res = run_campaign(spec, log);
  std::vector<StandardizedSample> out;
  for (const auto& c : res.cells) {
    out.push_back({c.hurst, c.n, c.standardized, ks_normal(c.standardized)});
  }
  return out;
}

/// hurst,n,index,z
inline void write_figure3_csv(std::ostream& out, const std::vector<StandardizedSample>& samples) {
  CsvWriter csv(out, {"hurst", "n", "index", "z"});
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      csv.write_row({format_double(s.hurst), std::to_string(s.n), std::to_string(i),
                     format_double(s.z[i])});
    }
  }
}

}  // namespace ordpat
