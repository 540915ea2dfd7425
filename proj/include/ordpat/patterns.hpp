#pragma once

// Ordinal patterns of arbitrary order, their space/time reversal symmetry,
// and plain versus class-averaged relative frequency estimators.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ordpat/errors.hpp"

namespace ordpat {

/// Largest supported order; (d+1)! must fit in 64 bits.
inline constexpr int kMaxPatternOrder = 19;

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

/// A permutation (r_0, ..., r_d) of {0, ..., d}. Also addressable by its
/// Lehmer code in [0, (d+1)!).
class Pattern {
 public:
  explicit Pattern(std::vector<int> perm) : perm_(std::move(perm)) {
    const int d = order();
    if (d < 1) throw BadLength("a pattern needs at least two entries");
    if (d > kMaxPatternOrder) throw DomainError("pattern order too large");
    std::vector<bool> seen(perm_.size(), false);
    for (int r : perm_) {
      if (r < 0 || r > d || seen[static_cast<std::size_t>(r)]) {
        throw DomainError("pattern is not a permutation of {0..d}");
      }
      seen[static_cast<std::size_t>(r)] = true;
    }
  }

  static Pattern from_code(int d, std::uint64_t code) {
    if (d < 1 || d > kMaxPatternOrder) throw DomainError("bad pattern order");
    if (code >= factorial(d + 1)) throw DomainError("pattern code out of range");
    std::vector<int> pool(static_cast<std::size_t>(d + 1));
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> perm;
    perm.reserve(pool.size());
    for (int i = d; i >= 0; --i) {
      const std::uint64_t f = factorial(i);
      const auto idx = static_cast<std::size_t>(code / f);
      code %= f;
      perm.push_back(pool[idx]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return Pattern(std::move(perm));
  }

  int order() const noexcept { return static_cast<int>(perm_.size()) - 1; }
  const std::vector<int>& perm() const noexcept { return perm_; }
  int operator[](std::size_t i) const { return perm_[i]; }

  std::uint64_t code() const noexcept { return lehmer_code(perm_); }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < perm_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(perm_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern& a, const Pattern& b) {
    return a.perm_ <=> b.perm_;
  }

  template <class Range>
  static std::uint64_t lehmer_code(const Range& perm) noexcept {
    const std::size_t len = std::size(perm);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < len; ++i) {
      std::uint64_t smaller = 0;
      for (std::size_t j = i + 1; j < len; ++j) {
        if (perm[j] < perm[i]) ++smaller;
      }
      code = code * (len - i) + smaller;
    }
    return code;
  }

 private:
  std::vector<int> perm_;
};

namespace detail {

// Time indices t = d - r sorted by value descending, earlier index first on
// ties; writes r_l = d - t_l into `out`.
inline void rank_window(std::span<const double> x, std::span<int> out) {
  const int d = static_cast<int>(x.size()) - 1;
  for (int i = 0; i <= d; ++i) out[static_cast<std::size_t>(i)] = i;
  // insertion sort: stable, fastest for the small windows used here
  for (int i = 1; i <= d; ++i) {
    const int t = out[static_cast<std::size_t>(i)];
    int j = i - 1;
    while (j >= 0 && x[static_cast<std::size_t>(out[static_cast<std::size_t>(j)])] <
                         x[static_cast<std::size_t>(t)]) {
      out[static_cast<std::size_t>(j + 1)] = out[static_cast<std::size_t>(j)];
      --j;
    }
    out[static_cast<std::size_t>(j + 1)] = t;
  }
  for (int l = 0; l <= d; ++l) {
    out[static_cast<std::size_t>(l)] = d - out[static_cast<std::size_t>(l)];
  }
}

}  // namespace detail

/// Ordinal pattern of d+1 values.
inline Pattern pattern_of_values(std::span<const double> x) {
  if (x.size() < 2) throw BadLength("need at least 2 values for a pattern");
  std::vector<int> perm(x.size());
  detail::rank_window(x, perm);
  return Pattern(std::move(perm));
}

/// Ordinal pattern of the partial sums (0, y_1, y_1 + y_2, ...).
inline Pattern pattern_of_increments(std::span<const double> y) {
  if (y.empty()) throw BadLength("need at least 1 increment for a pattern");
  std::vector<double> sums(y.size() + 1, 0.0);
  std::partial_sum(y.begin(), y.end(), sums.begin() + 1);
  return pattern_of_values(sums);
}

/// Spatial reversal: (r_d, ..., r_0).
inline Pattern alpha(const Pattern& p) {
  std::vector<int> v(p.perm().rbegin(), p.perm().rend());
  return Pattern(std::move(v));
}

/// Time reversal: (d - r_0, ..., d - r_d).
inline Pattern beta(const Pattern& p) {
  const int d = p.order();
  std::vector<int> v(p.perm());
  for (int& r : v) r = d - r;
  return Pattern(std::move(v));
}

/// Closure {r, alpha(r), beta(r), beta(alpha(r))}, duplicates removed.
class PatternClass {
 public:
  explicit PatternClass(const Pattern& p) : representative_(p) {
    members_ = {p, alpha(p), beta(p), beta(alpha(p))};
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
  }

  const Pattern& representative() const noexcept { return representative_; }
  const std::vector<Pattern>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(const Pattern& p) const {
    return std::binary_search(members_.begin(), members_.end(), p);
  }
  /// Smallest member; equal for all patterns of the same class.
  const Pattern& canonical() const noexcept { return members_.front(); }

 private:
  Pattern representative_;
  std::vector<Pattern> members_;
};

inline PatternClass pattern_class(const Pattern& p) { return PatternClass(p); }

/// All classes of S_d, ordered by canonical member.
inline std::vector<PatternClass> all_pattern_classes(int d) {
  std::map<std::vector<int>, PatternClass> by_canon;
  const std::uint64_t total = factorial(d + 1);
  for (std::uint64_t c = 0; c < total; ++c) {
    PatternClass cls(Pattern::from_code(d, c));
    by_canon.try_emplace(cls.canonical().perm(), cls);
  }
  std::vector<PatternClass> out;
  for (auto& [key, cls] : by_canon) out.push_back(cls);
  return out;
}

/// Histogram of the patterns of all sliding windows of d+1 values.
class PatternCounts {
 public:
  PatternCounts(int d) : d_(d) {
    if (d < 1 || d > kMaxPatternOrder) throw DomainError("bad pattern order");
    if (d <= kDenseMaxOrder) dense_.assign(factorial(d + 1), 0);
  }

  int order() const noexcept { return d_; }
  std::uint64_t windows() const noexcept { return n_; }

  void add(std::uint64_t code, std::uint64_t times = 1) {
    if (dense_.empty()) {
      sparse_[code] += times;
    } else {
      dense_[code] += times;
    }
    n_ += times;
  }

  std::uint64_t count(const Pattern& p) const {
    if (p.order() != d_) throw DomainError("pattern order mismatch");
    const auto code = p.code();
    if (!dense_.empty()) return dense_[code];
    const auto it = sparse_.find(code);
    return it == sparse_.end() ? 0 : it->second;
  }

  /// Non-zero entries as (code, count), ascending by code.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> nonzero() const {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (!dense_.empty()) {
      for (std::uint64_t c = 0; c < dense_.size(); ++c) {
        if (dense_[c]) out.emplace_back(c, dense_[c]);
      }
    } else {
      out.assign(sparse_.begin(), sparse_.end());
    }
    return out;
  }

  /// Associative merge for sharded counting.
  PatternCounts& merge(const PatternCounts& other) {
    if (other.d_ != d_) throw DomainError("cannot merge counts of different order");
    for (auto [code, c] : other.nonzero()) add(code, c);
    return *this;
  }

  friend bool operator==(const PatternCounts& a, const PatternCounts& b) {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.nonzero() == b.nonzero();
  }

 private:
  static constexpr int kDenseMaxOrder = 7;
  int d_;
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> dense_;
  std::map<std::uint64_t, std::uint64_t> sparse_;
};

/// Counts the patterns of order d of all length-(d+1) windows of x.
inline PatternCounts count_patterns(std::span<const double> x, int d) {
  if (d < 1) throw DomainError("pattern order must be >= 1");
  if (x.size() < static_cast<std::size_t>(d) + 1) {
    throw BadLength("series shorter than one pattern window");
  }
  PatternCounts counts(d);
  std::vector<int> perm(static_cast<std::size_t>(d) + 1);
  const std::size_t n = x.size() - static_cast<std::size_t>(d);
  for (std::size_t k = 0; k < n; ++k) {
    detail::rank_window(x.subspan(k, perm.size()), perm);
    counts.add(Pattern::lehmer_code(perm));
  }
  return counts;
}

/// Plain relative frequency of p.
inline double p_hat(const PatternCounts& counts, const Pattern& p) {
  if (counts.windows() == 0) throw BadLength("no windows counted");
  return static_cast<double>(counts.count(p)) /
         static_cast<double>(counts.windows());
}

/// Class-averaged relative frequency of p (Rao-Blackwellized estimator).
inline double p_bar(const PatternCounts& counts, const Pattern& p) {
  if (counts.windows() == 0) throw BadLength("no windows counted");
  const PatternClass cls(p);
  std::uint64_t total = 0;
  for (const auto& s : cls.members()) total += counts.count(s);
  return static_cast<double>(total) /
         (static_cast<double>(cls.size()) * static_cast<double>(counts.windows()));
}

struct ChangeCount {
  std::uint64_t changes;
  std::uint64_t windows;
  double c_hat() const noexcept {
    return static_cast<double>(changes) / static_cast<double>(windows);
  }
};

/// Number of windows (x_k, x_{k+1}, x_{k+2}) whose middle value is a turning
/// point: C_k = 1{x_k >= x_{k+1} < x_{k+2}} + 1{x_k < x_{k+1} >= x_{k+2}}.
inline ChangeCount change_indicator_count(std::span<const double> x) {
  if (x.size() < 3) throw BadLength("need at least 3 values to count changes");
  std::uint64_t changes = 0;
  const std::size_t n = x.size() - 2;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = x[k], b = x[k + 1], c = x[k + 2];
    changes += static_cast<std::uint64_t>((a >= b && b < c) || (a < b && b >= c));
  }
  return {changes, n};
}

}  // namespace ordpat
