#pragma once

// Published reference values for the simulation study, kept as the printed
// strings so that the number of decimals is available to comparisons.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace ordpat::reference {

inline constexpr std::array<double, 5> kStudyHurst{0.55, 0.65, 0.75, 0.85, 0.95};

struct ZcRow {
  std::uint64_t n;
  std::array<const char*, 5> mean;
  std::array<const char*, 5> as_exp;
  std::array<const char*, 5> variance;
  std::array<const char*, 5> as_var;
  std::array<const char*, 5> coverage;
};

inline const std::array<ZcRow, 3> kZc{{
    {128,
     {"0.544", "0.643", "0.742", "0.839", "0.932"},
     {"0.543", "0.643", "0.743", "0.839", "0.932"},
     {"0.00935", "0.00754", "0.00616", "0.00543", "0.00389"},
     {"0.009", "0.00722", "0.00609", "0.00572", "0.00354"},
     {"0.955", "0.96", "0.964", "0.931", "0.749"}},
    {1024,
     {"0.549", "0.649", "0.749", "0.848", "0.941"},
     {"0.549", "0.649", "0.749", "0.848", "0.941"},
     {"0.00113", "0.000912", "0.000849", "0.0012", "0.00149"},
     {"0.00113", "0.000913", "0.000863", "0.00134", "0.00181"},
     {"0.952", "0.952", "0.96", "0.954", "0.823"}},
    {8192,
     {"0.55", "0.65", "0.75", "0.849", "0.945"},
     {"0.55", "0.65", "0.75", "0.849", "0.945"},
     {"0.000141", "0.000116", "0.000121", "0.000316", "0.000796"},
     {"0.000141", "0.000115", "0.000121", "0.000347", "0.00106"},
     {"0.95", "0.951", "0.953", "0.971", "0.884"}},
}};

struct HeafRow {
  std::uint64_t n;
  std::array<const char*, 5> mean;
  std::array<const char*, 5> variance;
};

inline const std::array<HeafRow, 3> kHeaf{{
    {128,
     {"0.538", "0.628", "0.712", "0.787", "0.849"},
     {"0.00377", "0.00322", "0.00267", "0.00218", "0.00167"}},
    {1024,
     {"0.548", "0.646", "0.739", "0.824", "0.893"},
     {"0.000468", "0.000399", "0.000378", "0.000373", "0.000328"}},
    {8192,
     {"0.55", "0.649", "0.746", "0.837", "0.912"},
     {"0.0000584", "0.0000515", "0.0000573", "0.0000836", "0.000101"}},
}};

/// Threshold lags k^(3)(eps) for H = 0.05, 0.15, ..., 0.95.
inline constexpr std::array<std::uint64_t, 10> kThreshold01{18, 16, 14, 12, 11, 9, 7, 5, 5, 226};
inline constexpr std::array<std::uint64_t, 10> kThreshold001{55, 50, 44, 38, 32,
                                                             26, 21, 15, 13, 10040};

inline double value(const char* s) { return std::strtod(s, nullptr); }

/// Half a unit in the last printed digit.
inline double half_ulp(const char* s) {
  const std::string t(s);
  const auto dot = t.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(t.size() - dot - 1);
  double u = 0.5;
  for (int i = 0; i < decimals; ++i) u /= 10.0;
  return u;
}

/// True when x rounds to the printed value.
inline bool matches_printed(double x, const char* s) {
  return std::abs(x - value(s)) <= half_ulp(s) * (1.0 + 1e-9);
}

}  // namespace ordpat::reference
