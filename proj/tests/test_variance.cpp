#include <gtest/gtest.h>

#include <boost/math/differentiation/autodiff.hpp>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "ordpat/estimators.hpp"
#include "ordpat/fbm.hpp"
#include "ordpat/patterns.hpp"
#include "ordpat/variance.hpp"

using namespace ordpat;

namespace {

// dF/dr2 of F(r1, r2) = Phi(S(r1, r2, r2, r2)) in closed form
template <class T>
T dF_dr2(double s1, const T& s2) {
  using std::asin;
  using std::sqrt;
  constexpr double pi = std::numbers::pi;
  return 2.0 / (pi * sqrt(1.0 - s2 * s2)) *
         (0.25 - asin(s2 * (s1 - 1.0) / (1.0 + s1 - 2.0 * s2 * s2)) / (2.0 * pi));
}

struct MomentSE {
  double mean;
  double se;
};

MomentSE mean_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return {m, std::sqrt(s / (x.size() - 1) / x.size())};
}

}  // namespace

TEST(ChangeProb, ClosedForms) {
  EXPECT_NEAR(change_prob(HurstParam(0.5)), 0.5, 1e-15);
  EXPECT_EQ(change_prob(HurstParam(1.0)), 0.0);
  for (int i = 1; i <= 99; ++i) {
    const HurstParam h(i / 100.0);
    EXPECT_NEAR(g(change_prob(h)), h.value(), 1e-12);
    EXPECT_NEAR(2 * monotone_pattern_prob(h) + 4 * change_pattern_prob(h), 1.0, 1e-15);
  }
}

TEST(Gamma, LowLagClosedForms) {
  EXPECT_NEAR(gamma0(HurstParam(0.5)), 0.25, 1e-15);
  EXPECT_EQ(gamma1(HurstParam(0.5)), 0.0);
  EXPECT_EQ(gamma0(HurstParam(1.0)), 0.0);
  EXPECT_EQ(gamma1(HurstParam(1.0)), 0.0);
  EXPECT_THROW(gamma_exact(HurstParam(0.7), 1), DomainError);
  EXPECT_EQ(gamma_exact(HurstParam(0.5), 5), 0.0);
  EXPECT_EQ(gamma_exact(HurstParam(1.0), 5), 0.0);
}

TEST(Gamma, ExactMatchesOrthantCombination) {
  for (double hv : {0.1, 0.35, 0.7, 0.9}) {
    const HurstParam h(hv);
    for (std::uint64_t k : {2ull, 3ull, 10ull, 50ull}) {
      const auto s = lag_spec(h, k);
      const double p0 = orthant2(rho(h, 1)) * orthant2(rho(h, 1));
      const double combo = 2.0 * (orthant4(s) + orthant4(s.mirrored()) - 2.0 * p0);
      EXPECT_NEAR(gamma_exact(h, k), combo, 1e-12) << "H=" << hv << " k=" << k;
    }
  }
}

TEST(Gamma, MatchesMonteCarloCovariance) {
  const HurstParam h(0.7);
  const std::size_t n = 256;
  FgnSynthesizer synth(h, n + 1);
  const double c = change_prob(h);
  std::vector<std::vector<double>> prods(3);
  std::vector<int> ind(n);
  for (std::uint64_t p = 0; p < 20000; ++p) {
    const auto path = synth.draw(p);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = path.levels[j], b = path.levels[j + 1], d = path.levels[j + 2];
      ind[j] = (a >= b && b < d) || (a < b && b >= d);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j + k < n; ++j) s += ind[j] * ind[j + k];
      prods[k].push_back(s / static_cast<double>(n - k));
    }
  }
  const double want[3] = {gamma0(h), gamma1(h), gamma_exact(h, 2)};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto m = mean_se(prods[k]);
    EXPECT_LT(std::abs(m.mean - c * c - want[k]), 4 * m.se) << "k=" << k;
  }
}

TEST(Taylor, CoefficientsMatchAutodiff) {
  using namespace boost::math::differentiation;
  for (double r : {-0.45, 0.0, 0.1, 0.414, 0.8}) {
    const auto x = make_fvar<double, 5>(0.0);
    const auto f = dF_dr2(r, x);
    const auto c = taylor_coefficients(r);
    EXPECT_NEAR(f.derivative(1), c.d2, 1e-12 * std::abs(c.d2) + 1e-15) << "r=" << r;
    EXPECT_NEAR(f.derivative(3), c.d4, 1e-11 * std::abs(c.d4)) << "r=" << r;
    EXPECT_NEAR(f.derivative(5), c.d6, 1e-10 * std::abs(c.d6)) << "r=" << r;
    EXPECT_NEAR(f.derivative(0), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  }
}

TEST(Taylor, DerivativeEqualsSumOfPlackettPartials) {
  for (double s1 : {-0.3, 0.2, 0.7}) {
    for (double s2 : {-0.2, 0.05, 0.3}) {
      const auto p = plackett_partials(OrthantSpec4(s1, s2, s2, s2));
      EXPECT_NEAR(p.d2 + p.d3 + p.d4, dF_dr2(s1, s2), 1e-14);
    }
  }
}

TEST(Taylor, OrdersAndDegenerateCases) {
  for (double hv : {0.2, 0.7, 0.9}) {
    const HurstParam h(hv);
    for (std::uint64_t k : {2ull, 17ull, 400ull}) {
      EXPECT_NEAR(gamma_taylor(h, k, 1), gamma_asymptotic(h, k),
                  1e-15 * std::abs(gamma_asymptotic(h, k)));
    }
  }
  EXPECT_THROW(gamma_taylor(HurstParam(0.7), 5, 4), UnsupportedOrder);
  EXPECT_THROW(gamma_taylor(HurstParam(0.7), 5, 0), UnsupportedOrder);
  for (int m = 1; m <= 3; ++m) EXPECT_EQ(gamma_taylor(HurstParam(0.5), 9, m), 0.0);
  EXPECT_EQ(gamma_asymptotic(HurstParam(1.0), 9), 0.0);
  EXPECT_EQ(gamma_asymptotic(HurstParam(0.5), 9), 0.0);
  const HurstParam h(0.75);
  EXPECT_LT(std::abs(gamma_taylor(h, 5, 3) - gamma_exact(h, 5)) / gamma_exact(h, 5), 0.01);
}

TEST(Taylor, LowerBoundRegression) {
  // observed, not a theorem: the Taylor sums stay below the exact values
  for (int i = 1; i <= 19; i += 2) {
    const HurstParam h(i * 0.05);
    if (h.is_half()) continue;
    for (std::uint64_t k : {2ull, 3ull, 5ull, 20ull, 100ull}) {
      const double exact = gamma_exact(h, k);
      for (int m = 1; m <= 3; ++m) EXPECT_LE(gamma_taylor(h, k, m), exact) << h.value() << " " << k;
    }
  }
}

TEST(Gamma, AsymptoticEquivalence) {
  const HurstParam h7(0.7);
  EXPECT_NEAR(gamma_exact(h7, 500) / gamma_asymptotic(h7, 500), 1.0, 0.01);
  for (double hv : {0.3, 0.6, 0.85}) {
    const HurstParam h(hv);
    double prev = 1e9;
    for (std::uint64_t k : {100ull, 1000ull, 10000ull}) {
      const double err = std::abs(gamma_exact(h, k) / gamma_asymptotic(h, k) - 1.0);
      EXPECT_LT(err, prev) << "H=" << hv << " k=" << k;
      prev = err;
    }
  }
}

TEST(Gamma, ContinuousInHurst) {
  for (std::uint64_t k = 0; k <= 10; ++k) {
    std::vector<double> v;
    for (int i = 5; i <= 95; ++i) {
      ChangeCovariance cov{HurstParam(i / 100.0)};
      v.push_back(cov.gamma(k));
    }
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const double jump = std::abs(v[i + 1] - v[i]);
      const double secant = std::max(std::abs(v[i] - v[i - 1]), 1e-12);
      if (i + 2 < v.size()) {
        EXPECT_LT(jump, 10 * std::max(secant, std::abs(v[i + 2] - v[i + 1]))) << k << " " << i;
      }
    }
  }
}

TEST(Gamma, CacheIsThreadSafeAndIdempotent) {
  ChangeCovariance cov{HurstParam(0.63)};
  std::vector<std::vector<double>> seen(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::uint64_t k = 0; k < 60; ++k) seen[t].push_back(cov.gamma(k));
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 1; t < 4; ++t) EXPECT_EQ(seen[t], seen[0]);
  EXPECT_EQ(seen[0][17], gamma_exact(HurstParam(0.63), 17));
}

TEST(Threshold, TableOneSamples) {
  EXPECT_EQ(k_threshold(HurstParam(0.55), 3, 0.01), 9u);
  EXPECT_EQ(k_threshold(HurstParam(0.75), 3, 0.01), 5u);
  EXPECT_EQ(k_threshold(HurstParam(0.95), 3, 0.01), 226u);
  EXPECT_EQ(k_threshold(HurstParam(0.45), 3, 0.01), 11u);
  EXPECT_EQ(k_threshold(HurstParam(0.15), 3, 0.001), 50u);
}

TEST(Threshold, Errors) {
  EXPECT_THROW(k_threshold(HurstParam(0.5), 3, 0.01), DomainError);
  EXPECT_THROW(k_threshold(HurstParam(1.0), 3, 0.01), DomainError);
  EXPECT_THROW(k_threshold(HurstParam(0.7), 3, 0.0), DomainError);
  EXPECT_THROW(k_threshold(HurstParam(0.7), 4, 0.01), UnsupportedOrder);
  try {
    k_threshold(HurstParam(0.95), 3, 0.01, {}, 100);
    FAIL() << "expected CapReached";
  } catch (const CapReached& e) {
    EXPECT_EQ(e.cap(), 100);
  }
}

TEST(VarC, WhiteNoiseAndDegenerate) {
  for (std::uint64_t n : {1ull, 10ull, 100ull, 1000ull}) {
    EXPECT_NEAR(var_c_exact(HurstParam(0.5), n), 0.25 / n, 1e-15);
    EXPECT_NEAR(var_c_approx(HurstParam(0.5), n), 0.25 / n, 1e-15);
    EXPECT_EQ(var_c_exact(HurstParam(1.0), n), 0.0);
    EXPECT_EQ(var_c_approx(HurstParam(1.0), n), 0.0);
  }
  EXPECT_THROW(var_c_exact(HurstParam(0.7), 0), DomainError);
  EXPECT_NEAR(var_c_exact(HurstParam(0.7), 1), gamma0(HurstParam(0.7)), 1e-15);
}

TEST(VarC, ApproxAgreesWithExact) {
  ChangeCovariance cov{HurstParam(0.65)};
  const double exact = var_c_exact(cov, 1024);
  EXPECT_NEAR(var_c_approx(cov, 1024) / exact, 1.0, 0.005);
  VarianceApproxConfig formula;
  formula.exact_at_n_tilde = false;
  EXPECT_NEAR(var_c_approx(cov, 1024, formula) / exact, 1.0, 0.005);
  EXPECT_EQ(n_tilde(cov, 1024, {}), 7u);
  EXPECT_EQ(n_tilde(cov, 4, {}), 4u);
  VarianceApproxConfig bad;
  bad.m = 5;
  EXPECT_THROW(var_c_approx(cov, 10, bad), UnsupportedOrder);
}

TEST(VarC, MatchesMonteCarlo) {
  const HurstParam h(0.7);
  const std::size_t n = 256;
  FgnSynthesizer synth(h, n + 1);
  std::vector<double> c;
  for (std::uint64_t p = 0; p < 100000; ++p) {
    const auto path = synth.draw(p);
    c.push_back(change_indicator_count(path.levels).c_hat());
  }
  double m = 0.0;
  for (double v : c) m += v;
  m /= c.size();
  double m2 = 0.0, m4 = 0.0;
  for (double v : c) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= c.size() - 1;
  m4 /= c.size();
  const double se = std::sqrt((m4 - m2 * m2) / c.size());
  EXPECT_LT(std::abs(m2 - var_c_exact(h, n)), 3 * se);
}

TEST(VarC, AsymptoticRegime) {
  EXPECT_THROW(var_c_asymptotic(HurstParam(0.7), 100), DomainError);
  EXPECT_EQ(var_c_asymptotic(HurstParam(1.0), 100), 0.0);
  const HurstParam h(0.75);
  const double r = rho(h, 1);
  const double d = 4 * (1 - r) * 0.75 * 0.75 * 0.25 / (std::numbers::pi * std::numbers::pi * (1 + r));
  EXPECT_NEAR(var_c_asymptotic(h, std::exp(1.0)), d / std::exp(1.0), 1e-15);

  const HurstParam h9(0.9);
  ChangeCovariance cov(h9);
  double prev = 1e9;
  for (int e = 10; e <= 20; e += 2) {
    const double n = std::ldexp(1.0, e);
    const double gap = std::abs(var_c_approx(cov, static_cast<std::uint64_t>(n)) /
                                    var_c_asymptotic(h9, n) -
                                1.0);
    EXPECT_LT(gap, prev) << "n=2^" << e;
    prev = gap;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(VarC, LongMemoryGrowthRate) {
  const HurstParam h(0.85);
  ChangeCovariance cov(h);
  const double n1 = 1 << 12, n2 = 1 << 16;
  const double f1 = f_n(cov, static_cast<std::uint64_t>(n1));
  const double f2 = f_n(cov, static_cast<std::uint64_t>(n2));
  const double slope = std::log(f2 / f1) / std::log(n2 / n1);
  EXPECT_NEAR(slope, 4 * 0.85 - 3, 0.1);
}

TEST(FInfinity, HurwitzZetaTail) {
  for (double s : {1.2, 2.0, 3.5}) {
    for (double a : {1.0, 7.0, 300.0}) {
      // direct sum to N plus the integral tail estimate
      double direct = 0.0;
      const int big = 2000000;
      for (int k = 0; k < big; ++k) direct += std::pow(a + k, -s);
      const double x = a + big;
      direct += std::pow(x, 1 - s) / (s - 1) + 0.5 * std::pow(x, -s);
      EXPECT_NEAR(detail::hurwitz_zeta(s, a) / direct, 1.0, 1e-10) << s << " " << a;
    }
  }
  EXPECT_NEAR(detail::hurwitz_zeta(2.0, 1.0), std::numbers::pi * std::numbers::pi / 6, 1e-14);
}

TEST(FInfinity, LimitProperties) {
  EXPECT_NEAR(f_infinity(HurstParam(0.5)), 0.25, 1e-15);
  EXPECT_NEAR(f_n(ChangeCovariance(HurstParam(0.5)), 77), 0.25, 1e-15);
  EXPECT_THROW(f_infinity(HurstParam(0.75)), DomainError);
  EXPECT_THROW(f_infinity(HurstParam(0.9)), DomainError);
  for (double hv : {0.3, 0.6}) {
    ChangeCovariance cov{HurstParam(hv)};
    const double lim = f_infinity(cov);
    double prev = 1e9;
    for (std::uint64_t n : {16ull, 64ull, 256ull, 1024ull, 4096ull}) {
      const double gap = std::abs(lim - f_n(cov, n));
      EXPECT_LT(gap, prev) << "H=" << hv << " n=" << n;
      prev = gap;
    }
  }
  for (int i = 1; i <= 74; i += 3) EXPECT_GT(f_infinity(HurstParam(i / 100.0)), 0.0);
}

TEST(FInfinity, AgreesWithLongExactSum) {
  for (double hv : {0.2, 0.6}) {
    ChangeCovariance cov{HurstParam(hv)};
    const double lim = f_infinity(cov, 1e-12);
    // exact to K, then the Taylor tail summed term by term far enough out
    double sum = cov.gamma(0);
    const std::uint64_t K = 3000;
    for (std::uint64_t k = 1; k < K; ++k) sum += 2 * cov.gamma(k);
    const std::uint64_t N = 2000000;
    for (std::uint64_t k = K; k < N; ++k) sum += 2 * gamma_taylor(cov.hurst(), k, 3);
    // remaining power sums sum_{k >= N} k^{-p} ~ N^{1-p}/(p-1) + N^{-p}/2
    const auto c = taylor_coefficients(cov.hurst());
    const double a2 = std::pow(hv * (2 * hv - 1), 2);
    const double p = 4 - 4 * hv;
    const double coef[3] = {c.d2 / 2 * a2, c.d4 / 24 * a2 * a2, c.d6 / 720 * a2 * a2 * a2};
    for (int j = 0; j < 3; ++j) {
      const double pj = p * (j + 1);
      const double nd = static_cast<double>(N);
      sum += 8 * coef[j] * (std::pow(nd, 1 - pj) / (pj - 1) + 0.5 * std::pow(nd, -pj));
    }
    EXPECT_NEAR(lim, sum, 1e-9) << "H=" << hv;
  }
}
