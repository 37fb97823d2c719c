#include "cascop/samplers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "testutil.hpp"

namespace {

using cascop::Engine;

TEST(Normal, MomentsAndTails) {
  Engine eng(11);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = cascop::normal(eng);
  const auto m = testutil::moments(xs);
  EXPECT_NEAR(m.mean, 0.0, 4 * m.se_mean);
  EXPECT_NEAR(m.var, 1.0, 4 * m.se_var);
  int beyond2 = 0;
  for (const double x : xs) beyond2 += std::abs(x) > 2.0;
  EXPECT_NEAR(beyond2 / 200000.0, 0.0455, 0.004);
}

TEST(Gamma, MomentsAcrossShapes) {
  Engine eng(13);
  for (const double shape : {0.3, 0.7, 1.0, 2.5, 17.0}) {
    std::vector<double> xs(120000);
    for (auto& x : xs) x = cascop::gamma_rv(eng, shape);
    const auto m = testutil::moments(xs);
    EXPECT_NEAR(m.mean, shape, 5 * m.se_mean) << "shape " << shape;
    EXPECT_NEAR(m.var, shape, 5 * m.se_var) << "shape " << shape;
  }
}

TEST(Beta, MomentsAndShortcuts) {
  Engine eng(17);
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {1.0, 3.5}, {2.0, 1.0}, {2.0, 5.0}, {0.5, 0.5}}) {
    std::vector<double> xs(120000);
    for (auto& x : xs) x = cascop::beta_rv(eng, a, b);
    const auto m = testutil::moments(xs);
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    EXPECT_NEAR(m.mean, mean, 5 * m.se_mean) << a << "," << b;
    EXPECT_NEAR(m.var, var, 5 * m.se_var) << a << "," << b;
  }
}

TEST(Dirichlet, NormalizationAndMarginalMoments) {
  Engine eng(19);
  std::vector<double> parts;
  std::vector<double> first(50000);
  for (auto& f : first) {
    cascop::dirichlet_symmetric(eng, 2.0, 4, parts);
    double sum = 0.0;
    for (const double p : parts) sum += p;
    ASSERT_NEAR(sum, 1.0, 1e-12);
    f = parts[0];
  }
  // marginal is Beta(2, 6)
  const auto m = testutil::moments(first);
  EXPECT_NEAR(m.mean, 0.25, 5 * m.se_mean);
  EXPECT_NEAR(m.var, 2.0 * 6.0 / (64.0 * 9.0), 5 * m.se_var);
}

TEST(Poisson, SmallAndLargeMeans) {
  Engine eng(23);
  for (const double mean : {0.2, 3.0, 29.0, 31.0, 250.0, 4000.0}) {
    std::vector<double> xs(60000);
    for (auto& x : xs) x = static_cast<double>(cascop::poisson(eng, mean));
    const auto m = testutil::moments(xs);
    EXPECT_NEAR(m.mean, mean, 5 * m.se_mean) << "mean " << mean;
    EXPECT_NEAR(m.var, mean, 5 * m.se_var) << "mean " << mean;
  }
  EXPECT_EQ(cascop::poisson(eng, 0.0), 0u);
}

TEST(Binomial, EdgeCases) {
  Engine eng(29);
  EXPECT_EQ(cascop::binomial(eng, 0, 0.3), 0u);
  EXPECT_EQ(cascop::binomial(eng, 10, 0.0), 0u);
  EXPECT_EQ(cascop::binomial(eng, 10, 1.0), 10u);
  for (int i = 0; i < 1000; ++i) {
    const auto x = cascop::binomial(eng, 5, 0.4);
    ASSERT_LE(x, 5u);
  }
}

// The inversion branch is exact by construction; this pins the splitting
// branch against enumerated probabilities through the full distribution.
TEST(Binomial, MatchesExactPmfAcrossRegimes) {
  Engine eng(31);
  struct Case {
    std::uint64_t n;
    double p;
  };
  // n*min(p,q) spans both sides of the inversion/splitting switch
  for (const Case c : {Case{40, 0.5}, Case{500, 0.3}, Case{2000, 0.04}, Case{100000, 0.002}}) {
    const int reps = 40000;
    std::vector<double> xs(reps);
    for (auto& x : xs) x = static_cast<double>(cascop::binomial(eng, c.n, c.p));
    const auto m = testutil::moments(xs);
    const double nd = static_cast<double>(c.n);
    EXPECT_NEAR(m.mean, nd * c.p, 5 * m.se_mean) << c.n << "," << c.p;
    EXPECT_NEAR(m.var, nd * c.p * (1 - c.p), 5 * m.se_var) << c.n << "," << c.p;
    // CDF spot checks at the quartiles against the exact pmf recurrence
    const double q1 = nd * c.p - 0.6745 * std::sqrt(nd * c.p * (1 - c.p));
    double cdf = std::exp(nd * std::log1p(-c.p));
    double pmf = cdf;
    std::uint64_t k = 0;
    while (k < static_cast<std::uint64_t>(q1)) {
      pmf *= (c.p / (1 - c.p)) * static_cast<double>(c.n - k) / static_cast<double>(k + 1);
      cdf += pmf;
      ++k;
    }
    int below = 0;
    for (const double x : xs) below += x <= static_cast<double>(k);
    const double se = std::sqrt(cdf * (1 - cdf) / reps);
    EXPECT_NEAR(below / static_cast<double>(reps), cdf, 5 * se) << c.n << "," << c.p;
  }
}

// Full-distribution check: the empirical CDF of the splitting branch must
// track the exact CDF uniformly within the DKW band (alpha = 1e-6 gives
// sup-distance <= sqrt(ln(2/alpha)/(2m))).
TEST(Binomial, EmpiricalCdfWithinDkwBandOfExactCdf) {
  Engine eng(41);
  struct Case {
    std::uint64_t n;
    double p;
  };
  for (const Case c : {Case{400, 0.25}, Case{5000, 0.61}}) {
    const int reps = 200000;
    std::vector<std::uint32_t> draws(reps);
    std::uint64_t max_seen = 0;
    for (auto& d : draws) {
      d = static_cast<std::uint32_t>(cascop::binomial(eng, c.n, c.p));
      max_seen = std::max<std::uint64_t>(max_seen, d);
    }
    // exact CDF via lgamma (the k=0 recurrence underflows for large n);
    // mass below mean - 12 sd is beyond double resolution anyway
    const double nd = static_cast<double>(c.n);
    const double sd = std::sqrt(nd * c.p * (1 - c.p));
    const auto lo = static_cast<std::uint64_t>(std::max(0.0, nd * c.p - 12.0 * sd));
    std::vector<double> cdf(max_seen + 1, 0.0);
    double acc = 0.0;
    for (std::uint64_t k = lo; k <= max_seen; ++k) {
      const double kd = static_cast<double>(k);
      acc += std::exp(std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1) +
                      kd * std::log(c.p) + (nd - kd) * std::log1p(-c.p));
      cdf[k] = acc;
    }
    std::vector<std::uint32_t> hist(max_seen + 1, 0);
    for (const auto d : draws) ++hist[d];
    double sup = 0.0;
    double emp = 0.0;
    for (std::uint64_t k = 0; k <= max_seen; ++k) {
      emp += hist[k] / static_cast<double>(reps);
      sup = std::max(sup, std::abs(emp - cdf[k]));
    }
    const double dkw = std::sqrt(std::log(2.0 / 1e-6) / (2.0 * reps));
    EXPECT_LE(sup, dkw) << "n=" << c.n << " p=" << c.p << " sup=" << sup;
  }
}

TEST(Binomial, LargeCountStaysExactInMean) {
  Engine eng(37);
  const std::uint64_t n = 10'000'000;
  const double p = 0.37;
  std::vector<double> xs(4000);
  for (auto& x : xs) x = static_cast<double>(cascop::binomial(eng, n, p));
  const auto m = testutil::moments(xs);
  EXPECT_NEAR(m.mean, n * p, 5 * m.se_mean);
  EXPECT_NEAR(m.var, n * p * (1 - p), 5 * m.se_var);
}

}  // namespace
