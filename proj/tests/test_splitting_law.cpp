#include "cascop/splitting_law.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cascop/errors.hpp"
#include "testutil.hpp"

namespace {

using cascop::AtomStream;
using cascop::Engine;
using cascop::SplittingLawSpec;

SplittingLawSpec law(const std::string& text) { return SplittingLawSpec::parse(text); }

TEST(SplittingLawSpec, ParseRoundTrip) {
  EXPECT_EQ(law("pd1").to_string(), "pd1");
  EXPECT_EQ(law("gem:2.5").to_string(), "gem:2.5");
  EXPECT_EQ(law("dirichlet:3:0.5").to_string(), "dirichlet:3:0.5");
  EXPECT_EQ(law("beta:1:4").to_string(), "beta:1:4");
  EXPECT_EQ(law("dirichlet:2:1").support_size(), 2u);
  EXPECT_EQ(law("beta:2:3").support_size(), 2u);
  EXPECT_EQ(law("pd1").support_size(), 0u);
  EXPECT_FALSE(law("gem:7").finite_support());
}

TEST(SplittingLawSpec, RejectsDegenerateAndGeometricEncodings) {
  EXPECT_THROW(law("gem:0"), cascop::InvalidLawError);
  EXPECT_THROW(law("gem:-1"), cascop::InvalidLawError);
  EXPECT_THROW(law("gem:inf"), cascop::InvalidLawError);
  EXPECT_THROW(law("gem:nan"), cascop::InvalidLawError);
  EXPECT_THROW(law("dirichlet:1:1"), cascop::InvalidLawError);
  EXPECT_THROW(law("dirichlet:2:0"), cascop::InvalidLawError);
  EXPECT_THROW(law("beta:0:1"), cascop::InvalidLawError);
  EXPECT_THROW(law("beta:1:-2"), cascop::InvalidLawError);
  EXPECT_THROW(law("pd1:1"), cascop::InvalidLawError);
  EXPECT_THROW(law("zipf:2"), cascop::InvalidLawError);
  EXPECT_THROW(law(""), cascop::InvalidLawError);
}

TEST(AtomStream, FiniteLawsRealizeFully) {
  // full realization regardless of coverage target
  auto s = cascop::sample_atoms_until(law("dirichlet:2:1"), Engine(1), 0.0);
  EXPECT_EQ(s.atoms().size(), 2u);
  EXPECT_TRUE(s.exhausted());
  EXPECT_NEAR(s.cumulative(), 1.0, 1e-12);

  auto b = cascop::sample_atoms_until(law("beta:2:3"), Engine(2), 0.5);
  EXPECT_EQ(b.atoms().size(), 2u);
  EXPECT_NEAR(b.cumulative(), 1.0, 1e-12);
}

TEST(AtomStream, AlwaysEmitsPositiveMass) {
  for (const auto* text : {"pd1", "gem:0.5", "gem:3", "dirichlet:4:0.3", "beta:1:9"}) {
    auto s = cascop::sample_atoms_until(law(text), Engine(3), 0.0);
    ASSERT_GE(s.atoms().size(), 1u) << text;
    for (const double a : s.atoms()) ASSERT_GT(a, 0.0) << text;
  }
}

TEST(AtomStream, CumulativeMonotoneBoundedByOne) {
  for (const auto* text : {"pd1", "gem:2", "dirichlet:5:0.7", "beta:0.5:0.5"}) {
    AtomStream s(law(text), Engine(11));
    double prev = 0.0;
    for (int i = 0; i < 50 && !s.exhausted(); ++i) {
      s.next();
      ASSERT_GE(s.cumulative(), prev) << text;
      ASSERT_LE(s.cumulative(), 1.0 + 1e-12) << text;
      prev = s.cumulative();
    }
  }
}

TEST(AtomStream, CoverageReachedAndExtendableFromSameState) {
  auto s = cascop::sample_atoms_until(law("pd1"), Engine(5), 0.9);
  EXPECT_GE(s.cumulative(), 0.9);
  const auto count = s.atoms().size();
  s.extend_to_coverage(0.99);
  EXPECT_GE(s.cumulative(), 0.99);
  EXPECT_GT(s.atoms().size(), count);
}

TEST(AtomStream, CapThrows) {
  AtomStream s(law("pd1"), Engine(5), 4);
  EXPECT_THROW(
      {
        for (int i = 0; i < 10; ++i) s.next();
      },
      cascop::AtomCapExceeded);
}

// Oracle frozen before the build: E[min{j : coverage >= 0.9}] for Uniform
// sticks is 3.296 +- 0.005 over 1e5 independent stick sequences.
TEST(AtomStream, Gem1AtomCountForNinetyPercentCoverage) {
  Engine eng(101);
  double total = 0.0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    auto s = cascop::sample_atoms_until(law("gem:1"), Engine(eng()), 0.9);
    total += static_cast<double>(s.atoms().size());
  }
  EXPECT_NEAR(total / reps, 3.296, 0.05);
}

TEST(AtomStream, Gem1RealizesExactlyAsPd1) {
  // same engine state, same draws: the two variants are one law
  for (int seed = 0; seed < 20; ++seed) {
    cascop::AtomSource a(law("pd1"), Engine(seed));
    cascop::AtomSource b(law("gem:1"), Engine(seed));
    for (int i = 0; i < 30; ++i) ASSERT_DOUBLE_EQ(a.next(), b.next()) << seed;
  }
}

TEST(Laplace, ClosedFormsMatchKnownValues) {
  EXPECT_DOUBLE_EQ(cascop::laplace_closed(law("pd1"), 2.0), 0.5);
  EXPECT_DOUBLE_EQ(cascop::laplace_closed(law("pd1"), 1.0), 1.0);
  EXPECT_DOUBLE_EQ(cascop::laplace_closed(law("gem:1"), 2.0), 0.5);
  // E[V^2 + (1-V)^2] with V ~ Uniform(0,1) = 2/3 by direct integration
  EXPECT_NEAR(cascop::laplace_closed(law("dirichlet:2:1"), 2.0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(cascop::laplace_closed(law("beta:1:1"), 2.0), 2.0 / 3.0, 1e-12);
  // normalization is exact for every law
  for (const auto* text : {"pd1", "gem:3", "dirichlet:4:2", "beta:2:7"}) {
    const auto v = cascop::laplace_transform(law(text), 1.0);
    EXPECT_DOUBLE_EQ(v.value, 1.0) << text;
  }
  // theta <= theta_* sentinel
  EXPECT_TRUE(std::isinf(cascop::laplace_transform(law("pd1"), 0.0).value));
}

TEST(Laplace, MonotoneAndLogConvexOnGrid) {
  for (const auto* text : {"pd1", "dirichlet:3:0.5", "beta:2:5"}) {
    const auto spec = law(text);
    std::vector<double> lnL;
    for (double t = 0.25; t <= 6.0; t += 0.25) {
      lnL.push_back(std::log(cascop::laplace_closed(spec, t)));
    }
    for (std::size_t i = 1; i < lnL.size(); ++i) {
      EXPECT_LE(lnL[i], lnL[i - 1] + 1e-12) << text;  // L nonincreasing
    }
    for (std::size_t i = 1; i + 1 < lnL.size(); ++i) {
      EXPECT_GE(lnL[i + 1] - 2 * lnL[i] + lnL[i - 1], -1e-9) << text;  // log-convex
    }
  }
}

TEST(MonteCarloLaplace, AgreesWithClosedFormsWithinFourSE) {
  Engine eng(211);
  for (const auto* text : {"pd1", "dirichlet:2:1", "dirichlet:3:0.5", "beta:2:5"}) {
    const auto spec = law(text);
    for (const double theta : {0.5, 1.5, 2.0, 3.0}) {
      const auto mc = cascop::monte_carlo_laplace(spec, theta, 20000, eng);
      const double exact = cascop::laplace_closed(spec, theta);
      const double slack = 4.0 * mc.std_error + (mc.bias_rigorous ? 1e-9 : mc.bias_bound);
      EXPECT_NEAR(mc.estimate, exact, slack) << text << " theta=" << theta;
    }
  }
}

TEST(MonteCarloLaplace, SpecExamples) {
  Engine eng(223);
  // L(2) = 1/2 for PD(1), within 3 SE at 1e5 replicas
  const auto pd = cascop::monte_carlo_laplace(law("pd1"), 2.0, 100000, eng);
  EXPECT_NEAR(pd.estimate, 0.5, 3.0 * pd.std_error);
  // same integral as dirichlet:2:1
  const auto bb = cascop::monte_carlo_laplace(law("beta:1:1"), 2.0, 100000, eng);
  EXPECT_NEAR(bb.estimate, 2.0 / 3.0, 3.0 * bb.std_error);
  // normalization: exactly 1 per replica
  const auto di = cascop::monte_carlo_laplace(law("dirichlet:3:1"), 1.0, 100, eng);
  EXPECT_DOUBLE_EQ(di.estimate, 1.0);
  EXPECT_DOUBLE_EQ(di.std_error, 0.0);
}

// Independent oracle for the Monte Carlo path: the stick-breaking integral
// for Beta(1, c) sticks gives L(theta) = Gamma(theta) Gamma(c+1) / Gamma(theta+c).
TEST(MonteCarloLaplace, GemAgainstStickIntegralOracle) {
  Engine eng(227);
  for (const double c : {0.5, 2.0, 4.0}) {
    const auto spec = SplittingLawSpec(cascop::Gem{c});
    for (const double theta : {0.8, 1.5, 2.5}) {
      const auto mc = cascop::monte_carlo_laplace(spec, theta, 30000, eng);
      const double oracle =
          std::exp(std::lgamma(theta) + std::lgamma(c + 1.0) - std::lgamma(theta + c));
      const double slack = 4.0 * mc.std_error + (mc.bias_rigorous ? 1e-9 : mc.bias_bound);
      EXPECT_NEAR(mc.estimate, oracle, slack) << "gem:" << c << " theta=" << theta;
    }
  }
}

TEST(MonteCarloLaplace, Preconditions) {
  Engine eng(229);
  EXPECT_THROW(cascop::monte_carlo_laplace(law("pd1"), 0.0, 10, eng), cascop::DomainError);
  EXPECT_THROW(cascop::monte_carlo_laplace(law("pd1"), 2.0, 0, eng), cascop::DomainError);
}

TEST(Laplace, GemWithoutClosedFormReportsError) {
  const auto spec = law("gem:2");
  EXPECT_FALSE(spec.has_closed_form_laplace());
  const auto v = cascop::laplace_transform(spec, 2.0);
  EXPECT_FALSE(v.exact);
  EXPECT_GT(v.std_error, 0.0);
  const double oracle = std::exp(std::lgamma(2.0) + std::lgamma(3.0) - std::lgamma(4.0));
  EXPECT_NEAR(v.value, oracle, 5.0 * v.std_error);
}

}  // namespace
