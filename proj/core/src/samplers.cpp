#include "cascop/samplers.hpp"

#include <cmath>

namespace cascop {

double normal(Engine& eng) {
  for (;;) {
    const double u = 2.0 * eng.uniform() - 1.0;
    const double v = 2.0 * eng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double gamma_rv(Engine& eng, double shape) {
  if (shape < 1.0) {
    // Boost by one and scale back (Marsaglia-Tsang remark for shape < 1).
    const double u = eng.uniform_pos();
    return gamma_rv(eng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal(eng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = eng.uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_rv(Engine& eng, double a, double b) {
  if (a == 1.0 && b == 1.0) return eng.uniform();
  if (a == 1.0) return 1.0 - std::pow(eng.uniform_pos(), 1.0 / b);
  if (b == 1.0) return std::pow(eng.uniform_pos(), 1.0 / a);
  const double x = gamma_rv(eng, a);
  const double y = gamma_rv(eng, b);
  return x / (x + y);
}

void dirichlet_symmetric(Engine& eng, double alpha, std::size_t parts, std::vector<double>& out) {
  out.resize(parts);
  double sum = 0.0;
  for (auto& v : out) {
    v = gamma_rv(eng, alpha);
    sum += v;
  }
  for (auto& v : out) v /= sum;
}

namespace {

std::uint64_t poisson_small(Engine& eng, double mean) {
  // Product of uniforms against exp(-mean); O(mean) draws.
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = eng.uniform();
  while (prod > limit) {
    ++k;
    prod *= eng.uniform();
  }
  return k;
}

// Inverse-CDF search from zero, valid for p <= 1/2 and modest n*p.
std::uint64_t binomial_inversion(Engine& eng, std::uint64_t n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  double f = std::exp(static_cast<double>(n) * std::log1p(-p));
  double u = eng.uniform();
  std::uint64_t k = 0;
  for (;;) {
    if (u <= f) return k;
    u -= f;
    if (k >= n) return n;  // guards accumulated rounding at u ~ 1
    f *= s * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
  }
}

}  // namespace

std::uint64_t poisson(Engine& eng, double mean) {
  std::uint64_t count = 0;
  // Gamma splitting: with m ~ 7mean/8 and T ~ Gamma(m), either T <= mean
  // (m arrivals happened by time T, recurse on the remaining interval) or
  // the count is Binomial(m-1, mean/T).
  while (mean > 30.0) {
    const std::uint64_t m = static_cast<std::uint64_t>(std::floor(0.875 * mean));
    const double t = gamma_rv(eng, static_cast<double>(m));
    if (t <= mean) {
      count += m;
      mean -= t;
    } else {
      return count + binomial(eng, m - 1, mean / t);
    }
  }
  if (mean > 0.0) count += poisson_small(eng, mean);
  return count;
}

std::uint64_t binomial(Engine& eng, std::uint64_t n, double p) {
  std::uint64_t count = 0;
  for (;;) {
    if (n == 0 || p <= 0.0) return count;
    if (p >= 1.0) return count + n;
    if (p > 0.5) {
      // Count failures of the complementary experiment.
      return count + n - binomial(eng, n, 1.0 - p);
    }
    if (static_cast<double>(n) * p <= 30.0 || n <= 64) {
      return count + binomial_inversion(eng, n, p);
    }
    // Order-statistic split: U_(i) of n uniforms is Beta(i, n-i+1), and the
    // number of uniforms below p is resolved on one side of U_(i).
    const std::uint64_t i = 1 + n / 2;
    const double v = beta_rv(eng, static_cast<double>(i), static_cast<double>(n - i + 1));
    if (v <= p) {
      count += i;
      n -= i;
      p = (p - v) / (1.0 - v);
    } else {
      n = i - 1;
      p = p / v;
    }
  }
}

}  // namespace cascop
