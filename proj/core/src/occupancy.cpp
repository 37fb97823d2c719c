#include "cascop/occupancy.hpp"

#include <cmath>

#include "cascop/errors.hpp"
#include "cascop/samplers.hpp"

namespace cascop {

namespace {

void check_probability_vector(std::span<const double> p, double target) {
  double sum = 0.0;
  for (const double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidDistribution("negative or non-finite mass");
    sum += x;
  }
  if (std::abs(sum - target) > 1e-12 * std::max(1.0, target)) {
    throw InvalidDistribution("masses sum to " + std::to_string(sum) + ", expected " +
                              std::to_string(target));
  }
}

}  // namespace

OccupancyCounts throw_balls(std::span<const double> p, std::uint64_t n, Engine& eng) {
  check_probability_vector(p, 1.0);
  OccupancyCounts out;
  out.balls = n;
  std::uint64_t remaining = n;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
    std::uint64_t c;
    if (i + 1 == p.size() || mass_left <= p[i]) {
      c = remaining;
    } else {
      c = binomial(eng, remaining, p[i] / mass_left);
    }
    if (c > 0) out.occupied.emplace_back(i, c);
    remaining -= c;
    mass_left -= p[i];
  }
  return out;
}

OccupancyCounts poissonized_throw(std::span<const double> p, double rate, Engine& eng) {
  if (!(rate >= 0.0)) throw InvalidDistribution("poisson rate must be nonnegative");
  check_probability_vector(p, 1.0);
  OccupancyCounts out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::uint64_t c = poisson(eng, p[i] * rate);
    if (c > 0) {
      out.occupied.emplace_back(i, c);
      out.balls += c;
    }
  }
  return out;
}

OccupancyStats stats_from_counts(const OccupancyCounts& counts, int max_j) {
  if (max_j < 1) throw DomainError("max_j must be >= 1");
  OccupancyStats s;
  s.balls = counts.balls;
  s.exact.assign(max_j, 0);
  s.tail.assign(max_j, 0);
  const auto jmax = static_cast<std::uint64_t>(max_j);
  for (const auto& [box, c] : counts.occupied) {
    (void)box;
    ++s.total_occupied;
    if (c <= jmax) {
      ++s.exact[c - 1];
    } else {
      ++s.overflow_boxes;
      s.overflow_balls += c;
    }
    // tail[j] counts boxes with more than j balls
    const std::uint64_t upto = std::min<std::uint64_t>(c - 1, jmax - 1);
    for (std::uint64_t j = 0; j <= upto; ++j) ++s.tail[j];
  }
  return s;
}

double poisson_tail(int j, double lambda) {
  if (lambda <= 0.0) return 0.0;
  if (j < 0) return 1.0;
  if (j == 0) return -std::expm1(-lambda);
  if (lambda > j + 1.0) {
    // CDF is comfortably below 1 here; the complement is well conditioned.
    double term = std::exp(-lambda);
    double cdf = term;
    for (int i = 1; i <= j; ++i) {
      term *= lambda / i;
      cdf += term;
    }
    return std::max(0.0, 1.0 - cdf);
  }
  // Tail series from l = j+1 upward; ratio lambda/l < 1 throughout.
  double term = std::exp(-lambda + (j + 1) * std::log(lambda) - std::lgamma(j + 2.0));
  double sum = term;
  for (int l = j + 2; term > sum * 1e-17 && term > 0.0; ++l) {
    term *= lambda / l;
    sum += term;
  }
  return sum;
}

MomentValue mu_bar(std::span<const double> p, int j, double x, double remainder) {
  if (!(x >= 0.0)) throw DomainError("mu_bar requires x >= 0");
  if (j < 0) throw DomainError("mu_bar requires j >= 0");
  double value = 0.0;
  for (const double pi : p) value += poisson_tail(j, pi * x);
  return {value, x * remainder};
}

MomentValue mu(std::span<const double> p, double x, double remainder) {
  return mu_bar(p, 0, x, remainder);
}

MomentValue sigma2(std::span<const double> p, double x, double remainder) {
  if (!(x > 0.0)) throw DomainError("sigma2 requires x > 0");
  double bernoulli_var = 0.0;
  double mean_grad = 0.0;
  for (const double pi : p) {
    const double e = std::exp(-pi * x);
    bernoulli_var += e * (-std::expm1(-pi * x));
    mean_grad += pi * e;
  }
  return {bernoulli_var - x * mean_grad * mean_grad, x * remainder};
}

}  // namespace cascop
