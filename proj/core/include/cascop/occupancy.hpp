#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascop/random.hpp"

namespace cascop {

// Occupied boxes only, sorted by box index.
struct OccupancyCounts {
  std::uint64_t balls = 0;
  std::vector<std::pair<std::size_t, std::uint64_t>> occupied;
};

// Exact counts N_{n,j} for j = 1..J, tail counts Nbar_{n,j} for j = 0..J-1,
// and the fold of everything past J. The ball-conservation identity is
// sum_j j*N_{n,j} + overflow_balls = n.
struct OccupancyStats {
  std::uint64_t balls = 0;
  std::uint64_t total_occupied = 0;               // N_n
  std::vector<std::uint64_t> exact;               // exact[j-1] = N_{n,j}
  std::vector<std::uint64_t> tail;                // tail[j]  = Nbar_{n,j}
  std::uint64_t overflow_boxes = 0;               // boxes holding more than J balls
  std::uint64_t overflow_balls = 0;

  int max_tracked() const { return static_cast<int>(exact.size()); }
};

// Multinomial(n, p) by sequential conditional binomials; cost is O(#boxes).
// Throws InvalidDistribution unless p sums to 1 within 1e-12.
OccupancyCounts throw_balls(std::span<const double> p, std::uint64_t n, Engine& eng);

// Independent Poisson(p_i * rate) per box.
OccupancyCounts poissonized_throw(std::span<const double> p, double rate, Engine& eng);

OccupancyStats stats_from_counts(const OccupancyCounts& counts, int max_j);

// P(Poisson(lambda) > j), evaluated without cancellation for small lambda.
double poisson_tail(int j, double lambda);

struct MomentValue {
  double value;
  double error_bound;
};

// mu_bar_j(x) over the stored masses; the untracked remainder mass r adds at
// most x*r (sharp for j = 0, reused as a conservative bound for j >= 1).
MomentValue mu_bar(std::span<const double> p, int j, double x, double remainder = 0.0);

// mu_p(x) = mu_bar_0(x) = sum(1 - exp(-p_i x)).
MomentValue mu(std::span<const double> p, double x, double remainder = 0.0);

// sigma^2_p(x) = sum e^{-p_i x}(1 - e^{-p_i x}) - x (sum p_i e^{-p_i x})^2.
MomentValue sigma2(std::span<const double> p, double x, double remainder = 0.0);

}  // namespace cascop
