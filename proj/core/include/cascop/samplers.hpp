#pragma once

#include <cstdint>
#include <vector>

#include "cascop/random.hpp"

namespace cascop {

// Standard normal, Marsaglia polar method.
double normal(Engine& eng);

// Gamma(shape, 1), Marsaglia-Tsang squeeze method; exact for all shape > 0.
double gamma_rv(Engine& eng, double shape);

// Beta(a, b) via two gammas, with exact inverse-CDF shortcuts for a == 1 or
// b == 1.
double beta_rv(Engine& eng, double a, double b);

// Symmetric-parameter helpers: fills `out` with a Dirichlet(alpha,...,alpha)
// vector of the given size.
void dirichlet_symmetric(Engine& eng, double alpha, std::size_t parts, std::vector<double>& out);

// Poisson(mean): product-of-uniforms for small means, exact gamma splitting
// (Ahrens-Dieter) for large ones.
std::uint64_t poisson(Engine& eng, double mean);

// Binomial(n, p): inverse-CDF search when n*min(p,1-p) is small, otherwise
// an exact order-statistic (beta) splitting recursion that halves n until
// the inversion regime is reached. No normal approximation anywhere.
std::uint64_t binomial(Engine& eng, std::uint64_t n, double p);

}  // namespace cascop
