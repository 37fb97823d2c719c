#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cascop/errors.hpp"
#include "cascop/random.hpp"

namespace cascop {

// The four shipped splitting laws. Each one has a cheap exact sampler and a
// derivable Laplace transform; together they cover finite and infinite
// support.
struct PoissonDirichlet1 {};                                  // PD(1), stick-breaking with Uniform sticks
struct Gem { double concentration; };                          // Beta(1, c) sticks
struct DirichletSymmetric { std::uint32_t parts; double alpha; };
struct BetaSplit { double alpha; double beta; };               // two atoms (V, 1-V)

class SplittingLawSpec {
 public:
  using Variant = std::variant<PoissonDirichlet1, Gem, DirichletSymmetric, BetaSplit>;

  // Validates at construction: parameters must be strictly positive and
  // finite, parts >= 2. Non-finite or non-positive parameters are the
  // degenerate corners that encode point-mass / lattice ("geometric")
  // splits, which the whole theory excludes.
  explicit SplittingLawSpec(Variant v);

  // Grammar: pd1 | gem:<c> | dirichlet:<parts>:<alpha> | beta:<alpha>:<beta>
  static SplittingLawSpec parse(const std::string& text);
  std::string to_string() const;

  const Variant& variant() const { return variant_; }

  bool finite_support() const;
  std::size_t support_size() const;  // 0 for infinite support

  // theta_* = inf{theta > 0 : L(theta) < inf}; zero for every shipped law.
  double theta_lower() const { return 0.0; }

  bool has_closed_form_laplace() const;

 private:
  Variant variant_;
};

// Closed-form L(theta) = E[sum_j rho_j^theta]; +inf sentinel for
// theta <= theta_*. Pre: has_closed_form_laplace().
double laplace_closed(const SplittingLawSpec& spec, double theta);

// L with its first two derivatives in theta, exact via digamma/trigamma.
struct LaplaceDerivatives {
  double value;
  double d1;
  double d2;
};
LaplaceDerivatives laplace_closed_derivatives(const SplittingLawSpec& spec, double theta);

// Lazily realizes one copy of the random mass partition. Finite-support
// laws are materialized on construction (a Dirichlet vector cannot be
// produced one coordinate at a time); stick-breaking laws emit atoms in
// stick order and keep nothing but the running remainder.
class AtomSource {
 public:
  AtomSource(const SplittingLawSpec& spec, Engine engine);

  double next();  // pre: !exhausted()
  bool exhausted() const;
  double cumulative() const { return cumulative_; }
  std::size_t emitted() const { return emitted_; }
  // Mass not yet emitted (exact for finite laws, 1 - cumulative otherwise).
  double remaining() const;

 private:
  const SplittingLawSpec* spec_;
  Engine engine_;
  double cumulative_ = 0.0;
  double stick_ = 1.0;  // remaining stick for stick-breaking laws
  std::size_t emitted_ = 0;
  std::vector<double> finite_atoms_;
};

// Recorded realization: AtomSource plus the emitted atoms, the form the
// public sampling API hands out.
class AtomStream {
 public:
  static constexpr std::size_t default_atom_cap = 1'000'000;

  AtomStream(const SplittingLawSpec& spec, Engine engine,
             std::size_t atom_cap = default_atom_cap);

  // Extends the stream until cumulative >= coverage or the law is
  // exhausted. Throws AtomCapExceeded past the cap.
  void extend_to_coverage(double coverage);

  double next();
  bool exhausted() const { return source_.exhausted(); }
  double cumulative() const { return source_.cumulative(); }
  const std::vector<double>& atoms() const { return atoms_; }

 private:
  AtomSource source_;
  std::vector<double> atoms_;
  std::size_t atom_cap_;
};

// Realizes atoms until the cumulative mass covers `coverage` (all atoms for
// finite-support laws). Pre: coverage in [0, 1).
AtomStream sample_atoms_until(const SplittingLawSpec& spec, Engine engine, double coverage,
                              std::size_t atom_cap = AtomStream::default_atom_cap);

// Monte Carlo estimate of L(theta) over independent realizations. For
// theta > 1 the truncation tail is rigorously below 1e-10; for theta <= 1 a
// fixed atom budget applies and bias_bound is the (non-rigorous)
// remainder^theta * count^(1-theta) heuristic.
struct MonteCarloLaplace {
  double estimate;
  double std_error;
  double bias_bound;
  bool bias_rigorous;
  std::size_t replicas;
};
MonteCarloLaplace monte_carlo_laplace(const SplittingLawSpec& spec, double theta,
                                      std::size_t replicas, Engine& engine,
                                      std::size_t atom_budget = 4096,
                                      std::size_t atom_cap = AtomStream::default_atom_cap);

// L(theta) for any shipped law: closed form where registered, otherwise a
// Monte Carlo estimate (fixed internal seed, so the value is reproducible)
// with its standard error attached.
struct LaplaceValue {
  double value;
  double std_error;  // 0 when exact
  bool exact;
};
LaplaceValue laplace_transform(const SplittingLawSpec& spec, double theta);

}  // namespace cascop
