#include "cascop/splitting_law.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "cascop/samplers.hpp"

namespace cascop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double value, const char* name) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw InvalidLawError(std::string(name) +
                          " must be a finite positive real; degenerate parameters encode a "
                          "point-mass or geometric split, which is rejected");
  }
}

double parse_real(const std::string& token, const char* name) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw InvalidLawError("cannot parse " + std::string(name) + " from '" + token + "'");
  }
  if (pos != token.size()) {
    throw InvalidLawError("trailing characters in " + std::string(name) + " '" + token + "'");
  }
  return v;
}

std::vector<std::string> split_on_colon(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ':')) out.push_back(cur);
  return out;
}

}  // namespace

SplittingLawSpec::SplittingLawSpec(Variant v) : variant_(std::move(v)) {
  std::visit(
      [](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Gem>) {
          require_positive(law.concentration, "gem concentration");
        } else if constexpr (std::is_same_v<T, DirichletSymmetric>) {
          if (law.parts < 2) {
            throw InvalidLawError("dirichlet parts must be >= 2; a single part is a point mass");
          }
          require_positive(law.alpha, "dirichlet alpha");
        } else if constexpr (std::is_same_v<T, BetaSplit>) {
          require_positive(law.alpha, "beta alpha");
          require_positive(law.beta, "beta beta");
        }
      },
      variant_);
}

SplittingLawSpec SplittingLawSpec::parse(const std::string& text) {
  const auto parts = split_on_colon(text);
  if (parts.empty()) throw InvalidLawError("empty law spec");
  const std::string& head = parts[0];
  if (head == "pd1") {
    if (parts.size() != 1) throw InvalidLawError("pd1 takes no parameters");
    return SplittingLawSpec(PoissonDirichlet1{});
  }
  if (head == "gem") {
    if (parts.size() != 2) throw InvalidLawError("expected gem:<concentration>");
    return SplittingLawSpec(Gem{parse_real(parts[1], "gem concentration")});
  }
  if (head == "dirichlet") {
    if (parts.size() != 3) throw InvalidLawError("expected dirichlet:<parts>:<alpha>");
    const double m = parse_real(parts[1], "dirichlet parts");
    if (!(m >= 2.0 && m == std::floor(m) && m <= 1e6)) {
      throw InvalidLawError("dirichlet parts must be an integer >= 2");
    }
    return SplittingLawSpec(
        DirichletSymmetric{static_cast<std::uint32_t>(m), parse_real(parts[2], "dirichlet alpha")});
  }
  if (head == "beta") {
    if (parts.size() != 3) throw InvalidLawError("expected beta:<alpha>:<beta>");
    return SplittingLawSpec(
        BetaSplit{parse_real(parts[1], "beta alpha"), parse_real(parts[2], "beta beta")});
  }
  throw InvalidLawError("unknown law '" + head + "' (known: pd1, gem, dirichlet, beta)");
}

std::string SplittingLawSpec::to_string() const {
  std::ostringstream out;
  std::visit(
      [&out](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PoissonDirichlet1>) {
          out << "pd1";
        } else if constexpr (std::is_same_v<T, Gem>) {
          out << "gem:" << law.concentration;
        } else if constexpr (std::is_same_v<T, DirichletSymmetric>) {
          out << "dirichlet:" << law.parts << ":" << law.alpha;
        } else {
          out << "beta:" << law.alpha << ":" << law.beta;
        }
      },
      variant_);
  return out.str();
}

bool SplittingLawSpec::finite_support() const { return support_size() != 0; }

std::size_t SplittingLawSpec::support_size() const {
  if (const auto* d = std::get_if<DirichletSymmetric>(&variant_)) return d->parts;
  if (std::holds_alternative<BetaSplit>(variant_)) return 2;
  return 0;
}

bool SplittingLawSpec::has_closed_form_laplace() const {
  if (const auto* g = std::get_if<Gem>(&variant_)) return g->concentration == 1.0;
  return true;
}

double laplace_closed(const SplittingLawSpec& spec, double theta) {
  if (theta <= spec.theta_lower()) return kInf;
  if (theta == 1.0) return 1.0;  // normalization identity, exact for every law
  return std::visit(
      [theta](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PoissonDirichlet1>) {
          return 1.0 / theta;
        } else if constexpr (std::is_same_v<T, Gem>) {
          if (law.concentration != 1.0) {
            throw DomainError("gem with concentration != 1 has no registered closed form");
          }
          return 1.0 / theta;
        } else if constexpr (std::is_same_v<T, DirichletSymmetric>) {
          const double a = law.alpha;
          const double ma = a * law.parts;
          return law.parts *
                 std::exp(std::lgamma(a + theta) + std::lgamma(ma) - std::lgamma(a) -
                          std::lgamma(ma + theta));
        } else {
          const double lb = std::lgamma(law.alpha) + std::lgamma(law.beta) -
                            std::lgamma(law.alpha + law.beta);
          const double t1 = std::lgamma(law.alpha + theta) + std::lgamma(law.beta) -
                            std::lgamma(law.alpha + law.beta + theta);
          const double t2 = std::lgamma(law.alpha) + std::lgamma(law.beta + theta) -
                            std::lgamma(law.alpha + law.beta + theta);
          return std::exp(t1 - lb) + std::exp(t2 - lb);
        }
      },
      spec.variant());
}

LaplaceDerivatives laplace_closed_derivatives(const SplittingLawSpec& spec, double theta) {
  if (theta <= spec.theta_lower()) return {kInf, kInf, kInf};
  using boost::math::digamma;
  using boost::math::trigamma;
  const double value = laplace_closed(spec, theta);
  return std::visit(
      [theta, value](const auto& law) -> LaplaceDerivatives {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PoissonDirichlet1> || std::is_same_v<T, Gem>) {
          const double t2 = theta * theta;
          return {value, -1.0 / t2, 2.0 / (t2 * theta)};
        } else if constexpr (std::is_same_v<T, DirichletSymmetric>) {
          const double a = law.alpha;
          const double ma = a * law.parts;
          // d/dtheta ln L = psi(a+theta) - psi(ma+theta)
          const double l1 = digamma(a + theta) - digamma(ma + theta);
          const double l2 = trigamma(a + theta) - trigamma(ma + theta);
          return {value, value * l1, value * (l1 * l1 + l2)};
        } else {
          const double lb = std::lgamma(law.alpha) + std::lgamma(law.beta) -
                            std::lgamma(law.alpha + law.beta);
          const double ab = law.alpha + law.beta;
          // Each term B(x+theta, y) differentiates to itself times
          // psi(x+theta) - psi(ab+theta).
          const double termA = std::exp(std::lgamma(law.alpha + theta) + std::lgamma(law.beta) -
                                        std::lgamma(ab + theta) - lb);
          const double termB = std::exp(std::lgamma(law.alpha) + std::lgamma(law.beta + theta) -
                                        std::lgamma(ab + theta) - lb);
          const double gA = digamma(law.alpha + theta) - digamma(ab + theta);
          const double gB = digamma(law.beta + theta) - digamma(ab + theta);
          const double hA = trigamma(law.alpha + theta) - trigamma(ab + theta);
          const double hB = trigamma(law.beta + theta) - trigamma(ab + theta);
          const double d1 = termA * gA + termB * gB;
          const double d2 = termA * (gA * gA + hA) + termB * (gB * gB + hB);
          return {termA + termB, d1, d2};
        }
      },
      spec.variant());
}

AtomSource::AtomSource(const SplittingLawSpec& spec, Engine engine)
    : spec_(&spec), engine_(engine) {
  if (const auto* d = std::get_if<DirichletSymmetric>(&spec.variant())) {
    dirichlet_symmetric(engine_, d->alpha, d->parts, finite_atoms_);
  } else if (const auto* b = std::get_if<BetaSplit>(&spec.variant())) {
    const double v = beta_rv(engine_, b->alpha, b->beta);
    finite_atoms_ = {v, 1.0 - v};
  }
}

bool AtomSource::exhausted() const {
  if (!finite_atoms_.empty()) return emitted_ >= finite_atoms_.size();
  return false;
}

double AtomSource::remaining() const {
  if (!finite_atoms_.empty()) {
    double rest = 0.0;
    for (std::size_t i = emitted_; i < finite_atoms_.size(); ++i) rest += finite_atoms_[i];
    return rest;
  }
  return stick_;
}

double AtomSource::next() {
  double atom = 0.0;
  if (!finite_atoms_.empty()) {
    atom = finite_atoms_[emitted_];
  } else if (std::holds_alternative<PoissonDirichlet1>(spec_->variant())) {
    const double u = engine_.uniform_pos();  // (1 - V) with V ~ Uniform
    atom = stick_ * (1.0 - u);
    stick_ *= u;
  } else {
    const double c = std::get<Gem>(spec_->variant()).concentration;
    const double u = engine_.uniform_pos();
    const double keep = (c == 1.0) ? u : std::pow(u, 1.0 / c);  // (1 - V), V ~ Beta(1, c)
    atom = stick_ * (1.0 - keep);
    stick_ *= keep;
  }
  ++emitted_;
  cumulative_ += atom;
  return atom;
}

AtomStream::AtomStream(const SplittingLawSpec& spec, Engine engine, std::size_t atom_cap)
    : source_(spec, engine), atom_cap_(atom_cap) {}

double AtomStream::next() {
  if (atoms_.size() >= atom_cap_) {
    throw AtomCapExceeded("atom cap " + std::to_string(atom_cap_) + " reached");
  }
  const double a = source_.next();
  atoms_.push_back(a);
  return a;
}

void AtomStream::extend_to_coverage(double coverage) {
  while (!exhausted() && cumulative() < coverage) next();
}

AtomStream sample_atoms_until(const SplittingLawSpec& spec, Engine engine, double coverage,
                              std::size_t atom_cap) {
  if (!(coverage >= 0.0 && coverage < 1.0)) {
    throw DomainError("coverage must lie in [0, 1)");
  }
  AtomStream stream(spec, engine, atom_cap);
  if (spec.finite_support()) {
    while (!stream.exhausted()) stream.next();  // full realization
  } else {
    stream.next();  // positive mass must always be emitted
    stream.extend_to_coverage(coverage);
  }
  return stream;
}

MonteCarloLaplace monte_carlo_laplace(const SplittingLawSpec& spec, double theta,
                                      std::size_t replicas, Engine& engine,
                                      std::size_t atom_budget, std::size_t atom_cap) {
  if (!(theta > spec.theta_lower())) {
    throw DomainError("monte_carlo_laplace requires theta above theta_* of the law");
  }
  if (replicas < 1) throw DomainError("at least one replica required");
  if (theta == 1.0) return {1.0, 0.0, 0.0, true, replicas};

  double sum = 0.0, sumsq = 0.0, bias = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    AtomSource src(spec, Engine(engine()));  // one sub-seed draw per replica
    double s = 0.0;
    std::size_t count = 0;
    double tail = 0.0;
    for (;;) {
      if (src.exhausted()) {
        tail = 0.0;
        break;
      }
      const double rem = src.remaining();
      tail = std::pow(rem, theta);
      if (theta > 1.0) {
        // sum over unseen atoms <= rem^theta, rigorous
        if (tail < 1e-10 * (s + 1e-3)) break;
        if (count >= atom_cap) {
          throw AtomCapExceeded("laplace truncation needs more than " + std::to_string(atom_cap) +
                                " atoms");
        }
      } else {
        if (count >= atom_budget) break;
        if (rem <= 0.0) break;
      }
      s += std::pow(src.next(), theta);
      ++count;
    }
    if (theta <= 1.0 && count > 0) {
      // remainder^theta * count^(1-theta) heuristic, not a bound
      bias += tail * std::pow(static_cast<double>(count), 1.0 - theta);
    } else {
      bias += tail;
    }
    sum += s;
    sumsq += s * s;
  }
  const double n = static_cast<double>(replicas);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / std::max(1.0, n - 1.0));
  return {mean, std::sqrt(var / n), bias / n, theta > 1.0, replicas};
}

LaplaceValue laplace_transform(const SplittingLawSpec& spec, double theta) {
  if (theta <= spec.theta_lower()) return {kInf, 0.0, true};
  if (spec.has_closed_form_laplace()) return {laplace_closed(spec, theta), 0.0, true};
  Engine eng(0x1A91ACE0FULL);  // fixed seed: bare calls are reproducible
  const auto mc = monte_carlo_laplace(spec, theta, 20000, eng);
  return {mc.estimate, mc.std_error, false};
}

}  // namespace cascop
