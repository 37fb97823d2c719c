#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cascop/splitting_law.hpp"

namespace cascop {

enum class DerivativeMode { exact, finite_difference, monte_carlo };

const char* to_string(DerivativeMode mode);

struct Derivatives {
  double first;
  double second;
};

// Central differences with step max(1e-5, 1e-5*theta), Richardson
// extrapolated once. Throws ProfileBuildError on non-finite evaluations.
Derivatives numeric_derivatives(const std::function<double(double)>& laplace, double theta);

struct ProfileOptions {
  std::optional<DerivativeMode> mode;  // default: exact where registered, else monte_carlo
  double theta_cap = 64.0;             // phi still positive here => theta_upper = +inf
  double root_tol = 1e-9;
  std::size_t mc_replicas = 20000;
  std::uint64_t mc_seed = 0xAB5EC7EDULL;
  std::size_t mc_atom_budget = 4096;
  double mc_coverage_remainder = 1e-9;
  double mc_max_rel_error = 0.02;  // ProfileBuildError beyond this at theta = 1
};

struct McUncertainty {
  double value;
  double std_error;  // zero outside monte_carlo mode
};

// Frozen Monte Carlo realizations of the atom masses. Reusing the same
// realizations at every theta makes the estimated L a smooth function, so
// root finding and differentiation behave.
struct McLaplaceTable {
  std::vector<std::vector<double>> log_atoms;
  struct Eval {
    double L, L1, L2;
    double se_L, se_L1, se_L2;
    double cov_L_L1;
  };
  Eval evaluate(double theta) const;
};

// All analytic quantities of a splitting law: L and derivatives, the mean
// and variance of the tilted intensity, the rate function, and the critical
// parameters.
class AnalyticProfile {
 public:
  const SplittingLawSpec& law() const { return law_; }
  DerivativeMode mode() const { return mode_; }

  double theta_lower() const { return theta_lower_; }
  double theta_upper() const { return theta_upper_; }  // +inf sentinel possible
  double m_lower() const { return m_lower_; }
  double m_upper() const { return m_upper_; }  // +inf for infinite support

  double laplace(double theta) const;
  double laplace_d1(double theta) const;
  double laplace_d2(double theta) const;

  // m, v, phi on the open interval (theta_lower, theta_upper); DomainError
  // outside.
  double mean(double theta) const;
  double variance(double theta) const;
  double rate(double theta) const;

  // Inverse of the decreasing bijection m: (theta_*, theta^*) -> (m_*, m^*),
  // by bisection to root_tol. DomainError when x is outside (m_*, m^*).
  double mean_inverse(double x) const;

  // Uncertainty bands (delta method over the Monte Carlo table; the
  // std_error is zero in exact and finite-difference modes).
  McUncertainty mean_band(double theta) const;
  McUncertainty rate_band(double theta) const;

 private:
  friend AnalyticProfile build_profile(const SplittingLawSpec&, const ProfileOptions&);
  explicit AnalyticProfile(SplittingLawSpec law) : law_(std::move(law)) {}

  void check_domain(double theta) const;
  LaplaceDerivatives eval(double theta) const;       // no domain check
  double mean_unchecked(double theta) const;

  SplittingLawSpec law_;
  DerivativeMode mode_ = DerivativeMode::exact;
  double theta_lower_ = 0.0;
  double theta_upper_ = 0.0;
  double m_lower_ = 0.0;
  double m_upper_ = 0.0;
  double root_tol_ = 1e-9;
  double theta_cap_ = 64.0;
  std::shared_ptr<const McLaplaceTable> mc_;  // shared: profiles are freely copyable
};

AnalyticProfile build_profile(const SplittingLawSpec& spec, const ProfileOptions& opts = {});

// Sum_{l >= j} Gamma(l - theta)/l! for 0 < theta < j, evaluated through the
// summation identity Gamma(j - theta) / (theta * (j-1)!). The raw series
// decays like l^(-1-theta) and cannot reach double precision by brute force
// for small theta.
double gamma_tail_sum(double theta, int j);

// The two limit constants of the (a, b) regime law of large numbers, for
// boxes with more than j-1 balls and with exactly j balls.
struct LlnConstants {
  double tail_constant;
  double exact_j_constant;
  double theta;
  double phi;
};
LlnConstants lln_limit_constants(const AnalyticProfile& profile, double a, double b, int j);

}  // namespace cascop
