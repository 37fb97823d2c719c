#include "cascop/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cascop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(DerivativeMode mode) {
  switch (mode) {
    case DerivativeMode::exact: return "exact";
    case DerivativeMode::finite_difference: return "finite-difference";
    case DerivativeMode::monte_carlo: return "monte-carlo";
  }
  return "?";
}

Derivatives numeric_derivatives(const std::function<double(double)>& laplace, double theta) {
  const double h = std::max(1e-5, 1e-5 * theta);
  const double f0 = laplace(theta);
  auto d1 = [&](double hh) { return (laplace(theta + hh) - laplace(theta - hh)) / (2.0 * hh); };
  auto d2 = [&](double hh) {
    return (laplace(theta + hh) - 2.0 * f0 + laplace(theta - hh)) / (hh * hh);
  };
  const double first = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
  const double second = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
  if (!std::isfinite(first) || !std::isfinite(second)) {
    throw ProfileBuildError("non-finite Laplace evaluation while differentiating at theta=" +
                            std::to_string(theta));
  }
  return {first, second};
}

McLaplaceTable::Eval McLaplaceTable::evaluate(double theta) const {
  const double n = static_cast<double>(log_atoms.size());
  double sx = 0, sy = 0, sz = 0, sxx = 0, syy = 0, szz = 0, sxy = 0;
  for (const auto& rep : log_atoms) {
    double x = 0, y = 0, z = 0;
    for (const double l : rep) {
      const double w = std::exp(theta * l);
      x += w;
      y += w * l;
      z += w * l * l;
    }
    sx += x;
    sy += y;
    sz += z;
    sxx += x * x;
    syy += y * y;
    szz += z * z;
    sxy += x * y;
  }
  Eval e{};
  e.L = sx / n;
  e.L1 = sy / n;
  e.L2 = sz / n;
  const double denom = std::max(1.0, n - 1.0);
  const double var_x = std::max(0.0, (sxx - n * e.L * e.L) / denom);
  const double var_y = std::max(0.0, (syy - n * e.L1 * e.L1) / denom);
  const double var_z = std::max(0.0, (szz - n * e.L2 * e.L2) / denom);
  e.se_L = std::sqrt(var_x / n);
  e.se_L1 = std::sqrt(var_y / n);
  e.se_L2 = std::sqrt(var_z / n);
  e.cov_L_L1 = (sxy - n * e.L * e.L1) / denom / n;
  return e;
}

LaplaceDerivatives AnalyticProfile::eval(double theta) const {
  switch (mode_) {
    case DerivativeMode::exact:
      return laplace_closed_derivatives(law_, theta);
    case DerivativeMode::finite_difference: {
      const double v = laplace_closed(law_, theta);
      const auto d = numeric_derivatives([this](double t) { return laplace_closed(law_, t); }, theta);
      return {v, d.first, d.second};
    }
    case DerivativeMode::monte_carlo: {
      const auto e = mc_->evaluate(theta);
      return {e.L, e.L1, e.L2};
    }
  }
  throw ProfileBuildError("unreachable derivative mode");
}

void AnalyticProfile::check_domain(double theta) const {
  if (!(theta > theta_lower_ && theta < theta_upper_)) {
    throw DomainError("theta=" + std::to_string(theta) + " outside (theta_*, theta^*) = (" +
                      std::to_string(theta_lower_) + ", " + std::to_string(theta_upper_) + ")");
  }
}

double AnalyticProfile::laplace(double theta) const {
  if (theta <= theta_lower_) return kInf;
  if (theta == 1.0) return 1.0;
  return eval(theta).value;
}

double AnalyticProfile::laplace_d1(double theta) const { return eval(theta).d1; }
double AnalyticProfile::laplace_d2(double theta) const { return eval(theta).d2; }

double AnalyticProfile::mean_unchecked(double theta) const {
  const auto e = eval(theta);
  return -e.d1 / e.value;
}

double AnalyticProfile::mean(double theta) const {
  check_domain(theta);
  return mean_unchecked(theta);
}

double AnalyticProfile::variance(double theta) const {
  check_domain(theta);
  const auto e = eval(theta);
  const double r = e.d1 / e.value;
  return e.d2 / e.value - r * r;
}

double AnalyticProfile::rate(double theta) const {
  check_domain(theta);
  const auto e = eval(theta);
  const double lnL = (theta == 1.0) ? 0.0 : std::log(e.value);
  return lnL - theta * e.d1 / e.value;
}

double AnalyticProfile::mean_inverse(double x) const {
  if (!(x > m_lower_ && x < m_upper_)) {
    throw DomainError("x=" + std::to_string(x) + " outside (m_*, m^*) = (" +
                      std::to_string(m_lower_) + ", " + std::to_string(m_upper_) + ")");
  }
  // Bracket inside (theta_*, theta^*): m is decreasing, so walk lo toward
  // theta_* until m(lo) > x and hi toward theta^* until m(hi) < x.
  const double span = std::isfinite(theta_upper_) ? theta_upper_ - theta_lower_ : 2.0;
  double lo = theta_lower_ + 0.5 * std::min(span, 2.0);
  for (int i = 0; i < 1100 && mean_unchecked(lo) <= x; ++i) {
    lo = theta_lower_ + 0.5 * (lo - theta_lower_);
  }
  double hi;
  if (std::isfinite(theta_upper_)) {
    hi = theta_upper_ - 1e-12 * std::max(1.0, theta_upper_);
  } else {
    hi = std::max(2.0 * lo, lo + 1.0);
    for (int i = 0; i < 1200 && mean_unchecked(hi) >= x; ++i) hi *= 2.0;
  }
  if (!(mean_unchecked(lo) > x && mean_unchecked(hi) < x)) {
    throw DomainError("failed to bracket m^{-1}(" + std::to_string(x) + ")");
  }
  while (hi - lo > root_tol_) {
    const double mid = 0.5 * (lo + hi);
    (mean_unchecked(mid) > x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

McUncertainty AnalyticProfile::mean_band(double theta) const {
  if (mode_ != DerivativeMode::monte_carlo) return {mean(theta), 0.0};
  check_domain(theta);
  const auto e = mc_->evaluate(theta);
  const double m = -e.L1 / e.L;
  // delta method on (L, L1)
  const double var = (e.se_L1 * e.se_L1) / (e.L * e.L) -
                     2.0 * e.L1 * e.cov_L_L1 / (e.L * e.L * e.L) +
                     (e.L1 * e.L1) * (e.se_L * e.se_L) / (e.L * e.L * e.L * e.L);
  return {m, std::sqrt(std::max(0.0, var))};
}

McUncertainty AnalyticProfile::rate_band(double theta) const {
  if (mode_ != DerivativeMode::monte_carlo) return {rate(theta), 0.0};
  check_domain(theta);
  const auto e = mc_->evaluate(theta);
  const double phi = std::log(e.L) - theta * e.L1 / e.L;
  const double gL = 1.0 / e.L + theta * e.L1 / (e.L * e.L);
  const double gL1 = -theta / e.L;
  const double var = gL * gL * e.se_L * e.se_L + 2.0 * gL * gL1 * e.cov_L_L1 +
                     gL1 * gL1 * e.se_L1 * e.se_L1;
  return {phi, std::sqrt(std::max(0.0, var))};
}

AnalyticProfile build_profile(const SplittingLawSpec& spec, const ProfileOptions& opts) {
  AnalyticProfile profile(spec);
  profile.theta_lower_ = spec.theta_lower();
  profile.root_tol_ = opts.root_tol;
  profile.theta_cap_ = opts.theta_cap;
  profile.mode_ = opts.mode.value_or(spec.has_closed_form_laplace() ? DerivativeMode::exact
                                                                    : DerivativeMode::monte_carlo);
  if (profile.mode_ != DerivativeMode::monte_carlo && !spec.has_closed_form_laplace()) {
    throw ProfileBuildError("law " + spec.to_string() + " has no closed form; use monte_carlo");
  }

  if (profile.mode_ == DerivativeMode::monte_carlo) {
    auto table = std::make_shared<McLaplaceTable>();
    table->log_atoms.resize(opts.mc_replicas);
    Engine eng(opts.mc_seed);
    for (auto& rep : table->log_atoms) {
      AtomSource src(spec, Engine(eng()));
      while (!src.exhausted() && src.remaining() > opts.mc_coverage_remainder &&
             src.emitted() < opts.mc_atom_budget) {
        const double a = src.next();
        if (a > 1e-300) rep.push_back(std::log(a));
      }
    }
    profile.mc_ = std::move(table);
    // Probe away from theta = 1, where normalization makes the estimator
    // nearly deterministic and would mask wide error bars.
    for (const double probe_theta : {0.5, 1.5}) {
      const auto probe = profile.mc_->evaluate(probe_theta);
      if (!std::isfinite(probe.L) || probe.se_L > opts.mc_max_rel_error * probe.L) {
        throw ProfileBuildError("Monte Carlo Laplace error bars too wide (se/L = " +
                                std::to_string(probe.se_L / probe.L) + " at theta=" +
                                std::to_string(probe_theta) + "); raise mc_replicas");
      }
    }
  }

  // theta^*: the root of the decreasing rate function on (max(theta_*,1), cap],
  // or +inf when phi stays positive up to the cap.
  const double lo0 = std::max(profile.theta_lower_, 1.0) + 1e-9;
  auto phi_at = [&profile](double t) {
    const auto e = profile.eval(t);
    return std::log(e.value) - t * e.d1 / e.value;
  };
  if (!(phi_at(lo0) > 0.0)) {
    throw ProfileBuildError("rate function not positive just above theta=1; law degenerate?");
  }
  if (phi_at(opts.theta_cap) > 0.0) {
    profile.theta_upper_ = kInf;
    profile.m_lower_ = profile.mean_unchecked(opts.theta_cap);
  } else {
    double lo = lo0, hi = opts.theta_cap;
    while (hi - lo > opts.root_tol) {
      const double mid = 0.5 * (lo + hi);
      (phi_at(mid) > 0.0 ? lo : hi) = mid;
    }
    profile.theta_upper_ = 0.5 * (lo + hi);
    profile.m_lower_ = profile.mean_unchecked(profile.theta_upper_);
  }

  profile.m_upper_ =
      spec.finite_support() ? profile.mean_unchecked(profile.theta_lower_ + 1e-7) : kInf;

  if (!(profile.m_lower_ > 0.0) || !(profile.m_upper_ > profile.m_lower_)) {
    throw ProfileBuildError("inconsistent m_* / m^* limits for " + spec.to_string());
  }
  return profile;
}

double gamma_tail_sum(double theta, int j) {
  if (!(j >= 1 && theta > 0.0 && theta < static_cast<double>(j))) {
    throw DomainError("gamma_tail_sum requires 0 < theta < j");
  }
  return std::exp(std::lgamma(static_cast<double>(j) - theta) -
                  std::lgamma(static_cast<double>(j))) /
         theta;
}

LlnConstants lln_limit_constants(const AnalyticProfile& profile, double a, double b, int j) {
  const double a_lo = 1.0 / profile.m_upper();  // 0 when m^* = inf
  const double a_hi = 1.0 / profile.m_lower();
  if (!(a > a_lo && a < a_hi)) {
    throw RegimeError("slope a=" + std::to_string(a) + " outside admissible (" +
                      std::to_string(a_lo) + ", " + std::to_string(a_hi) + ")");
  }
  const double theta = profile.mean_inverse(1.0 / a);
  if (!(static_cast<double>(j) > theta)) {
    throw DomainError("need j > theta; got j=" + std::to_string(j) +
                      ", theta=" + std::to_string(theta));
  }
  const double v = profile.variance(theta);
  const double phi = profile.rate(theta);
  const double damp = std::exp(-theta * b / a);
  const double norm = std::sqrt(2.0 * M_PI * v);
  const double tail = gamma_tail_sum(theta, j) * damp / norm;
  const double exact = std::exp(std::lgamma(static_cast<double>(j) - theta) -
                                std::lgamma(static_cast<double>(j) + 1.0)) *
                       damp / norm;
  return {tail, exact, theta, phi};
}

}  // namespace cascop
