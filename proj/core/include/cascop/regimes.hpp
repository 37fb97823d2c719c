#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascop/analytics.hpp"
#include "cascop/cascade.hpp"

namespace cascop {

// The (a, b) regime: generations k paired with ball counts
// n_k = round(e^{(k-b)/a}), and the tilt theta = m^{-1}(1/a) where defined.
struct RegimeSchedule {
  double a = 0.0;
  double b = 0.0;
  std::vector<int> k_list;
  std::vector<std::uint64_t> n_k;
  std::optional<double> theta;
  std::optional<double> phi;
  std::optional<double> v;
};

RegimeSchedule make_schedule(const AnalyticProfile& profile, double a, double b,
                             std::span<const int> k_list, bool require_tilt);

struct RegimeOptions {
  std::uint64_t seed = 0xCA5CADEULL;
  std::optional<double> p_min;  // overrides the automatic mass-tree threshold
  int w_depth = 12;             // W^(k) is read off at generation min(k, w_depth)
  int threads = 0;              // 0 = hardware concurrency
  int max_j = 8;
  std::uint64_t node_cap = default_node_cap;
  std::size_t atom_cap = AtomStream::default_atom_cap;
  // Pre-registered desk-scale tolerances.
  double lln_tol = 0.25;
  double clt_ratio_tol = 0.10;
  double clt_mean_tol = 0.15;
  double clt_var_tol = 0.25;
  double clt_ks_tol = 0.08;
  double growth_floor = 0.9;
  double shatter_slope_rel_tol = 0.30;
  int shatter_k_cap = 4096;
};

struct PerK {
  int k = 0;
  std::uint64_t n = 0;
  double median = 0.0;
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double target = 0.0;
  bool pass = false;
};

struct RegimeReport {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<PerK> per_k;
  std::vector<std::pair<std::string, std::vector<PerK>>> extra_series;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::vector<double>>> raw;
  bool pass = false;

  double scalar(const std::string& name) const;  // DomainError when missing
};

// Heavy-box law of large numbers: per replica and generation,
// sqrt(k) e^{-phi k} Nbar^(k)_{n_k, j-1} / W-hat, against the closed-form
// limit constant; the exact-j variant rides along as an extra series.
RegimeReport run_lln(const SplittingLawSpec& spec, double a, double b, int j,
                     std::span<const int> k_list, std::size_t replicas,
                     const RegimeOptions& opts = {});

// Central limit regime for the occupied count at theta < 1: the variance
// ratio sigma^2/mu against 2^theta - 1 and the standardized count against
// a standard normal.
RegimeReport run_clt(const SplittingLawSpec& spec, double a, double b, int k,
                     std::size_t replicas, const RegimeOptions& opts = {});

// Linear growth past the phase transition: median N^(k)_{n_k} / n_k for
// a > 1/m(1). The offset b only shifts the ball counts; the limit does not
// involve it.
RegimeReport run_growth(const SplittingLawSpec& spec, double a, double b,
                        std::span<const int> k_list, std::size_t replicas,
                        const RegimeOptions& opts = {});

// Shattering asymptotics: median zeta_{n,j} against (1/m_*) ln n, with
// the least-squares slope as the headline statistic.
RegimeReport run_shatter(const SplittingLawSpec& spec, int j,
                         std::span<const std::uint64_t> n_list, std::size_t replicas,
                         const RegimeOptions& opts = {});

// sup_x |F_emp(x) - Phi(x)| for a nonempty sample.
double ks_distance(std::span<const double> sample);

double normal_cdf(double x);

// Summary helpers shared by reports and tests.
double mean_of(std::span<const double> values);
double quantile_of(std::vector<double> values, double q);  // sorts a copy
double median_of(std::vector<double> values);

// Runs fn(replica) for every replica index, deterministically assignable to
// any number of worker threads.
void for_each_replica(std::size_t replicas, int threads,
                      const std::function<void(std::size_t)>& fn);

// Automatic mass-tree threshold for reading W^(theta) off generation k_w:
// deep enough to cover the tilted bulk k_w m(theta) +- 4 sd, and for
// theta > 1 also small enough that the rigorous truncation bound stays
// below five percent.
double default_w_pmin(const AnalyticProfile& profile, double theta, int k_w);

}  // namespace cascop
