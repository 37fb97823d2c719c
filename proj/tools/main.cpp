#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cascop/cascade.hpp"
#include "cascop/errors.hpp"
#include "cascop/partitions.hpp"
#include "cascop/regimes.hpp"
#include "cascop/report.hpp"
#include "cascop/version.hpp"

// run_simulate parallelizes replicas with cascop::for_each_replica; every
// replica derives from (seed, replica), so output bytes do not depend on
// the thread count.

namespace {

constexpr std::uint64_t default_seed = 0xCA5CADEULL;

std::string join_argv(int argc, char** argv) {
  std::ostringstream out;
  for (int i = 0; i < argc; ++i) {
    if (i) out << ' ';
    out << argv[i];
  }
  return out.str();
}

// "1,3,9" or "3:24:3" (inclusive end)
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    int start = 0, end = 0, step = 1;
    if (std::sscanf(text.c_str(), "%d:%d:%d", &start, &end, &step) != 3 || step <= 0) {
      throw cascop::DomainError("expected start:end:step with positive step, got '" + text + "'");
    }
    for (int k = start; k <= end; k += step) out.push_back(k);
  } else {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) out.push_back(std::stoi(tok));
    }
  }
  if (out.empty()) throw cascop::DomainError("empty integer list '" + text + "'");
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  if (out.empty()) throw cascop::DomainError("empty list '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cascop::DomainError("cannot open output file " + path);
  out << content;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CommonArgs {
  std::string law = "pd1";
  std::uint64_t seed = default_seed;
  std::size_t replicas = 100;
  int threads = 0;
  std::optional<double> pmin;
  std::string out;
  std::string json;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_replicas = true) {
  cmd->add_option("--law", args.law, "splitting law: pd1 | gem:<c> | dirichlet:<m>:<a> | beta:<a>:<b>");
  cmd->add_option("--seed", args.seed, "root seed (fixed default keeps bare runs reproducible)");
  if (with_replicas) cmd->add_option("--replicas", args.replicas, "independent replicas");
  cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
  cmd->add_option_function<double>(
         "--pmin", [&args](const double& v) { args.pmin = v; },
         "mass-tree truncation threshold")
      ->expected(1)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.out, "CSV output path (default: stdout)");
  cmd->add_option("--json", args.json, "JSON report path");
}

void emit_report(const cascop::RegimeReport& report, const CommonArgs& args,
                 const std::string& invocation) {
  write_output(args.out, cascop::report_to_csv(report, invocation));
  if (!args.json.empty()) write_output(args.json, cascop::report_to_json(report));
}

int run_analyze(const CommonArgs& args, const std::string& grid, const std::string& invocation) {
  const auto spec = cascop::SplittingLawSpec::parse(args.law);
  const auto profile = cascop::build_profile(spec);
  double lo = 0.25, hi = 3.0, step = 0.25;
  if (!grid.empty() &&
      (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)) {
    throw cascop::DomainError("expected --theta-grid lo:hi:step, got '" + grid + "'");
  }
  std::ostringstream csv;
  csv << "theta,L,Lp,Lpp,m,v,phi\n";
  const int points = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < points; ++i) {
    const double theta = lo + i * step;
    const double L = profile.laplace(theta);
    const double L1 = profile.laplace_d1(theta);
    const double L2 = profile.laplace_d2(theta);
    const double m = -L1 / L;
    const double v = L2 / L - (L1 / L) * (L1 / L);
    const double phi = std::log(L) + theta * m;
    csv << fmt(theta) << ',' << fmt(L) << ',' << fmt(L1) << ',' << fmt(L2) << ',' << fmt(m) << ','
        << fmt(v) << ',' << fmt(phi) << '\n';
  }
  csv << "# summary theta_star=" << fmt(profile.theta_lower())
      << " theta_upper=" << fmt(profile.theta_upper()) << " m_lower=" << fmt(profile.m_lower())
      << " m_upper=" << fmt(profile.m_upper()) << " mode=" << cascop::to_string(profile.mode())
      << "\n";
  csv << "# cascop " << cascop::version_string << " | " << invocation << "\n";
  write_output(args.out, csv.str());
  return 0;
}

int run_simulate(const CommonArgs& args, std::uint64_t balls, int depth, int max_j,
                 const std::string& theta_csv, bool moments, const std::string& invocation) {
  const auto spec = cascop::SplittingLawSpec::parse(args.law);
  const auto thetas = parse_double_list(theta_csv);
  const bool mass_side = moments || !thetas.empty();

  std::optional<cascop::AnalyticProfile> profile;
  double pmin = args.pmin.value_or(0.0);
  if (mass_side) {
    profile = cascop::build_profile(spec);
    if (!args.pmin) {
      pmin = 0.004 / static_cast<double>(balls);
      for (const double t : thetas) {
        pmin = std::min(pmin, cascop::default_w_pmin(*profile, t, depth));
      }
    }
  }

  std::ostringstream csv;
  csv << "replica,k,N";
  for (int j = 1; j <= max_j; ++j) csv << ",N" << j;
  for (int j = 0; j < max_j; ++j) csv << ",Nbar" << j;
  for (const double t : thetas) csv << ",W_theta_" << fmt(t);
  if (mass_side) csv << ",mu_n,sigma2_n,err_mu";
  for (const double t : thetas) csv << ",err_W_theta_" << fmt(t);
  csv << "\n";

  cascop::SimulateOptions sim;
  sim.max_j = max_j;
  std::vector<std::string> rows(args.replicas);
  cascop::for_each_replica(args.replicas, args.threads, [&](std::size_t r) {
    const auto key = cascop::root_key(args.seed, r);
    const auto stats = cascop::simulate_occupancy(spec, balls, depth, key, sim);

    std::vector<cascop::SeriesWithError> w_series;
    std::vector<cascop::GenerationMoments> gm;
    if (mass_side) {
      const auto tree = cascop::expand_mass_tree(spec, depth, pmin, key);
      for (const double t : thetas) w_series.push_back(cascop::martingale_w(tree, t, *profile));
      const int j_list[] = {1};
      gm = cascop::occupancy_moments(tree, static_cast<double>(balls), j_list);
    }

    std::ostringstream block;
    for (const auto& gen : stats) {
      const auto& occ = gen.occupancy;
      block << r << ',' << gen.k << ',' << occ.total_occupied;
      for (int j = 1; j <= max_j; ++j) block << ',' << occ.exact[j - 1];
      for (int j = 0; j < max_j; ++j) block << ',' << occ.tail[j];
      for (const auto& w : w_series) block << ',' << fmt(w.value[gen.k]);
      if (mass_side) {
        block << ',' << fmt(gm[gen.k].mu) << ',' << fmt(gm[gen.k].sigma2) << ','
              << fmt(gm[gen.k].error_bound);
      }
      for (const auto& w : w_series) block << ',' << fmt(w.error_bound[gen.k]);
      block << "\n";
    }
    rows[r] = block.str();
  });
  for (const auto& row : rows) csv << row;
  csv << "# cascop " << cascop::version_string << " | " << invocation << "\n";
  write_output(args.out, csv.str());
  return 0;
}

int run_partitions(const CommonArgs& args, std::uint64_t balls, int depth, bool check_coherence,
                   const std::string& invocation) {
  const auto spec = cascop::SplittingLawSpec::parse(args.law);
  const auto key = cascop::root_key(args.seed, 0);
  const auto seq = cascop::partition_from_cascade(spec, balls, depth, key);

  std::ostringstream out;
  for (std::size_t k = 0; k < seq.levels.size(); ++k) {
    out << k << '\t';
    for (const auto& block : seq.levels[k].blocks) {
      out << '{';
      for (std::size_t i = 0; i < block.size(); ++i) {
        if (i) out << ',';
        out << block[i];
      }
      out << '}';
    }
    out << '\n';
  }
  out << "# cascop " << cascop::version_string << " | " << invocation << "\n";
  write_output(args.out, out.str());

  if (!check_coherence) return 0;

  // Structural property suite over this realization.
  bool ok = true;
  for (std::size_t k = 1; k < seq.levels.size(); ++k) {
    ok = ok && cascop::is_refinement(seq.levels[k], seq.levels[k - 1]);
  }
  // restriction coherence along a random chain B'' subset of B' subset of {1..n}
  cascop::Engine eng(cascop::splitmix64(args.seed ^ 0xC0FFEEULL));
  std::vector<std::uint32_t> outer, inner;
  for (std::uint32_t e = 1; e <= balls; ++e) {
    if (eng.uniform() < 0.7) outer.push_back(e);
  }
  if (outer.empty()) outer.push_back(1);
  for (const auto e : outer) {
    if (eng.uniform() < 0.6) inner.push_back(e);
  }
  if (inner.empty()) inner.push_back(outer.front());
  const auto restricted_once = cascop::restrict_to(seq, outer);
  std::vector<std::uint32_t> relabeled;  // positions of inner inside outer
  for (std::size_t i = 0; i < outer.size(); ++i) {
    for (const auto e : inner) {
      if (outer[i] == e) relabeled.push_back(static_cast<std::uint32_t>(i + 1));
    }
  }
  const auto twice = cascop::restrict_to(restricted_once, relabeled);
  const auto direct = cascop::restrict_to(seq, inner);
  for (std::size_t k = 0; k < seq.levels.size(); ++k) {
    ok = ok && twice.levels[k] == direct.levels[k];
  }
  // block counts match the counts-only simulation under the same seed
  const auto stats = cascop::simulate_occupancy(spec, balls, depth, key);
  for (std::size_t k = 1; k < seq.levels.size(); ++k) {
    ok = ok && seq.levels[k].blocks.size() == stats[k - 1].occupancy.total_occupied;
  }
  std::cerr << (ok ? "coherence: ok" : "coherence: FAILED") << "\n";
  return ok ? 0 : 4;
}

int dispatch(int argc, char** argv) {
  const std::string invocation = join_argv(argc, argv);
  CLI::App app{"occupancy schemes driven by multiplicative cascades"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("cascop ") + cascop::version_string);

  // analyze
  CommonArgs an;
  std::string grid;
  auto* analyze = app.add_subcommand("analyze", "tabulate L, m, v, phi and critical parameters");
  add_common(analyze, an, /*with_replicas=*/false);
  analyze->add_option("--theta-grid", grid, "grid lo:hi:step (default 0.25:3:0.25)");

  // simulate
  CommonArgs si;
  std::uint64_t si_balls = 100;
  int si_depth = 8;
  int si_maxj = 8;
  std::string si_thetas;
  bool si_moments = false;
  auto* simulate = app.add_subcommand("simulate", "per-generation occupancy statistics");
  add_common(simulate, si);
  simulate->add_option("--balls", si_balls, "number of balls n")->check(CLI::PositiveNumber);
  simulate->add_option("--depth", si_depth, "deepest generation k")->check(CLI::PositiveNumber);
  simulate->add_option("--jmax", si_maxj, "exact-count buckets J")->check(CLI::PositiveNumber);
  simulate->add_option("--theta", si_thetas, "comma list of theta for W^(k)(theta) columns");
  simulate->add_flag("--moments", si_moments, "add mu_n / sigma2_n columns from a mass tree");

  // regime family
  auto* regime = app.add_subcommand("regime", "asymptotic-regime experiments");
  regime->require_subcommand(1);

  CommonArgs lln;
  double lln_a = 2.0, lln_b = 0.0;
  int lln_j = 3, lln_wdepth = 12;
  std::string lln_k = "12,24";
  auto* rl = regime->add_subcommand("lln", "law of large numbers for heavy boxes");
  add_common(rl, lln);
  rl->add_option("--a", lln_a, "regime slope");
  rl->add_option("--b", lln_b, "regime offset");
  rl->add_option("--j", lln_j, "ball-count threshold (needs j > theta)");
  rl->add_option("--k", lln_k, "generations, comma list or start:end:step");
  rl->add_option("--wdepth", lln_wdepth, "generation at which W is read off");

  CommonArgs clt;
  double clt_a = 0.8, clt_b = 0.0;
  int clt_k = 10;
  auto* rc = regime->add_subcommand("clt", "central limit theorem for the occupied count");
  add_common(rc, clt);
  rc->add_option("--a", clt_a, "regime slope (theta = m^-1(1/a) must be < 1)");
  rc->add_option("--b", clt_b, "regime offset");
  rc->add_option("--k", clt_k, "generation");

  CommonArgs gro;
  double gro_a = 2.0, gro_b = 0.0;
  std::string gro_k = "12,16,20";
  auto* rg = regime->add_subcommand("growth", "linear growth past the phase transition");
  add_common(rg, gro);
  rg->add_option("--a", gro_a, "regime slope (needs a > 1/m(1))");
  rg->add_option("--b", gro_b, "regime offset");
  rg->add_option("--k", gro_k, "generations");

  CommonArgs sha;
  int sha_j = 2, sha_kcap = 4096;
  std::string sha_n = "100,1000,10000";
  auto* rs = regime->add_subcommand("shatter", "shattering generation asymptotics");
  add_common(rs, sha);
  rs->add_option("--j", sha_j, "box-size threshold (needs theta^* <= j+1)");
  rs->add_option("--n", sha_n, "ball counts, comma list");
  rs->add_option("--kcap", sha_kcap, "depth cap");

  // top-level alias for regime shatter
  CommonArgs sha2;
  int sha2_j = 2, sha2_kcap = 4096;
  std::string sha2_n = "100,1000,10000";
  auto* alias = app.add_subcommand("shatter", "alias for regime shatter");
  add_common(alias, sha2);
  alias->add_option("--j", sha2_j, "box-size threshold");
  alias->add_option("--n", sha2_n, "ball counts, comma list");
  alias->add_option("--kcap", sha2_kcap, "depth cap");

  // partitions
  CommonArgs pa;
  std::uint64_t pa_balls = 12;
  int pa_depth = 4;
  bool pa_check = false;
  auto* parts = app.add_subcommand("partitions", "nested partitions of the ball labels");
  add_common(parts, pa, /*with_replicas=*/false);
  parts->add_option("--balls", pa_balls, "ground-set size n")->check(CLI::PositiveNumber);
  parts->add_option("--depth", pa_depth, "generations")->check(CLI::PositiveNumber);
  parts->add_flag("--check-coherence", pa_check, "run the structural property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "{\"error\":\"UsageError\",\"message\":\"" << e.what() << "\"}\n";
    return 1;
  }

  auto options_from = [](const CommonArgs& c, int wdepth = 12, int kcap = 4096) {
    cascop::RegimeOptions o;
    o.seed = c.seed;
    o.threads = c.threads;
    o.p_min = c.pmin;
    o.w_depth = wdepth;
    o.shatter_k_cap = kcap;
    return o;
  };

  if (analyze->parsed()) return run_analyze(an, grid, invocation);
  if (simulate->parsed()) {
    return run_simulate(si, si_balls, si_depth, si_maxj, si_thetas, si_moments, invocation);
  }
  if (rl->parsed()) {
    const auto spec = cascop::SplittingLawSpec::parse(lln.law);
    const auto ks = parse_int_list(lln_k);
    const auto report =
        cascop::run_lln(spec, lln_a, lln_b, lln_j, ks, lln.replicas, options_from(lln, lln_wdepth));
    emit_report(report, lln, invocation);
    return 0;
  }
  if (rc->parsed()) {
    const auto spec = cascop::SplittingLawSpec::parse(clt.law);
    const auto report = cascop::run_clt(spec, clt_a, clt_b, clt_k, clt.replicas, options_from(clt));
    emit_report(report, clt, invocation);
    return 0;
  }
  if (rg->parsed()) {
    const auto spec = cascop::SplittingLawSpec::parse(gro.law);
    const auto ks = parse_int_list(gro_k);
    const auto report = cascop::run_growth(spec, gro_a, gro_b, ks, gro.replicas, options_from(gro));
    emit_report(report, gro, invocation);
    return 0;
  }
  if (rs->parsed() || alias->parsed()) {
    const CommonArgs& c = rs->parsed() ? sha : sha2;
    const int j = rs->parsed() ? sha_j : sha2_j;
    const int kcap = rs->parsed() ? sha_kcap : sha2_kcap;
    const std::string& nlist = rs->parsed() ? sha_n : sha2_n;
    const auto spec = cascop::SplittingLawSpec::parse(c.law);
    const auto ns = parse_u64_list(nlist);
    const auto report = cascop::run_shatter(spec, j, ns, c.replicas, options_from(c, 12, kcap));
    emit_report(report, c, invocation);
    return 0;
  }
  if (parts->parsed()) return run_partitions(pa, pa_balls, pa_depth, pa_check, invocation);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const cascop::RegimeError& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 2;
  } catch (const cascop::AtomCapExceeded& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::NodeCapExceeded& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::DepthCapExceeded& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::TruncationTooCoarse& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::WindowTruncated& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::ProfileBuildError& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const cascop::Error& e) {
    std::cerr << "{\"error\":\"" << e.category() << "\",\"message\":\"" << e.what() << "\"}\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"UsageError\",\"message\":\"" << e.what() << "\"}\n";
    return 1;
  }
}
