#include "cascop/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cascop/errors.hpp"
#include "cascop/samplers.hpp"

namespace cascop {

namespace {

// Splits `n` balls among the children of one node, drawing atoms from
// `atoms` and ball placements from `ball_eng`. The two streams are separate
// so the realized masses do not depend on the ball count.
void allocate_onto(std::uint64_t n, AtomSource& atoms, Engine& ball_eng, std::size_t atom_cap,
                   AllocationResult& out) {
  out.children.clear();
  out.atoms_generated = 0;
  out.atom_mass_generated = 0.0;
  std::uint64_t remaining = n;
  double mass_left = 1.0;
  std::uint32_t index = 0;
  while (remaining > 0) {
    if (atoms.exhausted()) {
      // Finite law fully realized but rounding left balls unplaced (the
      // conditional probability of the last atom is 1 only up to 1e-12).
      if (out.children.empty()) {
        out.children.push_back({index, 0.0, remaining});
      } else {
        out.children.back().balls += remaining;
      }
      return;
    }
    if (out.atoms_generated >= atom_cap) {
      throw AtomCapExceeded("ball allocation needed more than " + std::to_string(atom_cap) +
                            " atoms");
    }
    const double atom = atoms.next();
    ++index;
    ++out.atoms_generated;
    out.atom_mass_generated += atom;
    std::uint64_t c;
    if (mass_left <= atom) {
      c = remaining;  // last positive mass
    } else {
      c = binomial(ball_eng, remaining, atom / mass_left);
    }
    if (c > 0) out.children.push_back({index, atom, c});
    remaining -= c;
    mass_left -= atom;
  }
}

struct Tally {
  explicit Tally(int max_j) : exact(max_j, 0), tail(max_j, 0) {}

  void add(std::uint64_t c) {
    const auto jmax = exact.size();
    ++total;
    if (c <= jmax) {
      ++exact[c - 1];
    } else {
      ++overflow_boxes;
      overflow_balls += c;
    }
    const std::uint64_t upto = std::min<std::uint64_t>(c - 1, jmax - 1);
    for (std::uint64_t j = 0; j <= upto; ++j) ++tail[j];
  }

  OccupancyStats finish(std::uint64_t n) const {
    OccupancyStats s;
    s.balls = n;
    s.total_occupied = total;
    s.exact = exact;
    s.tail = tail;
    s.overflow_boxes = overflow_boxes;
    s.overflow_balls = overflow_balls;
    return s;
  }

  std::vector<std::uint64_t> exact, tail;
  std::uint64_t total = 0, overflow_boxes = 0, overflow_balls = 0;
};

struct BallNode {
  double mass;
  std::uint64_t balls;
  PathKey key;
  std::size_t label_begin;
  std::size_t label_end;
  std::int64_t tree_id;
};

void fisher_yates(std::vector<std::uint32_t>& labels, std::size_t begin, std::size_t end,
                  Engine& eng) {
  for (std::size_t i = end - begin; i > 1; --i) {
    const std::uint64_t j = uniform_below(eng, i);
    std::swap(labels[begin + i - 1], labels[begin + j]);
  }
}

std::vector<GenerationStats> ball_core(const SplittingLawSpec& spec, std::uint64_t n, int k_max,
                                       PathKey root, const SimulateOptions& opts,
                                       std::vector<std::vector<std::vector<std::uint32_t>>>* blocks,
                                       OccupiedTree* tree) {
  if (n < 1) throw DomainError("simulate_occupancy requires n >= 1");
  if (k_max < 1) throw DomainError("simulate_occupancy requires k_max >= 1");
  if (opts.prune_below < 1) throw DomainError("prune_below must be >= 1");
  if (opts.max_j < 1) throw DomainError("max_j must be >= 1");

  const bool track_labels = blocks != nullptr;
  std::vector<std::uint32_t> labels;
  if (track_labels) {
    labels.resize(n);
    std::iota(labels.begin(), labels.end(), 1u);
    blocks->clear();
    blocks->push_back({labels});  // generation 0: one block {1..n}
  }
  if (tree != nullptr) {
    tree->nodes.clear();
    tree->nodes.push_back({1.0, n, 0, -1, 0, root, 0.0, 0, {}});
  }

  std::vector<BallNode> frontier{{1.0, n, root, 0, n, 0}};
  std::vector<BallNode> next;
  std::vector<GenerationStats> out;
  out.reserve(k_max);
  std::uint64_t nodes_used = 1;
  AllocationResult alloc;

  for (int k = 1; k <= k_max; ++k) {
    next.clear();
    Tally tally(opts.max_j);
    std::vector<std::vector<std::uint32_t>> gen_blocks;
    for (const auto& node : frontier) {
      AtomSource atoms(spec, node.key.atom_engine());
      Engine ball_eng = node.key.ball_engine();
      allocate_onto(node.balls, atoms, ball_eng, opts.atom_cap, alloc);
      if (track_labels) fisher_yates(labels, node.label_begin, node.label_end, ball_eng);
      std::size_t offset = node.label_begin;
      for (const auto& child : alloc.children) {
        tally.add(child.balls);
        if (++nodes_used > opts.node_cap) {
          throw NodeCapExceeded("occupied-node cap " + std::to_string(opts.node_cap) + " reached",
                                k);
        }
        const double child_mass = node.mass * child.atom;
        std::int64_t tid = -1;
        if (tree != nullptr) {
          tid = static_cast<std::int64_t>(tree->nodes.size());
          tree->nodes.push_back({child_mass, child.balls, k, node.tree_id, child.index,
                                 node.key.child(child.index), 0.0, 0, {}});
          tree->nodes[node.tree_id].children.push_back(tid);
        }
        if (track_labels) {
          std::sort(labels.begin() + offset, labels.begin() + offset + child.balls);
          gen_blocks.emplace_back(labels.begin() + offset, labels.begin() + offset + child.balls);
        }
        if (child.balls >= opts.prune_below && k < k_max) {
          next.push_back({child_mass, child.balls, node.key.child(child.index), offset,
                          offset + child.balls, tid});
        }
        offset += child.balls;
      }
      if (tree != nullptr) {
        tree->nodes[node.tree_id].realized_child_mass = alloc.atom_mass_generated;
        tree->nodes[node.tree_id].atoms_generated = alloc.atoms_generated;
      }
    }
    if (track_labels) {
      std::sort(gen_blocks.begin(), gen_blocks.end(),
                [](const auto& a, const auto& b) { return a.front() < b.front(); });
      blocks->push_back(std::move(gen_blocks));
    }
    out.push_back({k, tally.finish(n), opts.prune_below});
    frontier.swap(next);
  }
  return out;
}

}  // namespace

AllocationResult allocate_balls(const SplittingLawSpec& spec, std::uint64_t n, PathKey node,
                                std::size_t atom_cap) {
  AllocationResult out;
  if (n == 0) return out;  // no expansion at all
  AtomSource atoms(spec, node.atom_engine());
  Engine ball_eng = node.ball_engine();
  allocate_onto(n, atoms, ball_eng, atom_cap, out);
  return out;
}

std::vector<GenerationStats> simulate_occupancy(const SplittingLawSpec& spec, std::uint64_t n,
                                                int k_max, PathKey root,
                                                const SimulateOptions& opts) {
  return ball_core(spec, n, k_max, root, opts, nullptr, nullptr);
}

LabeledCascade simulate_labeled(const SplittingLawSpec& spec, std::uint64_t n, int k_max,
                                PathKey root, const SimulateOptions& opts) {
  SimulateOptions o = opts;
  o.prune_below = 1;  // labels require the full occupied tree
  LabeledCascade out;
  out.stats = ball_core(spec, n, k_max, root, o, &out.blocks, nullptr);
  return out;
}

OccupiedTree build_occupied_tree(const SplittingLawSpec& spec, std::uint64_t n, int k_max,
                                 PathKey root, const SimulateOptions& opts) {
  OccupiedTree tree;
  ball_core(spec, n, k_max, root, opts, nullptr, &tree);
  return tree;
}

int shattering_generation(const SplittingLawSpec& spec, std::uint64_t n, std::uint64_t j,
                          PathKey root, int k_cap, const SimulateOptions& opts) {
  if (n < 1 || j < 1) throw DomainError("shattering_generation requires n >= 1 and j >= 1");
  if (k_cap < 1) throw DomainError("k_cap must be >= 1");
  if (n <= j) return 1;

  struct HeavyNode {
    std::uint64_t balls;
    PathKey key;
  };
  std::vector<HeavyNode> frontier{{n, root}};
  std::vector<HeavyNode> next;
  std::uint64_t nodes_used = 1;
  AllocationResult alloc;
  for (int k = 1; k <= k_cap; ++k) {
    next.clear();
    for (const auto& node : frontier) {
      AtomSource atoms(spec, node.key.atom_engine());
      Engine ball_eng = node.key.ball_engine();
      allocate_onto(node.balls, atoms, ball_eng, opts.atom_cap, alloc);
      for (const auto& child : alloc.children) {
        if (child.balls > j) {
          if (++nodes_used > opts.node_cap) {
            throw NodeCapExceeded("node cap reached in shattering descent", k);
          }
          next.push_back({child.balls, node.key.child(child.index)});
        }
      }
    }
    if (next.empty()) return k;
    frontier.swap(next);
  }
  throw DepthCapExceeded("no shattering below generation cap " + std::to_string(k_cap));
}

// ---------------------------------------------------------------------------
// Mass side.
// ---------------------------------------------------------------------------

namespace {

struct MassWalker {
  const SplittingLawSpec& spec;
  int k_max;
  double p_min;
  MassTreeSink& sink;
  std::uint64_t node_cap;
  std::size_t atom_cap;
  std::uint64_t nodes_used = 0;

  void expand(PathKey key, double mass, int gen) {
    if (gen == k_max) return;
    AtomSource atoms(spec, key.atom_engine());
    std::uint32_t index = 0;
    // Children are generated until the unexpanded remainder cannot hold a
    // storable node any more; everything else is accounted as dropped.
    while (!atoms.exhausted() && mass * atoms.remaining() >= p_min) {
      if (index >= atom_cap) {
        throw AtomCapExceeded("mass expansion needed more than " + std::to_string(atom_cap) +
                              " atoms at one node");
      }
      const double atom = atoms.next();
      ++index;
      const double child_mass = mass * atom;
      if (child_mass >= p_min) {
        if (++nodes_used > node_cap) {
          throw NodeCapExceeded("mass-tree node cap " + std::to_string(node_cap) + " reached",
                                gen + 1);
        }
        sink.node(gen + 1, child_mass, -std::log(child_mass));
        expand(key.child(index), child_mass, gen + 1);
      } else {
        sink.dropped(gen + 1, child_mass);
      }
    }
    sink.dropped(gen + 1, mass * atoms.remaining());
  }
};

}  // namespace

void walk_mass_tree(const SplittingLawSpec& spec, int k_max, double p_min, PathKey root,
                    MassTreeSink& sink, std::uint64_t node_cap, std::size_t atom_cap) {
  if (!(p_min > 0.0 && p_min < 1.0)) throw DomainError("p_min must lie in (0, 1)");
  if (k_max < 1) throw DomainError("k_max must be >= 1");
  sink.node(0, 1.0, 0.0);
  MassWalker walker{spec, k_max, p_min, sink, node_cap, atom_cap};
  walker.nodes_used = 1;
  walker.expand(root, 1.0, 0);
}

double TruncatedMassTree::stored_mass(int k) const {
  double s = 0.0;
  for (const double m : mass[k]) s += m;
  return s;
}

namespace {

struct StoringSink : MassTreeSink {
  TruncatedMassTree& tree;
  std::vector<double> dropped_at;

  explicit StoringSink(TruncatedMassTree& t) : tree(t), dropped_at(t.k_max + 1, 0.0) {}

  void node(int gen, double m, double nlm) override {
    tree.mass[gen].push_back(m);
    tree.neg_log_mass[gen].push_back(nlm);
    ++tree.node_count;
  }
  void dropped(int gen, double m) override { dropped_at[gen] += m; }
};

}  // namespace

TruncatedMassTree expand_mass_tree(const SplittingLawSpec& spec, int k_max, double p_min,
                                   PathKey root, std::uint64_t node_cap, std::size_t atom_cap) {
  TruncatedMassTree tree;
  tree.p_min = p_min;
  tree.k_max = k_max;
  tree.mass.resize(k_max + 1);
  tree.neg_log_mass.resize(k_max + 1);
  StoringSink sink(tree);
  walk_mass_tree(spec, k_max, p_min, root, sink, node_cap, atom_cap);
  tree.remainder.assign(k_max + 1, 0.0);
  double running = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    running += sink.dropped_at[k];
    tree.remainder[k] = running;
  }
  return tree;
}

SeriesWithError martingale_w(const TruncatedMassTree& tree, double theta,
                             const AnalyticProfile& profile) {
  if (!(theta > profile.theta_lower() && theta < profile.theta_upper())) {
    throw DomainError("martingale_w requires theta in (theta_*, theta^*)");
  }
  const double lnL = std::log(profile.laplace(theta));
  SeriesWithError out;
  out.rigorous = theta >= 1.0;
  out.value.resize(tree.k_max + 1);
  out.error_bound.resize(tree.k_max + 1);
  for (int k = 0; k <= tree.k_max; ++k) {
    const double shift = -static_cast<double>(k) * lnL;
    double w = 0.0;
    for (const double nlm : tree.neg_log_mass[k]) w += std::exp(shift - theta * nlm);
    out.value[k] = w;
    const double r = tree.remainder[k];
    if (theta > 1.0) {
      out.error_bound[k] = std::exp(shift) * std::pow(tree.p_min, theta - 1.0) * r;
    } else {
      const double count = static_cast<double>(tree.mass[k].size());
      out.error_bound[k] =
          std::exp(shift) * std::pow(r, theta) * std::pow(std::max(count, 1.0), 1.0 - theta);
    }
  }
  return out;
}

std::vector<GenerationMoments> occupancy_moments(const TruncatedMassTree& tree, double n,
                                                 std::span<const int> j_list, double tolerance) {
  if (!(n >= 1.0)) throw DomainError("occupancy_moments requires n >= 1");
  std::vector<GenerationMoments> out(tree.k_max + 1);
  for (int k = 0; k <= tree.k_max; ++k) {
    const double r = tree.remainder[k];
    if (n * r > tolerance) {
      throw TruncationTooCoarse("n*r = " + std::to_string(n * r) + " at generation " +
                                std::to_string(k) + " exceeds tolerance; lower p_min");
    }
    auto& gm = out[k];
    gm.error_bound = n * r;
    const std::span<const double> masses(tree.mass[k]);
    gm.mu_bar.reserve(j_list.size());
    for (const int j : j_list) gm.mu_bar.push_back(mu_bar(masses, j, n, r).value);
    gm.mu = mu(masses, n, r).value;
    gm.sigma2 = sigma2(masses, n, r).value;
  }
  return out;
}

TiltedWindowSeries tilted_window_mass(const TruncatedMassTree& tree, double theta,
                                      const AnalyticProfile& profile, double x, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("window half-width h must lie in (0, 1]");
  const double m = profile.mean(theta);
  const double v = profile.variance(theta);
  const double lnL = std::log(profile.laplace(theta));
  const double deepest = x + tree.k_max * m + h;
  if (!(tree.p_min < std::exp(-deepest))) {
    throw WindowTruncated("window reaches -ln p = " + std::to_string(deepest) +
                          " but p_min stores only up to " + std::to_string(-std::log(tree.p_min)));
  }
  const auto w = martingale_w(tree, theta, profile);
  TiltedWindowSeries out;
  out.value.resize(tree.k_max + 1, 0.0);
  out.target.resize(tree.k_max + 1, 0.0);
  for (int k = 1; k <= tree.k_max; ++k) {
    const double center = x + k * m;
    const double lo = center - h;
    const double hi = center + h;
    const double shift = -static_cast<double>(k) * lnL;
    double mass = 0.0;
    for (const double y : tree.neg_log_mass[k]) {
      if (y >= lo && y < hi) mass += std::exp(shift - theta * y);
    }
    const double sk = std::sqrt(static_cast<double>(k));
    out.value[k] = sk * mass;
    const double u = x / sk;
    const double gauss = std::exp(-u * u / (2.0 * v)) / std::sqrt(2.0 * M_PI * v);
    out.target[k] = 2.0 * h * w.value[k] * gauss;
  }
  return out;
}

namespace {

double integrate_against_tilt(const FunctionalDescriptor& d, double theta) {
  // Composite Simpson on [-L, U]; the decay certificate bounds both tails.
  const double left = std::max(d.y0, 80.0 / (d.beta - theta));
  double right = std::max(d.y0 + 10.0, 80.0 / theta);
  for (int i = 0; i < 4; ++i) {
    right = (80.0 + d.alpha * std::log(std::max(right, 2.0))) / theta;
  }
  const int panels = 1 << 16;
  const double step = (right + left) / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double y = -left + i * step;
    const double fy = d.f(y) * std::exp(-theta * y);
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * fy;
  }
  return sum * step / 3.0;
}

}  // namespace

FunctionalSeries large_deviation_functional(const TruncatedMassTree& tree, double theta,
                                            const AnalyticProfile& profile,
                                            const FunctionalDescriptor& descriptor,
                                            std::span<const double> c_seq) {
  if (!(descriptor.alpha > 0.0)) throw DomainError("decay certificate needs alpha > 0");
  if (!(descriptor.beta > theta)) throw DomainError("decay certificate needs beta > theta");
  if (c_seq.empty()) throw DomainError("c sequence must not be empty");
  if (c_seq.size() != 1 && c_seq.size() != static_cast<std::size_t>(tree.k_max)) {
    throw DomainError("c sequence must have one entry or one per generation");
  }
  const double m = profile.mean(theta);
  const double v = profile.variance(theta);
  const double phi = profile.rate(theta);
  const auto w = martingale_w(tree, theta, profile);
  const double integral =
      descriptor.integral.value_or(integrate_against_tilt(descriptor, theta));

  auto check_envelope = [&descriptor](double y, double fy) {
    if (y > descriptor.y0 && fy > descriptor.envelope * std::pow(y, descriptor.alpha)) {
      throw DecayViolation("f breaches the polynomial growth envelope at y=" + std::to_string(y));
    }
    if (y < -descriptor.y0 && fy > descriptor.envelope * std::exp(descriptor.beta * y)) {
      throw DecayViolation("f breaches the exponential decay envelope at y=" + std::to_string(y));
    }
  };

  FunctionalSeries out;
  out.integral_used = integral;
  out.value.resize(tree.k_max + 1, 0.0);
  out.target.resize(tree.k_max + 1, 0.0);
  for (int k = 1; k <= tree.k_max; ++k) {
    const double ck = c_seq.size() == 1 ? c_seq[0] : c_seq[k - 1];
    const double shift = k * m + ck;
    double s = 0.0;
    for (const double nlm : tree.neg_log_mass[k]) {
      const double y = shift - nlm;
      const double fy = descriptor.f(y);
      if (fy < 0.0) throw DomainError("functional must be nonnegative");
      check_envelope(y, fy);
      s += fy;
    }
    const double sk = std::sqrt(static_cast<double>(k));
    out.value[k] = sk * std::exp(-phi * k) * s;
    out.target[k] =
        std::exp(theta * ck) / std::sqrt(2.0 * M_PI * v) * integral * w.value[k];
  }
  return out;
}

FunctionalDescriptor poisson_tail_functional(int j) {
  if (j < 1) throw DomainError("poisson_tail_functional requires j >= 1");
  FunctionalDescriptor d;
  d.f = [j](double y) { return poisson_tail(j - 1, std::exp(y)); };
  d.alpha = 1.0;
  d.beta = static_cast<double>(j);
  d.y0 = 8.0;
  d.envelope = 2.0;
  return d;
}

}  // namespace cascop
