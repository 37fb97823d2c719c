#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cascop/analytics.hpp"
#include "cascop/occupancy.hpp"
#include "cascop/random.hpp"
#include "cascop/splitting_law.hpp"

namespace cascop {

// Genealogical address of a tree node; empty = root.
struct NodePath {
  std::vector<std::uint32_t> indices;  // child indices, 1-based

  std::size_t generation() const { return indices.size(); }
  PathKey key(PathKey root) const {
    PathKey k = root;
    for (const auto i : indices) k = k.child(i);
    return k;
  }
};

inline constexpr std::uint64_t default_node_cap = 50'000'000;

// ---------------------------------------------------------------------------
// Ball side: lazily expanded occupied subtree.
// ---------------------------------------------------------------------------

struct ChildAllocation {
  std::uint32_t index;   // 1-based child index
  double atom;           // relative mass rho_index
  std::uint64_t balls;   // >= 1
};

struct AllocationResult {
  std::vector<ChildAllocation> children;  // occupied children only
  std::size_t atoms_generated = 0;        // including unoccupied ones
  double atom_mass_generated = 0.0;       // total relative mass realized
};

// Splits n balls among the children of one node. Atoms are generated
// lazily; each atom receives Binomial(remaining balls, atom / remaining
// relative mass), which is multinomial(n, rho) conditionally on rho.
// Generation stops as soon as every ball is placed.
AllocationResult allocate_balls(const SplittingLawSpec& spec, std::uint64_t n, PathKey node,
                                std::size_t atom_cap = AtomStream::default_atom_cap);

struct SimulateOptions {
  int max_j = 8;                   // exact-count buckets tracked per generation
  std::uint64_t prune_below = 1;   // descend only nodes holding >= this many balls
  std::uint64_t node_cap = default_node_cap;
  std::size_t atom_cap = AtomStream::default_atom_cap;
};

struct GenerationStats {
  int k = 0;
  OccupancyStats occupancy;
  std::uint64_t prune_threshold = 1;  // stats valid for counts >= this
};

// Per-generation occupancy statistics of the cascade scheme for k = 1..k_max.
// With prune_below = t > 1, boxes that fall below t balls are counted once
// and never expanded, so only the buckets j >= t (tails j >= t-1) remain
// meaningful at deeper generations.
std::vector<GenerationStats> simulate_occupancy(const SplittingLawSpec& spec, std::uint64_t n,
                                                int k_max, PathKey root,
                                                const SimulateOptions& opts = {});

// Same allocation draws as simulate_occupancy (the per-node atom and ball
// streams are keyed by path, not by traversal), additionally tracking which
// ball labels share a box. blocks[k] lists the boxes of generation k as
// sorted label sets; blocks[0] is the single root block {1..n}.
struct LabeledCascade {
  std::vector<GenerationStats> stats;
  std::vector<std::vector<std::vector<std::uint32_t>>> blocks;
};
LabeledCascade simulate_labeled(const SplittingLawSpec& spec, std::uint64_t n, int k_max,
                                PathKey root, const SimulateOptions& opts = {});

// Explicit occupied tree for structural checks and small-scale inspection.
// Each node keeps its path key: together with atoms_generated this is the
// resumable atom-stream state (reconstruct the stream from the key, skip
// the consumed atoms, extend at will).
struct OccupiedTree {
  struct Node {
    double mass;                    // absolute mass p_i(k)
    std::uint64_t balls;
    int depth;
    std::int64_t parent;            // -1 for root
    std::uint32_t child_index;      // 1-based among siblings, 0 for root
    PathKey key;
    double realized_child_mass;     // relative mass generated at this node
    std::size_t atoms_generated;
    std::vector<std::int64_t> children;
  };
  std::vector<Node> nodes;  // nodes[0] = root
};
OccupiedTree build_occupied_tree(const SplittingLawSpec& spec, std::uint64_t n, int k_max,
                                 PathKey root, const SimulateOptions& opts = {});

// First generation at which no box holds more than j balls. Only nodes with
// more than j balls are ever descended. Throws DepthCapExceeded at k_cap.
int shattering_generation(const SplittingLawSpec& spec, std::uint64_t n, std::uint64_t j,
                          PathKey root, int k_cap,
                          const SimulateOptions& opts = {});

// ---------------------------------------------------------------------------
// Mass side: threshold-truncated expansion of the full cascade.
// ---------------------------------------------------------------------------

// Depth-first walk over every node of mass >= p_min down to k_max. The sink
// sees stored nodes and dropped mass (atoms below threshold plus the
// unexpanded remainder); dropped mass at generation g stays missing at every
// deeper generation.
class MassTreeSink {
 public:
  virtual ~MassTreeSink() = default;
  virtual void node(int generation, double mass, double neg_log_mass) = 0;
  virtual void dropped(int generation, double mass) = 0;
};
void walk_mass_tree(const SplittingLawSpec& spec, int k_max, double p_min, PathKey root,
                    MassTreeSink& sink, std::uint64_t node_cap = default_node_cap,
                    std::size_t atom_cap = AtomStream::default_atom_cap);

struct TruncatedMassTree {
  double p_min = 0.0;
  int k_max = 0;
  std::vector<std::vector<double>> mass;          // per generation 0..k_max
  std::vector<std::vector<double>> neg_log_mass;  // -ln p, aligned with mass
  std::vector<double> remainder;                  // r_k = 1 - stored mass at k
  std::uint64_t node_count = 0;

  double stored_mass(int k) const;
};
TruncatedMassTree expand_mass_tree(const SplittingLawSpec& spec, int k_max, double p_min,
                                   PathKey root, std::uint64_t node_cap = default_node_cap,
                                   std::size_t atom_cap = AtomStream::default_atom_cap);

// ---------------------------------------------------------------------------
// Functionals of the truncated tree.
// ---------------------------------------------------------------------------

struct SeriesWithError {
  std::vector<double> value;        // index = generation
  std::vector<double> error_bound;  // rigorous for theta > 1, heuristic otherwise
  bool rigorous = true;
};

// W^(k)(theta) = L(theta)^{-k} sum p_i(k)^theta for k = 0..k_max. For
// theta > 1 the bound L^{-k} p_min^{theta-1} r_k is rigorous (unstored boxes
// and their offspring are below p_min); for theta <= 1 the reported
// r_k^theta count^{1-theta} bound is flagged non-rigorous.
SeriesWithError martingale_w(const TruncatedMassTree& tree, double theta,
                             const AnalyticProfile& profile);

struct GenerationMoments {
  std::vector<double> mu_bar;  // aligned with the requested j list
  double mu = 0.0;
  double sigma2 = 0.0;
  double error_bound = 0.0;  // n * r_k
};

// Hwang-Janson moments over the stored masses, one entry per generation.
// Throws TruncationTooCoarse when n * r_k exceeds `tolerance`.
std::vector<GenerationMoments> occupancy_moments(
    const TruncatedMassTree& tree, double n, std::span<const int> j_list,
    double tolerance = std::numeric_limits<double>::infinity());

struct TiltedWindowSeries {
  std::vector<double> value;   // sqrt(k) Z^(k)_theta([x + k m - h, x + k m + h)), k >= 1
  std::vector<double> target;  // 2h W^(k)(theta) g_theta(x / sqrt k)
};

// Local mass of the tilted measure around the ballistic center k*m(theta).
// Throws WindowTruncated unless p_min < exp(-(x + k m + h)) for every
// requested generation.
TiltedWindowSeries tilted_window_mass(const TruncatedMassTree& tree, double theta,
                                      const AnalyticProfile& profile, double x, double h);

// A nonnegative functional with its decay certificate: f may grow at most
// like envelope * y^alpha on the right of y0 and must vanish at least like
// envelope * e^{beta y} (beta > theta) on the left of -y0.
struct FunctionalDescriptor {
  std::function<double(double)> f;
  double alpha = 1.0;
  double beta = 0.0;
  double y0 = 8.0;
  double envelope = 64.0;
  std::optional<double> integral;  // int f(y) e^{-theta y} dy, integrated numerically if absent
};

struct FunctionalSeries {
  std::vector<double> value;   // sqrt(k) e^{-phi k} sum_i f(k m + ln p_i + c_k), k >= 1
  std::vector<double> target;  // e^{theta c_k} / sqrt(2 pi v) * integral * W^(k)
  double integral_used = 0.0;
};

// Exponentially tilted large-deviations functional. c_seq supplies c_k for
// k = 1..k_max (a single value is broadcast).
FunctionalSeries large_deviation_functional(const TruncatedMassTree& tree, double theta,
                                            const AnalyticProfile& profile,
                                            const FunctionalDescriptor& descriptor,
                                            std::span<const double> c_seq);

// The occupancy functional f(y) = P(Poisson(e^y) > j - 1): bounded, decays
// like e^{jy} on the left, and reproduces the mu_bar_{j-1} sums when
// c_k = ln n - k m(theta).
FunctionalDescriptor poisson_tail_functional(int j);

}  // namespace cascop
