#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cascop/random.hpp"
#include "cascop/splitting_law.hpp"

namespace cascop {

// Partition of {1..n} in canonical form: every block sorted ascending,
// blocks ordered by least element.
struct Partition {
  std::size_t ground = 0;
  std::vector<std::vector<std::uint32_t>> blocks;

  // Canonicalizes and validates (disjoint blocks covering {1..n} exactly).
  static Partition from_blocks(std::size_t ground, std::vector<std::vector<std::uint32_t>> blocks);

  static Partition singletons(std::size_t ground);
  static Partition one_block(std::size_t ground);

  bool operator==(const Partition& other) const = default;
};

// Nested (refining) sequence Pi(0), Pi(1), ..., Pi(k_max) over one ground set.
struct NestedSequence {
  std::size_t ground = 0;
  std::vector<Partition> levels;
};

// The fragmentation-chain view of the cascade occupancy scheme: balls that
// share a box at generation k share a block of Pi(k); Pi(0) is one block.
NestedSequence partition_from_cascade(const SplittingLawSpec& spec, std::size_t n, int k_max,
                                      PathKey root);

// True iff every block of fine sits inside one block of coarse.
bool is_refinement(const Partition& fine, const Partition& coarse);

// Restriction to a sub-block, reindexed order-preservingly to {1..|subset|}.
// element_of[i-1] is the original element the new label i came from.
struct Restriction {
  Partition partition;
  std::vector<std::uint32_t> element_of;
};
Restriction restrict_to(const Partition& partition, std::span<const std::uint32_t> subset);
NestedSequence restrict_to(const NestedSequence& seq, std::span<const std::uint32_t> subset);

// Kingman paintbox over a (possibly defective) mass vector: each index draws
// a box with probability p_i and otherwise a private singleton.
Partition paintbox_sample(std::span<const double> p, std::size_t n, Engine& eng);

}  // namespace cascop
