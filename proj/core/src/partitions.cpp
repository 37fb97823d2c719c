#include "cascop/partitions.hpp"

#include <algorithm>
#include <numeric>

#include "cascop/cascade.hpp"
#include "cascop/errors.hpp"

namespace cascop {

Partition Partition::from_blocks(std::size_t ground,
                                 std::vector<std::vector<std::uint32_t>> blocks) {
  Partition p;
  p.ground = ground;
  p.blocks = std::move(blocks);
  std::vector<bool> seen(ground, false);
  std::size_t covered = 0;
  for (auto& block : p.blocks) {
    if (block.empty()) throw DomainError("empty block");
    std::sort(block.begin(), block.end());
    for (const auto e : block) {
      if (e < 1 || e > ground) throw GroundSetMismatch("element outside {1..n}");
      if (seen[e - 1]) throw DomainError("blocks are not disjoint");
      seen[e - 1] = true;
      ++covered;
    }
  }
  if (covered != ground) throw DomainError("blocks do not cover the ground set");
  std::sort(p.blocks.begin(), p.blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

Partition Partition::singletons(std::size_t ground) {
  Partition p;
  p.ground = ground;
  p.blocks.reserve(ground);
  for (std::uint32_t i = 1; i <= ground; ++i) p.blocks.push_back({i});
  return p;
}

Partition Partition::one_block(std::size_t ground) {
  Partition p;
  p.ground = ground;
  std::vector<std::uint32_t> all(ground);
  std::iota(all.begin(), all.end(), 1u);
  p.blocks.push_back(std::move(all));
  return p;
}

NestedSequence partition_from_cascade(const SplittingLawSpec& spec, std::size_t n, int k_max,
                                      PathKey root) {
  if (n < 1) throw DomainError("partition_from_cascade requires n >= 1");
  const auto labeled = simulate_labeled(spec, n, k_max, root);
  NestedSequence seq;
  seq.ground = n;
  seq.levels.reserve(labeled.blocks.size());
  for (const auto& gen : labeled.blocks) {
    Partition p;
    p.ground = n;
    p.blocks = gen;  // already canonical: sorted blocks, ordered by least element
    seq.levels.push_back(std::move(p));
  }
  return seq;
}

bool is_refinement(const Partition& fine, const Partition& coarse) {
  if (fine.ground != coarse.ground) {
    throw GroundSetMismatch("refinement compares partitions of one ground set");
  }
  // block_of[e-1] = index of the coarse block containing e
  std::vector<std::size_t> block_of(coarse.ground);
  for (std::size_t b = 0; b < coarse.blocks.size(); ++b) {
    for (const auto e : coarse.blocks[b]) block_of[e - 1] = b;
  }
  for (const auto& block : fine.blocks) {
    const std::size_t home = block_of[block.front() - 1];
    for (const auto e : block) {
      if (block_of[e - 1] != home) return false;
    }
  }
  return true;
}

Restriction restrict_to(const Partition& partition, std::span<const std::uint32_t> subset) {
  if (subset.empty()) throw EmptyRestriction("restriction to the empty set");
  std::vector<std::uint32_t> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("subset has repeated elements");
  }
  if (sorted.front() < 1 || sorted.back() > partition.ground) {
    throw GroundSetMismatch("subset is not contained in the ground set");
  }
  // new label of original element e, or 0
  std::vector<std::uint32_t> new_label(partition.ground + 1, 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) new_label[sorted[i]] = static_cast<std::uint32_t>(i + 1);

  Restriction out;
  out.element_of = sorted;
  out.partition.ground = sorted.size();
  for (const auto& block : partition.blocks) {
    std::vector<std::uint32_t> kept;
    for (const auto e : block) {
      if (new_label[e] != 0) kept.push_back(new_label[e]);
    }
    if (!kept.empty()) out.partition.blocks.push_back(std::move(kept));
  }
  std::sort(out.partition.blocks.begin(), out.partition.blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

NestedSequence restrict_to(const NestedSequence& seq, std::span<const std::uint32_t> subset) {
  NestedSequence out;
  out.ground = subset.size();
  out.levels.reserve(seq.levels.size());
  for (const auto& level : seq.levels) out.levels.push_back(restrict_to(level, subset).partition);
  return out;
}

Partition paintbox_sample(std::span<const double> p, std::size_t n, Engine& eng) {
  double total = 0.0;
  for (const double x : p) {
    if (!(x >= 0.0)) throw InvalidDistribution("negative paintbox mass");
    total += x;
  }
  if (total > 1.0 + 1e-12) throw InvalidDistribution("paintbox masses sum beyond 1");

  std::vector<std::vector<std::uint32_t>> boxes(p.size());
  std::vector<std::vector<std::uint32_t>> blocks;
  for (std::uint32_t i = 1; i <= n; ++i) {
    const double u = eng.uniform();
    double acc = 0.0;
    std::size_t box = p.size();
    for (std::size_t b = 0; b < p.size(); ++b) {
      acc += p[b];
      if (u < acc) {
        box = b;
        break;
      }
    }
    if (box < p.size()) {
      boxes[box].push_back(i);
    } else {
      blocks.push_back({i});  // defective mass: private singleton
    }
  }
  for (auto& b : boxes) {
    if (!b.empty()) blocks.push_back(std::move(b));
  }
  return Partition::from_blocks(n, std::move(blocks));
}

}  // namespace cascop
