#include "cascop/partitions.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cascop/cascade.hpp"
#include "cascop/errors.hpp"

namespace {

using cascop::Engine;
using cascop::Partition;
using cascop::SplittingLawSpec;

Partition make(std::size_t n, std::vector<std::vector<std::uint32_t>> blocks) {
  return Partition::from_blocks(n, std::move(blocks));
}

TEST(Partition, CanonicalFormAndValidation) {
  const auto p = make(4, {{3, 4}, {2, 1}});
  ASSERT_EQ(p.blocks.size(), 2u);
  EXPECT_EQ(p.blocks[0], (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(p.blocks[1], (std::vector<std::uint32_t>{3, 4}));
  EXPECT_THROW(make(3, {{1, 2}}), cascop::Error);          // not covering
  EXPECT_THROW(make(3, {{1, 2}, {2, 3}}), cascop::Error);  // not disjoint
  EXPECT_THROW(make(3, {{1, 2, 3, 4}}), cascop::GroundSetMismatch);
}

TEST(Refinement, BasicLattice) {
  const auto s = Partition::singletons(4);
  const auto o = Partition::one_block(4);
  const auto p = make(4, {{1, 2}, {3}, {4}});
  const auto q = make(4, {{1, 3}, {2}, {4}});
  EXPECT_TRUE(cascop::is_refinement(s, o));
  EXPECT_TRUE(cascop::is_refinement(s, p));
  EXPECT_TRUE(cascop::is_refinement(p, p));  // reflexive
  EXPECT_TRUE(cascop::is_refinement(p, o));
  EXPECT_FALSE(cascop::is_refinement(p, q));  // incomparable
  EXPECT_FALSE(cascop::is_refinement(q, p));
  EXPECT_THROW(cascop::is_refinement(s, Partition::one_block(5)), cascop::GroundSetMismatch);
}

TEST(Restrict, ExamplesAndCoherence) {
  const auto p = make(4, {{1, 2}, {3, 4}});
  const std::uint32_t sub[] = {2, 3};
  const auto r = cascop::restrict_to(p, sub);
  EXPECT_EQ(r.partition.ground, 2u);
  ASSERT_EQ(r.partition.blocks.size(), 2u);  // {2} and {3}, reindexed
  EXPECT_EQ(r.partition.blocks[0], (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(r.partition.blocks[1], (std::vector<std::uint32_t>{2}));
  EXPECT_EQ(r.element_of, (std::vector<std::uint32_t>{2, 3}));

  // identity restriction
  const std::uint32_t all[] = {1, 2, 3, 4};
  EXPECT_EQ(cascop::restrict_to(p, all).partition, p);

  EXPECT_THROW(cascop::restrict_to(p, std::span<const std::uint32_t>{}),
               cascop::EmptyRestriction);
  const std::uint32_t bad[] = {5};
  EXPECT_THROW(cascop::restrict_to(p, bad), cascop::GroundSetMismatch);
}

TEST(FromCascade, SingleBallAndBlockCounts) {
  const auto spec = SplittingLawSpec::parse("pd1");
  const auto one = cascop::partition_from_cascade(spec, 1, 5, cascop::root_key(3));
  for (const auto& level : one.levels) {
    ASSERT_EQ(level.blocks.size(), 1u);
    EXPECT_EQ(level.blocks[0], (std::vector<std::uint32_t>{1}));
  }
  // block counts equal the counts-only N under the same seed
  const auto key = cascop::root_key(17);
  const auto seq = cascop::partition_from_cascade(spec, 60, 5, key);
  const auto stats = cascop::simulate_occupancy(spec, 60, 5, key);
  EXPECT_EQ(seq.levels[0].blocks.size(), 1u);
  for (int k = 1; k <= 5; ++k) {
    ASSERT_EQ(seq.levels[k].blocks.size(), stats[k - 1].occupancy.total_occupied);
  }
}

TEST(FromCascade, NestedAndRestrictionCoherent) {
  for (const auto* text : {"pd1", "gem:0.7", "dirichlet:3:1", "beta:2:1"}) {
    const auto spec = SplittingLawSpec::parse(text);
    const auto seq = cascop::partition_from_cascade(spec, 40, 5, cascop::root_key(29));
    for (std::size_t k = 1; k < seq.levels.size(); ++k) {
      ASSERT_TRUE(cascop::is_refinement(seq.levels[k], seq.levels[k - 1])) << text;
    }
    // random chain B'' in B' in {1..n}
    Engine eng(31);
    std::vector<std::uint32_t> outer;
    for (std::uint32_t e = 1; e <= 40; ++e) {
      if (eng.uniform() < 0.6) outer.push_back(e);
    }
    std::vector<std::uint32_t> inner_positions, inner_elements;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      if (eng.uniform() < 0.5) {
        inner_positions.push_back(static_cast<std::uint32_t>(i + 1));
        inner_elements.push_back(outer[i]);
      }
    }
    if (outer.empty() || inner_positions.empty()) continue;
    const auto once = cascop::restrict_to(seq, outer);
    const auto twice = cascop::restrict_to(once, inner_positions);
    const auto direct = cascop::restrict_to(seq, inner_elements);
    for (std::size_t k = 0; k < seq.levels.size(); ++k) {
      ASSERT_EQ(twice.levels[k], direct.levels[k]) << text;
    }
  }
}

TEST(FromCascade, ExchangeableShapesAtGenerationOne) {
  // For three balls, the three two-block shapes must be equally likely.
  const auto spec = SplittingLawSpec::parse("pd1");
  const int reps = 30000;
  int split_12 = 0, split_13 = 0, split_23 = 0;
  for (int i = 0; i < reps; ++i) {
    const auto seq = cascop::partition_from_cascade(spec, 3, 1, cascop::root_key(1009, i));
    const auto& blocks = seq.levels[1].blocks;
    if (blocks.size() != 2) continue;
    const auto& pair = blocks[0].size() == 2 ? blocks[0] : blocks[1];
    if (pair == std::vector<std::uint32_t>{1, 2}) ++split_12;
    if (pair == std::vector<std::uint32_t>{1, 3}) ++split_13;
    if (pair == std::vector<std::uint32_t>{2, 3}) ++split_23;
  }
  const double total = split_12 + split_13 + split_23;
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / total);
  EXPECT_NEAR(split_12 / total, 1.0 / 3.0, 4 * se);
  EXPECT_NEAR(split_13 / total, 1.0 / 3.0, 4 * se);
  EXPECT_NEAR(split_23 / total, 1.0 / 3.0, 4 * se);
}

TEST(Paintbox, DegenerateAndDefective) {
  Engine eng(41);
  const auto none = cascop::paintbox_sample({}, 5, eng);
  EXPECT_EQ(none.blocks.size(), 5u);  // fully defective: all singletons
  const double full[] = {1.0};
  const auto one = cascop::paintbox_sample(full, 5, eng);
  EXPECT_EQ(one.blocks.size(), 1u);
  const double over[] = {0.7, 0.5};
  EXPECT_THROW(cascop::paintbox_sample(over, 3, eng), cascop::InvalidDistribution);
}

TEST(Paintbox, TwoFairBoxesThreeBalls) {
  Engine eng(43);
  const double half[] = {0.5, 0.5};
  const int reps = 40000;
  int together = 0;
  for (int i = 0; i < reps; ++i) {
    together += cascop::paintbox_sample(half, 3, eng).blocks.size() == 1;
  }
  const double se = std::sqrt(0.25 * 0.75 / reps);
  EXPECT_NEAR(together / static_cast<double>(reps), 0.25, 3 * se);
}

TEST(Paintbox, DefectiveMassMakesSingletons) {
  Engine eng(47);
  const double p[] = {0.25};  // 3/4 defective
  const int reps = 30000;
  double singleton_share = 0.0;
  for (int i = 0; i < reps; ++i) {
    const auto part = cascop::paintbox_sample(p, 2, eng);
    // ball 1 alone iff it drew the defective mass or ball 2 missed its box
    singleton_share += part.blocks.size() == 2;
  }
  // P(not together) = 1 - 0.25^2
  const double expect = 1.0 - 0.0625;
  const double se = std::sqrt(expect * (1 - expect) / reps);
  EXPECT_NEAR(singleton_share / reps, expect, 4 * se);
}

}  // namespace
