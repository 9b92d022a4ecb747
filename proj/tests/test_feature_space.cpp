// Copyright 2026 The instgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <set>

#include "instgame/feature_space.hpp"

namespace instgame {
namespace {

BimatrixGame from_flat(const std::array<int, 8>& v) {
  return BimatrixGame("x", {{{{PayoffPair{v[0], v[1]}, PayoffPair{v[2], v[3]}}},
                             {{PayoffPair{v[4], v[5]}, PayoffPair{v[6], v[7]}}}}});
}

// Literal deviation check, one cell at a time.
std::set<std::pair<int, int>> nash_oracle(const BimatrixGame& g) {
  std::set<std::pair<int, int>> out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const bool row_ok = g.cell(r, c).u1 >= g.cell(1 - r, c).u1;
      const bool col_ok = g.cell(r, c).u2 >= g.cell(r, 1 - c).u2;
      if (row_ok && col_ok) out.insert({r, c});
    }
  return out;
}

std::set<std::pair<int, int>> as_set(const std::vector<ActionProfile>& eqs) {
  std::set<std::pair<int, int>> out;
  for (const auto& e : eqs) out.insert({index(e.a1), index(e.a2)});
  return out;
}

TEST(NashTest, ExhaustiveOracleAgreementOnSmallPayoffs) {
  std::array<int, 8> v{};
  int games = 0;
  for (int code = 0; code < 6561; ++code) {
    int x = code;
    for (int i = 0; i < 8; ++i) {
      v[static_cast<std::size_t>(i)] = x % 3;
      x /= 3;
    }
    const BimatrixGame g = from_flat(v);
    const auto expected = nash_oracle(g);
    ASSERT_EQ(as_set(pure_nash_equilibria(g)), expected) << "code " << code;
    ASSERT_EQ(is_stable(g), expected.size() == 1);
    ++games;
  }
  EXPECT_EQ(games, 6561);
}

TEST(NashTest, KnownGames) {
  // Prisoner's dilemma: unique equilibrium at mutual defection.
  const BimatrixGame pd = from_flat({3, 3, 0, 5, 5, 0, 1, 1});
  ASSERT_EQ(pure_nash_equilibria(pd).size(), 1u);
  EXPECT_EQ(pure_nash_equilibria(pd)[0], (ActionProfile{Action::k1, Action::k1}));
  // Matching pennies: none.
  EXPECT_TRUE(pure_nash_equilibria(from_flat({1, 0, 0, 1, 0, 1, 1, 0})).empty());
  // Constant game: every cell.
  EXPECT_EQ(pure_nash_equilibria(from_flat({0, 0, 0, 0, 0, 0, 0, 0})).size(), 4u);
  EXPECT_EQ(payoff(from_flat({0, 0, 0, 0, 0, 0, 0, 0}), Action::k1, Action::k0), (PayoffPair{0, 0}));
}

TEST(FeatureVectorTest, ParseLabelAndBits) {
  const FeatureVector fv = FeatureVector::parse("100");
  EXPECT_TRUE(fv.has(Feature::kStability));
  EXPECT_FALSE(fv.has(Feature::kEfficiency));
  EXPECT_EQ(fv.label(), "100");
  EXPECT_EQ(fv.value(), 4);
  EXPECT_EQ(FeatureVector::parse("0110").feature_count(), 4);
  EXPECT_EQ(fv.flipped(2).label(), "101");
  EXPECT_THROW(FeatureVector::parse("12a"), Error);
  EXPECT_THROW(FeatureVector::parse("10"), Error);
  for (auto v : all_vertices(4)) EXPECT_EQ(FeatureVector::parse(v.label()), v);
}

TEST(FeatureVectorTest, Layers) {
  EXPECT_EQ(layer(FeatureVector::parse("000")), 1);
  EXPECT_EQ(layer(FeatureVector::parse("110")), 3);
  EXPECT_EQ(layer(FeatureVector::parse("101")), 3);
  EXPECT_EQ(layer(FeatureVector::parse("111")), 4);
  for (int k : {3, 4})
    for (auto v : all_vertices(k)) {
      int ones = 0;
      for (char c : v.label()) ones += c == '1';
      EXPECT_EQ(layer(v), ones + 1);
    }
}

TEST(ComparisonPairTest, CountsAndHamming) {
  EXPECT_EQ(comparison_pairs(3).size(), 12u);
  EXPECT_EQ(comparison_pairs(4).size(), 32u);
  for (int k : {3, 4}) {
    std::set<ComparisonPair> unique;
    for (const auto& p : comparison_pairs(k)) {
      EXPECT_EQ(hamming(p.low, p.high), 1);
      EXPECT_LT(p.low.popcount(), p.high.popcount());
      unique.insert(p);
    }
    EXPECT_EQ(unique.size(), comparison_pairs(k).size());
  }
  EXPECT_EQ(comparison_pairs(3).front().key(), "000-100");
  EXPECT_EQ(comparison_pairs(3).back().key(), "110-111");
}

TEST(SpaceConfigTest, Validation) {
  SpaceConfig c;
  EXPECT_EQ(c.efficient_total(), 32);
  c.efficiency_multiplier = Rational(3, 2);
  EXPECT_EQ(c.efficient_total(), 24);
  c.feature_count = 5;
  EXPECT_THROW(c.validate(), Error);
  SpaceConfig m;
  m.efficiency_multiplier = Rational(1);
  EXPECT_THROW(m.validate(), Error);
}

TEST(GenerateSpaceTest, DefaultSpaceIsPinned) {
  const GameSpace space = generate_space(SpaceConfig{});
  const std::map<std::string, std::array<int, 8>> expected = {
      {"000", {0, 0, 1, 7, 1, 7, 0, 0}},  {"001", {0, 0, 4, 4, 4, 4, 0, 0}},
      {"010", {0, 0, 2, 14, 2, 14, 0, 0}}, {"011", {0, 0, 8, 8, 8, 8, 0, 0}},
      {"100", {0, 0, 0, 1, 1, 0, 6, 8}},  {"101", {0, 0, 0, 1, 1, 0, 7, 7}},
      {"110", {0, 0, 0, 2, 2, 0, 12, 16}}, {"111", {0, 0, 0, 2, 2, 0, 14, 14}},
  };
  ASSERT_EQ(space.games.size(), 8u);
  for (const auto& [label, flat] : expected)
    EXPECT_TRUE(space.game(FeatureVector::parse(label)).same_cells(from_flat(flat))) << label;
}

TEST(GenerateSpaceTest, EveryConfigurationVerifies) {
  for (int k : {3, 4})
    for (Rational m : {Rational(2), Rational(3, 2)}) {
      SpaceConfig c;
      c.feature_count = k;
      c.efficiency_multiplier = m;
      const GameSpace space = generate_space(c);
      EXPECT_EQ(space.games.size(), static_cast<std::size_t>(1 << k));
      const VerifyReport r = verify_space(space);
      EXPECT_TRUE(r.passed()) << to_string(r);
    }
}

TEST(GenerateSpaceTest, IntegralScalingDoublesBase) {
  const GameSpace space = generate_space(SpaceConfig{});
  for (auto low : all_vertices(3)) {
    if (low.has(Feature::kEfficiency)) continue;
    const auto high = low.with(static_cast<int>(Feature::kEfficiency), true);
    EXPECT_TRUE(space.game(high).same_cells(space.game(low).scaled(2))) << low.label();
  }
}

TEST(GenerateSpaceTest, Deterministic) {
  SpaceConfig c;
  c.rng_seed = 42;
  EXPECT_EQ(to_json(generate_space(c)).dump(), to_json(generate_space(c)).dump());
}

TEST(GenerateSpaceTest, UnsatisfiableNamesVertex) {
  SpaceConfig c;
  c.payoff_bound = 4;
  c.base_total = 32;  // forces every cell to (4,4): no zero cell is possible
  try {
    generate_space(c);
    FAIL() << "expected UnsatisfiableConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiableConfig);
    EXPECT_NE(std::string(e.what()).find("vertex"), std::string::npos);
  }
}

TEST(PredicateTest, InvariantUnderAllPresentations) {
  for (int k : {3, 4}) {
    SpaceConfig c;
    c.feature_count = k;
    const GameSpace space = generate_space(c);
    for (const auto& [fv, g] : space.games)
      for (auto t : kAllTransformations) {
        const BimatrixGame shown = apply_transformation(g, t);
        EXPECT_EQ(is_stable(shown), is_stable(g));
        EXPECT_EQ(is_fair(shown), is_fair(g));
        EXPECT_EQ(is_efficient(shown, c), is_efficient(g, c));
        EXPECT_EQ(is_aligned(shown), is_aligned(g));
        EXPECT_EQ(shown.total(), g.total());
        EXPECT_EQ(pure_nash_equilibria(shown).size(), pure_nash_equilibria(g).size());
      }
  }
}

TEST(PredicateTest, StableGamesReachEquilibriumByStrictBestResponse) {
  const GameSpace space = generate_space(SpaceConfig{});
  for (const auto& [fv, g] : space.games) {
    if (!fv.has(Feature::kStability)) continue;
    const ActionProfile eq = pure_nash_equilibria(g).front();
    for (int r0 = 0; r0 < 2; ++r0)
      for (int c0 = 0; c0 < 2; ++c0) {
        int r = r0, c = c0;
        for (int step = 0; step < 8; ++step) {
          if (g.cell(1 - r, c).u1 > g.cell(r, c).u1) r = 1 - r;
          else if (g.cell(r, 1 - c).u2 > g.cell(r, c).u2) c = 1 - c;
        }
        EXPECT_EQ((ActionProfile{action_from_index(r), action_from_index(c)}), eq) << fv.label();
      }
  }
}

TEST(PredicateTest, EfficiencyMembership) {
  SpaceConfig c;
  EXPECT_FALSE(is_efficient(from_flat({0, 0, 4, 4, 4, 4, 0, 0}), c));
  EXPECT_TRUE(is_efficient(from_flat({0, 0, 8, 8, 8, 8, 0, 0}), c));
  try {
    is_efficient(from_flat({0, 0, 1, 1, 0, 0, 0, 0}), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotMember);
  }
}

TEST(VerifyTest, CorruptionFailsOnlyAffectedPredicates) {
  GameSpace space = generate_space(SpaceConfig{});
  // Moving one point between players in 001 breaks fairness and nothing else.
  BimatrixGame& g = space.games.at(FeatureVector::parse("001"));
  g.mutable_cell(0, 1) = {5, 3};
  const VerifyReport r = verify_space(space);
  EXPECT_EQ(r.failure_count(), 1u);
  for (const auto& v : r.vertices)
    if (v.label == FeatureVector::parse("001")) {
      EXPECT_EQ(v.failures(), std::vector<std::string>{"fairness"});
    }
  // Adding a point to 111 breaks efficiency.
  space.games.at(FeatureVector::parse("111")).mutable_cell(1, 1) = {15, 14};
  bool eff_failed = false;
  for (const auto& v : verify_space(space).vertices)
    if (v.label == FeatureVector::parse("111"))
      for (const auto& f : v.failures()) eff_failed = eff_failed || f == "efficiency";
  EXPECT_TRUE(eff_failed);
}

TEST(VerifyTest, EmptySpaceEmptyReport) {
  GameSpace empty;
  const VerifyReport r = verify_space(empty);
  EXPECT_TRUE(r.vertices.empty());
  EXPECT_TRUE(r.passed());
}

TEST(SpaceJsonTest, RoundTrip) {
  SpaceConfig c;
  c.feature_count = 4;
  c.efficiency_multiplier = Rational(3, 2);
  const GameSpace space = generate_space(c);
  const std::string text = to_json(space).dump();
  const GameSpace back = space_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.config, space.config);
  EXPECT_EQ(to_json(back).dump(), text);
  // Keys ascend in binary order.
  const auto j = nlohmann::ordered_json::parse(text);
  std::string prev;
  for (const auto& [key, _] : j.at("games").items()) {
    EXPECT_LT(prev, key);
    prev = key;
  }
}

}  // namespace
}  // namespace instgame
