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

#include "instgame/game_core.hpp"
#include "instgame/rational.hpp"
#include "instgame/rng.hpp"

namespace instgame {
namespace {

// Every cell distinct so any misplaced read shows up.
BimatrixGame distinct_game() {
  return BimatrixGame("g", {{{{PayoffPair{1, 2}, PayoffPair{3, 4}}}, {{PayoffPair{5, 6}, PayoffPair{7, 8}}}}});
}

TEST(RationalTest, ArithmeticAndNormalization) {
  EXPECT_EQ(Rational(6, -4), Rational(-3, 2));
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(3, 2) * Rational(16), Rational(24));
  EXPECT_EQ(Rational(1) / Rational(4), Rational(1, 4));
  EXPECT_LT(Rational(2, 3), Rational(3, 4));
  EXPECT_EQ(Rational(5, 2).round(), 3);
  EXPECT_EQ(Rational(-5, 2).round(), -3);
  EXPECT_EQ(Rational(7, 3).round(), 2);
  EXPECT_EQ(Rational(3, 2).str(), "3/2");
  EXPECT_EQ(Rational(4).str(), "4");
}

TEST(RationalTest, Parse) {
  EXPECT_EQ(Rational::parse("3/2"), Rational(3, 2));
  EXPECT_EQ(Rational::parse("1.5"), Rational(3, 2));
  EXPECT_EQ(Rational::parse("2"), Rational(2));
  EXPECT_EQ(Rational::parse("0.125"), Rational(1, 8));
  EXPECT_THROW(Rational::parse("x"), Error);
  EXPECT_THROW(Rational::parse("1/0"), Error);
}

TEST(RngTest, DerivedStreamsAreDeterministicAndDistinct) {
  Rng a = derive_rng(7, "alpha"), b = derive_rng(7, "alpha"), c = derive_rng(7, "beta");
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  Rng d = derive_rng(7, std::uint64_t{1}), e = derive_rng(8, std::uint64_t{1});
  EXPECT_NE(d(), e());
  EXPECT_EQ(stable_hash("abc"), stable_hash("abc"));
}

TEST(TransformationTest, ApplyIdentityAndKnownKinds) {
  const BimatrixGame g = distinct_game();
  EXPECT_TRUE(apply_transformation(g, Transformation::kIdentity).same_cells(g));
  const BimatrixGame rows = apply_transformation(g, Transformation::kSwapRows);
  EXPECT_EQ(rows.cell(0, 0), (PayoffPair{5, 6}));
  EXPECT_EQ(rows.cell(1, 1), (PayoffPair{3, 4}));
  const BimatrixGame cols = apply_transformation(g, Transformation::kSwapCols);
  EXPECT_EQ(cols.cell(0, 0), (PayoffPair{3, 4}));
  // A transpose hands the row axis to Player 2, so entries swap order.
  const BimatrixGame tr = apply_transformation(g, Transformation::kTranspose);
  EXPECT_EQ(tr.cell(0, 1), (PayoffPair{6, 5}));
  EXPECT_EQ(tr.cell(1, 0), (PayoffPair{4, 3}));
  EXPECT_EQ(tr.cell(0, 0), (PayoffPair{2, 1}));
}

TEST(TransformationTest, AllEightPresentationsDistinct) {
  std::set<BimatrixGame::Cells> seen;
  for (auto t : kAllTransformations) seen.insert(apply_transformation(distinct_game(), t).cells());
  EXPECT_EQ(seen.size(), 8u);
}

TEST(TransformationTest, ComposeMatchesSequentialApplication) {
  const BimatrixGame g = distinct_game();
  for (auto t1 : kAllTransformations)
    for (auto t2 : kAllTransformations) {
      const BimatrixGame seq = apply_transformation(apply_transformation(g, t2), t1);
      EXPECT_TRUE(apply_transformation(g, compose(t1, t2)).same_cells(seq))
          << to_string(t1) << " after " << to_string(t2);
    }
}

TEST(TransformationTest, GroupAxioms) {
  for (auto a : kAllTransformations) {
    EXPECT_EQ(compose(a, Transformation::kIdentity), a);
    EXPECT_EQ(compose(Transformation::kIdentity, a), a);
    EXPECT_EQ(compose(a, inverse(a)), Transformation::kIdentity);
    EXPECT_EQ(compose(inverse(a), a), Transformation::kIdentity);
    for (auto b : kAllTransformations)
      for (auto c : kAllTransformations) EXPECT_EQ(compose(a, compose(b, c)), compose(compose(a, b), c));
  }
}

TEST(TransformationTest, DihedralStructure) {
  int order2 = 0, order4 = 0;
  bool abelian = true;
  for (auto a : kAllTransformations) {
    Transformation p = a;
    int order = 1;
    while (p != Transformation::kIdentity) {
      p = compose(a, p);
      ++order;
    }
    order2 += order == 2;
    order4 += order == 4;
    for (auto b : kAllTransformations) abelian = abelian && compose(a, b) == compose(b, a);
  }
  EXPECT_EQ(order2, 5);
  EXPECT_EQ(order4, 2);
  EXPECT_FALSE(abelian);
}

TEST(TransformationTest, CellMapsAreInverse) {
  for (auto t : kAllTransformations)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        EXPECT_EQ(source_cell(t, displayed_cell(t, {r, c})), (Cell{r, c}));
        EXPECT_EQ(displayed_cell(t, source_cell(t, {r, c})), (Cell{r, c}));
      }
}

TEST(TransformationTest, StringRoundTrip) {
  for (auto t : kAllTransformations) EXPECT_EQ(transformation_from_string(to_string(t)), t);
  EXPECT_THROW(transformation_from_string("Rotate"), Error);
}

// The cell both players see after choosing on their displayed boards holds
// the canonical payoff of the canonical actions, possibly entry-swapped.
TEST(PresentationTest, DisplayedChoicesResolveToCanonicalPayoffs) {
  const BimatrixGame g = distinct_game();
  for (auto t : kAllTransformations) {
    const Presentation p1 = viewer_presentation(g, Role::kPlayer1, t);
    const Presentation p2 = viewer_presentation(g, Role::kPlayer2, t);
    EXPECT_NE(p1.chooses, p2.chooses);
    EXPECT_TRUE(p1.board.same_cells(p2.board));
    for (int d1 = 0; d1 < 2; ++d1)
      for (int d2 = 0; d2 < 2; ++d2) {
        const Action a1 = to_canonical(Role::kPlayer1, t, d1);
        const Action a2 = to_canonical(Role::kPlayer2, t, d2);
        const PayoffPair canon = payoff(g, a1, a2);
        const PayoffPair shown = p1.chooses == Axis::kRows ? p1.board.cell(d1, d2) : p1.board.cell(d2, d1);
        EXPECT_EQ(shown, transposes(t) ? canon.swapped() : canon);
        EXPECT_EQ(p1.own_payoff(d1, d2), canon.u1);
        EXPECT_EQ(p2.own_payoff(d2, d1), canon.u2);
        EXPECT_EQ(to_displayed(Role::kPlayer1, t, a1), d1);
        EXPECT_EQ(to_displayed(Role::kPlayer2, t, a2), d2);
      }
  }
}

TEST(PresentationTest, Player1ChoosesRowsUnlessTransposed) {
  EXPECT_EQ(choosing_axis(Role::kPlayer1, Transformation::kIdentity), Axis::kRows);
  EXPECT_EQ(choosing_axis(Role::kPlayer2, Transformation::kSwapBoth), Axis::kColumns);
  EXPECT_EQ(choosing_axis(Role::kPlayer1, Transformation::kTranspose), Axis::kColumns);
  EXPECT_EQ(choosing_axis(Role::kPlayer2, Transformation::kTransposeSwapRows), Axis::kRows);
}

TEST(GameJsonTest, RoundTripAndErrors) {
  const BimatrixGame g = distinct_game();
  const BimatrixGame back = game_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(back, g);
  EXPECT_THROW(game_from_json(nlohmann::json::parse(R"({"cells":[[1,2],[3,4]]})")), Error);
  EXPECT_THROW(game_from_json(nlohmann::json::parse(R"({"cells":[[1],[3,4],[1,1],[0,0]]})")), Error);
  EXPECT_EQ(role_from_string("Player2"), Role::kPlayer2);
  EXPECT_THROW(role_from_string("P3"), Error);
}

TEST(GameTest, Sums) {
  const BimatrixGame g = distinct_game();
  EXPECT_EQ(g.sum_u1(), 16);
  EXPECT_EQ(g.sum_u2(), 20);
  EXPECT_EQ(g.total(), 36);
  EXPECT_FALSE(g.has_zero_cell());
  EXPECT_EQ(g.scaled(2).total(), 72);
}

}  // namespace
}  // namespace instgame
