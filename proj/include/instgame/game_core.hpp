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

#pragma once

// 2x2 bimatrix games, the 8 presentation symmetries acting on them, and
// payoff lookup. Games are always stored in canonical orientation: Player 1
// chooses the row, Player 2 the column, and every cell holds (u1, u2).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "instgame/error.hpp"

namespace instgame {

struct PayoffPair {
  int u1 = 0;
  int u2 = 0;

  PayoffPair swapped() const { return {u2, u1}; }
  bool is_zero() const { return u1 == 0 && u2 == 0; }
  friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
  friend auto operator<=>(const PayoffPair&, const PayoffPair&) = default;
};

enum class Role : std::uint8_t { kPlayer1 = 0, kPlayer2 = 1 };

constexpr Role other(Role r) {
  return r == Role::kPlayer1 ? Role::kPlayer2 : Role::kPlayer1;
}

// Binary choice: Top/Bottom for Player 1, Left/Right for Player 2.
enum class Action : std::uint8_t { k0 = 0, k1 = 1 };

constexpr int index(Action a) { return static_cast<int>(a); }
constexpr Action action_from_index(int i) { return i == 0 ? Action::k0 : Action::k1; }
constexpr Action flip(Action a) { return a == Action::k0 ? Action::k1 : Action::k0; }
constexpr std::array<Action, 2> kActions = {Action::k0, Action::k1};

struct ActionProfile {
  Action a1 = Action::k0;
  Action a2 = Action::k0;
  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;
  friend auto operator<=>(const ActionProfile&, const ActionProfile&) = default;
};

class BimatrixGame {
 public:
  using Cells = std::array<std::array<PayoffPair, 2>, 2>;

  BimatrixGame() = default;
  BimatrixGame(std::string id, Cells cells) : id_(std::move(id)), cells_(cells) {}

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  const PayoffPair& cell(Action row, Action col) const {
    return cells_[index(row)][index(col)];
  }
  const PayoffPair& cell(int row, int col) const { return cells_[row][col]; }
  PayoffPair& mutable_cell(int row, int col) { return cells_[row][col]; }
  const Cells& cells() const { return cells_; }

  int sum_u1() const {
    int s = 0;
    for (const auto& row : cells_)
      for (const auto& c : row) s += c.u1;
    return s;
  }
  int sum_u2() const {
    int s = 0;
    for (const auto& row : cells_)
      for (const auto& c : row) s += c.u2;
    return s;
  }
  int total() const { return sum_u1() + sum_u2(); }

  bool has_zero_cell() const {
    for (const auto& row : cells_)
      for (const auto& c : row)
        if (c.is_zero()) return true;
    return false;
  }

  BimatrixGame scaled(int factor) const {
    BimatrixGame g = *this;
    for (auto& row : g.cells_)
      for (auto& c : row) c = {c.u1 * factor, c.u2 * factor};
    return g;
  }

  // Cell payoffs only; ids are labels, not content.
  bool same_cells(const BimatrixGame& o) const { return cells_ == o.cells_; }
  friend bool operator==(const BimatrixGame&, const BimatrixGame&) = default;

 private:
  std::string id_;
  Cells cells_{};
};

inline PayoffPair payoff(const BimatrixGame& game, Action a1, Action a2) {
  return game.cell(a1, a2);
}

inline PayoffPair payoff(const BimatrixGame& game, ActionProfile p) {
  return game.cell(p.a1, p.a2);
}

// The dihedral group of the square acting on board presentations. Bit 2 is
// "transpose", bit 0 "swap rows", bit 1 "swap columns"; composites apply
// the transpose first and the swaps after it.
enum class Transformation : std::uint8_t {
  kIdentity = 0,
  kSwapRows = 1,
  kSwapCols = 2,
  kSwapBoth = 3,
  kTranspose = 4,
  kTransposeSwapRows = 5,
  kTransposeSwapCols = 6,
  kTransposeSwapBoth = 7,
};

constexpr std::array<Transformation, 8> kAllTransformations = {
    Transformation::kIdentity,          Transformation::kSwapRows,
    Transformation::kSwapCols,          Transformation::kSwapBoth,
    Transformation::kTranspose,         Transformation::kTransposeSwapRows,
    Transformation::kTransposeSwapCols, Transformation::kTransposeSwapBoth};

constexpr int index(Transformation t) { return static_cast<int>(t); }
constexpr bool transposes(Transformation t) { return (index(t) & 4) != 0; }
constexpr bool swaps_rows(Transformation t) { return (index(t) & 1) != 0; }
constexpr bool swaps_cols(Transformation t) { return (index(t) & 2) != 0; }

constexpr std::string_view to_string(Transformation t) {
  constexpr std::array<std::string_view, 8> names = {
      "Identity",  "SwapRows",          "SwapCols",          "SwapBoth",
      "Transpose", "TransposeSwapRows", "TransposeSwapCols", "TransposeSwapBoth"};
  return names[index(t)];
}

inline Transformation transformation_from_string(std::string_view name) {
  for (auto t : kAllTransformations)
    if (to_string(t) == name) return t;
  throw Error(ErrorCode::kParse, "unknown transformation '" + std::string(name) + "'");
}

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Where displayed cell (row, col) of apply_transformation(g, t) is read from in g.
constexpr Cell source_cell(Transformation t, Cell displayed) {
  const int r = displayed.row ^ (swaps_rows(t) ? 1 : 0);
  const int c = displayed.col ^ (swaps_cols(t) ? 1 : 0);
  return transposes(t) ? Cell{c, r} : Cell{r, c};
}

// Inverse of source_cell.
constexpr Cell displayed_cell(Transformation t, Cell source) {
  const Cell pre = transposes(t) ? Cell{source.col, source.row} : source;
  return {pre.row ^ (swaps_rows(t) ? 1 : 0), pre.col ^ (swaps_cols(t) ? 1 : 0)};
}

inline BimatrixGame apply_transformation(const BimatrixGame& game, Transformation t) {
  BimatrixGame::Cells cells{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const Cell src = source_cell(t, {r, c});
      const PayoffPair& p = game.cell(src.row, src.col);
      cells[r][c] = transposes(t) ? p.swapped() : p;
    }
  }
  return BimatrixGame(game.id(), cells);
}

// compose(t1, t2) acts as "t2 first, then t1".
constexpr Transformation compose(Transformation t1, Transformation t2) {
  for (auto k : kAllTransformations) {
    if (transposes(k) != (transposes(t1) != transposes(t2))) continue;
    bool match = true;
    for (int r = 0; r < 2 && match; ++r)
      for (int c = 0; c < 2 && match; ++c)
        match = source_cell(k, {r, c}) == source_cell(t2, source_cell(t1, {r, c}));
    if (match) return k;
  }
  return Transformation::kIdentity;  // unreachable: the group is closed
}

constexpr Transformation inverse(Transformation t) {
  for (auto k : kAllTransformations)
    if (compose(k, t) == Transformation::kIdentity) return k;
  return Transformation::kIdentity;
}

enum class Axis : std::uint8_t { kRows = 0, kColumns = 1 };

constexpr std::string_view to_string(Axis a) {
  return a == Axis::kRows ? "rows" : "columns";
}

struct Presentation {
  BimatrixGame board;
  Axis chooses = Axis::kRows;
  Role role = Role::kPlayer1;
  Transformation transformation = Transformation::kIdentity;

  // The displayed board's row chooser owns the first payoff entry.
  int own_payoff(int displayed_choice, int opponent_choice) const {
    const PayoffPair& p = chooses == Axis::kRows
                              ? board.cell(displayed_choice, opponent_choice)
                              : board.cell(opponent_choice, displayed_choice);
    return chooses == Axis::kRows ? p.u1 : p.u2;
  }
};

constexpr Axis choosing_axis(Role role, Transformation t) {
  const bool rows = (role == Role::kPlayer1) != transposes(t);
  return rows ? Axis::kRows : Axis::kColumns;
}

inline Presentation viewer_presentation(const BimatrixGame& game, Role role, Transformation t) {
  return {apply_transformation(game, t), choosing_axis(role, t), role, t};
}

// Maps a role's choice on the displayed board to its canonical action.
constexpr Action to_canonical(Role role, Transformation t, int displayed_choice) {
  // Any displayed cell on the chosen line maps to the same canonical action.
  const Cell shown = choosing_axis(role, t) == Axis::kRows ? Cell{displayed_choice, 0}
                                                           : Cell{0, displayed_choice};
  const Cell src = source_cell(t, shown);
  return action_from_index(role == Role::kPlayer1 ? src.row : src.col);
}

constexpr int to_displayed(Role role, Transformation t, Action canonical) {
  const Cell src = role == Role::kPlayer1 ? Cell{index(canonical), 0} : Cell{0, index(canonical)};
  const Cell shown = displayed_cell(t, src);
  return choosing_axis(role, t) == Axis::kRows ? shown.row : shown.col;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::ordered_json to_json(const BimatrixGame& game) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) cells.push_back({game.cell(r, c).u1, game.cell(r, c).u2});
  return {{"game_id", game.id()}, {"cells", cells}};
}

inline BimatrixGame game_from_json(const nlohmann::json& j) {
  try {
    const auto& cells = j.at("cells");
    if (!cells.is_array() || cells.size() != 4)
      throw Error(ErrorCode::kParse, "game cells must be 4 [u1,u2] pairs");
    BimatrixGame::Cells out{};
    for (int i = 0; i < 4; ++i) {
      const auto& pair = cells.at(i);
      if (!pair.is_array() || pair.size() != 2)
        throw Error(ErrorCode::kParse, "game cell must be [u1,u2]");
      out[i / 2][i % 2] = {pair.at(0).get<int>(), pair.at(1).get<int>()};
    }
    return BimatrixGame(j.value("game_id", std::string{}), out);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

constexpr std::string_view to_string(Role r) {
  return r == Role::kPlayer1 ? "Player1" : "Player2";
}

inline Role role_from_string(std::string_view s) {
  if (s == "Player1") return Role::kPlayer1;
  if (s == "Player2") return Role::kPlayer2;
  throw Error(ErrorCode::kParse, "unknown role '" + std::string(s) + "'");
}

}  // namespace instgame
