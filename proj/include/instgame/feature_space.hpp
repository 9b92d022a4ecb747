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

// Institutional feature predicates (stability, efficiency, fairness, and the
// optional fourth "alignment" feature), pure-equilibrium enumeration, and the
// constrained search that realizes every vertex of the feature hypercube.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/error.hpp"
#include "instgame/game_core.hpp"
#include "instgame/rational.hpp"

namespace instgame {

enum class Feature : std::uint8_t { kStability = 0, kEfficiency = 1, kFairness = 2, kAlignment = 3 };

constexpr std::string_view to_string(Feature f) {
  constexpr std::array<std::string_view, 4> names = {"stability", "efficiency", "fairness",
                                                     "alignment"};
  return names[static_cast<int>(f)];
}

inline Feature feature_from_string(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (to_string(static_cast<Feature>(i)) == s) return static_cast<Feature>(i);
  throw Error(ErrorCode::kParse, "unknown feature '" + std::string(s) + "'");
}

// A vertex of the game hypercube. Feature 0 (stability) is the leftmost
// character of the label and the most significant bit of value().
class FeatureVector {
 public:
  constexpr FeatureVector() = default;
  constexpr FeatureVector(std::uint8_t value, int feature_count)
      : value_(value), count_(static_cast<std::uint8_t>(feature_count)) {}

  static FeatureVector parse(std::string_view label) {
    if (label.size() < 3 || label.size() > 4)
      throw Error(ErrorCode::kParse, "feature label must have 3 or 4 bits: '" + std::string(label) + "'");
    std::uint8_t v = 0;
    for (char c : label) {
      if (c != '0' && c != '1')
        throw Error(ErrorCode::kParse, "feature label must be binary: '" + std::string(label) + "'");
      v = static_cast<std::uint8_t>((v << 1) | (c == '1'));
    }
    return {v, static_cast<int>(label.size())};
  }

  constexpr int feature_count() const { return count_; }
  constexpr std::uint8_t value() const { return value_; }

  constexpr std::uint8_t mask(int feature) const {
    return static_cast<std::uint8_t>(1u << (count_ - 1 - feature));
  }
  constexpr bool has(int feature) const { return (value_ & mask(feature)) != 0; }
  constexpr bool has(Feature f) const { return has(static_cast<int>(f)); }
  constexpr FeatureVector with(int feature, bool on) const {
    return {static_cast<std::uint8_t>(on ? (value_ | mask(feature)) : (value_ & ~mask(feature))),
            count_};
  }
  constexpr FeatureVector flipped(int feature) const {
    return {static_cast<std::uint8_t>(value_ ^ mask(feature)), count_};
  }
  constexpr int popcount() const { return std::popcount(value_); }

  std::string label() const {
    std::string s;
    for (int i = 0; i < count_; ++i) s.push_back(has(i) ? '1' : '0');
    return s;
  }

  friend constexpr bool operator==(const FeatureVector&, const FeatureVector&) = default;
  friend constexpr auto operator<=>(FeatureVector a, FeatureVector b) {
    if (a.count_ != b.count_) return a.count_ <=> b.count_;
    return a.value_ <=> b.value_;
  }

 private:
  std::uint8_t value_ = 0;
  std::uint8_t count_ = 3;
};

inline int hamming(FeatureVector a, FeatureVector b) {
  return std::popcount(static_cast<unsigned>(a.value() ^ b.value()));
}

// The feature index on which two Hamming-1 neighbours differ.
inline int differing_feature(FeatureVector a, FeatureVector b) {
  for (int i = 0; i < a.feature_count(); ++i)
    if (a.has(i) != b.has(i)) return i;
  return -1;
}

inline std::vector<FeatureVector> all_vertices(int feature_count) {
  std::vector<FeatureVector> out;
  for (int v = 0; v < (1 << feature_count); ++v)
    out.emplace_back(static_cast<std::uint8_t>(v), feature_count);
  return out;
}

inline int layer(FeatureVector fv) { return fv.popcount() + 1; }

// ---- predicates ----------------------------------------------------------

// Weak best responses: a cell is an equilibrium when neither player has a
// strictly better unilateral deviation.
inline std::vector<ActionProfile> pure_nash_equilibria(const BimatrixGame& game) {
  std::vector<ActionProfile> out;
  for (Action a1 : kActions) {
    for (Action a2 : kActions) {
      const PayoffPair here = game.cell(a1, a2);
      if (game.cell(flip(a1), a2).u1 > here.u1) continue;
      if (game.cell(a1, flip(a2)).u2 > here.u2) continue;
      out.push_back({a1, a2});
    }
  }
  return out;
}

inline bool is_stable(const BimatrixGame& game) {
  return pure_nash_equilibria(game).size() == 1;
}

inline bool is_fair(const BimatrixGame& game) { return game.sum_u1() == game.sum_u2(); }

// No payoff ties in any best-response comparison.
inline bool is_strict(const BimatrixGame& g) {
  for (int c = 0; c < 2; ++c)
    if (g.cell(0, c).u1 == g.cell(1, c).u1) return false;
  for (int r = 0; r < 2; ++r)
    if (g.cell(r, 0).u2 == g.cell(r, 1).u2) return false;
  return true;
}

// Each player is indifferent between their actions against an opponent who
// mixes 50/50, so neither equilibrium of a coordination game is focal.
inline bool is_ambiguous(const BimatrixGame& g) {
  return g.cell(0, 0).u1 + g.cell(0, 1).u1 == g.cell(1, 0).u1 + g.cell(1, 1).u1 &&
         g.cell(0, 0).u2 + g.cell(1, 0).u2 == g.cell(0, 1).u2 + g.cell(1, 1).u2;
}

// Every pure equilibrium is Pareto-optimal among the four cells.
inline bool is_aligned(const BimatrixGame& g) {
  for (const auto& eq : pure_nash_equilibria(g)) {
    const PayoffPair e = payoff(g, eq);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const PayoffPair o = g.cell(r, c);
        if (o.u1 >= e.u1 && o.u2 >= e.u2 && (o.u1 > e.u1 || o.u2 > e.u2)) return false;
      }
    }
  }
  return true;
}

struct SpaceConfig {
  int feature_count = 3;
  Rational efficiency_multiplier{2};
  int payoff_bound = 8;
  int base_total = 16;
  std::uint64_t rng_seed = 0;
  std::string search_order = "lex-row-major";
  // Unstable games put (0,0) on both off-equilibrium cells. Defaults on for
  // three features; the four-feature space needs it off to realize
  // unstable, non-aligned games.
  std::optional<bool> zero_miscoordination;
  bool integral_scaling = true;

  bool zero_miscoordination_enabled() const {
    return zero_miscoordination.value_or(feature_count == 3);
  }
  int efficient_total() const {
    return static_cast<int>((efficiency_multiplier * Rational(base_total)).round());
  }

  void validate() const {
    if (feature_count != 3 && feature_count != 4)
      throw Error(ErrorCode::kInvalidArgument, "feature_count must be 3 or 4");
    if (efficiency_multiplier <= Rational(1))
      throw Error(ErrorCode::kInvalidArgument, "efficiency_multiplier must exceed 1");
    if (payoff_bound < 4) throw Error(ErrorCode::kInvalidArgument, "payoff_bound must be >= 4");
    if (base_total < 1 || base_total > 8 * payoff_bound)
      throw Error(ErrorCode::kInvalidArgument, "base_total inconsistent with payoff_bound");
    if (search_order != "lex-row-major")
      throw Error(ErrorCode::kInvalidArgument, "unsupported search_order '" + search_order + "'");
  }

  friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

// Membership-checked: a game whose total matches neither the base nor the
// efficient total does not belong to the space described by config.
inline bool is_efficient(const BimatrixGame& game, const SpaceConfig& config) {
  const int total = game.total();
  if (total == config.efficient_total()) return true;
  if (total == config.base_total) return false;
  throw Error(ErrorCode::kNotMember, "game total " + std::to_string(total) +
                                         " matches neither base total " +
                                         std::to_string(config.base_total) + " nor " +
                                         std::to_string(config.efficient_total()));
}

// ---- space ----------------------------------------------------------------

struct GameSpace {
  SpaceConfig config;
  std::map<FeatureVector, BimatrixGame> games;

  const BimatrixGame& game(FeatureVector fv) const {
    auto it = games.find(fv);
    if (it == games.end())
      throw Error(ErrorCode::kMissingLabel, "no game for label " + fv.label());
    return it->second;
  }
  bool contains(FeatureVector fv) const { return games.count(fv) != 0; }
};

namespace detail {

struct VertexConstraints {
  bool stable = false;
  bool fair = false;
  std::optional<bool> aligned;
  bool zero_miscoordination = true;
  int total = 0;
  int bound = 0;
};

inline bool satisfies(const BimatrixGame& g, const VertexConstraints& k) {
  if (!g.has_zero_cell() || !is_strict(g)) return false;
  if (is_fair(g) != k.fair) return false;
  const auto eqs = pure_nash_equilibria(g);
  if (k.stable) {
    if (eqs.size() != 1 || payoff(g, eqs[0]).is_zero()) return false;
  } else {
    if (eqs.size() != 2 || !is_ambiguous(g)) return false;
    if (k.zero_miscoordination) {
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          const ActionProfile p{action_from_index(r), action_from_index(c)};
          if (std::find(eqs.begin(), eqs.end(), p) == eqs.end() && !g.cell(r, c).is_zero())
            return false;
        }
    }
  }
  if (k.aligned && is_aligned(g) != *k.aligned) return false;
  return true;
}

// Lexicographic row-major enumeration: entries ordered TL.u1, TL.u2, TR.u1,
// TR.u2, BL.u1, BL.u2, BR.u1, BR.u2, each ascending from 0. Only matrices
// with the exact target total are visited.
inline std::optional<BimatrixGame> first_match(const VertexConstraints& k) {
  std::array<int, 8> v{};
  std::optional<BimatrixGame> found;
  auto build = [&] {
    BimatrixGame::Cells cells{};
    for (int i = 0; i < 4; ++i) cells[i / 2][i % 2] = {v[2 * i], v[2 * i + 1]};
    return BimatrixGame("", cells);
  };
  auto rec = [&](auto&& self, int pos, int partial) -> bool {
    const int remaining = 8 - pos;
    if (remaining == 1) {
      const int last = k.total - partial;
      if (last < 0 || last > k.bound) return false;
      v[7] = last;
      BimatrixGame g = build();
      if (satisfies(g, k)) {
        found = g;
        return true;
      }
      return false;
    }
    for (int x = 0; x <= k.bound; ++x) {
      const int p = partial + x;
      if (p > k.total) break;
      if (p + (remaining - 1) * k.bound < k.total) continue;
      v[pos] = x;
      if (self(self, pos + 1, p)) return true;
    }
    return false;
  };
  rec(rec, 0, 0);
  return found;
}

}  // namespace detail

inline GameSpace generate_space(const SpaceConfig& config) {
  config.validate();
  GameSpace space{config, {}};
  space.config.zero_miscoordination = config.zero_miscoordination_enabled();
  const int n = config.feature_count;
  const int eff = static_cast<int>(Feature::kEfficiency);
  const bool scale = config.integral_scaling && config.efficiency_multiplier.is_integer();

  auto constraints_for = [&](FeatureVector fv) {
    detail::VertexConstraints k;
    k.stable = fv.has(Feature::kStability);
    k.fair = fv.has(Feature::kFairness);
    if (n == 4) k.aligned = fv.has(Feature::kAlignment);
    k.zero_miscoordination = config.zero_miscoordination_enabled();
    k.total = fv.has(Feature::kEfficiency) ? config.efficient_total() : config.base_total;
    k.bound = config.payoff_bound;
    if (fv.has(Feature::kEfficiency))
      k.bound = static_cast<int>((config.efficiency_multiplier * Rational(config.payoff_bound)).round());
    return k;
  };

  for (FeatureVector fv : all_vertices(n)) {
    std::optional<BimatrixGame> g;
    if (fv.has(eff) && scale) {
      const FeatureVector base = fv.with(eff, false);
      g = space.games.at(base).scaled(static_cast<int>(config.efficiency_multiplier.num()));
    } else {
      g = detail::first_match(constraints_for(fv));
    }
    if (!g)
      throw Error(ErrorCode::kUnsatisfiableConfig,
                  "no game within bounds for vertex " + fv.label());
    g->set_id("game-" + fv.label());
    space.games.emplace(fv, *g);
  }
  return space;
}

struct VertexCheck {
  FeatureVector label;
  std::vector<std::pair<std::string, bool>> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& [name, ok] : checks)
      if (!ok) out.push_back(name);
    return out;
  }
};

struct VerifyReport {
  std::vector<VertexCheck> vertices;

  std::size_t failure_count() const {
    std::size_t n = 0;
    for (const auto& v : vertices) n += v.failures().size();
    return n;
  }
  bool passed() const { return failure_count() == 0; }
};

inline VerifyReport verify_space(const GameSpace& space) {
  VerifyReport report;
  for (const auto& [fv, game] : space.games) {
    VertexCheck vc{fv, {}};
    vc.checks.emplace_back("stability", is_stable(game) == fv.has(Feature::kStability));
    bool eff_ok = false;
    try {
      eff_ok = is_efficient(game, space.config) == fv.has(Feature::kEfficiency);
    } catch (const Error&) {
      eff_ok = false;
    }
    vc.checks.emplace_back("efficiency", eff_ok);
    vc.checks.emplace_back("fairness", is_fair(game) == fv.has(Feature::kFairness));
    if (fv.feature_count() == 4)
      vc.checks.emplace_back("alignment", is_aligned(game) == fv.has(Feature::kAlignment));
    vc.checks.emplace_back("zero_cell", game.has_zero_cell());
    const int bound = fv.has(Feature::kEfficiency)
                          ? static_cast<int>((space.config.efficiency_multiplier * Rational(space.config.payoff_bound)).round())
                          : space.config.payoff_bound;
    bool in_range = true;
    for (const auto& row : game.cells())
      for (const auto& c : row) in_range = in_range && c.u1 >= 0 && c.u2 >= 0 && c.u1 <= bound && c.u2 <= bound;
    vc.checks.emplace_back("payoff_range", in_range);
    if (fv.has(Feature::kStability)) {
      const auto eqs = pure_nash_equilibria(game);
      vc.checks.emplace_back("nonzero_equilibrium",
                             eqs.size() == 1 && !payoff(game, eqs[0]).is_zero());
    }
    report.vertices.push_back(std::move(vc));
  }
  return report;
}

struct ComparisonPair {
  FeatureVector low;
  FeatureVector high;

  std::string key() const { return low.label() + "-" + high.label(); }
  friend bool operator==(const ComparisonPair&, const ComparisonPair&) = default;
  friend auto operator<=>(const ComparisonPair&, const ComparisonPair&) = default;
};

// All hypercube edges, ordered by low vertex then by feature priority.
inline std::vector<ComparisonPair> comparison_pairs(int feature_count) {
  std::vector<ComparisonPair> out;
  for (FeatureVector low : all_vertices(feature_count))
    for (int f = 0; f < feature_count; ++f)
      if (!low.has(f)) out.push_back({low, low.with(f, true)});
  return out;
}

inline std::vector<ComparisonPair> comparison_pairs(const GameSpace& space) {
  return comparison_pairs(space.config.feature_count);
}

// ---- serialization ---------------------------------------------------------

inline nlohmann::ordered_json to_json(const SpaceConfig& c) {
  nlohmann::ordered_json j;
  j["feature_count"] = c.feature_count;
  j["efficiency_multiplier"] = c.efficiency_multiplier.str();
  j["payoff_bound"] = c.payoff_bound;
  j["base_total"] = c.base_total;
  j["rng_seed"] = c.rng_seed;
  j["search_order"] = c.search_order;
  j["zero_miscoordination"] = c.zero_miscoordination_enabled();
  j["integral_scaling"] = c.integral_scaling;
  return j;
}

inline SpaceConfig space_config_from_json(const nlohmann::json& j) {
  try {
    SpaceConfig c;
    c.feature_count = j.at("feature_count").get<int>();
    const auto& m = j.at("efficiency_multiplier");
    c.efficiency_multiplier = m.is_string() ? Rational::parse(m.get<std::string>())
                                            : Rational::parse(m.dump());
    c.payoff_bound = j.at("payoff_bound").get<int>();
    c.base_total = j.at("base_total").get<int>();
    c.rng_seed = j.value("rng_seed", std::uint64_t{0});
    c.search_order = j.value("search_order", std::string("lex-row-major"));
    if (j.contains("zero_miscoordination"))
      c.zero_miscoordination = j.at("zero_miscoordination").get<bool>();
    c.integral_scaling = j.value("integral_scaling", true);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

inline nlohmann::ordered_json to_json(const GameSpace& space) {
  nlohmann::ordered_json games = nlohmann::ordered_json::object();
  for (const auto& [fv, g] : space.games) games[fv.label()] = to_json(g);
  return {{"config", to_json(space.config)}, {"games", games}};
}

inline GameSpace space_from_json(const nlohmann::json& j) {
  GameSpace space;
  try {
    space.config = space_config_from_json(j.at("config"));
    for (const auto& [label, g] : j.at("games").items())
      space.games.emplace(FeatureVector::parse(label), game_from_json(g));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return space;
}

inline std::string to_string(const VerifyReport& report) {
  std::string out;
  for (const auto& v : report.vertices) {
    out += v.label.label();
    for (const auto& [name, ok] : v.checks) out += " " + name + "=" + (ok ? "pass" : "FAIL");
    out += "\n";
  }
  out += "failures: " + std::to_string(report.failure_count()) + "\n";
  return out;
}

}  // namespace instgame
