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

// Trial and preference records shared by the simulator, the matchmaking
// service, and the analysis pipeline, plus their line-delimited JSON form.

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/error.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/game_core.hpp"

namespace instgame {

enum class Source : std::uint8_t { kHuman, kAgent, kSeed };

constexpr std::string_view to_string(Source s) {
  switch (s) {
    case Source::kHuman: return "human";
    case Source::kAgent: return "agent";
    case Source::kSeed: return "seed";
  }
  return "?";
}

inline Source source_from_string(std::string_view s) {
  if (s == "human") return Source::kHuman;
  if (s == "agent") return Source::kAgent;
  if (s == "seed") return Source::kSeed;
  throw Error(ErrorCode::kParse, "unknown source '" + std::string(s) + "'");
}

// Play stages of the session protocol; only these ever carry trials.
enum class PlayStage : std::uint8_t { kStage1 = 1, kStage2 = 2, kStage4 = 4 };

constexpr std::string_view to_string(PlayStage s) {
  switch (s) {
    case PlayStage::kStage1: return "Stage1";
    case PlayStage::kStage2: return "Stage2";
    case PlayStage::kStage4: return "Stage4";
  }
  return "?";
}

inline PlayStage play_stage_from_string(std::string_view s) {
  if (s == "Stage1") return PlayStage::kStage1;
  if (s == "Stage2") return PlayStage::kStage2;
  if (s == "Stage4") return PlayStage::kStage4;
  throw Error(ErrorCode::kParse, "unknown play stage '" + std::string(s) + "'");
}

struct Trial {
  std::string trial_id;
  std::string session_id;
  int condition_id = 0;
  FeatureVector game_label;
  Transformation transformation = Transformation::kIdentity;
  Role role_of_session = Role::kPlayer2;
  Action a1 = Action::k0;  // canonical orientation
  Action a2 = Action::k0;
  PayoffPair payoffs;
  Source p1_source = Source::kAgent;
  Source p2_source = Source::kAgent;
  PlayStage stage = PlayStage::kStage1;
  std::int64_t timestamp = 0;
  std::string p1_session_id;  // empty for seed moves

  bool involves_seed() const {
    return p1_source == Source::kSeed || p2_source == Source::kSeed;
  }
  friend bool operator==(const Trial&, const Trial&) = default;
};

struct PreferenceRecord {
  std::string session_id;
  int condition_id = 0;
  ComparisonPair pair;
  FeatureVector chosen;
  std::int64_t timestamp = 0;
  friend bool operator==(const PreferenceRecord&, const PreferenceRecord&) = default;
};

struct Dataset {
  std::vector<Trial> trials;
  std::vector<PreferenceRecord> preferences;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Column order of the trial export.
inline constexpr std::array<std::string_view, 14> kTrialColumns = {
    "trial_id", "session_id", "condition_id", "game_label", "transformation",
    "role_of_session", "a1", "a2", "u1", "u2", "p1_source", "p2_source", "stage", "timestamp"};

inline nlohmann::ordered_json to_json(const Trial& t) {
  nlohmann::ordered_json j;
  j["trial_id"] = t.trial_id;
  j["session_id"] = t.session_id;
  j["condition_id"] = t.condition_id;
  j["game_label"] = t.game_label.label();
  j["transformation"] = std::string(to_string(t.transformation));
  j["role_of_session"] = std::string(to_string(t.role_of_session));
  j["a1"] = index(t.a1);
  j["a2"] = index(t.a2);
  j["u1"] = t.payoffs.u1;
  j["u2"] = t.payoffs.u2;
  j["p1_source"] = std::string(to_string(t.p1_source));
  j["p2_source"] = std::string(to_string(t.p2_source));
  j["stage"] = std::string(to_string(t.stage));
  j["timestamp"] = t.timestamp;
  j["p1_session_id"] = t.p1_session_id;
  return j;
}

inline Trial trial_from_json(const nlohmann::json& j) {
  try {
    Trial t;
    t.trial_id = j.at("trial_id").get<std::string>();
    t.session_id = j.at("session_id").get<std::string>();
    t.condition_id = j.at("condition_id").get<int>();
    t.game_label = FeatureVector::parse(j.at("game_label").get<std::string>());
    t.transformation = transformation_from_string(j.at("transformation").get<std::string>());
    t.role_of_session = role_from_string(j.at("role_of_session").get<std::string>());
    const int a1 = j.at("a1").get<int>();
    const int a2 = j.at("a2").get<int>();
    if ((a1 != 0 && a1 != 1) || (a2 != 0 && a2 != 1))
      throw Error(ErrorCode::kParse, "actions must be 0 or 1");
    t.a1 = action_from_index(a1);
    t.a2 = action_from_index(a2);
    t.payoffs = {j.at("u1").get<int>(), j.at("u2").get<int>()};
    t.p1_source = source_from_string(j.at("p1_source").get<std::string>());
    t.p2_source = source_from_string(j.at("p2_source").get<std::string>());
    t.stage = play_stage_from_string(j.at("stage").get<std::string>());
    t.timestamp = j.value("timestamp", std::int64_t{0});
    t.p1_session_id = j.value("p1_session_id", std::string{});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("trial record: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const PreferenceRecord& p) {
  nlohmann::ordered_json j;
  j["session_id"] = p.session_id;
  j["condition_id"] = p.condition_id;
  j["low"] = p.pair.low.label();
  j["high"] = p.pair.high.label();
  j["chosen"] = p.chosen.label();
  j["timestamp"] = p.timestamp;
  return j;
}

inline PreferenceRecord preference_from_json(const nlohmann::json& j) {
  try {
    PreferenceRecord p;
    p.session_id = j.at("session_id").get<std::string>();
    p.condition_id = j.value("condition_id", 0);
    p.pair = {FeatureVector::parse(j.at("low").get<std::string>()),
              FeatureVector::parse(j.at("high").get<std::string>())};
    p.chosen = FeatureVector::parse(j.at("chosen").get<std::string>());
    if (p.chosen != p.pair.low && p.chosen != p.pair.high)
      throw Error(ErrorCode::kParse, "chosen label " + p.chosen.label() + " not in pair");
    p.timestamp = j.value("timestamp", std::int64_t{0});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("preference record: ") + e.what());
  }
}

template <typename Record>
void write_jsonl(std::ostream& os, const std::vector<Record>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

template <typename Record>
std::string to_jsonl(const std::vector<Record>& records) {
  std::ostringstream os;
  write_jsonl(os, records);
  return os.str();
}

template <typename Parse>
auto read_jsonl(std::istream& is, Parse parse) {
  std::vector<decltype(parse(nlohmann::json{}))> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": invalid JSON");
    out.push_back(parse(j));
  }
  return out;
}

inline std::vector<Trial> read_trials(std::istream& is) { return read_jsonl(is, trial_from_json); }
inline std::vector<PreferenceRecord> read_preferences(std::istream& is) {
  return read_jsonl(is, preference_from_json);
}

}  // namespace instgame

namespace instgame {

// An experiment condition: one comparison pair at one presentation. The
// presentation is the one used for the side-by-side choice screen; rounds
// draw their own presentations.
struct Condition {
  int condition_id = 0;
  ComparisonPair pair;
  Transformation transformation = Transformation::kIdentity;
};

inline std::vector<Condition> make_conditions(int feature_count) {
  std::vector<Condition> out;
  const auto pairs = comparison_pairs(feature_count);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (auto t : kAllTransformations)
      out.push_back({static_cast<int>(p * 8 + index(t)), pairs[p], t});
  return out;
}

}  // namespace instgame
