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

// Estimates observed in the original human study of the three-feature
// space, used as fixtures and as an EmpiricalTable preference model. Edges
// 110-111 and 101-111 were never measured and are absent.

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "instgame/agents.hpp"
#include "instgame/analysis.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame::fixtures {

inline ComparisonPair pair(const char* low, const char* high) {
  return {FeatureVector::parse(low), FeatureVector::parse(high)};
}

// Probability of choosing `high` over `low`, with 95% intervals.
inline PairEstimates observed_preferences() {
  return {
      {pair("000", "100"), {0.43, 0.22, 0.65, 0}},
      {pair("000", "010"), {0.86, 0.73, 1.00, 0}},
      {pair("000", "001"), {0.55, 0.38, 0.72, 0}},
      {pair("100", "110"), {0.81, 0.64, 0.95, 0}},
      {pair("100", "101"), {0.65, 0.43, 0.83, 0}},
      {pair("010", "110"), {0.50, 0.29, 0.71, 0}},
      {pair("010", "011"), {0.72, 0.55, 0.86, 0}},
      {pair("001", "011"), {0.88, 0.76, 1.00, 0}},
      {pair("001", "101"), {0.67, 0.52, 0.84, 0}},
      {pair("011", "111"), {0.63, 0.45, 0.82, 0}},
  };
}

inline std::map<FeatureVector, Estimate> observed_cooperation() {
  auto fv = [](const char* s) { return FeatureVector::parse(s); };
  return {
      {fv("000"), {0.49, 0.43, 0.56, 0}}, {fv("100"), {0.94, 0.90, 0.97, 0}},
      {fv("010"), {0.56, 0.49, 0.62, 0}}, {fv("001"), {0.48, 0.41, 0.54, 0}},
      {fv("110"), {0.89, 0.84, 0.93, 0}}, {fv("101"), {0.93, 0.90, 0.96, 0}},
      {fv("011"), {0.49, 0.43, 0.56, 0}}, {fv("111"), {0.95, 0.92, 0.97, 0}},
  };
}

inline EmpiricalTable empirical_table(const PairEstimates& estimates) {
  EmpiricalTable t;
  for (const auto& [p, e] : estimates) t.entries[p] = TableEntry{e.value, e.ci_low, e.ci_high};
  return t;
}

struct CohortShape {
  std::size_t participants = 310;
  std::size_t dropped_before_choice = 9;
  std::size_t trials = 3951;
  std::size_t seed_trials = 409;
};

// A synthetic dataset with the given accounting. Every participant appears
// as the recorded Player 2 of some trials; the first `dropped_before_choice`
// participants have no preference record. Outcomes follow the observed
// cooperation rates and choices follow the observed preference table.
inline Dataset shaped_dataset(const GameSpace& space, std::uint64_t seed, const CohortShape& shape = {}) {
  if (space.config.feature_count != 3) throw Error(ErrorCode::kInvalidArgument, "shaped dataset needs a 3-feature space");
  if (shape.participants < 2 || shape.dropped_before_choice > shape.participants ||
      shape.seed_trials > shape.trials || shape.trials < shape.participants)
    throw Error(ErrorCode::kInvalidArgument, "inconsistent cohort shape");
  Rng rng = derive_rng(seed, "shaped-dataset");
  const auto conditions = make_conditions(3);
  const auto coop = observed_cooperation();
  const auto prefs = observed_preferences();
  const std::size_t n = shape.participants;

  std::vector<std::string> ids(n);
  std::vector<const Condition*> condition(n);
  std::vector<bool> low_first(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "p%04zu", i);
    ids[i] = buf;
    condition[i] = &conditions[i % conditions.size()];
    low_first[i] = coin(rng);
  }

  Dataset d;
  std::vector<FeatureVector> chosen(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComparisonPair& pair = condition[i]->pair;
    auto it = prefs.find(pair);
    const double p_high = it == prefs.end() ? 0.5 : it->second.value;
    chosen[i] = coin(rng, p_high) ? pair.high : pair.low;
    if (i >= shape.dropped_before_choice)
      d.preferences.push_back({ids[i], condition[i]->condition_id, pair, chosen[i], 1000 + static_cast<std::int64_t>(i)});
  }

  std::vector<std::size_t> order(shape.trials);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_seed(shape.trials, false);
  for (std::size_t k = 0; k < shape.seed_trials; ++k) is_seed[order[k]] = true;

  for (std::size_t j = 0; j < shape.trials; ++j) {
    const std::size_t i = j % n;
    const std::size_t round = j / n;
    const bool chooser = i >= shape.dropped_before_choice;
    const ComparisonPair& pair = condition[i]->pair;
    const FeatureVector first = low_first[i] ? pair.low : pair.high;
    const FeatureVector second = low_first[i] ? pair.high : pair.low;
    // Choosers cycle through the three play stages; dropouts never reach Stage 4.
    const std::size_t phase = chooser ? round % 3 : round % 2;
    const PlayStage stage = phase == 0 ? PlayStage::kStage1 : phase == 1 ? PlayStage::kStage2 : PlayStage::kStage4;
    const FeatureVector label = phase == 0 ? first : phase == 1 ? second : chosen[i];
    const BimatrixGame& game = space.game(label);
    // Cooperative rounds land on a nonzero cell, the rest on a zero cell.
    const bool cooperative = coin(rng, coop.at(label).value);
    std::vector<ActionProfile> cells;
    for (Action a1 : kActions)
      for (Action a2 : kActions)
        if (payoff(game, a1, a2).is_zero() != cooperative) cells.push_back({a1, a2});
    const ActionProfile a = cells[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(cells.size())))];

    Trial t;
    t.trial_id = "f" + std::to_string(j);
    t.session_id = ids[i];
    t.condition_id = condition[i]->condition_id;
    t.game_label = label;
    t.transformation = kAllTransformations[uniform_index(rng, 8)];
    t.role_of_session = Role::kPlayer2;
    t.a1 = a.a1;
    t.a2 = a.a2;
    t.payoffs = payoff(game, a);
    t.p2_source = Source::kHuman;
    t.stage = stage;
    t.timestamp = static_cast<std::int64_t>(j);
    if (is_seed[j]) {
      t.p1_source = Source::kSeed;
    } else {
      t.p1_source = Source::kHuman;
      t.p1_session_id = ids[(i + 1 + static_cast<std::size_t>(uniform_index(rng, static_cast<int>(n - 1)))) % n];
    }
    d.trials.push_back(std::move(t));
  }
  return d;
}

}  // namespace instgame::fixtures
