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

// Drives a Service with simulated participants through its public
// operations, interleaving many live sessions so that they meet each other
// in the rooms. Records what the participants observed as a Dataset.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "instgame/agents.hpp"
#include "instgame/platform.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame {

struct DriveOptions {
  std::size_t participants = 0;
  std::size_t concurrency = 16;
  AgentPolicy policy{PolicyKind::kEquilibriumSeeker};
  PreferenceModel model = ExperiencedPayoff{};
  std::uint64_t seed = 0;
  double drop_probability = 0.0;  // technical failure just before Choice
};

struct DriveResult {
  Dataset observed;  // trials as returned to the Player 2, preferences as acknowledged
  std::vector<std::string> sessions;
  std::vector<std::string> dropped;
};

namespace detail {

struct DrivenParticipant {
  std::string id;
  bool drops = false;
  std::map<FeatureVector, BeliefState> beliefs;
  Experience experience;
};

}  // namespace detail

inline DriveResult drive_cohort(Service& service, const DriveOptions& options) {
  options.policy.validate();
  if (options.concurrency == 0) throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");
  Rng rng = derive_rng(options.seed, "drive");
  DriveResult result;
  std::vector<detail::DrivenParticipant> live;
  std::size_t created = 0;

  while (created < options.participants || !live.empty()) {
    while (created < options.participants && live.size() < options.concurrency) {
      detail::DrivenParticipant p;
      p.id = service.create_session().session_id;
      p.drops = options.drop_probability > 0.0 && coin(rng, options.drop_probability);
      result.sessions.push_back(p.id);
      live.push_back(std::move(p));
      ++created;
    }
    const std::size_t k = static_cast<std::size_t>(uniform_index(rng, static_cast<int>(live.size())));
    detail::DrivenParticipant& p = live[k];
    const SessionState s = service.session_state(p.id);
    bool finished = false;
    switch (s.stage) {
      case Stage::kTutorial:
      case Stage::kQuiz:
        service.continue_screen(p.id);
        break;
      case Stage::kStage1:
      case Stage::kStage2:
      case Stage::kStage4: {
        const LiveRound& round = *s.live;
        const Presentation view =
            viewer_presentation(service.space().game(round.label), round.role, round.transformation);
        BeliefState& belief = p.beliefs[round.label];
        const Action a = act(options.policy, view, belief, rng);
        const auto outcome =
            service.submit_action(p.id, to_displayed(round.role, round.transformation, a), s.rounds, Source::kAgent);
        if (outcome.at("resolved").get<bool>()) {
          belief.observe(round.role, action_from_index(outcome.at("a1").get<int>()));
          p.experience[round.label].push_back(outcome.at("your_payoff").get<int>());
          result.observed.trials.push_back(trial_from_json(outcome.at("trial")));
        }
        break;
      }
      case Stage::kChoice: {
        if (p.drops) {
          service.drop_session(p.id, "simulated technical error");
          result.dropped.push_back(p.id);
          finished = true;
          break;
        }
        const ComparisonPair pair = service.conditions().at(static_cast<std::size_t>(s.condition_id)).pair;
        FeatureVector chosen;
        try {
          chosen = prefer(options.model, pair, service.space(), p.experience, rng);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMissingExperience) throw;
          chosen = coin(rng) ? pair.high : pair.low;
        }
        const auto ack = service.submit_preference(p.id, chosen.label());
        result.observed.preferences.push_back(preference_from_json(ack.at("record")));
        break;
      }
      case Stage::kSurvey:
        service.submit_survey(p.id, nlohmann::ordered_json::object());
        break;
      case Stage::kDone:
        finished = true;
        break;
    }
    if (finished || service.session_state(p.id).stage == Stage::kDone) {
      live[k] = std::move(live.back());
      live.pop_back();
    }
  }
  return result;
}

}  // namespace instgame
