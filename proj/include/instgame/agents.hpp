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

// Simulated players: within-game policies, between-game preference models,
// the hypercube walk, and session/cohort simulators that mirror the human
// protocol and emit the same dataset format as the live service.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "instgame/error.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/game_core.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame {

enum class PolicyKind : std::uint8_t {
  kUniformRandom,
  kMyopicBestResponse,
  kFictitiousPlay,
  kEquilibriumSeeker,
};

enum class TieBreak : std::uint8_t { kUniform, kLowest };

struct AgentPolicy {
  PolicyKind kind = PolicyKind::kEquilibriumSeeker;
  double pseudo_count = 1.0;  // Laplace prior per opponent action
  double epsilon = 0.0;       // probability of a uniform override
  TieBreak tie_break = TieBreak::kUniform;
  int memory = 3;  // observations a myopic player remembers

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0,1]");
    if (pseudo_count < 0.0) throw Error(ErrorCode::kInvalidArgument, "pseudo_count must be >= 0");
    if (memory < 1) throw Error(ErrorCode::kInvalidArgument, "memory must be >= 1");
  }
};

inline PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "uniform") return PolicyKind::kUniformRandom;
  if (s == "myopic") return PolicyKind::kMyopicBestResponse;
  if (s == "fictitious") return PolicyKind::kFictitiousPlay;
  if (s == "equilibrium") return PolicyKind::kEquilibriumSeeker;
  throw Error(ErrorCode::kInvalidArgument, "unknown policy '" + std::string(s) + "'");
}

// What one player has seen of opponents in one game, in canonical actions,
// split by the role the player held at the time.
class BeliefState {
 public:
  void observe(Role own_role, Action opponent_action) {
    seen_[static_cast<int>(own_role)].push_back(opponent_action);
  }

  const std::vector<Action>& observations(Role own_role) const {
    return seen_[static_cast<int>(own_role)];
  }

  // Smoothed frequencies of the opponent's canonical actions. A window of 0
  // uses the full history.
  std::array<double, 2> probabilities(Role own_role, double pseudo_count,
                                      std::size_t window = 0) const {
    const auto& obs = observations(own_role);
    const std::size_t start = window == 0 || obs.size() <= window ? 0 : obs.size() - window;
    std::array<double, 2> counts = {pseudo_count, pseudo_count};
    for (std::size_t i = start; i < obs.size(); ++i) counts[index(obs[i])] += 1.0;
    const double n = counts[0] + counts[1];
    if (n <= 0.0) return {0.5, 0.5};
    return {counts[0] / n, counts[1] / n};
  }

 private:
  std::array<std::vector<Action>, 2> seen_;
};

namespace detail {

inline int best_response(const Presentation& view, const std::array<double, 2>& opp_canonical,
                         TieBreak tie_break, Rng& rng) {
  const Role opp = other(view.role);
  std::array<double, 2> value{};
  for (int d = 0; d < 2; ++d)
    for (Action a : kActions)
      value[d] += opp_canonical[index(a)] *
                  view.own_payoff(d, to_displayed(opp, view.transformation, a));
  if (std::abs(value[0] - value[1]) <= 1e-12)
    return tie_break == TieBreak::kLowest ? 0 : uniform_index(rng, 2);
  return value[0] > value[1] ? 0 : 1;
}

}  // namespace detail

// Returns the canonical action the agent takes when shown `view`.
inline Action act(const AgentPolicy& policy, const Presentation& view, const BeliefState& belief,
                  Rng& rng) {
  if (policy.epsilon > 0.0 && coin(rng, policy.epsilon)) return action_from_index(uniform_index(rng, 2));

  const Role role = view.role;
  const Transformation t = view.transformation;
  auto fictitious = [&] {
    const auto p = belief.probabilities(role, policy.pseudo_count);
    return to_canonical(role, t, detail::best_response(view, p, policy.tie_break, rng));
  };

  switch (policy.kind) {
    case PolicyKind::kUniformRandom:
      return action_from_index(uniform_index(rng, 2));
    case PolicyKind::kMyopicBestResponse: {
      const auto p = belief.probabilities(role, policy.pseudo_count,
                                          static_cast<std::size_t>(policy.memory));
      return to_canonical(role, t, detail::best_response(view, p, policy.tie_break, rng));
    }
    case PolicyKind::kFictitiousPlay:
      return fictitious();
    case PolicyKind::kEquilibriumSeeker: {
      const auto eqs = pure_nash_equilibria(view.board);
      if (eqs.size() != 1) return fictitious();
      const ActionProfile& e = eqs.front();
      const int displayed = view.chooses == Axis::kRows ? index(e.a1) : index(e.a2);
      return to_canonical(role, t, displayed);
    }
  }
  return Action::k0;
}

// ---- preference models ----------------------------------------------------

struct TableEntry {
  double p_high = 0.5;  // probability of choosing the pair's high vertex
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

struct Lexicographic {
  std::vector<int> order;  // feature indices, highest priority first
};
struct ExperiencedPayoff {};
struct EmpiricalTable {
  std::map<ComparisonPair, TableEntry> entries;
};

using PreferenceModel = std::variant<Lexicographic, ExperiencedPayoff, EmpiricalTable>;

// Own realized payoffs per game.
using Experience = std::map<FeatureVector, std::vector<int>>;

inline Lexicographic lexicographic(std::vector<Feature> order) {
  Lexicographic lex;
  for (Feature f : order) lex.order.push_back(static_cast<int>(f));
  return lex;
}

inline void validate(const PreferenceModel& model, int feature_count) {
  if (const auto* lex = std::get_if<Lexicographic>(&model)) {
    std::vector<int> sorted = lex->order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(static_cast<std::size_t>(feature_count));
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected)
      throw Error(ErrorCode::kInvalidArgument, "lexicographic order must permute the features");
  } else if (const auto* table = std::get_if<EmpiricalTable>(&model)) {
    for (const auto& [pair, e] : table->entries)
      if (!(e.p_high >= 0.0 && e.p_high <= 1.0))
        throw Error(ErrorCode::kInvalidArgument, "table probability outside [0,1] for " + pair.key());
  }
}

// Probability with confidence bounds that `candidate` is chosen over
// `current`; nullopt when an empirical table has no entry for the edge.
struct ChoiceOdds {
  double p = 0.5;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

inline ComparisonPair edge(FeatureVector a, FeatureVector b) {
  return a.value() < b.value() ? ComparisonPair{a, b} : ComparisonPair{b, a};
}

inline std::optional<ChoiceOdds> choice_odds(const PreferenceModel& model, FeatureVector current,
                                             FeatureVector candidate,
                                             const Experience* experience = nullptr) {
  return std::visit(
      [&](const auto& m) -> std::optional<ChoiceOdds> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Lexicographic>) {
          for (int f : m.order)
            if (current.has(f) != candidate.has(f))
              return ChoiceOdds{candidate.has(f) ? 1.0 : 0.0, {}, {}};
          return ChoiceOdds{0.0, {}, {}};
        } else if constexpr (std::is_same_v<M, ExperiencedPayoff>) {
          auto mean = [&](FeatureVector fv) {
            const std::vector<int>* h = nullptr;
            if (experience) {
              auto it = experience->find(fv);
              if (it != experience->end()) h = &it->second;
            }
            if (!h || h->empty())
              throw Error(ErrorCode::kMissingExperience, "no payoff history for " + fv.label());
            return std::accumulate(h->begin(), h->end(), 0.0) / static_cast<double>(h->size());
          };
          const double a = mean(current);
          const double b = mean(candidate);
          return ChoiceOdds{b > a ? 1.0 : (b < a ? 0.0 : 0.5), {}, {}};
        } else {
          auto it = m.entries.find(edge(current, candidate));
          if (it == m.entries.end()) return std::nullopt;
          const TableEntry& e = it->second;
          if (candidate.value() > current.value()) return ChoiceOdds{e.p_high, e.ci_low, e.ci_high};
          std::optional<double> lo, hi;
          if (e.ci_high) lo = 1.0 - *e.ci_high;
          if (e.ci_low) hi = 1.0 - *e.ci_low;
          return ChoiceOdds{1.0 - e.p_high, lo, hi};
        }
      },
      model);
}

inline FeatureVector prefer(const PreferenceModel& model, const ComparisonPair& pair,
                            const GameSpace& space, const Experience& experience, Rng& rng) {
  if (!space.contains(pair.low) || !space.contains(pair.high))
    throw Error(ErrorCode::kMissingLabel, "pair " + pair.key() + " not in space");
  const auto odds = choice_odds(model, pair.low, pair.high, &experience);
  if (!odds) throw Error(ErrorCode::kMissingPair, "no table entry for " + pair.key());
  if (odds->p >= 1.0) return pair.high;
  if (odds->p <= 0.0) return pair.low;
  return coin(rng, odds->p) ? pair.high : pair.low;
}

// ---- hypercube walk --------------------------------------------------------

enum class Acceptance : std::uint8_t {
  kSample,               // Bernoulli draw with the choice probability
  kPointMajority,        // p > 1/2
  kSignificantMajority,  // lower confidence bound > 1/2 (falls back to p when absent)
};

inline Acceptance acceptance_from_string(std::string_view s) {
  if (s == "sample") return Acceptance::kSample;
  if (s == "majority") return Acceptance::kPointMajority;
  if (s == "significant") return Acceptance::kSignificantMajority;
  throw Error(ErrorCode::kInvalidArgument, "unknown acceptance '" + std::string(s) + "'");
}

struct WalkResult {
  std::vector<FeatureVector> trajectory;
  FeatureVector attractor;
  int steps = 0;
  bool absorbed = false;
};

inline WalkResult run_walk(const GameSpace& space, FeatureVector start,
                           const PreferenceModel& model, int max_steps, Rng& rng,
                           Acceptance acceptance = Acceptance::kSample,
                           const Experience* experience = nullptr) {
  if (!space.contains(start))
    throw Error(ErrorCode::kMissingLabel, "walk start " + start.label() + " not in space");
  const int k = start.feature_count();
  std::vector<int> scan(static_cast<std::size_t>(k));
  std::iota(scan.begin(), scan.end(), 0);
  if (const auto* lex = std::get_if<Lexicographic>(&model)) scan = lex->order;

  auto accepts = [&](const ChoiceOdds& o) {
    switch (acceptance) {
      case Acceptance::kSample:
        return o.p >= 1.0 ? true : (o.p <= 0.0 ? false : coin(rng, o.p));
      case Acceptance::kPointMajority:
        return o.p > 0.5;
      case Acceptance::kSignificantMajority:
        return o.ci_low ? *o.ci_low > 0.5 : o.p > 0.5;
    }
    return false;
  };

  WalkResult result;
  FeatureVector here = start;
  result.trajectory.push_back(here);
  while (true) {
    std::optional<FeatureVector> next;
    for (int f : scan) {
      const FeatureVector cand = here.flipped(f);
      if (!space.contains(cand)) continue;
      const auto odds = choice_odds(model, here, cand, experience);
      if (odds && accepts(*odds)) {
        next = cand;
        break;
      }
    }
    if (!next) {
      result.absorbed = true;
      break;
    }
    if (result.steps >= max_steps) break;
    here = *next;
    result.trajectory.push_back(here);
    ++result.steps;
  }
  result.attractor = here;
  return result;
}

// ---- session and cohort simulation -----------------------------------------

struct SessionPlan {
  std::string session_id;
  int condition_id = 0;
  ComparisonPair pair;
  bool low_first = true;
};

struct SessionOutcome {
  std::vector<Trial> trials;
  PreferenceRecord preference;
};

// Each round the participant meets a stranger running the same policy with
// no history, at a table whose role and presentation are drawn uniformly.
inline SessionOutcome simulate_session(const GameSpace& space, const SessionPlan& plan,
                                       const AgentPolicy& policy, const PreferenceModel& model,
                                       int rounds_per_stage, Rng& rng) {
  if (rounds_per_stage < 1) throw Error(ErrorCode::kInvalidArgument, "rounds_per_stage must be >= 1");
  policy.validate();
  const FeatureVector first = plan.low_first ? plan.pair.low : plan.pair.high;
  const FeatureVector second = plan.low_first ? plan.pair.high : plan.pair.low;

  SessionOutcome out;
  std::map<FeatureVector, BeliefState> beliefs;
  Experience experience;
  std::int64_t clock = 0;

  auto play_stage = [&](FeatureVector label, PlayStage stage) {
    const BimatrixGame& game = space.game(label);
    for (int r = 0; r < rounds_per_stage; ++r) {
      const Role role = uniform_index(rng, 2) == 0 ? Role::kPlayer1 : Role::kPlayer2;
      const Transformation t = kAllTransformations[uniform_index(rng, 8)];
      BeliefState& mine = beliefs[label];
      const BeliefState stranger;
      const Action own = act(policy, viewer_presentation(game, role, t), mine, rng);
      const Action theirs = act(policy, viewer_presentation(game, other(role), t), stranger, rng);
      const Action a1 = role == Role::kPlayer1 ? own : theirs;
      const Action a2 = role == Role::kPlayer1 ? theirs : own;
      const PayoffPair pay = payoff(game, a1, a2);
      mine.observe(role, theirs);
      experience[label].push_back(role == Role::kPlayer1 ? pay.u1 : pay.u2);

      Trial tr;
      tr.trial_id = plan.session_id + "-" + std::to_string(clock);
      tr.session_id = plan.session_id;
      tr.condition_id = plan.condition_id;
      tr.game_label = label;
      tr.transformation = t;
      tr.role_of_session = role;
      tr.a1 = a1;
      tr.a2 = a2;
      tr.payoffs = pay;
      tr.p1_source = Source::kAgent;
      tr.p2_source = Source::kAgent;
      tr.stage = stage;
      tr.timestamp = clock++;
      tr.p1_session_id = role == Role::kPlayer1 ? plan.session_id : std::string{};
      out.trials.push_back(std::move(tr));
    }
  };

  play_stage(first, PlayStage::kStage1);
  play_stage(second, PlayStage::kStage2);
  const FeatureVector chosen = prefer(model, plan.pair, space, experience, rng);
  out.preference = {plan.session_id, plan.condition_id, plan.pair, chosen, clock};
  play_stage(chosen, PlayStage::kStage4);
  return out;
}

struct CohortOptions {
  int rounds_per_stage = 6;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::string id_prefix = "sim";
};

// Balanced assignment: participant i gets slot i mod C of a seeded shuffle
// of the conditions, reshuffled every block of C participants.
inline std::vector<std::size_t> balanced_assignment(std::size_t n_conditions,
                                                    std::size_t n_participants,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> out;
  out.reserve(n_participants);
  std::vector<std::size_t> perm(n_conditions);
  for (std::size_t i = 0; i < n_participants; ++i) {
    const std::size_t slot = i % n_conditions;
    if (slot == 0) {
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng = derive_rng(seed, "assign-block-" + std::to_string(i / n_conditions));
      std::shuffle(perm.begin(), perm.end(), rng);
    }
    out.push_back(perm[slot]);
  }
  return out;
}

inline Dataset simulate_cohort(const GameSpace& space, const std::vector<Condition>& conditions,
                               std::size_t n_participants, const AgentPolicy& policy,
                               const PreferenceModel& model, const CohortOptions& options = {}) {
  if (conditions.empty()) throw Error(ErrorCode::kInvalidArgument, "no conditions");
  validate(model, space.config.feature_count);
  const auto assignment = balanced_assignment(conditions.size(), n_participants, options.seed);

  std::vector<SessionOutcome> outcomes(n_participants);
  auto run_one = [&](std::size_t i) {
    Rng rng = derive_rng(options.seed, static_cast<std::uint64_t>(i));
    const Condition& c = conditions[assignment[i]];
    char id[32];
    std::snprintf(id, sizeof id, "%s-%06zu", options.id_prefix.c_str(), i);
    SessionPlan plan{id, c.condition_id, c.pair, coin(rng)};
    outcomes[i] = simulate_session(space, plan, policy, model, options.rounds_per_stage, rng);
  };

  unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_participants)));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n_participants; i += workers) run_one(i);
    }));
  }
  for (auto& j : jobs) j.get();

  Dataset data;
  for (auto& o : outcomes) {
    data.trials.insert(data.trials.end(), o.trials.begin(), o.trials.end());
    data.preferences.push_back(std::move(o.preference));
  }
  return data;
}

}  // namespace instgame
