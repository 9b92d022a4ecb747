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

// The session service: staged protocol per participant, matchmaking rooms
// per game, condition balancing, bonus accounting and data export. All
// mutation goes through emit(), which applies an Event to the state and
// appends it to the log; replaying the log rebuilds identical state.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/analysis.hpp"
#include "instgame/error.hpp"
#include "instgame/event_log.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/game_core.hpp"
#include "instgame/matchmaking.hpp"
#include "instgame/rational.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame {

enum class Stage : std::uint8_t { kTutorial, kQuiz, kStage1, kStage2, kChoice, kStage4, kSurvey, kDone };

constexpr std::string_view to_string(Stage s) {
  constexpr std::array<std::string_view, 8> names = {"Tutorial", "Quiz",   "Stage1", "Stage2",
                                                     "Choice",   "Stage4", "Survey", "Done"};
  return names[static_cast<int>(s)];
}

inline Stage stage_from_string(std::string_view s) {
  for (int i = 0; i < 8; ++i)
    if (to_string(static_cast<Stage>(i)) == s) return static_cast<Stage>(i);
  throw Error(ErrorCode::kParse, "unknown stage '" + std::string(s) + "'");
}

constexpr bool is_play_stage(Stage s) {
  return s == Stage::kStage1 || s == Stage::kStage2 || s == Stage::kStage4;
}

constexpr PlayStage as_play_stage(Stage s) {
  return s == Stage::kStage1 ? PlayStage::kStage1 : s == Stage::kStage2 ? PlayStage::kStage2 : PlayStage::kStage4;
}

constexpr Stage next_stage(Stage s) {
  return s == Stage::kDone ? Stage::kDone : static_cast<Stage>(static_cast<int>(s) + 1);
}

enum class SessionStatus : std::uint8_t { kActive, kAbandoned, kDropped };

constexpr std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::kActive: return "active";
    case SessionStatus::kAbandoned: return "abandoned";
    case SessionStatus::kDropped: return "dropped";
  }
  return "?";
}

struct ServiceConfig {
  int rounds_per_stage = 6;
  std::uint64_t seed = 0;
  int tables_per_room = 8;
  int seeds_per_room = 4;
  int max_tables_per_room = 1 << 20;
  bool pool_bonus_across_transformations = true;
  std::int64_t abandon_timeout_ms = 10 * 60 * 1000;

  void validate() const {
    if (rounds_per_stage < 1) throw Error(ErrorCode::kInvalidArgument, "rounds_per_stage must be >= 1");
    if (tables_per_room < 1) throw Error(ErrorCode::kInvalidArgument, "tables_per_room must be >= 1");
    if (seeds_per_room < 0 || seeds_per_room > tables_per_room)
      throw Error(ErrorCode::kInvalidArgument, "seeds_per_room must lie in [0, tables_per_room]");
  }
};

struct Reveal {
  bool resolved = false;
  Role role = Role::kPlayer1;
  Transformation transformation = Transformation::kIdentity;
  ActionProfile actions;  // canonical; a2 meaningless while pending
  PayoffPair payoffs;
  Rational credited;
};

struct LiveRound {
  FeatureVector label;
  int table_id = 0;
  Role role = Role::kPlayer1;
  Transformation transformation = Transformation::kIdentity;
};

struct SessionState {
  std::string session_id;
  int condition_id = 0;
  bool low_first = true;
  Stage stage = Stage::kTutorial;
  SessionStatus status = SessionStatus::kActive;
  int stage_rounds = 0;  // completed rounds in the current play stage
  int rounds = 0;        // completed rounds overall
  Rational bonus;
  std::optional<FeatureVector> chosen;
  std::optional<LiveRound> live;
  std::optional<Reveal> last_reveal;
  std::int64_t created_at = 0;
  std::int64_t last_activity = 0;
};

struct SessionDescriptor {
  std::string session_id;
  int condition_id = 0;
  std::string tutorial;
};

using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

class Service {
 public:
  Service(GameSpace space, ServiceConfig config, Clock clock = system_clock_ms, EventLog log = {})
      : space_(std::move(space)),
        config_(config),
        clock_(std::move(clock)),
        log_(std::move(log)),
        conditions_(make_conditions(space_.config.feature_count)),
        condition_counts_(conditions_.size(), 0) {
    config_.validate();
    ready_ = !space_.games.empty() && verify_space(space_).passed();
    for (const auto& e : log_.events()) apply(e);
  }

  // Rebuilds a service from an event sequence without touching any file.
  static Service replay(GameSpace space, ServiceConfig config, const std::vector<Event>& events,
                        Clock clock = system_clock_ms) {
    EventLog log;
    for (const auto& e : events) log.append(e);
    return Service(std::move(space), config, std::move(clock), std::move(log));
  }

  bool ready() const { return ready_; }
  const GameSpace& space() const { return space_; }
  const ServiceConfig& config() const { return config_; }
  const std::vector<Condition>& conditions() const { return conditions_; }

  // ---- commands ----------------------------------------------------------

  SessionDescriptor create_session() {
    std::lock_guard lock(mu_);
    if (!ready_) throw Error(ErrorCode::kServiceNotReady, "no verified game space loaded");
    Rng rng = command_rng();
    const int least = *std::min_element(condition_counts_.begin(), condition_counts_.end());
    std::vector<int> candidates;
    for (std::size_t i = 0; i < condition_counts_.size(); ++i)
      if (condition_counts_[i] == least) candidates.push_back(static_cast<int>(i));
    const int condition = candidates[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(candidates.size())))];
    const bool low_first = coin(rng);
    char id[48];
    std::snprintf(id, sizeof id, "s%06zu-%08llx", sessions_.size() + 1,
                  static_cast<unsigned long long>(rng() & 0xffffffffULL));
    emit(EventKind::kSessionCreated,
         {{"session_id", id}, {"condition_id", condition}, {"low_first", low_first}});
    return {id, condition, "tutorial/default"};
  }

  // Pass-through screens (tutorial, comprehension quiz).
  nlohmann::ordered_json continue_screen(const std::string& session_id) {
    std::lock_guard lock(mu_);
    SessionState& s = active_session(session_id);
    if (s.stage != Stage::kTutorial && s.stage != Stage::kQuiz)
      throw Error(ErrorCode::kWrongStage, "no screen to continue in stage " + std::string(to_string(s.stage)));
    Rng rng = command_rng();
    advance(s, rng);
    return view_locked(s);
  }

  nlohmann::ordered_json submit_action(const std::string& session_id, int displayed_choice,
                                       std::optional<int> round_token = std::nullopt,
                                       Source source = Source::kHuman) {
    std::lock_guard lock(mu_);
    SessionState& s = active_session(session_id);
    if (!is_play_stage(s.stage))
      throw Error(ErrorCode::kWrongStage, "actions are not accepted in stage " + std::string(to_string(s.stage)));
    if (round_token && *round_token != s.rounds)
      throw Error(ErrorCode::kDuplicateSubmission, "round " + std::to_string(*round_token) +
                                                       " is not open (current round " + std::to_string(s.rounds) + ")");
    if (displayed_choice != 0 && displayed_choice != 1)
      throw Error(ErrorCode::kInvalidArgument, "choice must be 0 or 1");
    if (!s.live) throw Error(ErrorCode::kStaleSeat, "session " + session_id + " holds no seat");
    Rng rng = command_rng();
    const LiveRound round = *s.live;
    Room& room = rooms_.at(round.label);
    const Seat seat{session_id, round.table_id, round.role};
    const Action canonical = to_canonical(round.role, round.transformation, displayed_choice);
    const RoomEvent move = room.plan_move(seat, canonical, source);

    if (round.role == Role::kPlayer1) {
      const Rational bonus =
          estimate_bonus_p1(room.game(), round.label, round.transformation, canonical, p2_history_,
                            config_.pool_bonus_across_transformations);
      emit(EventKind::kMoveSubmitted, {{"label", round.label.label()},
                                       {"room", to_json(move)},
                                       {"bonus", bonus.str()}});
    } else {
      const Table& table = room.table(round.table_id);
      const ActionProfile actions{table.pending->action, canonical};
      Trial t;
      t.trial_id = "t" + std::to_string(log_.next_seq());
      t.session_id = session_id;
      t.condition_id = s.condition_id;
      t.game_label = round.label;
      t.transformation = round.transformation;
      t.role_of_session = Role::kPlayer2;
      t.a1 = actions.a1;
      t.a2 = actions.a2;
      t.payoffs = payoff(room.game(), actions);
      t.p1_source = table.pending->source;
      t.p2_source = source;
      t.stage = as_play_stage(s.stage);
      t.timestamp = clock_();
      t.p1_session_id = table.pending->session_id;
      emit(EventKind::kTrialResolved, {{"label", round.label.label()},
                                       {"room", to_json(move)},
                                       {"trial", to_json(t)},
                                       {"bonus", std::to_string(t.payoffs.u2)}},
           t.timestamp);
    }
    nlohmann::ordered_json outcome = reveal_json(*s.last_reveal);
    if (round.role == Role::kPlayer2) outcome["trial"] = to_json(trials_.back());
    if (s.stage_rounds >= config_.rounds_per_stage) advance(s, rng);
    else seat_next(s, rng);
    outcome["state"] = view_locked(s);
    return outcome;
  }

  // `choice` is "first"/"second" (as presented) or a game label.
  nlohmann::ordered_json submit_preference(const std::string& session_id, const std::string& choice) {
    std::lock_guard lock(mu_);
    SessionState& s = active_session(session_id);
    if (s.stage != Stage::kChoice)
      throw Error(ErrorCode::kWrongStage, "preference only accepted in Choice stage");
    const Condition& c = conditions_.at(static_cast<std::size_t>(s.condition_id));
    FeatureVector chosen;
    if (choice == "first") chosen = first_game(s);
    else if (choice == "second") chosen = second_game(s);
    else {
      try {
        chosen = FeatureVector::parse(choice);
      } catch (const Error&) {
        throw Error(ErrorCode::kInvalidChoice, "'" + choice + "' is not one of the offered games");
      }
    }
    if (chosen != c.pair.low && chosen != c.pair.high)
      throw Error(ErrorCode::kInvalidChoice, "game " + chosen.label() + " is not in this condition's pair");
    Rng rng = command_rng();
    const std::int64_t now = clock_();
    PreferenceRecord rec{session_id, s.condition_id, c.pair, chosen, now};
    emit(EventKind::kPreferenceChosen, {{"session_id", session_id}, {"record", to_json(rec)}}, now);
    advance(s, rng);
    return {{"ok", true}, {"record", to_json(rec)}};
  }

  nlohmann::ordered_json submit_survey(const std::string& session_id, const nlohmann::ordered_json& answers) {
    std::lock_guard lock(mu_);
    SessionState& s = active_session(session_id);
    if (s.stage != Stage::kSurvey) throw Error(ErrorCode::kWrongStage, "survey only accepted in Survey stage");
    Rng rng = command_rng();
    advance(s, rng, answers);
    return view_locked(s);
  }

  // Technical failure reported by the client or an operator.
  void drop_session(const std::string& session_id, const std::string& reason) {
    std::lock_guard lock(mu_);
    SessionState& s = active_session(session_id);
    if (s.stage == Stage::kDone) throw Error(ErrorCode::kWrongStage, "session " + session_id + " already finished");
    emit(EventKind::kSessionDropped, release_payload(s, reason));
  }

  // Releases seats of sessions idle past the timeout; returns how many.
  std::size_t reap_idle() {
    std::lock_guard lock(mu_);
    const std::int64_t now = clock_();
    std::vector<std::string> idle;
    for (const auto& [id, s] : sessions_)
      if (s.status == SessionStatus::kActive && s.stage != Stage::kDone &&
          now - s.last_activity > config_.abandon_timeout_ms)
        idle.push_back(id);
    for (const auto& id : idle) emit(EventKind::kSessionAbandoned, release_payload(sessions_.at(id), "timeout"), now);
    return idle.size();
  }

  // ---- queries -----------------------------------------------------------

  nlohmann::ordered_json get_state(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    return view_locked(session(session_id));
  }

  SessionState session_state(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    return session(session_id);
  }

  std::vector<std::string> session_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
  }

  std::vector<int> condition_counts() const {
    std::lock_guard lock(mu_);
    return condition_counts_;
  }

  std::vector<Event> events() const {
    std::lock_guard lock(mu_);
    return log_.events();
  }

  Dataset dataset() const {
    std::lock_guard lock(mu_);
    return dataset_locked();
  }

  std::string export_trials() const { return to_jsonl(dataset().trials); }
  std::string export_preferences() const { return to_jsonl(dataset().preferences); }

  nlohmann::ordered_json export_summary(const ReportConfig& config = {}) const {
    const Dataset d = dataset();
    if (d.trials.empty() && d.preferences.empty())
      return {{"empty", true}, {"counts", {{"participants", 0}, {"trials_total", 0}}}};
    return to_json(report(d, space_, config));
  }

  // Complete state as a canonical document; equal documents mean equal state.
  nlohmann::ordered_json snapshot() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json j;
    nlohmann::ordered_json sessions = nlohmann::ordered_json::object();
    for (const auto& [id, s] : sessions_) {
      nlohmann::ordered_json sj;
      sj["condition_id"] = s.condition_id;
      sj["low_first"] = s.low_first;
      sj["stage"] = std::string(to_string(s.stage));
      sj["status"] = std::string(to_string(s.status));
      sj["stage_rounds"] = s.stage_rounds;
      sj["rounds"] = s.rounds;
      sj["bonus"] = s.bonus.str();
      sj["chosen"] = s.chosen ? s.chosen->label() : "";
      sj["live"] = s.live ? nlohmann::ordered_json{s.live->label.label(), s.live->table_id,
                                                   std::string(to_string(s.live->role)),
                                                   std::string(to_string(s.live->transformation))}
                          : nlohmann::ordered_json(nullptr);
      sj["reveal"] = s.last_reveal ? reveal_json(*s.last_reveal) : nlohmann::ordered_json(nullptr);
      sj["created_at"] = s.created_at;
      sj["last_activity"] = s.last_activity;
      sessions[id] = sj;
    }
    j["sessions"] = sessions;
    nlohmann::ordered_json rooms = nlohmann::ordered_json::object();
    for (const auto& [label, room] : rooms_) {
      nlohmann::ordered_json tables = nlohmann::ordered_json::array();
      for (const auto& t : room.tables()) {
        tables.push_back({t.table_id, std::string(to_string(t.transformation)), std::string(to_string(t.status)),
                          t.pending ? nlohmann::ordered_json{index(t.pending->action),
                                                             std::string(to_string(t.pending->source)),
                                                             t.pending->session_id}
                                    : nlohmann::ordered_json(nullptr),
                          t.player1.value_or(""), t.player2.value_or(""),
                          t.outcome ? nlohmann::ordered_json{index(t.outcome->a1), index(t.outcome->a2)}
                                    : nlohmann::ordered_json(nullptr)});
      }
      rooms[label.label()] = tables;
    }
    j["rooms"] = rooms;
    j["condition_counts"] = condition_counts_;
    j["p2_history"] = p2_history_.size();
    j["trials"] = to_jsonl(trials_);
    j["preferences"] = to_jsonl(preferences_);
    j["next_seq"] = log_.next_seq();
    return j;
  }

 private:
  // ---- helpers (mu_ held) --------------------------------------------------

  Rng command_rng() const { return derive_rng(config_.seed, log_.next_seq()); }

  const SessionState& session(const std::string& id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
    return it->second;
  }

  SessionState& active_session(const std::string& id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
    if (it->second.status != SessionStatus::kActive)
      throw Error(ErrorCode::kSessionClosed, "session " + id + " is " + std::string(to_string(it->second.status)));
    return it->second;
  }

  FeatureVector first_game(const SessionState& s) const {
    const auto& pair = conditions_.at(static_cast<std::size_t>(s.condition_id)).pair;
    return s.low_first ? pair.low : pair.high;
  }
  FeatureVector second_game(const SessionState& s) const {
    const auto& pair = conditions_.at(static_cast<std::size_t>(s.condition_id)).pair;
    return s.low_first ? pair.high : pair.low;
  }

  std::optional<FeatureVector> stage_game(const SessionState& s) const {
    switch (s.stage) {
      case Stage::kStage1: return first_game(s);
      case Stage::kStage2: return second_game(s);
      case Stage::kStage4: return s.chosen;
      default: return std::nullopt;
    }
  }

  std::string color_of(const SessionState& s, FeatureVector label) const {
    return label == first_game(s) ? "blue" : "orange";
  }

  void emit(EventKind kind, nlohmann::ordered_json payload, std::optional<std::int64_t> ts = std::nullopt) {
    Event e{log_.next_seq(), ts ? *ts : clock_(), kind, std::move(payload)};
    apply(e);
    log_.append(e);
  }

  void advance(SessionState& s, Rng& rng, const nlohmann::ordered_json& extra = nullptr) {
    const Stage to = next_stage(s.stage);
    nlohmann::ordered_json payload{{"session_id", s.session_id},
                                   {"from", std::string(to_string(s.stage))},
                                   {"to", std::string(to_string(to))}};
    if (!extra.is_null()) payload["survey"] = extra;
    emit(EventKind::kStageAdvanced, std::move(payload));
    if (is_play_stage(s.stage)) seat_next(s, rng);
  }

  void ensure_room(FeatureVector label, Rng& rng) {
    if (rooms_.count(label)) return;
    Room probe("room-" + label.label(), label, space_.game(label));
    for (int i = 0; i < config_.tables_per_room; ++i) {
      const RoomEvent e = probe.plan_table(std::nullopt, i < config_.seeds_per_room, rng);
      probe.apply(e);
      emit(EventKind::kTableOpened, {{"label", label.label()}, {"room", to_json(e)}});
    }
  }

  void seat_next(SessionState& s, Rng& rng) {
    const FeatureVector label = *stage_game(s);
    ensure_room(label, rng);
    Room& room = rooms_.at(label);
    RoomEvent seat_event;
    try {
      seat_event = room.plan_seat(s.session_id, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRoomFull) throw;
      if (static_cast<int>(room.tables().size()) >= config_.max_tables_per_room) throw;
      emit(EventKind::kTableOpened,
           {{"label", label.label()}, {"room", to_json(room.plan_table(std::nullopt, false, rng))}});
      seat_event = room.plan_seat(s.session_id, rng);
    }
    emit(EventKind::kSeated, {{"label", label.label()}, {"room", to_json(seat_event)}});
  }

  nlohmann::ordered_json release_payload(const SessionState& s, const std::string& reason) const {
    nlohmann::ordered_json p{{"session_id", s.session_id}, {"reason", reason}};
    if (s.live) {
      const Room& room = rooms_.at(s.live->label);
      if (auto e = room.plan_release(s.session_id)) {
        p["label"] = s.live->label.label();
        p["room"] = to_json(*e);
      }
    }
    return p;
  }

  // ---- state transition -------------------------------------------------------

  void apply(const Event& e) {
    const auto& p = e.payload;
    auto room_of = [&](const nlohmann::ordered_json& payload) -> Room& {
      const FeatureVector label = FeatureVector::parse(payload.at("label").get<std::string>());
      auto it = rooms_.find(label);
      if (it == rooms_.end())
        it = rooms_.emplace(label, Room("room-" + label.label(), label, space_.game(label))).first;
      return it->second;
    };
    auto touch = [&](SessionState& s) { s.last_activity = std::max(s.last_activity, e.timestamp); };

    switch (e.kind) {
      case EventKind::kSessionCreated: {
        SessionState s;
        s.session_id = p.at("session_id").get<std::string>();
        s.condition_id = p.at("condition_id").get<int>();
        s.low_first = p.at("low_first").get<bool>();
        s.created_at = s.last_activity = e.timestamp;
        ++condition_counts_.at(static_cast<std::size_t>(s.condition_id));
        sessions_.emplace(s.session_id, std::move(s));
        break;
      }
      case EventKind::kTableOpened:
        room_of(p).apply(room_event_from_json(p.at("room")));
        break;
      case EventKind::kSeated: {
        const RoomEvent re = room_event_from_json(p.at("room"));
        Room& room = room_of(p);
        room.apply(re);
        SessionState& s = sessions_.at(re.session_id);
        s.live = LiveRound{room.label(), re.table_id, re.role, re.transformation};
        touch(s);
        break;
      }
      case EventKind::kMoveSubmitted: {
        const RoomEvent re = room_event_from_json(p.at("room"));
        room_of(p).apply(re);
        SessionState& s = sessions_.at(re.session_id);
        const Rational credited = Rational::parse(p.at("bonus").get<std::string>());
        s.bonus += credited;
        s.last_reveal = Reveal{false, Role::kPlayer1, re.transformation, {*re.action, Action::k0}, {}, credited};
        finish_round(s);
        touch(s);
        break;
      }
      case EventKind::kTrialResolved: {
        const RoomEvent re = room_event_from_json(p.at("room"));
        Room& room = room_of(p);
        const auto res = room.apply(re);
        const Trial t = trial_from_json(p.at("trial"));
        trials_.push_back(t);
        p2_history_.push_back({t.game_label, t.transformation, t.a2});
        SessionState& s = sessions_.at(re.session_id);
        const Rational credited = Rational::parse(p.at("bonus").get<std::string>());
        s.bonus += credited;
        s.last_reveal = Reveal{true, Role::kPlayer2, re.transformation, res->actions, res->payoffs, credited};
        finish_round(s);
        touch(s);
        break;
      }
      case EventKind::kPreferenceChosen: {
        const PreferenceRecord rec = preference_from_json(p.at("record"));
        preferences_.push_back(rec);
        SessionState& s = sessions_.at(rec.session_id);
        s.chosen = rec.chosen;
        touch(s);
        break;
      }
      case EventKind::kStageAdvanced: {
        SessionState& s = sessions_.at(p.at("session_id").get<std::string>());
        s.stage = stage_from_string(p.at("to").get<std::string>());
        s.stage_rounds = 0;
        touch(s);
        break;
      }
      case EventKind::kSessionAbandoned:
      case EventKind::kSessionDropped: {
        SessionState& s = sessions_.at(p.at("session_id").get<std::string>());
        if (p.contains("room")) room_of(p).apply(room_event_from_json(p.at("room")));
        s.live.reset();
        s.status = e.kind == EventKind::kSessionDropped ? SessionStatus::kDropped : SessionStatus::kAbandoned;
        break;
      }
    }
  }

  void finish_round(SessionState& s) {
    s.live.reset();
    ++s.stage_rounds;
    ++s.rounds;
  }

  Dataset dataset_locked() const {
    Dataset d;
    d.trials = trials_;
    for (const auto& p : preferences_)
      if (session(p.session_id).status != SessionStatus::kDropped) d.preferences.push_back(p);
    return d;
  }

  static nlohmann::ordered_json reveal_json(const Reveal& r) {
    nlohmann::ordered_json j;
    j["resolved"] = r.resolved;
    j["role"] = std::string(to_string(r.role));
    j["your_choice"] = to_displayed(r.role, r.transformation, r.role == Role::kPlayer1 ? r.actions.a1 : r.actions.a2);
    if (r.resolved) {
      j["partner_choice"] = to_displayed(other(r.role), r.transformation, r.role == Role::kPlayer1 ? r.actions.a2 : r.actions.a1);
      const Cell shown = displayed_cell(r.transformation, {index(r.actions.a1), index(r.actions.a2)});
      j["cell"] = {shown.row, shown.col};
      j["a1"] = index(r.actions.a1);
      j["a2"] = index(r.actions.a2);
      j["u1"] = r.payoffs.u1;
      j["u2"] = r.payoffs.u2;
      j["your_payoff"] = r.role == Role::kPlayer1 ? r.payoffs.u1 : r.payoffs.u2;
      j["partner_payoff"] = r.role == Role::kPlayer1 ? r.payoffs.u2 : r.payoffs.u1;
    }
    j["bonus_credited"] = r.credited.to_double();
    j["bonus_credited_exact"] = r.credited.str();
    return j;
  }

  static nlohmann::ordered_json board_json(const BimatrixGame& board) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) cells.push_back({board.cell(r, c).u1, board.cell(r, c).u2});
    return cells;
  }

  nlohmann::ordered_json view_locked(const SessionState& s) const {
    nlohmann::ordered_json j;
    j["session_id"] = s.session_id;
    j["status"] = std::string(to_string(s.status));
    j["stage"] = std::string(to_string(s.stage));
    j["round"] = s.rounds;
    j["stage_round"] = s.stage_rounds;
    j["rounds_per_stage"] = config_.rounds_per_stage;
    j["bonus"] = s.bonus.to_double();
    j["bonus_exact"] = s.bonus.str();
    if (s.stage == Stage::kTutorial) j["screen"] = "tutorial/default";
    if (s.stage == Stage::kQuiz) j["screen"] = "quiz/default";
    if (s.stage == Stage::kSurvey) j["screen"] = "survey/default";
    if (s.live) {
      const Room& room = rooms_.at(s.live->label);
      const Presentation view = viewer_presentation(room.game(), s.live->role, s.live->transformation);
      j["board"] = {{"cells", board_json(view.board)},
                    {"color", color_of(s, s.live->label)},
                    {"chooses", std::string(to_string(view.chooses))},
                    {"role", std::string(to_string(s.live->role))}};
    } else {
      j["board"] = nullptr;
    }
    if (s.stage == Stage::kChoice) {
      const Condition& c = conditions_.at(static_cast<std::size_t>(s.condition_id));
      nlohmann::ordered_json options = nlohmann::ordered_json::array();
      for (const auto& [key, label] : {std::pair{"first", first_game(s)}, std::pair{"second", second_game(s)}}) {
        options.push_back({{"option", key},
                           {"color", color_of(s, label)},
                           {"cells", board_json(apply_transformation(space_.game(label), c.transformation))}});
      }
      j["choice"] = options;
    }
    j["reveal"] = s.last_reveal ? reveal_json(*s.last_reveal) : nlohmann::ordered_json(nullptr);
    return j;
  }

  mutable std::mutex mu_;
  GameSpace space_;
  ServiceConfig config_;
  Clock clock_;
  EventLog log_;
  bool ready_ = false;
  std::vector<Condition> conditions_;
  std::vector<int> condition_counts_;
  std::map<std::string, SessionState> sessions_;
  std::map<FeatureVector, Room> rooms_;
  std::vector<Player2Observation> p2_history_;
  std::vector<Trial> trials_;
  std::vector<PreferenceRecord> preferences_;
};

}  // namespace instgame
