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

// Asynchronous room/table matchmaking. A room hosts boards of one game;
// each table hosts one round. Whoever opens a table plays Player 1 and
// leaves a pending move; a later arrival joins as Player 2 and resolves it.
//
// Every state change is a RoomEvent applied through Room::apply, so a room
// is fully reconstructible from its event sequence. Randomized decisions
// (table choice, seed moves, presentations) are made before the event is
// built and are recorded in it.

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/error.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/game_core.hpp"
#include "instgame/rational.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame {

enum class TableStatus : std::uint8_t { kEmpty, kAwaitingPlayer2, kResolved };

constexpr std::string_view to_string(TableStatus s) {
  switch (s) {
    case TableStatus::kEmpty: return "Empty";
    case TableStatus::kAwaitingPlayer2: return "AwaitingPlayer2";
    case TableStatus::kResolved: return "Resolved";
  }
  return "?";
}

struct PendingMove {
  Action action = Action::k0;
  Source source = Source::kHuman;
  std::string session_id;  // empty for seeds
  friend bool operator==(const PendingMove&, const PendingMove&) = default;
};

struct Table {
  int table_id = 0;
  Transformation transformation = Transformation::kIdentity;
  std::optional<PendingMove> pending;
  TableStatus status = TableStatus::kEmpty;
  std::optional<std::string> player1;  // live seat holders
  std::optional<std::string> player2;
  std::optional<ActionProfile> outcome;
  friend bool operator==(const Table&, const Table&) = default;
};

struct Seat {
  std::string session_id;
  int table_id = 0;
  Role role = Role::kPlayer1;
  friend bool operator==(const Seat&, const Seat&) = default;
};

struct RoomEvent {
  enum class Kind : std::uint8_t { kTableOpened, kSeated, kMoveSubmitted, kResolved, kReleased };
  Kind kind = Kind::kTableOpened;
  int table_id = 0;
  std::string session_id;
  Role role = Role::kPlayer1;
  Transformation transformation = Transformation::kIdentity;
  std::optional<Action> action;  // seed move on open; canonical move on submit
  Source source = Source::kHuman;
  friend bool operator==(const RoomEvent&, const RoomEvent&) = default;
};

struct Resolution {
  int table_id = 0;
  Transformation transformation = Transformation::kIdentity;
  ActionProfile actions;
  PayoffPair payoffs;
  PendingMove player1;
  std::string player2_session;
  Source player2_source = Source::kHuman;
};

class Room {
 public:
  Room() = default;
  Room(std::string room_id, FeatureVector label, BimatrixGame game)
      : room_id_(std::move(room_id)), label_(label), game_(std::move(game)) {}

  const std::string& room_id() const { return room_id_; }
  FeatureVector label() const { return label_; }
  const BimatrixGame& game() const { return game_; }
  const std::vector<Table>& tables() const { return tables_; }
  const Table& table(int id) const { return tables_.at(static_cast<std::size_t>(id)); }

  std::optional<Seat> live_seat(const std::string& session) const {
    auto it = seats_.find(session);
    if (it == seats_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t live_seat_count() const { return seats_.size(); }

  // ---- planning (pure; may consume rng) ----

  RoomEvent plan_table(std::optional<Transformation> fixed, bool seeded, Rng& rng) const {
    RoomEvent e;
    e.kind = RoomEvent::Kind::kTableOpened;
    e.table_id = static_cast<int>(tables_.size());
    e.transformation = fixed ? *fixed : kAllTransformations[uniform_index(rng, 8)];
    if (seeded) {
      e.action = action_from_index(uniform_index(rng, 2));
      e.source = Source::kSeed;
    }
    return e;
  }

  bool seatable_as_player2(const Table& t, const std::string& session) const {
    return t.status == TableStatus::kAwaitingPlayer2 && !t.player2 &&
           !(t.pending && t.pending->session_id == session);
  }
  bool seatable_as_player1(const Table& t) const {
    return t.status == TableStatus::kEmpty && !t.player1;
  }

  // Ongoing games first; otherwise open an empty table. Uniform among the
  // eligible ones. Throws RoomFull when nothing is seatable.
  RoomEvent plan_seat(const std::string& session, Rng& rng) const {
    if (seats_.count(session))
      throw Error(ErrorCode::kInvalidArgument, "session " + session + " already holds a live seat");
    std::vector<int> awaiting, empty;
    for (const auto& t : tables_) {
      if (seatable_as_player2(t, session)) awaiting.push_back(t.table_id);
      else if (seatable_as_player1(t)) empty.push_back(t.table_id);
    }
    RoomEvent e;
    e.kind = RoomEvent::Kind::kSeated;
    e.session_id = session;
    if (!awaiting.empty()) {
      e.table_id = awaiting[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(awaiting.size())))];
      e.role = Role::kPlayer2;
    } else if (!empty.empty()) {
      e.table_id = empty[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(empty.size())))];
      e.role = Role::kPlayer1;
    } else {
      throw Error(ErrorCode::kRoomFull, "room " + room_id_ + " has no seatable table");
    }
    e.transformation = table(e.table_id).transformation;
    return e;
  }

  RoomEvent plan_move(const Seat& seat, Action canonical, Source source) const {
    auto live = live_seat(seat.session_id);
    if (!live || *live != seat)
      throw Error(ErrorCode::kStaleSeat, "seat of " + seat.session_id + " is not live");
    const Table& t = table(seat.table_id);
    if (seat.role == Role::kPlayer1 && t.status != TableStatus::kEmpty)
      throw Error(ErrorCode::kDuplicateMove, "Player 1 already moved at table " + std::to_string(t.table_id));
    if (seat.role == Role::kPlayer2 && t.status != TableStatus::kAwaitingPlayer2)
      throw Error(ErrorCode::kDuplicateMove, "table " + std::to_string(t.table_id) + " already resolved");
    RoomEvent e;
    e.kind = seat.role == Role::kPlayer1 ? RoomEvent::Kind::kMoveSubmitted : RoomEvent::Kind::kResolved;
    e.table_id = seat.table_id;
    e.session_id = seat.session_id;
    e.role = seat.role;
    e.transformation = t.transformation;
    e.action = canonical;
    e.source = source;
    return e;
  }

  std::optional<RoomEvent> plan_release(const std::string& session) const {
    auto live = live_seat(session);
    if (!live) return std::nullopt;
    RoomEvent e;
    e.kind = RoomEvent::Kind::kReleased;
    e.table_id = live->table_id;
    e.session_id = session;
    e.role = live->role;
    e.transformation = table(live->table_id).transformation;
    return e;
  }

  // ---- state transition (deterministic) ----

  // Returns the resolution for kResolved events.
  std::optional<Resolution> apply(const RoomEvent& e) {
    using K = RoomEvent::Kind;
    switch (e.kind) {
      case K::kTableOpened: {
        if (e.table_id != static_cast<int>(tables_.size()))
          throw Error(ErrorCode::kInvalidArgument, "table ids must be dense");
        Table t;
        t.table_id = e.table_id;
        t.transformation = e.transformation;
        if (e.action) {
          t.pending = PendingMove{*e.action, e.source, {}};
          t.status = TableStatus::kAwaitingPlayer2;
        }
        tables_.push_back(std::move(t));
        return std::nullopt;
      }
      case K::kSeated: {
        Table& t = mutable_table(e.table_id);
        auto& holder = e.role == Role::kPlayer1 ? t.player1 : t.player2;
        if (holder) throw Error(ErrorCode::kInvalidArgument, "seat already taken");
        holder = e.session_id;
        seats_[e.session_id] = Seat{e.session_id, e.table_id, e.role};
        return std::nullopt;
      }
      case K::kMoveSubmitted: {
        Table& t = mutable_table(e.table_id);
        t.pending = PendingMove{*e.action, e.source, e.session_id};
        t.status = TableStatus::kAwaitingPlayer2;
        t.player1.reset();
        seats_.erase(e.session_id);
        return std::nullopt;
      }
      case K::kResolved: {
        Table& t = mutable_table(e.table_id);
        if (!t.pending) throw Error(ErrorCode::kInvalidArgument, "resolving a table without a Player-1 move");
        const ActionProfile actions{t.pending->action, *e.action};
        t.outcome = actions;
        t.status = TableStatus::kResolved;
        t.player2.reset();
        seats_.erase(e.session_id);
        return Resolution{t.table_id, t.transformation, actions, payoff(game_, actions), *t.pending,
                          e.session_id, e.source};
      }
      case K::kReleased: {
        Table& t = mutable_table(e.table_id);
        (e.role == Role::kPlayer1 ? t.player1 : t.player2).reset();
        seats_.erase(e.session_id);
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  friend bool operator==(const Room& a, const Room& b) {
    return a.room_id_ == b.room_id_ && a.label_ == b.label_ && a.game_.same_cells(b.game_) &&
           a.tables_ == b.tables_ && a.seats_ == b.seats_;
  }

 private:
  Table& mutable_table(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= tables_.size())
      throw Error(ErrorCode::kInvalidArgument, "no table " + std::to_string(id));
    return tables_[static_cast<std::size_t>(id)];
  }

  std::string room_id_;
  FeatureVector label_;
  BimatrixGame game_;
  std::vector<Table> tables_;
  std::map<std::string, Seat> seats_;
};

// ---- convenience operations (plan + apply, returning emitted events) -------

struct EventSink {
  std::vector<RoomEvent>* out = nullptr;
  void operator()(const RoomEvent& e) const {
    if (out) out->push_back(e);
  }
};

inline Room open_room(std::string room_id, FeatureVector label, const BimatrixGame& game,
                      std::optional<Transformation> transformation, int n_tables, int seed_policy,
                      Rng& rng, EventSink sink = {}) {
  if (n_tables < 1) throw Error(ErrorCode::kInvalidArgument, "n_tables must be >= 1");
  if (seed_policy < 0 || seed_policy > n_tables)
    throw Error(ErrorCode::kInvalidArgument, "seed_policy must lie in [0, n_tables]");
  Room room(std::move(room_id), label, game);
  for (int i = 0; i < n_tables; ++i) {
    const RoomEvent e = room.plan_table(transformation, i < seed_policy, rng);
    room.apply(e);
    sink(e);
  }
  return room;
}

inline Seat seat(Room& room, const std::string& session, Rng& rng, EventSink sink = {}) {
  const RoomEvent e = room.plan_seat(session, rng);
  room.apply(e);
  sink(e);
  return {session, e.table_id, e.role};
}

// Same contract as seat(); the room already excludes self-pairing.
inline Seat reseat(Room& room, const std::string& session, Rng& rng, EventSink sink = {}) {
  return seat(room, session, rng, sink);
}

struct SubmitOutcome {
  bool resolved = false;
  std::optional<Resolution> resolution;
};

inline SubmitOutcome submit_move(Room& room, const Seat& s, Action canonical, Source source,
                                 EventSink sink = {}) {
  const RoomEvent e = room.plan_move(s, canonical, source);
  auto res = room.apply(e);
  sink(e);
  return {res.has_value(), res};
}

inline void release(Room& room, const std::string& session, EventSink sink = {}) {
  if (auto e = room.plan_release(session)) {
    room.apply(*e);
    sink(*e);
  }
}

inline Room replay_room(std::string room_id, FeatureVector label, const BimatrixGame& game,
                        std::span<const RoomEvent> events) {
  Room room(std::move(room_id), label, game);
  for (const auto& e : events) room.apply(e);
  return room;
}

// Room behind a mutex: concurrent callers observe some sequential order, and
// the emitted event log is that order.
class SharedRoom {
 public:
  explicit SharedRoom(Room room) : room_(std::move(room)) {}

  std::optional<Seat> try_seat(const std::string& session, Rng& rng) {
    std::lock_guard lock(mu_);
    try {
      return seat(room_, session, rng, EventSink{&log_});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kRoomFull) return std::nullopt;
      throw;
    }
  }
  SubmitOutcome submit(const Seat& s, Action a, Source source) {
    std::lock_guard lock(mu_);
    return submit_move(room_, s, a, source, EventSink{&log_});
  }
  void add_table(std::optional<Transformation> t, bool seeded, Rng& rng) {
    std::lock_guard lock(mu_);
    const RoomEvent e = room_.plan_table(t, seeded, rng);
    room_.apply(e);
    log_.push_back(e);
  }

  Room snapshot() const {
    std::lock_guard lock(mu_);
    return room_;
  }
  std::vector<RoomEvent> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

 private:
  mutable std::mutex mu_;
  Room room_;
  std::vector<RoomEvent> log_;
};

// ---- Player-1 bonus --------------------------------------------------------

struct Player2Observation {
  FeatureVector label;
  Transformation transformation = Transformation::kIdentity;
  Action a2 = Action::k0;  // canonical
};

// Expected Player-1 points for canonical action a1 against the smoothed
// empirical Player-2 distribution P(a2) = (count + 1) / (n + 2).
inline Rational estimate_bonus_p1(const BimatrixGame& game, FeatureVector label,
                                  Transformation transformation, Action a1,
                                  std::span<const Player2Observation> history,
                                  bool pool_transformations = true) {
  std::array<std::int64_t, 2> count{0, 0};
  for (const auto& h : history) {
    if (h.label != label) continue;
    if (!pool_transformations && h.transformation != transformation) continue;
    ++count[index(h.a2)];
  }
  const std::int64_t n = count[0] + count[1];
  Rational total;
  for (Action a2 : kActions)
    total += Rational(count[index(a2)] + 1, n + 2) * Rational(payoff(game, a1, a2).u1);
  return total;
}

// ---- serialization -----------------------------------------------------------

constexpr std::string_view to_string(RoomEvent::Kind k) {
  switch (k) {
    case RoomEvent::Kind::kTableOpened: return "TableOpened";
    case RoomEvent::Kind::kSeated: return "Seated";
    case RoomEvent::Kind::kMoveSubmitted: return "MoveSubmitted";
    case RoomEvent::Kind::kResolved: return "Resolved";
    case RoomEvent::Kind::kReleased: return "Released";
  }
  return "?";
}

inline nlohmann::ordered_json to_json(const RoomEvent& e) {
  nlohmann::ordered_json j;
  j["room_event"] = std::string(to_string(e.kind));
  j["table_id"] = e.table_id;
  j["session_id"] = e.session_id;
  j["role"] = std::string(to_string(e.role));
  j["transformation"] = std::string(to_string(e.transformation));
  j["action"] = e.action ? nlohmann::ordered_json(index(*e.action)) : nlohmann::ordered_json(nullptr);
  j["source"] = std::string(to_string(e.source));
  return j;
}

inline RoomEvent room_event_from_json(const nlohmann::json& j) {
  try {
    RoomEvent e;
    const std::string kind = j.at("room_event").get<std::string>();
    bool known = false;
    for (auto k : {RoomEvent::Kind::kTableOpened, RoomEvent::Kind::kSeated,
                   RoomEvent::Kind::kMoveSubmitted, RoomEvent::Kind::kResolved,
                   RoomEvent::Kind::kReleased}) {
      if (to_string(k) == kind) {
        e.kind = k;
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::kParse, "unknown room event '" + kind + "'");
    e.table_id = j.at("table_id").get<int>();
    e.session_id = j.at("session_id").get<std::string>();
    e.role = role_from_string(j.at("role").get<std::string>());
    e.transformation = transformation_from_string(j.at("transformation").get<std::string>());
    if (!j.at("action").is_null()) e.action = action_from_index(j.at("action").get<int>());
    e.source = source_from_string(j.at("source").get<std::string>());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, ex.what());
  }
}

}  // namespace instgame
