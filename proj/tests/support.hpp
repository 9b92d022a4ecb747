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

// Harnesses shared by the unit suites and the acceptance runner.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "instgame/instgame.hpp"

namespace instgame::testing {

// ---- matchmaking stress ------------------------------------------------------

struct StressResult {
  std::size_t arrivals = 0;
  std::size_t resolved = 0;
  std::size_t tables = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline Rational bonus_oracle(const BimatrixGame& g, Action a1, int zeros, int ones) {
  // P(a2) = (count + 1) / (n + 2); weighted numerators over the common denominator.
  const std::int64_t num = static_cast<std::int64_t>(zeros + 1) * payoff(g, a1, Action::k0).u1 +
                           static_cast<std::int64_t>(ones + 1) * payoff(g, a1, Action::k1).u1;
  return Rational(num, zeros + ones + 2);
}

// Concurrent arrivals against one room. Sessions come back several times so
// that self-pairing is possible in principle.
inline StressResult matchmaking_stress(std::size_t arrivals, int tables, std::uint64_t seed, unsigned threads = 8) {
  const GameSpace space = generate_space(SpaceConfig{});
  const FeatureVector label = FeatureVector::parse("001");
  Rng open_rng = derive_rng(seed, "open");
  std::vector<RoomEvent> opening;
  SharedRoom room(open_room("room", label, space.game(label), std::nullopt, tables, tables / 4, open_rng,
                            EventSink{&opening}));
  const std::size_t sessions = std::max<std::size_t>(1, arrivals / 3);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      Rng rng = derive_rng(seed, "worker-" + std::to_string(w));
      for (std::size_t i = next++; i < arrivals; i = next++) {
        // Session ids are partitioned by worker so a session is never live twice.
        const std::size_t sid = (i % sessions) - (i % sessions) % threads + w;
        const std::string session = "s" + std::to_string(sid);
        std::optional<Seat> s = room.try_seat(session, rng);
        if (!s) {
          room.add_table(std::nullopt, false, rng);
          s = room.try_seat(session, rng);
        }
        if (s) room.submit(*s, action_from_index(uniform_index(rng, 2)), Source::kAgent);
      }
    });
  }
  for (auto& t : pool) t.join();

  StressResult r;
  r.arrivals = arrivals;
  std::vector<RoomEvent> log = opening;
  const auto tail = room.log();
  log.insert(log.end(), tail.begin(), tail.end());
  const Room live = room.snapshot();
  r.tables = live.tables().size();

  std::map<int, std::string> p1_of;        // table -> pending P1 session ("" for seed)
  std::map<int, bool> has_p1_move;
  std::set<std::pair<int, int>> holders;  // (table, role) currently held
  for (const auto& e : log) {
    switch (e.kind) {
      case RoomEvent::Kind::kTableOpened:
        if (e.action) has_p1_move[e.table_id] = true, p1_of[e.table_id] = "";
        break;
      case RoomEvent::Kind::kSeated:
        if (!holders.insert({e.table_id, static_cast<int>(e.role)}).second)
          r.violations.push_back("duplicate seat at table " + std::to_string(e.table_id));
        if (e.role == Role::kPlayer2 && p1_of[e.table_id] == e.session_id)
          r.violations.push_back("self-pairing of " + e.session_id);
        break;
      case RoomEvent::Kind::kMoveSubmitted:
        holders.erase({e.table_id, 0});
        has_p1_move[e.table_id] = true;
        p1_of[e.table_id] = e.session_id;
        break;
      case RoomEvent::Kind::kResolved:
        holders.erase({e.table_id, 1});
        if (!has_p1_move[e.table_id]) r.violations.push_back("trial without prior Player-1 move");
        if (p1_of[e.table_id] == e.session_id) r.violations.push_back("self-paired trial");
        ++r.resolved;
        break;
      case RoomEvent::Kind::kReleased:
        holders.erase({e.table_id, static_cast<int>(e.role)});
        break;
    }
  }
  try {
    const Room replayed = replay_room("room", label, space.game(label), log);
    if (!(replayed == live)) r.violations.push_back("replayed room differs from live room");
  } catch (const Error& e) {
    r.violations.push_back(std::string("replay failed: ") + e.what());
  }
  return r;
}

// ---- service fuzzing ---------------------------------------------------------

struct FuzzResult {
  std::size_t operations = 0;
  std::size_t rejected = 0;  // operations refused with a domain error
  std::size_t events = 0;
  std::size_t replay_checks = 0;
  std::size_t truncation_checks = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline std::string export_bytes(const Service& s) {
  return s.export_trials() + "\x1e" + s.export_preferences() + "\x1e" + s.export_summary().dump();
}

// Random operations, valid and invalid, against a file-backed service.
// Periodically checks that replaying the log reproduces the live state,
// that every event-boundary prefix replays, and that a torn final line is
// dropped on reopen.
inline FuzzResult service_fuzz(std::size_t ops, std::uint64_t seed, const std::filesystem::path& dir,
                               std::size_t check_every = 500) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path log_path = dir / "events.jsonl";
  fs::remove(log_path);
  const GameSpace space = generate_space(SpaceConfig{});
  ServiceConfig config;
  config.seed = seed;
  config.rounds_per_stage = 2;
  config.tables_per_room = 3;
  config.seeds_per_room = 1;
  config.abandon_timeout_ms = 5000;
  std::int64_t now = 0;
  auto clock = [&now] { return now; };
  FuzzResult r;
  Rng rng = derive_rng(seed, "fuzz");

  {
    Service live(space, config, clock, EventLog::open(log_path));
    std::vector<std::string> ids;
    for (std::size_t op = 0; op < ops; ++op) {
      now += 1 + uniform_index(rng, 400);
      const int kind = ids.empty() ? 0 : uniform_index(rng, 100);
      std::vector<std::string> active;
      for (const auto& sid : ids) {
        const SessionState s = live.session_state(sid);
        if (s.status == SessionStatus::kActive && s.stage != Stage::kDone) active.push_back(sid);
      }
      const std::vector<std::string>& pool = active.empty() || uniform_index(rng, 5) == 0 ? ids : active;
      const std::string id = pool.empty() ? std::string() : pool[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(pool.size())))];
      try {
        if (kind < 6) {
          ids.push_back(live.create_session().session_id);
        } else if (kind < 16) {
          live.continue_screen(id);
        } else if (kind < 70) {
          const int round = live.session_state(id).rounds + (uniform_index(rng, 10) == 0 ? -1 : 0);
          live.submit_action(id, uniform_index(rng, 10) == 0 ? 3 : uniform_index(rng, 2),
                             uniform_index(rng, 4) == 0 ? std::nullopt : std::optional<int>(round));
        } else if (kind < 78) {
          const char* choices[] = {"first", "second", "000", "111", "bogus"};
          live.submit_preference(id, choices[uniform_index(rng, 5)]);
        } else if (kind < 84) {
          live.submit_survey(id, {{"comment", "ok"}});
        } else if (kind < 86) {
          live.drop_session(id, "fuzz");
        } else if (kind < 87) {
          now += 6000;
          live.reap_idle();
        } else if (kind < 95) {
          const auto a = live.get_state(id);
          if (a != live.get_state(id)) r.violations.push_back("get_state is not idempotent");
        } else {
          live.get_state("no-such-session");
        }
      } catch (const Error&) {
        ++r.rejected;
      }
      ++r.operations;

      // Stage-machine safety on every step.
      for (const auto& sid : live.session_ids()) {
        const SessionState s = live.session_state(sid);
        if (s.stage_rounds > config.rounds_per_stage) r.violations.push_back("stage overflow in " + sid);
      }

      if ((op + 1) % check_every == 0 || op + 1 == ops) {
        const Service replayed = Service::replay(space, config, live.events(), clock);
        ++r.replay_checks;
        if (replayed.snapshot() != live.snapshot()) r.violations.push_back("replay differs at op " + std::to_string(op));
        if (export_bytes(replayed) != export_bytes(live))
          r.violations.push_back("exports differ after replay at op " + std::to_string(op));
      }
    }
    r.events = live.events().size();

    std::map<std::pair<std::string, std::string>, int> per_stage;
    for (const auto& t : live.dataset().trials) {
      ++per_stage[{t.session_id, std::string(to_string(t.stage))}];
    }
    for (const auto& [key, n] : per_stage)
      if (n > config.rounds_per_stage) r.violations.push_back("too many trials in " + key.first + "/" + key.second);
    const std::string live_snapshot = live.snapshot().dump();

    // Reopen from disk: identical state.
    Service reopened(space, config, clock, EventLog::open(log_path));
    if (reopened.snapshot().dump() != live_snapshot) r.violations.push_back("reopened log differs from live state");
  }

  // Every prefix at an event boundary replays; sample evenly.
  const std::string bytes = [&] {
    std::ifstream in(log_path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  std::vector<std::size_t> boundaries{0};
  for (std::size_t i = 0; i < bytes.size(); ++i)
    if (bytes[i] == '\n') boundaries.push_back(i + 1);
  const std::size_t stride = std::max<std::size_t>(1, boundaries.size() / 40);
  const fs::path cut = dir / "cut.jsonl";
  for (std::size_t b = 0; b < boundaries.size(); b += stride) {
    for (const bool torn : {false, true}) {
      const std::size_t end = boundaries[b];
      std::string prefix = bytes.substr(0, end);
      if (torn && end < bytes.size()) prefix += bytes.substr(end, std::min<std::size_t>(17, bytes.size() - end - 1));
      {
        std::ofstream out(cut, std::ios::binary | std::ios::trunc);
        out << prefix;
      }
      try {
        Service s(space, config, clock, EventLog::open(cut));
        ++r.truncation_checks;
        if (s.events().size() != b) r.violations.push_back("prefix of " + std::to_string(b) + " events recovered " +
                                                           std::to_string(s.events().size()));
        if (std::filesystem::file_size(cut) != end) r.violations.push_back("torn tail not truncated");
        const Service again = Service::replay(space, config, s.events(), clock);
        if (again.snapshot() != s.snapshot()) r.violations.push_back("prefix replay differs");
      } catch (const std::exception& e) {
        r.violations.push_back(std::string("prefix failed to load: ") + e.what());
      }
    }
  }
  return r;
}

}  // namespace instgame::testing
