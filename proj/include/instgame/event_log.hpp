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

// Append-only event log, kept in memory and optionally mirrored to a
// line-delimited JSON file. A torn final line (crash mid-write) is dropped
// on load, so every file prefix at an event boundary replays cleanly.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/error.hpp"

namespace instgame {

enum class EventKind : std::uint8_t {
  kSessionCreated,
  kSeated,
  kMoveSubmitted,
  kTrialResolved,
  kPreferenceChosen,
  kStageAdvanced,
  kSessionAbandoned,
  kSessionDropped,
  kTableOpened,
};

constexpr std::array<EventKind, 9> kAllEventKinds = {
    EventKind::kSessionCreated,   EventKind::kSeated,         EventKind::kMoveSubmitted,
    EventKind::kTrialResolved,    EventKind::kPreferenceChosen, EventKind::kStageAdvanced,
    EventKind::kSessionAbandoned, EventKind::kSessionDropped, EventKind::kTableOpened};

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kSessionCreated: return "SessionCreated";
    case EventKind::kSeated: return "Seated";
    case EventKind::kMoveSubmitted: return "MoveSubmitted";
    case EventKind::kTrialResolved: return "TrialResolved";
    case EventKind::kPreferenceChosen: return "PreferenceChosen";
    case EventKind::kStageAdvanced: return "StageAdvanced";
    case EventKind::kSessionAbandoned: return "SessionAbandoned";
    case EventKind::kSessionDropped: return "SessionDropped";
    case EventKind::kTableOpened: return "TableOpened";
  }
  return "?";
}

inline EventKind event_kind_from_string(std::string_view s) {
  for (auto k : kAllEventKinds)
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::kParse, "unknown event kind '" + std::string(s) + "'");
}

struct Event {
  std::uint64_t seq = 0;
  std::int64_t timestamp = 0;
  EventKind kind = EventKind::kSessionCreated;
  nlohmann::ordered_json payload;

  friend bool operator==(const Event& a, const Event& b) {
    return a.seq == b.seq && a.timestamp == b.timestamp && a.kind == b.kind && a.payload == b.payload;
  }
};

inline nlohmann::ordered_json to_json(const Event& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["ts"] = e.timestamp;
  j["kind"] = std::string(to_string(e.kind));
  j["payload"] = e.payload;
  return j;
}

inline Event event_from_json(const nlohmann::ordered_json& j) {
  try {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.at("ts").get<std::int64_t>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, ex.what());
  }
}

class EventLog {
 public:
  EventLog() = default;

  // Loads an existing file (dropping a torn tail) and appends to it.
  static EventLog open(const std::filesystem::path& path) {
    EventLog log;
    log.path_ = path;
    std::uintmax_t good_bytes = 0;
    if (std::filesystem::exists(path)) {
      std::ifstream in(path, std::ios::binary);
      std::string line;
      std::uintmax_t offset = 0;
      while (std::getline(in, line)) {
        const bool complete = !in.eof();
        offset += line.size() + (complete ? 1 : 0);
        if (!complete) break;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) break;
        Event e;
        try {
          e = event_from_json(j);
        } catch (const Error&) {
          break;
        }
        if (!log.events_.empty() && e.seq <= log.events_.back().seq) break;
        log.events_.push_back(std::move(e));
        good_bytes = offset;
      }
      in.close();
      std::filesystem::resize_file(path, good_bytes);
    }
    log.out_.open(path, std::ios::binary | std::ios::app);
    if (!log.out_) throw Error(ErrorCode::kIo, "cannot open event log " + path.string());
    return log;
  }

  void append(const Event& e) {
    if (!events_.empty() && e.seq <= events_.back().seq)
      throw Error(ErrorCode::kInvalidArgument, "event sequence numbers must increase");
    events_.push_back(e);
    if (out_.is_open()) {
      out_ << to_json(e).dump() << '\n';
      out_.flush();
    }
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  std::uint64_t next_seq() const { return events_.empty() ? 1 : events_.back().seq + 1; }
  const std::optional<std::filesystem::path>& path() const { return path_; }

  std::string serialize() const {
    std::string s;
    for (const auto& e : events_) s += to_json(e).dump() + "\n";
    return s;
  }

 private:
  std::vector<Event> events_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

}  // namespace instgame
