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

// HTTP binding of the session service plus deployment configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "instgame/error.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/platform.hpp"
#include "instgame/rational.hpp"

namespace instgame {

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string data_dir = "data";
  std::uint64_t seed = 0;
  int rounds_per_stage = 6;
  Rational multiplier{2};
  int feature_count = 3;
  std::optional<std::string> space_file;  // generated from the fields above when absent
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

inline ServerConfig server_config_from_json(const nlohmann::json& j, ServerConfig c = {}) {
  try {
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rounds_per_stage")) c.rounds_per_stage = j.at("rounds_per_stage").get<int>();
    if (j.contains("multiplier"))
      c.multiplier = j.at("multiplier").is_string() ? Rational::parse(j.at("multiplier").get<std::string>())
                                                    : Rational::parse(j.at("multiplier").dump());
    if (j.contains("features")) c.feature_count = j.at("features").get<int>();
    if (j.contains("space_file")) c.space_file = j.at("space_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("server config: ") + e.what());
  }
  return c;
}

// Environment variables INSTGAME_{PORT,DATA_DIR,SEED,ROUNDS_PER_STAGE,MULTIPLIER}
// override file values.
inline ServerConfig apply_env_overrides(ServerConfig c, const EnvLookup& env = process_env) {
  auto number = [](const std::string& name, const std::string& v) -> long long {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, name + "='" + v + "' is not an integer");
    }
  };
  if (auto v = env("INSTGAME_PORT")) c.port = static_cast<int>(number("INSTGAME_PORT", *v));
  if (auto v = env("INSTGAME_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("INSTGAME_SEED")) c.seed = static_cast<std::uint64_t>(number("INSTGAME_SEED", *v));
  if (auto v = env("INSTGAME_ROUNDS_PER_STAGE"))
    c.rounds_per_stage = static_cast<int>(number("INSTGAME_ROUNDS_PER_STAGE", *v));
  if (auto v = env("INSTGAME_MULTIPLIER")) c.multiplier = Rational::parse(*v);
  return c;
}

inline ServerConfig load_server_config(const std::optional<std::filesystem::path>& file,
                                       const EnvLookup& env = process_env) {
  ServerConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::kIo, "cannot read config " + file->string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kParse, "config " + file->string() + " is not valid JSON");
    c = server_config_from_json(j);
  }
  return apply_env_overrides(c, env);
}

inline GameSpace load_or_generate_space(const ServerConfig& c) {
  if (c.space_file) {
    std::ifstream in(*c.space_file);
    if (!in) throw Error(ErrorCode::kIo, "cannot read space file " + *c.space_file);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kParse, "space file " + *c.space_file + " is not valid JSON");
    return space_from_json(j);
  }
  SpaceConfig sc;
  sc.feature_count = c.feature_count;
  sc.efficiency_multiplier = c.multiplier;
  sc.rng_seed = c.seed;
  return generate_space(sc);
}

constexpr int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession: return 404;
    case ErrorCode::kWrongStage:
    case ErrorCode::kDuplicateSubmission:
    case ErrorCode::kDuplicateMove:
    case ErrorCode::kStaleSeat:
    case ErrorCode::kSessionClosed: return 409;
    case ErrorCode::kRoomFull:
    case ErrorCode::kServiceNotReady: return 503;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidChoice:
    case ErrorCode::kParse: return 400;
    default: return 500;
  }
}

namespace detail {

inline void reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, const Error& e) {
  reply(res, http_status(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
}

inline nlohmann::json body_json(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, Error(ErrorCode::kParse, e.what()));
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace detail

inline void register_routes(httplib::Server& server, Service& service) {
  using detail::guarded;
  using detail::reply;
  using Req = httplib::Request;
  using Res = httplib::Response;

  server.Get("/api/health", guarded([&](const Req&, Res& res) {
               reply(res, service.ready() ? 200 : 503,
                     {{"ok", service.ready()}, {"sessions", service.session_ids().size()}});
             }));

  server.Post("/api/session", guarded([&](const Req&, Res& res) {
                const SessionDescriptor d = service.create_session();
                reply(res, 201, {{"session_id", d.session_id}, {"condition_id", d.condition_id}, {"tutorial", d.tutorial}});
              }));

  server.Get(R"(/api/session/([^/]+)/state)", guarded([&](const Req& req, Res& res) {
               reply(res, 200, service.get_state(req.matches[1]));
             }));

  // {"choice": 0|1, "round": n} in play stages; {"continue": true} on pass-through screens.
  server.Post(R"(/api/session/([^/]+)/action)", guarded([&](const Req& req, Res& res) {
                const auto body = detail::body_json(req);
                const std::string id = req.matches[1];
                if (body.value("continue", false)) {
                  reply(res, 200, service.continue_screen(id));
                  return;
                }
                if (!body.contains("choice") || !body.at("choice").is_number_integer())
                  throw Error(ErrorCode::kInvalidArgument, "body needs integer 'choice' or 'continue': true");
                std::optional<int> round;
                if (body.contains("round")) round = body.at("round").get<int>();
                reply(res, 200, service.submit_action(id, body.at("choice").get<int>(), round));
              }));

  server.Post(R"(/api/session/([^/]+)/preference)", guarded([&](const Req& req, Res& res) {
                const auto body = detail::body_json(req);
                if (!body.contains("choice") || !body.at("choice").is_string())
                  throw Error(ErrorCode::kInvalidArgument, "body needs string 'choice'");
                reply(res, 200, service.submit_preference(req.matches[1], body.at("choice").get<std::string>()));
              }));

  server.Post(R"(/api/session/([^/]+)/survey)", guarded([&](const Req& req, Res& res) {
                const auto body = detail::body_json(req);
                reply(res, 200, service.submit_survey(req.matches[1], body.value("answers", nlohmann::ordered_json::object())));
              }));

  server.Post(R"(/api/admin/session/([^/]+)/drop)", guarded([&](const Req& req, Res& res) {
                const auto body = detail::body_json(req);
                service.drop_session(req.matches[1], body.value("reason", std::string("technical error")));
                reply(res, 200, {{"ok", true}});
              }));

  server.Get(R"(/api/admin/export/(trials|preferences|summary))", guarded([&](const Req& req, Res& res) {
               const std::string kind = req.matches[1];
               res.status = 200;
               if (kind == "trials") res.set_content(service.export_trials(), "application/x-ndjson");
               else if (kind == "preferences") res.set_content(service.export_preferences(), "application/x-ndjson");
               else res.set_content(service.export_summary().dump(2), "application/json");
             }));
}

}  // namespace instgame
