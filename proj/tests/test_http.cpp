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

#include <gtest/gtest.h>

#include <thread>

#include "instgame/http_api.hpp"

namespace instgame {
namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>(generate_space(SpaceConfig{}), ServiceConfig{});
    register_routes(server_, *service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body, int expect) {
    auto res = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return nlohmann::json::parse(res->body);
  }
  nlohmann::json get(const std::string& path, int expect) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return nlohmann::json::parse(res->body, nullptr, false);
  }

  std::unique_ptr<Service> service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpTest, HealthAndSessionFlow) {
  EXPECT_TRUE(get("/api/health", 200).at("ok").get<bool>());
  const auto created = post("/api/session", nlohmann::json::object(), 201);
  const std::string id = created.at("session_id");
  const std::string base = "/api/session/" + id;
  EXPECT_EQ(get(base + "/state", 200).at("stage"), "Tutorial");
  post(base + "/action", {{"choice", 0}}, 409);
  post(base + "/action", {{"continue", true}}, 200);
  post(base + "/action", {{"continue", true}}, 200);
  for (int r = 0; r < 12; ++r) {
    const auto state = get(base + "/state", 200);
    ASSERT_FALSE(state.at("board").is_null());
    EXPECT_EQ(state.at("board").at("cells").size(), 4u);
    const auto out = post(base + "/action", {{"choice", r % 2}, {"round", state.at("round")}}, 200);
    EXPECT_TRUE(out.contains("bonus_credited"));
  }
  post(base + "/action", {{"choice", 0}, {"round", 11}}, 409);
  EXPECT_EQ(get(base + "/state", 200).at("stage"), "Choice");
  post(base + "/preference", {{"choice", "nonsense"}}, 400);
  post(base + "/preference", {{"choice", "first"}}, 200);
  for (int r = 0; r < 6; ++r) post(base + "/action", {{"choice", 1}}, 200);
  post(base + "/survey", {{"answers", {{"clear", true}}}}, 200);
  EXPECT_EQ(get(base + "/state", 200).at("stage"), "Done");

  auto prefs = client_->Get("/api/admin/export/preferences");
  ASSERT_TRUE(prefs);
  EXPECT_EQ(prefs->status, 200);
  EXPECT_EQ(prefs->body, service_->export_preferences());
  auto trials = client_->Get("/api/admin/export/trials");
  ASSERT_TRUE(trials);
  EXPECT_EQ(trials->body, service_->export_trials());
  const auto summary = get("/api/admin/export/summary", 200);
  EXPECT_TRUE(summary.is_object());
}

TEST_F(HttpTest, ErrorStatuses) {
  get("/api/session/nope/state", 404);
  post("/api/session/nope/action", {{"choice", 0}}, 404);
  const std::string id = post("/api/session", nlohmann::json::object(), 201).at("session_id");
  auto res = client_->Post("/api/session/" + id + "/action", "not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  post("/api/session/" + id + "/action", {{"choice", "zero"}}, 400);
  post("/api/session/" + id + "/survey", nlohmann::json::object(), 409);
  post("/api/admin/session/" + id + "/drop", {{"reason", "test"}}, 200);
  post("/api/session/" + id + "/action", {{"continue", true}}, 409);
  auto missing = client_->Get("/api/admin/export/everything");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST(ServerConfigTest, FileThenEnvironment) {
  const auto file = server_config_from_json(
      nlohmann::json::parse(R"({"port": 9000, "seed": 3, "multiplier": "3/2", "rounds_per_stage": 15})"));
  EXPECT_EQ(file.port, 9000);
  EXPECT_EQ(file.multiplier, Rational(3, 2));
  std::map<std::string, std::string> env = {{"INSTGAME_PORT", "9100"}, {"INSTGAME_MULTIPLIER", "1.5"},
                                            {"INSTGAME_DATA_DIR", "/tmp/x"}, {"INSTGAME_ROUNDS_PER_STAGE", "20"}};
  const auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  const auto merged = apply_env_overrides(file, lookup);
  EXPECT_EQ(merged.port, 9100);
  EXPECT_EQ(merged.seed, 3u);
  EXPECT_EQ(merged.data_dir, "/tmp/x");
  EXPECT_EQ(merged.rounds_per_stage, 20);
  env["INSTGAME_SEED"] = "abc";
  EXPECT_THROW(apply_env_overrides(file, lookup), Error);
  EXPECT_EQ(http_status(ErrorCode::kWrongStage), 409);
  EXPECT_EQ(http_status(ErrorCode::kUnknownSession), 404);
  EXPECT_EQ(http_status(ErrorCode::kRoomFull), 503);
}

}  // namespace
}  // namespace instgame
