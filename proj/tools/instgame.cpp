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

// Command-line driver: space generation and verification, cohort
// simulation, hypercube walks, analysis and the HTTP service.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "instgame/http_api.hpp"
#include "instgame/instgame.hpp"
#include "instgame/study_fixtures.hpp"

namespace fs = std::filesystem;
using namespace instgame;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GameSpace read_space(const fs::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, path.string() + " is not valid JSON");
  return space_from_json(j);
}

template <typename T, typename F>
std::vector<T> read_records(const fs::path& path, F parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return parse(in);
}

struct SpaceFlags {
  int features = 3;
  std::string multiplier = "2";
  int payoff_bound = 8;
  int base_total = 16;
  std::string zero_miscoordination = "auto";

  void add(CLI::App* app) {
    app->add_option("--features", features, "Number of features (3 or 4)")->check(CLI::IsMember({3, 4}));
    app->add_option("--multiplier", multiplier, "Efficiency multiplier, e.g. 2 or 3/2 or 1.5");
    app->add_option("--payoff-bound", payoff_bound, "Largest payoff entry of a base game");
    app->add_option("--base-total", base_total, "Total payoff of a non-efficient game");
    app->add_option("--zero-miscoordination", zero_miscoordination, "auto, on or off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
  }

  SpaceConfig config(std::uint64_t seed) const {
    SpaceConfig c;
    c.feature_count = features;
    c.efficiency_multiplier = Rational::parse(multiplier);
    c.payoff_bound = payoff_bound;
    c.base_total = base_total;
    c.rng_seed = seed;
    if (zero_miscoordination != "auto") c.zero_miscoordination = zero_miscoordination == "on";
    return c;
  }
};

PreferenceModel build_model(const std::string& name, const std::string& order, const std::string& table_file,
                            int features, std::uint64_t seed) {
  if (name == "lexicographic") {
    std::vector<Feature> fs_order;
    std::stringstream ss(order);
    for (std::string tok; std::getline(ss, tok, ',');) fs_order.push_back(feature_from_string(tok));
    if (fs_order.empty())
      for (int f = 0; f < features; ++f) fs_order.push_back(static_cast<Feature>(f));
    PreferenceModel m = lexicographic(fs_order);
    validate(m, features);
    return m;
  }
  if (name == "payoff") return ExperiencedPayoff{};
  if (name == "table") {
    if (table_file.empty()) return fixtures::empirical_table(fixtures::observed_preferences());
    const auto prefs = read_records<PreferenceRecord>(table_file, read_preferences);
    PairEstimates est;
    BootstrapConfig bc;
    bc.seed = seed;
    for (const auto& pair : comparison_pairs(features)) {
      const bool any = std::any_of(prefs.begin(), prefs.end(), [&](const auto& p) { return p.pair == pair; });
      if (any) est.emplace(pair, preference_proportion(prefs, pair, bc));
    }
    return fixtures::empirical_table(est);
  }
  throw Error(ErrorCode::kInvalidArgument, "--model must be lexicographic, payoff or table");
}

std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instgame: institutional game spaces, simulation, analysis and session service"};
  app.require_subcommand(1);
  std::uint64_t seed = 42;

  // gen-space
  auto* gen = app.add_subcommand("gen-space", "Generate a game space file");
  SpaceFlags gen_flags;
  gen_flags.add(gen);
  std::string gen_out;
  gen->add_option("--seed", seed, "Seed recorded in the space config");
  gen->add_option("-o,--out", gen_out, "Output file (stdout if omitted)");

  // verify
  auto* ver = app.add_subcommand("verify", "Check every vertex of a space file");
  std::string ver_space;
  ver->add_option("--space", ver_space, "Space file")->required()->check(CLI::ExistingFile);
  ver->add_option("--seed", seed, "Unused; accepted for uniformity");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a participant cohort");
  std::string sim_space, sim_out = "sim-out", sim_policy = "equilibrium", sim_model = "payoff", sim_order, sim_table;
  std::size_t sim_n = 960;
  int sim_rounds = 6;
  double sim_eps = 0.0, sim_drop = 0.0;
  unsigned sim_threads = 0;
  bool sim_service = false;
  SpaceFlags sim_flags;
  sim_flags.add(sim);
  sim->add_option("--space", sim_space, "Space file (generated from flags if omitted)");
  sim->add_option("-n,--participants", sim_n, "Participants");
  sim->add_option("--policy", sim_policy, "uniform, myopic, fictitious or equilibrium");
  sim->add_option("--epsilon", sim_eps, "Probability of a uniform move")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--model", sim_model, "Preference model: table, lexicographic or payoff");
  sim->add_option("--order", sim_order, "Lexicographic order, e.g. efficiency,stability,fairness");
  sim->add_option("--table", sim_table, "Preferences file to estimate the table model from");
  sim->add_option("--rounds", sim_rounds, "Rounds per play stage")->check(CLI::PositiveNumber);
  sim->add_option("--threads", sim_threads, "Worker threads (0: all cores)");
  sim->add_flag("--via-service", sim_service, "Play through the session service and its matchmaking");
  sim->add_option("--drop", sim_drop, "Dropout probability before the choice (service mode)")
      ->check(CLI::Range(0.0, 1.0));
  sim->add_option("--out-dir", sim_out, "Output directory");
  sim->add_option("--seed", seed, "Master seed");

  // walk
  auto* walk = app.add_subcommand("walk", "Preference walks on the hypercube");
  std::string walk_model = "table", walk_order, walk_table, walk_starts = "all", walk_acc = "significant", walk_space;
  int walk_steps = 16;
  int walk_features = 3;
  walk->add_option("--model", walk_model, "table, lexicographic or payoff");
  walk->add_option("--order", walk_order, "Lexicographic order");
  walk->add_option("--table", walk_table, "Preferences file for the table model");
  walk->add_option("--starts", walk_starts, "'all' or comma-separated labels");
  walk->add_option("--acceptance", walk_acc, "sample, majority or significant");
  walk->add_option("--steps", walk_steps, "Maximum steps")->check(CLI::NonNegativeNumber);
  walk->add_option("--features", walk_features, "Number of features")->check(CLI::IsMember({3, 4}));
  walk->add_option("--space", walk_space, "Space file (generated if omitted)");
  walk->add_option("--seed", seed, "Master seed");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Analyze trial and preference files");
  std::string ana_trials, ana_prefs, ana_space, ana_out = "analysis", ana_mode = "any";
  int ana_b = 10000;
  ana->add_option("--trials", ana_trials, "Trials file")->check(CLI::ExistingFile);
  ana->add_option("--preferences", ana_prefs, "Preferences file")->check(CLI::ExistingFile);
  ana->add_option("--space", ana_space, "Space file (default 3-feature space if omitted)");
  ana->add_option("--out-dir", ana_out, "Output directory");
  ana->add_option("--resamples", ana_b, "Bootstrap resamples")->check(CLI::PositiveNumber);
  ana->add_option("--mode", ana_mode, "Cooperation: any or both")->check(CLI::IsMember({"any", "both"}));
  ana->add_option("--seed", seed, "Bootstrap seed");

  // make-fixture
  auto* fix = app.add_subcommand("make-fixture", "Write the synthetic cohort-accounting dataset");
  std::string fix_out = "fixture";
  fix->add_option("--out-dir", fix_out, "Output directory");
  fix->add_option("--seed", seed, "Seed");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the session service");
  std::string srv_config, srv_space, srv_data, srv_host;
  int srv_port = -1, srv_rounds = -1;
  std::string srv_mult;
  std::optional<std::uint64_t> srv_seed;
  srv->add_option("--config", srv_config, "JSON config file")->check(CLI::ExistingFile);
  srv->add_option("--space", srv_space, "Space file");
  srv->add_option("--data-dir", srv_data, "Directory holding the event log");
  srv->add_option("--host", srv_host, "Bind address");
  srv->add_option("--port", srv_port, "Port");
  srv->add_option("--rounds", srv_rounds, "Rounds per play stage");
  srv->add_option("--multiplier", srv_mult, "Efficiency multiplier");
  srv->add_option("--seed", srv_seed, "Service seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const GameSpace space = generate_space(gen_flags.config(seed));
      const VerifyReport report = verify_space(space);
      const std::string text = to_json(space).dump(2) + "\n";
      if (gen_out.empty()) std::cout << text;
      else write_file(gen_out, text);
      if (!report.passed()) {
        std::cerr << to_string(report);
        return 1;
      }
      return 0;
    }

    if (*ver) {
      const VerifyReport report = verify_space(read_space(ver_space));
      std::cout << to_string(report);
      return report.passed() ? 0 : 1;
    }

    if (*sim) {
      const GameSpace space = sim_space.empty() ? generate_space(sim_flags.config(seed)) : read_space(sim_space);
      if (!verify_space(space).passed()) throw Error(ErrorCode::kServiceNotReady, "space fails verification");
      AgentPolicy policy;
      policy.kind = policy_kind_from_string(sim_policy);
      policy.epsilon = sim_eps;
      const PreferenceModel model =
          build_model(sim_model, sim_order, sim_table, space.config.feature_count, seed);
      Dataset data;
      if (sim_service) {
        ServiceConfig sc;
        sc.seed = seed;
        sc.rounds_per_stage = sim_rounds;
        std::int64_t tick = 0;
        Service service(space, sc, [&] { return ++tick; });
        DriveOptions o;
        o.participants = sim_n;
        o.policy = policy;
        o.model = model;
        o.seed = seed;
        o.drop_probability = sim_drop;
        drive_cohort(service, o);
        data = service.dataset();
        std::string log;
        for (const auto& e : service.events()) log += to_json(e).dump() + "\n";
        write_file(fs::path(sim_out) / "events.jsonl", log);
      } else {
        CohortOptions co;
        co.seed = seed;
        co.rounds_per_stage = sim_rounds;
        co.threads = sim_threads;
        data = simulate_cohort(space, make_conditions(space.config.feature_count), sim_n, policy, model, co);
      }
      write_file(fs::path(sim_out) / "trials.jsonl", to_jsonl(data.trials));
      write_file(fs::path(sim_out) / "preferences.jsonl", to_jsonl(data.preferences));
      write_file(fs::path(sim_out) / "space.json", to_json(space).dump(2) + "\n");
      std::cout << "participants " << sim_n << ", trials " << data.trials.size() << ", preferences "
                << data.preferences.size() << " -> " << sim_out << "\n";
      return 0;
    }

    if (*walk) {
      SpaceConfig sc;
      sc.feature_count = walk_features;
      const GameSpace space = walk_space.empty() ? generate_space(sc) : read_space(walk_space);
      const int k = space.config.feature_count;
      const PreferenceModel model = build_model(walk_model, walk_order, walk_table, k, seed);
      const Acceptance acc = acceptance_from_string(walk_acc);
      std::vector<FeatureVector> starts;
      if (walk_starts == "all") {
        starts = all_vertices(k);
      } else {
        std::stringstream ss(walk_starts);
        for (std::string tok; std::getline(ss, tok, ',');) starts.push_back(FeatureVector::parse(tok));
      }
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (FeatureVector s : starts) {
        Rng rng = derive_rng(seed, "walk-" + s.label());
        const WalkResult w = run_walk(space, s, model, walk_steps, rng, acc);
        nlohmann::ordered_json traj = nlohmann::ordered_json::array();
        for (auto fv : w.trajectory) traj.push_back(fv.label());
        out.push_back({{"start", s.label()},
                       {"attractor", w.attractor.label()},
                       {"steps", w.steps},
                       {"absorbed", w.absorbed},
                       {"trajectory", traj}});
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*ana) {
      if (ana_trials.empty() && ana_prefs.empty())
        throw Error(ErrorCode::kInvalidArgument, "--trials or --preferences is required");
      Dataset d;
      if (!ana_trials.empty()) d.trials = read_records<Trial>(ana_trials, read_trials);
      if (!ana_prefs.empty()) d.preferences = read_records<PreferenceRecord>(ana_prefs, read_preferences);
      const GameSpace space = ana_space.empty() ? generate_space(SpaceConfig{}) : read_space(ana_space);
      ReportConfig rc;
      rc.bootstrap.resamples = ana_b;
      rc.bootstrap.seed = seed;
      rc.mode = ana_mode == "any" ? CooperationMode::kAnyNonzero : CooperationMode::kBothNonzero;
      const AnalysisReport r = report(d, space, rc);
      write_file(fs::path(ana_out) / "summary.json", to_json(r).dump(2) + "\n");
      write_file(fs::path(ana_out) / "cooperation.csv", cooperation_csv(r));
      write_file(fs::path(ana_out) / "preferences.csv", preference_csv(r));
      write_file(fs::path(ana_out) / "paths.csv", paths_csv(r));
      std::cout << "participants " << r.counts.participants << ", choosers " << r.counts.choosers
                << ", trials " << r.counts.trials_total << ", seed trials " << r.counts.seed_trials
                << ", analyzed trials " << r.counts.trials_analyzed << " -> " << ana_out << "\n";
      return 0;
    }

    if (*fix) {
      const Dataset d = fixtures::shaped_dataset(generate_space(SpaceConfig{}), seed);
      write_file(fs::path(fix_out) / "trials.jsonl", to_jsonl(d.trials));
      write_file(fs::path(fix_out) / "preferences.jsonl", to_jsonl(d.preferences));
      std::cout << "trials " << d.trials.size() << ", preferences " << d.preferences.size() << " -> " << fix_out
                << "\n";
      return 0;
    }

    if (*srv) {
      ServerConfig c = load_server_config(srv_config.empty() ? std::nullopt
                                                             : std::optional<fs::path>(srv_config));
      if (!srv_space.empty()) c.space_file = srv_space;
      if (!srv_data.empty()) c.data_dir = srv_data;
      if (!srv_host.empty()) c.host = srv_host;
      if (srv_port >= 0) c.port = srv_port;
      if (srv_rounds > 0) c.rounds_per_stage = srv_rounds;
      if (!srv_mult.empty()) c.multiplier = Rational::parse(srv_mult);
      if (srv_seed) c.seed = *srv_seed;

      fs::create_directories(c.data_dir);
      ServiceConfig sc;
      sc.seed = c.seed;
      sc.rounds_per_stage = c.rounds_per_stage;
      Service service(load_or_generate_space(c), sc, system_clock_ms,
                      EventLog::open(fs::path(c.data_dir) / "events.jsonl"));
      if (!service.ready()) throw Error(ErrorCode::kServiceNotReady, "space fails verification");

      httplib::Server server;
      register_routes(server, service);
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      std::thread reaper([&] {
        while (!g_stop) {
          std::this_thread::sleep_for(std::chrono::milliseconds(200));
          static int ticks = 0;
          if (++ticks % 150 == 0) service.reap_idle();
        }
        server.stop();
      });
      std::cout << "serving on " << c.host << ":" << c.port << " (data " << c.data_dir << ")" << std::endl;
      const bool ok = server.listen(c.host, c.port);
      g_stop = true;
      reaper.join();
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
