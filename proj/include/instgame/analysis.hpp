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

// Statistics over trial and preference datasets: seed filtering,
// cooperation rates, preference proportions with percentile-bootstrap
// intervals, layer summaries, and path-gradient / lock-in reports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "instgame/error.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"

namespace instgame {

inline std::vector<Trial> filter_seed_trials(const std::vector<Trial>& trials) {
  std::vector<Trial> out;
  out.reserve(trials.size());
  std::copy_if(trials.begin(), trials.end(), std::back_inserter(out),
               [](const Trial& t) { return !t.involves_seed(); });
  return out;
}

enum class CooperationMode : std::uint8_t { kAnyNonzero, kBothNonzero };

inline bool is_cooperative(const PayoffPair& p, CooperationMode mode = CooperationMode::kAnyNonzero) {
  return mode == CooperationMode::kAnyNonzero ? !p.is_zero() : (p.u1 != 0 && p.u2 != 0);
}

inline bool is_cooperative(const Trial& t, CooperationMode mode = CooperationMode::kAnyNonzero) {
  return is_cooperative(t.payoffs, mode);
}

struct BootstrapConfig {
  int resamples = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
  friend bool operator==(const Estimate&, const Estimate&) = default;
};

// Type-7 (linear interpolation) empirical quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Percentile bootstrap of the sample mean.
inline std::pair<double, double> bootstrap_ci(std::span<const double> samples, int resamples,
                                              double alpha, Rng& rng) {
  if (samples.empty()) throw Error(ErrorCode::kEmptySample, "bootstrap of an empty sample");
  if (resamples < 1) throw Error(ErrorCode::kInvalidArgument, "resamples must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0,1)");
  const std::size_t n = samples.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (auto& s : stats) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[pick(rng)];
    s = sum / static_cast<double>(n);
  }
  std::sort(stats.begin(), stats.end());
  return {quantile_sorted(stats, alpha / 2.0), quantile_sorted(stats, 1.0 - alpha / 2.0)};
}

// Proportion of ones with a bootstrap interval drawn from the stream `key`.
inline Estimate proportion_estimate(std::span<const double> indicators, const BootstrapConfig& config,
                                    std::string_view key) {
  const double ones = std::accumulate(indicators.begin(), indicators.end(), 0.0);
  Estimate e;
  e.n = indicators.size();
  e.value = ones / static_cast<double>(e.n);
  Rng rng = derive_rng(config.seed, key);
  auto [lo, hi] = bootstrap_ci(indicators, config.resamples, config.alpha, rng);
  e.ci_low = std::clamp(std::min(lo, e.value), 0.0, 1.0);
  e.ci_high = std::clamp(std::max(hi, e.value), 0.0, 1.0);
  return e;
}

inline Estimate cooperation_rate(const std::vector<Trial>& trials, FeatureVector label,
                                 const BootstrapConfig& config = {},
                                 CooperationMode mode = CooperationMode::kAnyNonzero) {
  std::vector<double> ind;
  for (const auto& t : trials)
    if (t.game_label == label) ind.push_back(is_cooperative(t, mode) ? 1.0 : 0.0);
  if (ind.empty()) throw Error(ErrorCode::kEmptyCell, "no trials for game " + label.label());
  return proportion_estimate(ind, config, "cooperation:" + label.label());
}

// One record per participant per pair; a later duplicate replaces an
// earlier one.
inline Estimate preference_proportion(const std::vector<PreferenceRecord>& prefs,
                                      const ComparisonPair& pair, const BootstrapConfig& config = {}) {
  std::map<std::string, bool> by_session;
  for (const auto& p : prefs)
    if (p.pair == pair) by_session[p.session_id] = p.chosen == pair.high;
  if (by_session.empty()) throw Error(ErrorCode::kEmptyCell, "no preference records for " + pair.key());
  std::vector<double> ind;
  ind.reserve(by_session.size());
  for (const auto& [s, high] : by_session) ind.push_back(high ? 1.0 : 0.0);
  return proportion_estimate(ind, config, "preference:" + pair.key());
}

struct LayerSummary {
  std::map<int, double> layer_means;
  std::map<FeatureVector, Estimate> table;

  bool monotone_increasing() const {
    std::optional<double> prev;
    for (const auto& [layer, m] : layer_means) {
      if (prev && m <= *prev) return false;
      prev = m;
    }
    return true;
  }
};

inline LayerSummary layer_summary(const std::map<FeatureVector, Estimate>& estimates,
                                  int feature_count = 3) {
  LayerSummary s;
  std::map<int, std::pair<double, int>> acc;
  for (FeatureVector fv : all_vertices(feature_count)) {
    auto it = estimates.find(fv);
    if (it == estimates.end()) throw Error(ErrorCode::kMissingLabel, "no estimate for " + fv.label());
    s.table.emplace(fv, it->second);
    auto& [sum, count] = acc[layer(fv)];
    sum += it->second.value;
    ++count;
  }
  for (const auto& [l, sc] : acc) s.layer_means[l] = sc.first / sc.second;
  return s;
}

enum class StepFlag : std::uint8_t { kAdvance, kNeutral, kResist, kMissing };

constexpr std::string_view to_string(StepFlag f) {
  switch (f) {
    case StepFlag::kAdvance: return "ADVANCE";
    case StepFlag::kNeutral: return "NEUTRAL";
    case StepFlag::kResist: return "RESIST";
    case StepFlag::kMissing: return "MISSING";
  }
  return "?";
}

inline StepFlag classify(const Estimate& e) {
  if (e.ci_low > 0.5) return StepFlag::kAdvance;
  if (e.ci_high < 0.5) return StepFlag::kResist;
  return StepFlag::kNeutral;
}

struct GradientStep {
  FeatureVector from;
  FeatureVector to;
  std::optional<Estimate> estimate;  // probability of moving from -> to
  StepFlag flag = StepFlag::kMissing;
};

struct GradientReport {
  std::vector<FeatureVector> path;
  std::vector<GradientStep> steps;
  bool lock_in_prone = false;
  bool complete = true;  // false when some step had no estimate

  std::vector<StepFlag> flags() const {
    std::vector<StepFlag> out;
    for (const auto& s : steps) out.push_back(s.flag);
    return out;
  }
};

using PairEstimates = std::map<ComparisonPair, Estimate>;

namespace detail {

inline GradientReport path_gradient_impl(const PairEstimates& prefs,
                                         const std::vector<FeatureVector>& path, bool tolerate_missing) {
  if (path.size() < 2) throw Error(ErrorCode::kInvalidArgument, "a path needs at least two vertices");
  GradientReport r;
  r.path = path;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const FeatureVector from = path[i - 1];
    const FeatureVector to = path[i];
    if (hamming(from, to) != 1)
      throw Error(ErrorCode::kInvalidArgument, "path step " + from.label() + "->" + to.label() +
                                                   " is not a hypercube edge");
    const bool upward = to.value() > from.value();
    const ComparisonPair pair = upward ? ComparisonPair{from, to} : ComparisonPair{to, from};
    GradientStep step{from, to, std::nullopt, StepFlag::kMissing};
    auto it = prefs.find(pair);
    if (it == prefs.end()) {
      if (!tolerate_missing) throw Error(ErrorCode::kMissingPair, "no preference estimate for " + pair.key());
      r.complete = false;
    } else {
      Estimate e = it->second;
      if (!upward) e = {1.0 - e.value, 1.0 - e.ci_high, 1.0 - e.ci_low, e.n};
      step.estimate = e;
      step.flag = classify(e);
    }
    r.steps.push_back(step);
  }
  for (std::size_t i = 1; i < r.steps.size(); ++i)
    if (r.steps[i].flag == StepFlag::kNeutral || r.steps[i].flag == StepFlag::kResist) r.lock_in_prone = true;
  return r;
}

}  // namespace detail

inline GradientReport path_gradient(const PairEstimates& prefs, const std::vector<FeatureVector>& path) {
  return detail::path_gradient_impl(prefs, path, false);
}

// All orders of acquiring every feature, from the empty vertex to the full one.
inline std::vector<std::vector<FeatureVector>> canonical_paths(int feature_count = 3) {
  std::vector<int> order(static_cast<std::size_t>(feature_count));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<FeatureVector>> out;
  do {
    std::vector<FeatureVector> path{FeatureVector(0, feature_count)};
    for (int f : order) path.push_back(path.back().with(f, true));
    out.push_back(std::move(path));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

inline std::string path_label(const std::vector<FeatureVector>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) s += (i ? ">" : "") + path[i].label();
  return s;
}

// ---- full report -------------------------------------------------------------

struct ReportConfig {
  BootstrapConfig bootstrap;
  CooperationMode mode = CooperationMode::kAnyNonzero;
};

struct ReportCounts {
  std::size_t participants = 0;
  std::size_t choosers = 0;
  std::size_t non_choosers = 0;
  std::size_t trials_total = 0;
  std::size_t seed_trials = 0;
  std::size_t trials_analyzed = 0;
  std::size_t preference_records = 0;
  friend bool operator==(const ReportCounts&, const ReportCounts&) = default;
};

struct AnalysisReport {
  ReportCounts counts;
  std::map<FeatureVector, Estimate> cooperation;
  PairEstimates preferences;
  std::optional<LayerSummary> layers;
  std::vector<GradientReport> paths;
};

inline AnalysisReport report(const Dataset& data, const GameSpace& space, const ReportConfig& config = {}) {
  if (data.trials.empty() && data.preferences.empty())
    throw Error(ErrorCode::kEmptyDataset, "dataset has no trials and no preferences");
  AnalysisReport r;
  std::set<std::string> participants, choosers;
  for (const auto& t : data.trials) {
    participants.insert(t.session_id);
    if (!t.p1_session_id.empty()) participants.insert(t.p1_session_id);
  }
  for (const auto& p : data.preferences) {
    participants.insert(p.session_id);
    choosers.insert(p.session_id);
  }
  const auto analyzed = filter_seed_trials(data.trials);
  r.counts.participants = participants.size();
  r.counts.choosers = choosers.size();
  r.counts.non_choosers = participants.size() - choosers.size();
  r.counts.trials_total = data.trials.size();
  r.counts.trials_analyzed = analyzed.size();
  r.counts.seed_trials = data.trials.size() - analyzed.size();
  r.counts.preference_records = data.preferences.size();

  const int k = space.config.feature_count;
  for (FeatureVector fv : all_vertices(k)) {
    const bool any = std::any_of(analyzed.begin(), analyzed.end(),
                                 [&](const Trial& t) { return t.game_label == fv; });
    if (any) r.cooperation.emplace(fv, cooperation_rate(analyzed, fv, config.bootstrap, config.mode));
  }
  for (const auto& pair : comparison_pairs(k)) {
    const bool any = std::any_of(data.preferences.begin(), data.preferences.end(),
                                 [&](const PreferenceRecord& p) { return p.pair == pair; });
    if (any) r.preferences.emplace(pair, preference_proportion(data.preferences, pair, config.bootstrap));
  }
  if (r.cooperation.size() == static_cast<std::size_t>(1 << k)) r.layers = layer_summary(r.cooperation, k);
  for (const auto& path : canonical_paths(k))
    r.paths.push_back(detail::path_gradient_impl(r.preferences, path, true));
  return r;
}

// ---- output ------------------------------------------------------------------

inline std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline nlohmann::ordered_json to_json(const Estimate& e) {
  nlohmann::ordered_json j;
  j["value"] = std::stod(fmt6(e.value));
  j["ci_low"] = std::stod(fmt6(e.ci_low));
  j["ci_high"] = std::stod(fmt6(e.ci_high));
  j["n"] = e.n;
  return j;
}

inline nlohmann::ordered_json to_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["counts"] = {{"participants", r.counts.participants},
                 {"choosers", r.counts.choosers},
                 {"non_choosers", r.counts.non_choosers},
                 {"trials_total", r.counts.trials_total},
                 {"seed_trials", r.counts.seed_trials},
                 {"trials_analyzed", r.counts.trials_analyzed},
                 {"preference_records", r.counts.preference_records}};
  nlohmann::ordered_json coop = nlohmann::ordered_json::object();
  for (const auto& [fv, e] : r.cooperation) {
    auto ej = to_json(e);
    ej["layer"] = layer(fv);
    coop[fv.label()] = ej;
  }
  j["cooperation"] = coop;
  nlohmann::ordered_json prefs = nlohmann::ordered_json::object();
  for (const auto& [pair, e] : r.preferences) prefs[pair.key()] = to_json(e);
  j["preferences"] = prefs;
  if (r.layers) {
    nlohmann::ordered_json lm = nlohmann::ordered_json::object();
    for (const auto& [l, m] : r.layers->layer_means) lm[std::to_string(l)] = std::stod(fmt6(m));
    j["layer_means"] = lm;
    j["layers_monotone"] = r.layers->monotone_increasing();
  } else {
    j["layer_means"] = nullptr;
  }
  nlohmann::ordered_json paths = nlohmann::ordered_json::array();
  for (const auto& g : r.paths) {
    nlohmann::ordered_json pj;
    pj["path"] = path_label(g.path);
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : g.steps) {
      nlohmann::ordered_json sj;
      sj["from"] = s.from.label();
      sj["to"] = s.to.label();
      sj["flag"] = std::string(to_string(s.flag));
      sj["estimate"] = s.estimate ? to_json(*s.estimate) : nlohmann::ordered_json(nullptr);
      steps.push_back(sj);
    }
    pj["steps"] = steps;
    pj["lock_in_prone"] = g.lock_in_prone;
    pj["complete"] = g.complete;
    paths.push_back(pj);
  }
  j["paths"] = paths;
  return j;
}

inline std::string cooperation_csv(const AnalysisReport& r) {
  std::string s = "game_label,layer,value,ci_low,ci_high,n\n";
  for (const auto& [fv, e] : r.cooperation)
    s += fv.label() + "," + std::to_string(layer(fv)) + "," + fmt6(e.value) + "," + fmt6(e.ci_low) + "," +
         fmt6(e.ci_high) + "," + std::to_string(e.n) + "\n";
  return s;
}

inline std::string preference_csv(const AnalysisReport& r) {
  std::string s = "low,high,value,ci_low,ci_high,n\n";
  for (const auto& [pair, e] : r.preferences)
    s += pair.low.label() + "," + pair.high.label() + "," + fmt6(e.value) + "," + fmt6(e.ci_low) + "," +
         fmt6(e.ci_high) + "," + std::to_string(e.n) + "\n";
  return s;
}

inline std::string paths_csv(const AnalysisReport& r) {
  std::string s = "path,step,from,to,value,ci_low,ci_high,flag,lock_in_prone\n";
  for (const auto& g : r.paths) {
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
      const auto& st = g.steps[i];
      s += path_label(g.path) + "," + std::to_string(i + 1) + "," + st.from.label() + "," + st.to.label() + ",";
      if (st.estimate)
        s += fmt6(st.estimate->value) + "," + fmt6(st.estimate->ci_low) + "," + fmt6(st.estimate->ci_high);
      else
        s += ",,";
      s += "," + std::string(to_string(st.flag)) + "," + (g.lock_in_prone ? "true" : "false") + "\n";
    }
  }
  return s;
}

}  // namespace instgame
