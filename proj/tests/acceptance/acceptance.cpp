// Copyright 2026 The Foresight Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "foresight/harness/evaluate.hpp"
#include "foresight/harness/gradcheck.hpp"
#include "foresight/harness/trainer.hpp"
#include "render_oracle.hpp"

namespace foresight {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::vector<EpisodeRecord> toy_episodes(const RunConfig& cfg, std::size_t n, std::uint64_t seed) {
  std::vector<EpisodeRecord> eps;
  for (std::size_t i = 0; i < n; ++i) {
    eps.push_back(generate_episode(i % kEpisodeTasks, splitmix64(seed ^ splitmix64(i + 1)), episode_config(cfg)));
  }
  return eps;
}

Outcome renderer_oracle() {
  std::mt19937_64 rng(101);
  const RenderOptions opt;
  const std::vector<CameraModel> cams{CameraModel::look_at({0.0, -1.3, 0.5}, {0.0, 0.0, 0.0}, 50.0, 32, 32),
                                      CameraModel::look_at({1.1, 0.4, 0.9}, {0.0, 0.0, 0.05}, 55.0, 32, 32)};
  double worst = 0.0;
  std::size_t scenes = 0, contributions = 0;
  for (; scenes < 12; ++scenes) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    const auto params = testing::random_gaussians(n, rng, {0.0, 0.0, 0.0}, 0.3);
    const auto leaf = ad::Var<double>::constant(Tensor<double>({n, kGaussianParams}, params));
    for (const auto& cam : cams) {
      RenderStats stats;
      const auto fast = render_depth(leaf, {}, cam, opt, &stats).value();
      const auto ref = testing::brute_force_depth(params, cam, opt);
      contributions += stats.contributions;
      for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(fast[i] - ref[i]));
    }
  }
  return {worst <= 1e-10 && contributions > 0,
          "scenes=" + std::to_string(scenes) + " cameras=2 max_abs=" + fmt(worst)};
}

Outcome renderer_gradients() {
  const auto r = gradcheck_renderer(202, 10);
  return {r.passed, format_gradcheck(r)};
}

Outcome end_to_end_gradients() {
  const auto r = gradcheck_full(303, 100);
  return {r.passed, format_gradcheck(r)};
}

Outcome block_mask_exhaustive() {
  std::size_t tuples = 0, mismatches = 0;
  std::array<std::size_t, kBlockCount> s{};
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t b, std::size_t used) {
    if (b == kBlockCount) {
      if (used == 0) return;
      const auto mask = build_block_mask({s});
      std::vector<std::size_t> block;
      for (std::size_t i = 0; i < kBlockCount; ++i) block.insert(block.end(), s[i], i);
      for (std::size_t q = 0; q < used; ++q)
        for (std::size_t k = 0; k < used; ++k) mismatches += mask.at(q, k) != (block[k] <= block[q]);
      ++tuples;
      return;
    }
    for (std::size_t n = 0; used + n <= 16; ++n) {
      s[b] = n;
      visit(b + 1, used + n);
    }
    s[b] = 0;
  };
  visit(0, 0);
  return {mismatches == 0 && tuples == 20348, "tuples=" + std::to_string(tuples) + " mismatches=" + std::to_string(mismatches)};
}

Outcome refinement_accounting() {
  const auto cfg = RunConfig::toy();
  const Model<double> model(cfg);
  const auto ws = cfg.workspace();
  std::mt19937_64 rng(505);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> volume({ws.fine_count(), cfg.feature_channels});
  for (auto& v : volume.data()) v = normal(rng);
  const auto vol = ad::Var<double>::constant(volume);
  const auto init = model.geometry().gaussian_head(vol);
  std::size_t bad = 0, marked_total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    Tensor<double> kp({k, 3});
    std::uniform_real_distribution<double> u(-0.1, 0.9);
    for (auto& v : kp.data()) v = u(rng);
    std::set<std::size_t> oracle;
    for (std::size_t j = 0; j < k; ++j) {
      // Scan every cell [min + i v, min + (i + 1) v) of each axis.
      std::size_t idx[3];
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        bool found = false;
        for (std::size_t i = 0; i < ws.fine[a] && !found; ++i) {
          const double lo = ws.min[a] + double(i) * cfg.voxel;
          if (kp.at(j, a) >= lo && kp.at(j, a) < lo + cfg.voxel) {
            idx[a] = i;
            found = true;
          }
        }
        inside = inside && found;
      }
      if (inside) oracle.insert(ws.fine_index(idx[0], idx[1], idx[2]));
    }
    const auto marked = marked_voxels(refinement_mask(kp, ws));
    const auto refined = model.geometry().refine(vol, marked);
    const auto total = union_gaussians(init, refined);
    bad += std::vector<std::size_t>(oracle.begin(), oracle.end()) != marked;
    bad += total.size() != ws.fine_count() * cfg.gaussians_per_voxel + marked.size() * cfg.refined_per_voxel;
    bad += total.count(Provenance::kRefined) != marked.size() * cfg.refined_per_voxel;
    marked_total += marked.size();
  }
  return {bad == 0 && marked_total > 0,
          "track_sets=100 mismatches=" + std::to_string(bad) + " marked=" + std::to_string(marked_total)};
}

struct OverfitRun {
  std::unique_ptr<Trainer<float>> trainer;
  Metrics metrics;
};

OverfitRun& overfit_run() {
  static OverfitRun run = [] {
    OverfitRun r;
    auto cfg = RunConfig::toy();
    cfg.precision = 32;
    r.trainer = std::make_unique<Trainer<float>>(cfg, toy_episodes(cfg, 4, 606));
    std::ostringstream log;
    run_training(*r.trainer, cfg.iterations, log);
    ModelPredictor<float> predictor(r.trainer->model(), 10, 607);
    r.metrics = evaluate(predictor, r.trainer->episodes(), cfg);
    return r;
  }();
  return run;
}

Outcome overfit() {
  const auto& run = overfit_run();
  const auto& m = run.metrics;
  const bool pass = m.track_mse && m.depth_l1 && *m.track_mse < 1e-3 && *m.depth_l1 < 0.05 && m.action_mse < 1e-2;
  return {pass, "iterations=" + std::to_string(run.trainer->iteration()) + " " + format_metrics(m)};
}

Outcome inference_exclusion() {
  const auto& trainer = *overfit_run().trainer;
  const auto& model = trainer.model();
  std::size_t compared = 0, differ = 0, traced = 0;
  for (std::size_t e = 0; e < trainer.episodes().size(); ++e) {
    for (std::size_t t : {1u, 9u, 18u}) {
      const auto sample = make_sample<float>(trainer.episodes()[e], t, model.config());
      typename Model<float>::GeometryTrace trace;
      const auto with = model.act(sample, 10, 700 + t, &trace);
      const auto without = model.act(sample, 10, 700 + t);
      differ += !(with == without);
      traced += trace.gaussians > 0 && trace.rendered.size() > 0;
      ++compared;
    }
  }
  return {differ == 0 && traced == compared,
          "windows=" + std::to_string(compared) + " differing=" + std::to_string(differ) +
              " renderer_executed=" + std::to_string(traced)};
}

template <typename T>
double kv_cache_gap(bool& bit_identical) {
  const auto cfg = RunConfig::toy();
  ParameterStore<T> store(808);
  const auto policy = Policy<T>::create(store, "policy", cfg.policy());
  const auto ep = toy_episodes(cfg, 1, 809)[0];
  const auto s = make_sample<T>(ep, 6, cfg);
  std::mt19937_64 rng(810);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random = [&](Shape shape) {
    Tensor<T> t(shape);
    for (auto& v : t.data()) v = static_cast<T>(normal(rng));
    return t;
  };
  PolicyInputs<T> in{s.task, s.images, ad::Var<T>::constant(random({cfg.keypoints, cfg.channels})),
                     ad::Var<T>::constant(random({cfg.keypoints + cfg.workspace().coarse_count(), cfg.channels})),
                     s.state};
  const auto ctx = policy.embed_context(in);
  const auto cache = policy.build_kv_cache(ctx);
  double worst = 0.0;
  bit_identical = true;
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random({cfg.horizon, kActionDim});
    const T time = static_cast<T>(0.2 * trial + 0.05);
    const auto full = policy.velocity(policy.forward(ctx, policy.embed_actions(x, time)).actions).value();
    const auto cached = policy.cached_velocity(cache, x, time);
    bit_identical = bit_identical && full == cached;
    for (std::size_t i = 0; i < full.size(); ++i) {
      const double denom = std::max(std::abs(double(full[i])), 1e-6);
      worst = std::max(worst, std::abs(double(full[i]) - double(cached[i])) / denom);
    }
  }
  return worst;
}

Outcome kv_cache() {
  bool identical32 = false, identical64 = false;
  const double rel32 = kv_cache_gap<float>(identical32);
  const double rel64 = kv_cache_gap<double>(identical64);
  return {rel32 <= 1e-5 && identical64,
          "float_max_rel=" + fmt(rel32) + " double_bit_identical=" + (identical64 ? "yes" : "no")};
}

Outcome ablation_toggles() {
  const auto dir = fs::temp_directory_path() / ("foresight_acceptance_ablate_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const std::vector<std::pair<std::string, std::vector<std::string>>> expect{
      {"history-track", {"history_track=disabled"}},
      {"future-track", {"future_track=disabled", "refinement=disabled", "note refinement=disabled", "track=0 ",
                        "track_mse=off"}},
      {"depth", {"depth=disabled", "depth=0 ", "gaussians_total=0 ", "depth_l1=off"}},
      {"refinement", {"refinement=disabled", "gaussians_refined=0 ", "refined_voxels=off"}}};
  std::string detail;
  bool pass = true;
  for (const auto& [pathway, needles] : expect) {
    const std::string out = (dir / pathway).string();
    const char* argv[] = {"foresight", "ablate", "--disable", pathway.c_str(), "--iterations", "20",
                          "--episodes", "2", "--seed", "11", "--out", out.c_str()};
    std::ostringstream sout, serr;
    const int status = run_cli(12, argv, sout, serr);
    std::ifstream file(dir / pathway / "ablate.log");
    const std::string log((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    bool ok = status == 0 && log.find("iter=20 ") != std::string::npos && log.find("metrics ") != std::string::npos;
    for (const auto& n : needles) ok = ok && log.find(n) != std::string::npos;
    if (pathway == "refinement") {
      // Every logged step renders exactly the initial set.
      std::istringstream lines(log);
      for (std::string line; std::getline(lines, line);) {
        const auto a = line.find("gaussians_initial="), b = line.find("gaussians_total=");
        if (a == std::string::npos) continue;
        ok = ok && std::stoul(line.substr(a + 18)) == std::stoul(line.substr(b + 16));
      }
    }
    pass = pass && ok;
    detail += pathway + (ok ? "=ok " : "=missing ");
  }
  fs::remove_all(dir);
  return {pass, detail + "iterations=20"};
}

Outcome determinism() {
  auto cfg = RunConfig::toy();
  cfg.precision = 64;
  const auto eps = toy_episodes(cfg, 4, 909);
  std::string text[2];
  std::vector<double> totals[2];
  for (int run = 0; run < 2; ++run) {
    Trainer<double> trainer(cfg, eps);
    std::ostringstream log;
    for (const auto& r : run_training(trainer, cfg.iterations, log)) totals[run].push_back(r.total);
    ModelPredictor<double> predictor(trainer.model(), cfg.denoise_steps, cfg.seed);
    text[run] = format_metrics(evaluate(predictor, eps, cfg));
  }
  return {text[0] == text[1] && totals[0] == totals[1],
          "iterations=" + std::to_string(cfg.iterations) + " identical=" + (text[0] == text[1] ? "yes" : "no") + " " +
              text[0]};
}

}  // namespace
}  // namespace foresight

int main(int argc, char** argv) {
  using namespace foresight;
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"renderer oracle equivalence", renderer_oracle},
      {"renderer gradient check", renderer_gradients},
      {"end-to-end gradient check", end_to_end_gradients},
      {"block mask exhaustive", block_mask_exhaustive},
      {"refinement accounting", refinement_accounting},
      {"overfit", overfit},
      {"inference-path exclusion", inference_exclusion},
      {"kv-cache equivalence", kv_cache},
      {"ablation toggles", ablation_toggles},
      {"determinism", determinism}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), int(i + 1)) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " " << criteria[i].first << ": " << (o.pass ? "PASS" : "FAIL") << " ("
              << o.detail << ", " << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat
              << std::endl;
  }
  return failures;
}
