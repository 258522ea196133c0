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

#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <streambuf>

#include "foresight/harness/evaluate.hpp"
#include "foresight/harness/gradcheck.hpp"
#include "foresight/harness/trainer.hpp"
#include "foresight/numerics/checkpoint.hpp"
#include "foresight/renderer/depth_maps.hpp"

namespace foresight {

namespace fs = std::filesystem;

namespace {

/// Writes to two streams at once.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    const auto ch = traits_type::to_char_type(c);
    if (a_->sputc(ch) == traits_type::eof() || b_->sputc(ch) == traits_type::eof()) return traits_type::eof();
    return c;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    a_->sputn(s, n);
    return b_->sputn(s, n);
  }
  int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

 private:
  std::streambuf *a_, *b_;
};

RunConfig config_or_default(const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig::toy() : RunConfig::load(path);
  cfg.validate();
  return cfg;
}

template <typename T>
Metrics evaluate_model(const Model<T>& model, const std::vector<EpisodeRecord>& episodes, std::uint64_t seed) {
  ModelPredictor<T> predictor(model, model.config().denoise_steps, seed);
  return evaluate(predictor, episodes, model.config());
}

template <typename T>
int train_run(RunConfig cfg, std::vector<EpisodeRecord> episodes, const std::optional<fs::path>& out_dir,
              const std::string& log_name, std::size_t iterations, bool report_metrics, std::ostream& out) {
  Trainer<T> trainer(cfg, std::move(episodes));
  std::ofstream file;
  if (out_dir) {
    fs::create_directories(*out_dir);
    file.open(*out_dir / log_name);
    if (!file) throw std::runtime_error("cannot open log file in " + out_dir->string());
  }
  TeeBuf tee(out.rdbuf(), file.is_open() ? file.rdbuf() : out.rdbuf());
  std::ostream log(file.is_open() ? static_cast<std::streambuf*>(&tee) : out.rdbuf());
  run_training(trainer, iterations, log);
  if (out_dir) {
    trainer.save(*out_dir / "checkpoint");
    log << "checkpoint " << (*out_dir / "checkpoint").string() << "\n";
  }
  if (report_metrics) {
    log << "metrics " << format_metrics(evaluate_model(trainer.model(), trainer.episodes(), trainer.config().seed))
        << "\n";
  }
  log.flush();
  return 0;
}

int train_any(const RunConfig& cfg, std::vector<EpisodeRecord> episodes, const std::optional<fs::path>& out_dir,
              const std::string& log_name, std::size_t iterations, bool report_metrics, std::ostream& out) {
  if (cfg.precision == 64) return train_run<double>(cfg, std::move(episodes), out_dir, log_name, iterations, report_metrics, out);
  return train_run<float>(cfg, std::move(episodes), out_dir, log_name, iterations, report_metrics, out);
}

template <typename T>
std::unique_ptr<Model<T>> load_model(const fs::path& checkpoint) {
  auto model = std::make_unique<Model<T>>(checkpoint_config(checkpoint));
  load_checkpoint(checkpoint, model->store());
  return model;
}

template <typename T>
int eval_run(const fs::path& checkpoint, const fs::path& data, std::optional<std::uint64_t> seed, std::ostream& out) {
  const auto model = load_model<T>(checkpoint);
  const auto episodes = load_dataset(data, model->config());
  out << format_metrics(evaluate_model(*model, episodes, seed.value_or(model->config().seed))) << "\n";
  return 0;
}

template <typename T>
int render_run(const fs::path& checkpoint, const fs::path& episode_dir, std::size_t step, std::size_t tau,
               std::size_t camera, const fs::path& out_path, std::ostream& out) {
  const auto model = load_model<T>(checkpoint);
  const auto& cfg = model->config();
  if (cfg.disable.depth) throw std::invalid_argument("render-depth: the checkpoint has no depth pathway");
  if (tau > cfg.horizon) throw std::invalid_argument("render-depth: --tau exceeds the horizon");
  if (camera >= cfg.cameras) throw std::invalid_argument("render-depth: --camera out of range");
  const auto episode = load_episode(episode_dir);
  const auto sample = make_sample<T>(episode, step, cfg);
  typename Model<T>::GeometryTrace trace;
  model->act(sample, cfg.denoise_steps, cfg.seed, &trace);
  const std::size_t h = cfg.image_size, w = cfg.image_size;
  Tensor<T> image({h, w});
  const T* src = trace.rendered.data().data() + (tau * cfg.cameras + camera) * h * w;
  std::copy(src, src + h * w, image.data().begin());
  save_depth_pgm(out_path, image);
  out << "render step=" << step << " tau=" << tau << " camera=" << camera << " gaussians=" << trace.gaussians
      << " out=" << out_path.string() << "\n";
  return 0;
}

std::vector<EpisodeRecord> generated_episodes(std::size_t n, std::uint64_t seed, const RunConfig& cfg) {
  const auto ecfg = episode_config(cfg);
  std::vector<EpisodeRecord> eps;
  for (std::size_t i = 0; i < n; ++i) {
    eps.push_back(generate_episode(i % kEpisodeTasks, splitmix64(seed ^ splitmix64(i + 1)), ecfg));
  }
  return eps;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Track-guided geometry prediction and flow-matching policy toolkit", "foresight"};
  app.require_subcommand(1);

  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  std::string out_path, config_path, data_path, checkpoint_path, episode_path;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> eval_seed;
  std::size_t step = 0, tau = 0, camera = 0;
  std::string scope;
  std::vector<std::string> disabled;

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic demonstration episodes");
  gen->add_option("--episodes", episodes, "Episode count")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--config", config_path, "Run config (scene image size and keypoints)");

  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  train->add_option("--config", config_path, "Run config file")->check(CLI::ExistingFile);
  train->add_option("--data", data_path, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", out_path, "Run directory (log and checkpoint)")->required();
  train->add_option("--iterations", iterations, "Override the configured iteration count");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--data", data_path, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--seed", eval_seed, "Sampling seed (defaults to the run seed)");

  auto* render = app.add_subcommand("render-depth", "Render a predicted depth map to a 16-bit PGM");
  render->add_option("--checkpoint", checkpoint_path, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  render->add_option("--episode", episode_path, "Episode directory")->required()->check(CLI::ExistingDirectory);
  render->add_option("--step", step, "Window start t")->required();
  render->add_option("--out", out_path, "Output PGM path")->required();
  render->add_option("--tau", tau, "Future offset within the horizon");
  render->add_option("--camera", camera, "Camera index");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grad->add_option("--scope", scope, "renderer, trunk or full")
      ->required()
      ->check(CLI::IsMember({"renderer", "trunk", "full"}));
  grad->add_option("--seed", seed, "Random seed");

  auto* ablate = app.add_subcommand("ablate", "Train with pathways switched off and report metrics");
  ablate->add_option("--disable", disabled, "history-track, future-track, depth or refinement")
      ->required()
      ->check(CLI::IsMember({"history-track", "future-track", "depth", "refinement"}));
  ablate->add_option("--config", config_path, "Run config file")->check(CLI::ExistingFile);
  ablate->add_option("--data", data_path, "Dataset directory (default: generate --episodes in memory)")
      ->check(CLI::ExistingDirectory);
  ablate->add_option("--episodes", episodes, "Generated episode count when --data is absent");
  ablate->add_option("--seed", seed, "Generation seed when --data is absent");
  ablate->add_option("--out", out_path, "Run directory (log and checkpoint)");
  ablate->add_option("--iterations", iterations, "Override the configured iteration count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (gen->parsed()) {
      const auto cfg = config_or_default(config_path);
      const auto paths = generate_dataset(out_path, episodes, seed, episode_config(cfg));
      for (const auto& p : paths) out << "episode " << p.string() << "\n";
      out << "episodes=" << paths.size() << " seed=" << seed << " out=" << out_path << "\n";
      return 0;
    }
    if (train->parsed()) {
      auto cfg = config_or_default(config_path);
      if (iterations) cfg.iterations = *iterations;
      return train_any(cfg, load_dataset(data_path, cfg), fs::path(out_path), "train.log", cfg.iterations, false, out);
    }
    if (eval->parsed()) {
      const auto cfg = checkpoint_config(checkpoint_path);
      return cfg.precision == 64 ? eval_run<double>(checkpoint_path, data_path, eval_seed, out)
                                 : eval_run<float>(checkpoint_path, data_path, eval_seed, out);
    }
    if (render->parsed()) {
      const auto cfg = checkpoint_config(checkpoint_path);
      return cfg.precision == 64 ? render_run<double>(checkpoint_path, episode_path, step, tau, camera, out_path, out)
                                 : render_run<float>(checkpoint_path, episode_path, step, tau, camera, out_path, out);
    }
    if (grad->parsed()) {
      const GradcheckResult r = scope == "renderer" ? gradcheck_renderer(seed)
                                : scope == "trunk"  ? gradcheck_trunk(seed)
                                                    : gradcheck_full(seed);
      out << format_gradcheck(r) << "\n";
      return r.passed ? 0 : 1;
    }
    if (ablate->parsed()) {
      auto cfg = config_or_default(config_path);
      for (const auto& d : disabled) {
        if (d == "history-track") cfg.disable.history_track = true;
        if (d == "future-track") cfg.disable.future_track = true;
        if (d == "depth") cfg.disable.depth = true;
        if (d == "refinement") cfg.disable.refinement = true;
      }
      if (iterations) cfg.iterations = *iterations;
      auto eps = data_path.empty() ? generated_episodes(episodes == 0 ? 4 : episodes, seed, cfg)
                                   : load_dataset(data_path, cfg);
      std::optional<fs::path> dir;
      if (!out_path.empty()) dir = fs::path(out_path);
      return train_any(cfg, std::move(eps), dir, "ablate.log", cfg.iterations, true, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace foresight
