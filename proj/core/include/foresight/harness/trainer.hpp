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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "foresight/harness/model.hpp"

namespace foresight {

/// Raised when a loss or gradient stops being finite. The message names
/// the first offending tensor.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adam with decoupled weight decay:
/// p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
template <typename T>
class AdamW {
 public:
  AdamW(const ParameterStore<T>& store, double lr, double beta1, double beta2, double eps, double weight_decay);

  /// One update from the accumulated gradients at lr * lr_scale; parameters
  /// without a gradient are treated as having a zero gradient.
  void step(ParameterStore<T>& store, double lr_scale = 1.0);
  std::size_t steps() const { return steps_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  double lr_, beta1_, beta2_, eps_, wd_;
  std::size_t steps_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

/// Folds implied switches into the config (future tracks off means no
/// refinement) and returns one note per change.
std::vector<std::string> normalize_ablations(RunConfig& config);

/// Model, optimizer, window list and the three random streams (window
/// choice, action noise, flow time) of a training run.
template <typename T>
class Trainer {
 public:
  Trainer(const RunConfig& config, std::vector<EpisodeRecord> episodes);

  const RunConfig& config() const { return model_.config(); }
  Model<T>& model() { return model_; }
  const Model<T>& model() const { return model_; }
  const std::vector<EpisodeRecord>& episodes() const { return episodes_; }
  const std::vector<WindowRef>& windows() const { return windows_; }
  std::size_t iteration() const { return iteration_; }
  /// Adjustments made by normalize_ablations.
  const std::vector<std::string>& notes() const { return notes_; }

  /// One optimizer step on a batch of windows drawn uniformly with
  /// replacement. Returns batch means (counts are batch sums).
  LossReport step();

  /// Parameters (checkpoint format), optimizer moments, iteration counter,
  /// random stream states and the run config.
  void save(const std::filesystem::path& dir) const;
  /// Restores everything `save` wrote; the config on disk must describe the
  /// same parameter layout.
  void load(const std::filesystem::path& dir);

 private:
  const Sample<T>& sample(std::size_t window);

  std::vector<std::string> notes_;
  std::vector<EpisodeRecord> episodes_;
  std::vector<WindowRef> windows_;
  std::vector<std::optional<Sample<T>>> samples_;
  Model<T> model_;
  AdamW<T> optimizer_;
  std::mt19937_64 data_rng_, noise_rng_, time_rng_;
  std::size_t iteration_ = 0;
};

/// `key=value` record of a loss report.
std::string format_report(std::size_t iteration, const LossReport& report);

/// Runs `iterations` steps, logging every `log_every` steps and the last
/// one. Returns every step's report.
template <typename T>
std::vector<LossReport> run_training(Trainer<T>& trainer, std::size_t iterations, std::ostream& log);

/// Reads the config stored in a checkpoint directory.
RunConfig checkpoint_config(const std::filesystem::path& dir);

}  // namespace foresight
