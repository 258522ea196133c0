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

#include "foresight/harness/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "foresight/numerics/checkpoint.hpp"

namespace foresight {

namespace fs = std::filesystem;

template <typename T>
AdamW<T>::AdamW(const ParameterStore<T>& store, double lr, double beta1, double beta2, double eps, double weight_decay)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {
  for (const auto& [name, p] : store.entries()) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

template <typename T>
void AdamW<T>::step(ParameterStore<T>& store, double lr_scale) {
  const auto& entries = store.entries();
  if (entries.size() != m_.size()) throw std::logic_error("AdamW: parameter store changed size");
  ++steps_;
  const double lr = lr_ * lr_scale;
  const double c1 = 1.0 - std::pow(beta1_, double(steps_));
  const double c2 = 1.0 - std::pow(beta2_, double(steps_));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& p = entries[i].second;
    const auto g = p.grad();
    auto value = p.mutable_value();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double gj = g.empty() ? 0.0 : double(g[j]);
      m[j] = static_cast<T>(beta1_ * double(m[j]) + (1.0 - beta1_) * gj);
      v[j] = static_cast<T>(beta2_ * double(v[j]) + (1.0 - beta2_) * gj * gj);
      const double mh = double(m[j]) / c1, vh = double(v[j]) / c2;
      const double update = mh / (std::sqrt(vh) + eps_) + wd_ * double(value[j]);
      value[j] = static_cast<T>(double(value[j]) - lr * update);
    }
  }
}

template <typename T>
void AdamW<T>::save(std::ostream& out) const {
  const std::uint64_t n = steps_;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    write_tensor(out, m_[i]);
    write_tensor(out, v_[i]);
  }
}

template <typename T>
void AdamW<T>::load(std::istream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in) throw std::runtime_error("AdamW: truncated optimizer state");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    auto m = read_tensor<T>(in);
    auto v = read_tensor<T>(in);
    if (m.shape() != m_[i].shape() || v.shape() != v_[i].shape()) {
      throw std::runtime_error("AdamW: optimizer state does not match the parameters");
    }
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  steps_ = n;
}

std::vector<std::string> normalize_ablations(RunConfig& config) {
  std::vector<std::string> notes;
  if (config.disable.future_track && !config.disable.refinement) {
    config.disable.refinement = true;
    notes.push_back("refinement=disabled reason=future_track_disabled");
  }
  return notes;
}

namespace {

RunConfig prepared(RunConfig c, std::vector<std::string>& notes) {
  notes = normalize_ablations(c);
  c.validate();
  return c;
}

template <typename T>
void check_finite(const typename Model<T>::Forward& f, const ParameterStore<T>& store, bool grads) {
  const std::pair<const char*, double> losses[] = {
      {"action_loss", f.report.action}, {"track_loss", f.report.track}, {"depth_loss", f.report.depth},
      {"total_loss", f.report.total}};
  for (const auto& [name, v] : losses) {
    if (!std::isfinite(v)) throw NonFiniteError(std::string("non-finite ") + name + " = " + std::to_string(v));
  }
  if (!grads) return;
  for (const auto& [name, p] : store.entries()) {
    for (T g : p.grad()) {
      if (!std::isfinite(double(g))) throw NonFiniteError("non-finite gradient in parameter " + name);
    }
    for (T v : p.value().data()) {
      if (!std::isfinite(double(v))) throw NonFiniteError("non-finite value in parameter " + name);
    }
  }
}

}  // namespace

template <typename T>
Trainer<T>::Trainer(const RunConfig& config, std::vector<EpisodeRecord> episodes)
    : episodes_(std::move(episodes)),
      model_(prepared(config, notes_)),
      optimizer_(model_.store(), config.lr, config.beta1, config.beta2, config.adam_eps, config.weight_decay),
      data_rng_(derive_seed(config.seed, "data")),
      noise_rng_(derive_seed(config.seed, "noise")),
      time_rng_(derive_seed(config.seed, "flow_time")) {
  windows_ = enumerate_windows(episodes_, config.horizon);
  if (windows_.empty()) throw std::invalid_argument("Trainer: no episode is long enough for a training window");
  samples_.resize(windows_.size());
}

template <typename T>
const Sample<T>& Trainer<T>::sample(std::size_t w) {
  if (!samples_[w]) samples_[w] = make_sample<T>(episodes_[windows_[w].episode], windows_[w].t, config());
  return *samples_[w];
}

template <typename T>
LossReport Trainer<T>::step() {
  const auto& cfg = config();
  auto& store = model_.store();
  store.zero_grad();
  LossReport sum;
  ad::Var<T> batch_loss;
  typename Model<T>::Forward last;
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const std::size_t w = std::uniform_int_distribution<std::size_t>(0, windows_.size() - 1)(data_rng_);
    Tensor<T> noise({cfg.horizon, kActionDim});
    for (auto& v : noise.data()) v = static_cast<T>(std::normal_distribution<double>(0.0, 1.0)(noise_rng_));
    const T s = static_cast<T>(std::uniform_real_distribution<double>(0.0, 1.0)(time_rng_));
    auto f = model_.forward(sample(w), noise, s);
    check_finite<T>(f, store, false);
    batch_loss = b == 0 ? f.total : ad::add(batch_loss, f.total);
    sum.action += f.report.action;
    sum.track += f.report.track;
    sum.depth += f.report.depth;
    sum.total += f.report.total;
    sum.gaussians_initial += f.report.gaussians_initial;
    sum.gaussians_refined += f.report.gaussians_refined;
    sum.marked_voxels += f.report.marked_voxels;
    sum.depth_mask_empty = sum.depth_mask_empty || f.report.depth_mask_empty;
    sum.structure ^= f.report.structure;
    last = std::move(f);
  }
  ad::scale(batch_loss, static_cast<T>(1.0 / double(cfg.batch))).backward();
  check_finite<T>(last, store, true);
  optimizer_.step(store, cfg.lr_scale(iteration_));
  ++iteration_;
  const double n = double(cfg.batch);
  sum.action /= n;
  sum.track /= n;
  sum.depth /= n;
  sum.total /= n;
  return sum;
}

template <typename T>
void Trainer<T>::save(const fs::path& dir) const {
  fs::create_directories(dir);
  save_checkpoint(dir, model_.store());
  {
    std::ofstream out(dir / "optimizer.bin", std::ios::binary);
    optimizer_.save(out);
    if (!out) throw std::runtime_error("Trainer: cannot write optimizer state");
  }
  std::ofstream state(dir / "state.txt");
  state << "iteration " << iteration_ << "\n";
  state << "rng_data " << data_rng_ << "\n";
  state << "rng_noise " << noise_rng_ << "\n";
  state << "rng_time " << time_rng_ << "\n";
  std::ofstream(dir / "config.txt") << config().to_text();
  if (!state) throw std::runtime_error("Trainer: cannot write run state");
}

template <typename T>
void Trainer<T>::load(const fs::path& dir) {
  load_checkpoint(dir, model_.store());
  {
    std::ifstream in(dir / "optimizer.bin", std::ios::binary);
    if (!in) throw std::runtime_error("Trainer: missing optimizer state in " + dir.string());
    optimizer_.load(in);
  }
  std::ifstream state(dir / "state.txt");
  std::string key;
  state >> key >> iteration_;
  state >> key >> data_rng_;
  state >> key >> noise_rng_;
  state >> key >> time_rng_;
  if (!state) throw std::runtime_error("Trainer: malformed state.txt in " + dir.string());
}

std::string format_report(std::size_t iteration, const LossReport& r) {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "iter=" << iteration << " action=" << r.action << " track=" << r.track << " depth=" << r.depth
     << " total=" << r.total << " gaussians_initial=" << r.gaussians_initial
     << " gaussians_refined=" << r.gaussians_refined
     << " gaussians_total=" << r.gaussians_initial + r.gaussians_refined << " marked_voxels=" << r.marked_voxels;
  if (r.depth_mask_empty) os << " depth_mask=empty";
  return os.str();
}

template <typename T>
std::vector<LossReport> run_training(Trainer<T>& trainer, std::size_t iterations, std::ostream& log) {
  const auto& cfg = trainer.config();
  const auto& d = cfg.disable;
  log << "run precision=" << cfg.precision << " windows=" << trainer.windows().size() << " params="
      << trainer.model().store().total_elements() << " batch=" << cfg.batch << " iterations=" << iterations << "\n";
  log << "pathways history_track=" << (d.history_track ? "disabled" : "enabled")
      << " future_track=" << (d.future_track ? "disabled" : "enabled")
      << " depth=" << (d.depth ? "disabled" : "enabled") << " refinement=" << (d.refinement ? "disabled" : "enabled")
      << "\n";
  for (const auto& note : trainer.notes()) log << "note " << note << "\n";
  std::vector<LossReport> out;
  out.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    out.push_back(trainer.step());
    if (trainer.iteration() % cfg.log_every == 0 || i + 1 == iterations || i == 0) {
      log << format_report(trainer.iteration(), out.back()) << "\n";
      log.flush();
    }
  }
  return out;
}

RunConfig checkpoint_config(const fs::path& dir) { return RunConfig::load(dir / "config.txt"); }

template class AdamW<float>;
template class AdamW<double>;
template class Trainer<float>;
template class Trainer<double>;
template std::vector<LossReport> run_training<float>(Trainer<float>&, std::size_t, std::ostream&);
template std::vector<LossReport> run_training<double>(Trainer<double>&, std::size_t, std::ostream&);

}  // namespace foresight
