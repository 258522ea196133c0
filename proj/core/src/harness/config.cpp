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

#include "foresight/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace foresight {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename V>
V parse_scalar(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  V v{};
  is >> v;
  std::string rest;
  if (!is || (is >> rest)) throw std::invalid_argument("config: bad value '" + text + "' for key " + key);
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  if (!text.empty() && text[0] == '-') throw std::invalid_argument("config: negative count for key " + key);
  return parse_scalar<std::size_t>(key, text);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw std::invalid_argument("config: expected true/false for key " + key + ", got '" + text + "'");
}

Vec3d parse_vec(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  Vec3d v;
  is >> v.x >> v.y >> v.z;
  std::string rest;
  if (!is || (is >> rest)) throw std::invalid_argument("config: expected three numbers for key " + key);
  return v;
}

}  // namespace

RunConfig RunConfig::toy() { return RunConfig{}; }

RunConfig RunConfig::tiny() {
  RunConfig c;
  c.channels = 32;
  c.feature_channels = 8;
  c.layers = 2;
  c.heads = 2;
  c.mlp_ratio = 2;
  c.history = 3;
  c.refined_per_voxel = 8;
  c.image_size = 16;
  c.patch = 8;
  c.batch = 1;
  c.precision = 64;
  return c;
}

RunConfig RunConfig::full_scale() {
  RunConfig c;
  c.workspace_min = {-0.8, -0.8, 0.0};
  c.workspace_max = {0.8, 0.8, 1.12};
  c.voxel = 0.04;
  c.horizon = 50;
  c.keypoints = 8;
  c.history = 16;
  c.channels = 2048;
  c.feature_channels = 256;
  c.layers = 18;
  c.heads = 8;
  c.lambda = {};
  c.lr = 2.5e-5;
  c.weight_decay = 1e-2;
  c.batch = 32;
  c.iterations = 40000;
  c.warmup = 0;
  c.cosine_decay = false;
  c.image_size = 224;
  c.patch = 14;
  c.state_dim = 8;
  c.tasks = 24;
  c.precision = 32;
  return c;
}

WorkspaceSpec RunConfig::workspace() const { return WorkspaceSpec::create(workspace_min, workspace_max, voxel); }

PolicyConfig RunConfig::policy() const {
  PolicyConfig p;
  p.trunk = {channels, layers, heads, mlp_ratio};
  p.horizon = horizon;
  p.state_dim = state_dim;
  p.tasks = tasks;
  p.cameras = cameras;
  p.image_height = p.image_width = image_size;
  p.patch = patch;
  return p;
}

void RunConfig::validate() const {
  workspace();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
  };
  need(horizon >= 1, "horizon must be at least 1");
  need(keypoints >= 1, "keypoints must be at least 1");
  need(history >= 1, "history must be at least 1");
  need(channels > 0 && channels % 2 == 0, "channels must be even and positive");
  need(heads > 0 && channels % heads == 0, "channels must be divisible by heads");
  need(feature_channels > 0, "feature_channels must be positive");
  need(gaussians_per_voxel >= 1, "gaussians_per_voxel must be at least 1");
  need(refined_per_voxel > gaussians_per_voxel, "refined_per_voxel must exceed gaussians_per_voxel");
  need(layers >= 1 && mlp_ratio >= 1, "layers and mlp_ratio must be positive");
  need(lambda.action >= 0 && lambda.track >= 0 && lambda.depth >= 0, "loss weights must be non-negative");
  need(lr > 0 && beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && adam_eps > 0 && weight_decay >= 0,
       "optimizer settings out of range");
  need(batch >= 1, "batch must be at least 1");
  need(denoise_steps >= 1, "denoise_steps must be at least 1");
  need(patch > 0 && image_size % patch == 0, "image_size must be a multiple of patch");
  need(cameras >= 1 && tasks >= 1 && state_dim >= 1, "cameras, tasks and state_dim must be positive");
  need(precision == 32 || precision == 64, "precision must be 32 or 64");
  need(log_every >= 1, "log_every must be at least 1");
}

double RunConfig::lr_scale(std::size_t i) const {
  double scale = warmup > 0 ? std::min(1.0, double(i + 1) / double(warmup)) : 1.0;
  if (cosine_decay && iterations > 0) {
    const double progress = std::min(1.0, double(i) / double(iterations));
    scale *= 0.5 * (1.0 + std::cos(std::acos(-1.0) * progress));
  }
  return scale;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto vec = [&](const char* k, const Vec3d& v) { os << k << " = " << v.x << ' ' << v.y << ' ' << v.z << '\n'; };
  vec("workspace_min", workspace_min);
  vec("workspace_max", workspace_max);
  os << "voxel = " << voxel << '\n'
     << "horizon = " << horizon << '\n'
     << "keypoints = " << keypoints << '\n'
     << "history = " << history << '\n'
     << "channels = " << channels << '\n'
     << "feature_channels = " << feature_channels << '\n'
     << "gaussians_per_voxel = " << gaussians_per_voxel << '\n'
     << "refined_per_voxel = " << refined_per_voxel << '\n'
     << "layers = " << layers << '\n'
     << "heads = " << heads << '\n'
     << "mlp_ratio = " << mlp_ratio << '\n'
     << "lambda_action = " << lambda.action << '\n'
     << "lambda_track = " << lambda.track << '\n'
     << "lambda_depth = " << lambda.depth << '\n'
     << "lr = " << lr << '\n'
     << "beta1 = " << beta1 << '\n'
     << "beta2 = " << beta2 << '\n'
     << "adam_eps = " << adam_eps << '\n'
     << "weight_decay = " << weight_decay << '\n'
     << "warmup = " << warmup << '\n'
     << "cosine_decay = " << (cosine_decay ? "true" : "false") << '\n'
     << "batch = " << batch << '\n'
     << "iterations = " << iterations << '\n'
     << "seed = " << seed << '\n'
     << "denoise_steps = " << denoise_steps << '\n'
     << "image_size = " << image_size << '\n'
     << "patch = " << patch << '\n'
     << "cameras = " << cameras << '\n'
     << "tasks = " << tasks << '\n'
     << "state_dim = " << state_dim << '\n'
     << "precision = " << precision << '\n'
     << "log_every = " << log_every << '\n'
     << "disable_history_track = " << (disable.history_track ? "true" : "false") << '\n'
     << "disable_future_track = " << (disable.future_track ? "true" : "false") << '\n'
     << "disable_depth = " << (disable.depth ? "true" : "false") << '\n'
     << "disable_refinement = " << (disable.refinement ? "true" : "false") << '\n';
  return os.str();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "workspace_min") workspace_min = parse_vec(key, v);
  else if (key == "workspace_max") workspace_max = parse_vec(key, v);
  else if (key == "voxel") voxel = parse_scalar<double>(key, v);
  else if (key == "horizon") horizon = parse_count(key, v);
  else if (key == "keypoints") keypoints = parse_count(key, v);
  else if (key == "history") history = parse_count(key, v);
  else if (key == "channels") channels = parse_count(key, v);
  else if (key == "feature_channels") feature_channels = parse_count(key, v);
  else if (key == "gaussians_per_voxel") gaussians_per_voxel = parse_count(key, v);
  else if (key == "refined_per_voxel") refined_per_voxel = parse_count(key, v);
  else if (key == "layers") layers = parse_count(key, v);
  else if (key == "heads") heads = parse_count(key, v);
  else if (key == "mlp_ratio") mlp_ratio = parse_count(key, v);
  else if (key == "lambda_action") lambda.action = parse_scalar<double>(key, v);
  else if (key == "lambda_track") lambda.track = parse_scalar<double>(key, v);
  else if (key == "lambda_depth") lambda.depth = parse_scalar<double>(key, v);
  else if (key == "lr") lr = parse_scalar<double>(key, v);
  else if (key == "beta1") beta1 = parse_scalar<double>(key, v);
  else if (key == "beta2") beta2 = parse_scalar<double>(key, v);
  else if (key == "adam_eps") adam_eps = parse_scalar<double>(key, v);
  else if (key == "weight_decay") weight_decay = parse_scalar<double>(key, v);
  else if (key == "warmup") warmup = parse_count(key, v);
  else if (key == "cosine_decay") cosine_decay = parse_bool(key, v);
  else if (key == "batch") batch = parse_count(key, v);
  else if (key == "iterations") iterations = parse_count(key, v);
  else if (key == "seed") seed = parse_scalar<std::uint64_t>(key, v);
  else if (key == "denoise_steps") denoise_steps = parse_count(key, v);
  else if (key == "image_size") image_size = parse_count(key, v);
  else if (key == "patch") patch = parse_count(key, v);
  else if (key == "cameras") cameras = parse_count(key, v);
  else if (key == "tasks") tasks = parse_count(key, v);
  else if (key == "state_dim") state_dim = parse_count(key, v);
  else if (key == "precision") precision = parse_scalar<int>(key, v);
  else if (key == "log_every") log_every = parse_count(key, v);
  else if (key == "disable_history_track") disable.history_track = parse_bool(key, v);
  else if (key == "disable_future_track") disable.future_track = parse_bool(key, v);
  else if (key == "disable_depth") disable.depth = parse_bool(key, v);
  else if (key == "disable_refinement") disable.refinement = parse_bool(key, v);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(number) + " is not 'key = value'");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace foresight
