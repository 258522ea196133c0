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

#include "foresight/synth/episode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "foresight/numerics/params.hpp"

namespace foresight {

namespace {

namespace fs = std::filesystem;

double min_jerk(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

struct Layout {
  Box object;
  Vec3d goal_bottom;  // center of the object's bottom face once placed
};

Vec3d bottom_center(const Box& b) { return {(b.min.x + b.max.x) * 0.5, (b.min.y + b.max.y) * 0.5, b.min.z}; }

bool overlaps_xy(const Box& a, const Vec3d& c, double half, double gap) {
  return c.x + half + gap > a.min.x && c.x - half - gap < a.max.x && c.y + half + gap > a.min.y &&
         c.y - half - gap < a.max.y;
}

class Generator {
 public:
  Generator(std::size_t task, std::uint64_t seed, const EpisodeConfig& cfg) : task_(task), cfg_(cfg), rng_(seed) {}

  std::optional<EpisodeRecord> attempt() {
    const Layout layout = sample_layout();
    const auto start = sample_start();
    if (!start) return std::nullopt;

    const Box& obj = layout.object;
    const double height = obj.max.z - obj.min.z;
    const Vec3d lift{0.0, 0.0, cfg_.clearance};
    const Vec3d grasp = bottom_center(obj) + Vec3d{0.0, 0.0, height + cfg_.arm.radius};
    const Vec3d place = layout.goal_bottom + Vec3d{0.0, 0.0, height + cfg_.arm.radius};

    std::vector<std::vector<double>> path{*start};
    std::vector<double> gripper{0.0};
    auto move_to = [&](const Vec3d& target, std::size_t steps, double grip) {
      const auto goal = solve_position_ik(cfg_.arm, target, path.back());
      if (!goal) return false;
      const auto from = path.back();
      for (std::size_t k = 1; k <= steps; ++k) {
        const double s = min_jerk(double(k) / double(steps));
        std::vector<double> q(from.size());
        for (std::size_t j = 0; j < q.size(); ++j) q[j] = from[j] + s * ((*goal)[j] - from[j]);
        path.push_back(std::move(q));
        gripper.push_back(grip);
      }
      return true;
    };
    auto hold = [&](std::size_t steps, double grip) {
      for (std::size_t k = 0; k < steps; ++k) {
        path.push_back(path.back());
        gripper.push_back(grip);
      }
    };
    if (!move_to(grasp + lift, cfg_.approach_steps, 0.0) || !move_to(grasp, cfg_.descend_steps, 0.0)) {
      return std::nullopt;
    }
    hold(cfg_.grip_steps, 1.0);
    if (!move_to(grasp + lift, cfg_.lift_steps, 1.0) || !move_to(place + lift, cfg_.transfer_steps, 1.0) ||
        !move_to(place, cfg_.descend_steps, 1.0)) {
      return std::nullopt;
    }
    hold(cfg_.grip_steps, 0.0);
    return assemble(path, gripper, obj);
  }

 private:
  Layout sample_layout() {
    std::uniform_real_distribution<double> ox(0.34, 0.56), oy(-0.22, 0.14);
    const double half = 0.03;
    const Box& shelf = cfg_.scene.statics.at(1);
    const double table_top = cfg_.scene.statics.at(0).max.z;
    Layout l;
    Vec3d c;
    do {
      c = {ox(rng_), oy(rng_), table_top};
    } while (overlaps_xy(shelf, c, half, 0.02));
    l.object = {{c.x - half, c.y - half, table_top}, {c.x + half, c.y + half, table_top + 2.0 * half}};
    if (task_ == 0) {
      Vec3d g;
      do {
        g = {ox(rng_), oy(rng_), table_top};
      } while (overlaps_xy(shelf, g, half, 0.02) || std::hypot(g.x - c.x, g.y - c.y) < 0.12);
      l.goal_bottom = g;
    } else {
      std::uniform_real_distribution<double> jitter(-0.03, 0.03);
      const Vec3d top = bottom_center(shelf);
      l.goal_bottom = {top.x + jitter(rng_), top.y + jitter(rng_), shelf.max.z};
    }
    return l;
  }

  std::optional<std::vector<double>> sample_start() {
    for (int tries = 0; tries < 32; ++tries) {
      std::vector<double> q(cfg_.arm.joints());
      for (std::size_t j = 0; j < q.size(); ++j) {
        const auto& lim = cfg_.arm.limits[j];
        const double mid = 0.5 * (lim.lo + lim.hi), half = 0.35 * (lim.hi - lim.lo);
        q[j] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng_);
      }
      if (pose_ok(q)) return q;
    }
    return std::nullopt;
  }

  // Every keypoint inside the workspace and clear of the table.
  bool pose_ok(const std::vector<double>& q) const {
    const double floor = cfg_.scene.statics.at(0).max.z + cfg_.arm.radius - 1e-9;
    for (const auto& p : forward_kinematics(cfg_.arm, q)) {
      if (!cfg_.scene.workspace.contains(p) || p.z < floor) return false;
    }
    return true;
  }

  std::optional<EpisodeRecord> assemble(const std::vector<std::vector<double>>& path,
                                        const std::vector<double>& gripper, const Box& obj) const {
    for (const auto& q : path) {
      if (!pose_ok(q)) return std::nullopt;
    }
    const std::size_t n = path.size(), nj = cfg_.arm.joints(), nk = cfg_.arm.keypoints();
    EpisodeRecord rec;
    rec.task = task_;
    rec.horizon = cfg_.horizon;
    rec.arm = cfg_.arm;
    rec.scene = cfg_.scene;
    rec.scene.object = obj;
    rec.angles = Tensor<double>({n, nj});
    rec.keypoints = Tensor<double>({n, nk, 3});
    rec.proprio = Tensor<double>({n, nj + 1});
    rec.actions = Tensor<double>({n, kActionColumns});
    rec.object = Tensor<double>({n, 3});

    Vec3d carry{};  // object center minus end effector while held
    Vec3d center = obj.center();
    std::vector<Mat3d> rot(n);
    for (std::size_t t = 0; t < n; ++t) {
      const auto kp = forward_kinematics(cfg_.arm, path[t]);
      rot[t] = end_rotation(cfg_.arm, path[t]);
      for (std::size_t j = 0; j < nj; ++j) rec.angles.at(t, j) = rec.proprio.at(t, j) = path[t][j];
      rec.proprio.at(t, nj) = gripper[t];
      for (std::size_t k = 0; k < nk; ++k)
        for (int a = 0; a < 3; ++a) rec.keypoints.at(t, k, a) = kp[k][a];
      if (gripper[t] > 0.5) {
        if (t == 0 || gripper[t - 1] < 0.5) carry = center - kp.back();
        center = kp.back() + carry;
      }
      for (int a = 0; a < 3; ++a) rec.object.at(t, a) = center[a];
    }
    for (std::size_t t = 0; t < n; ++t) {
      const bool last = t + 1 == n;
      const Vec3d dx = last ? Vec3d{} : rec.end_effector(t + 1) - rec.end_effector(t);
      const Vec3d dtheta = last ? Vec3d{} : rotation_to_axis_angle(rot[t + 1] * rot[t].transposed());
      for (int a = 0; a < 3; ++a) {
        rec.actions.at(t, a) = dx[a];
        rec.actions.at(t, 3 + a) = dtheta[a];
      }
      rec.actions.at(t, 6) = last ? gripper[t] : gripper[t + 1];
    }
    const auto& cams = cfg_.scene.cameras;
    rec.depths = Tensor<double>({n, cams.size(), cams[0].height, cams[0].width});
    const std::size_t plane = cams[0].height * cams[0].width;
    for (std::size_t t = 0; t < n; ++t) {
      const SceneState state = rec.scene_state(t);
      for (std::size_t c = 0; c < cams.size(); ++c) {
        const auto d = raycast_depth(state, cams[c]);
        std::copy(d.data().begin(), d.data().end(), rec.depths.data().begin() + (t * cams.size() + c) * plane);
      }
    }
    return rec;
  }

  std::size_t task_;
  const EpisodeConfig& cfg_;
  std::mt19937_64 rng_;
};

std::string joined(std::span<const double> v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::string box_text(const Box& b) {
  const double v[6] = {b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z};
  return joined(v);
}

Box parse_box(std::istream& is) {
  Box b;
  is >> b.min.x >> b.min.y >> b.min.z >> b.max.x >> b.max.y >> b.max.z;
  return b;
}

}  // namespace

Vec3d EpisodeRecord::end_effector(std::size_t t) const {
  const std::size_t k = keypoints.dim(1) - 1;
  return {keypoints.at(t, k, 0), keypoints.at(t, k, 1), keypoints.at(t, k, 2)};
}

SceneState EpisodeRecord::scene_state(std::size_t t) const {
  SceneState s;
  s.boxes = scene.statics;
  const Vec3d c{object.at(t, 0), object.at(t, 1), object.at(t, 2)};
  s.boxes.push_back(scene.object.translated(c - scene.object.center()));
  for (std::size_t k = 0; k + 1 < keypoints.dim(1); ++k) {
    s.capsules.push_back({{keypoints.at(t, k, 0), keypoints.at(t, k, 1), keypoints.at(t, k, 2)},
                          {keypoints.at(t, k + 1, 0), keypoints.at(t, k + 1, 1), keypoints.at(t, k + 1, 2)},
                          arm.radius});
  }
  return s;
}

void EpisodeRecord::validate() const {
  const std::size_t n = angles.dim(0), nj = arm.joints(), nk = arm.keypoints();
  const auto& cams = scene.cameras;
  if (angles.shape() != Shape{n, nj} || keypoints.shape() != Shape{n, nk, 3} || proprio.shape() != Shape{n, nj + 1} ||
      actions.shape() != Shape{n, kActionColumns} || object.shape() != Shape{n, 3} || cams.empty() ||
      depths.shape() != Shape{n, cams.size(), cams[0].height, cams[0].width}) {
    throw std::runtime_error("episode: array shapes disagree with the manifest");
  }
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> q(nj);
    for (std::size_t j = 0; j < nj; ++j) q[j] = angles.at(t, j);
    const auto kp = forward_kinematics(arm, q);
    for (std::size_t k = 0; k < nk; ++k)
      for (int a = 0; a < 3; ++a) {
        if (std::abs(kp[k][a] - keypoints.at(t, k, a)) > 1e-12) {
          throw std::runtime_error("episode: keypoints disagree with forward kinematics at step " + std::to_string(t));
        }
      }
  }
}

EpisodeRecord generate_episode(std::size_t task, std::uint64_t seed, const EpisodeConfig& config) {
  if (task >= kEpisodeTasks) throw std::invalid_argument("generate_episode: unknown task " + std::to_string(task));
  config.arm.validate();
  config.scene.validate();
  Generator gen(task, seed, config);
  for (int i = 0; i < config.max_attempts; ++i) {
    if (auto rec = gen.attempt()) return std::move(*rec);
  }
  throw std::runtime_error("generate_episode: no reachable layout for seed " + std::to_string(seed));
}

void save_episode(const fs::path& dir, const EpisodeRecord& ep) {
  fs::create_directories(dir);
  std::ofstream m(dir / "manifest.txt");
  m << std::setprecision(std::numeric_limits<double>::max_digits10);
  m << "task " << ep.task << "\n";
  m << "keypoints " << ep.arm.keypoints() << "\n";
  m << "horizon " << ep.horizon << "\n";
  m << "steps " << ep.steps() << "\n";
  m << "links " << joined(ep.arm.links) << "\n";
  m << "base " << ep.arm.base.x << ' ' << ep.arm.base.y << ' ' << ep.arm.base.z << "\n";
  for (const auto& l : ep.arm.limits) m << "limit " << l.lo << ' ' << l.hi << "\n";
  m << "radius " << ep.arm.radius << "\n";
  const auto& ws = ep.scene.workspace;
  m << "workspace " << box_text({ws.min, ws.max}) << ' ' << ws.voxel << "\n";
  for (const auto& b : ep.scene.statics) m << "static " << box_text(b) << "\n";
  m << "object " << box_text(ep.scene.object) << "\n";
  for (const auto& c : ep.scene.cameras) m << "camera " << c.to_text() << "\n";
  if (!m) throw std::runtime_error("save_episode: cannot write " + (dir / "manifest.txt").string());
  save_tensor((dir / "angles.bin").string(), ep.angles);
  save_tensor((dir / "keypoints.bin").string(), ep.keypoints);
  save_tensor((dir / "depths.bin").string(), ep.depths);
  save_tensor((dir / "proprio.bin").string(), ep.proprio);
  save_tensor((dir / "actions.bin").string(), ep.actions);
  save_tensor((dir / "object.bin").string(), ep.object);
}

EpisodeRecord load_episode(const fs::path& dir) {
  std::ifstream m(dir / "manifest.txt");
  if (!m) throw std::runtime_error("load_episode: missing manifest in " + dir.string());
  EpisodeRecord ep;
  std::size_t keypoints = 0, steps = 0;
  std::string line;
  while (std::getline(m, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "task") {
      is >> ep.task;
    } else if (key == "keypoints") {
      is >> keypoints;
    } else if (key == "horizon") {
      is >> ep.horizon;
    } else if (key == "steps") {
      is >> steps;
    } else if (key == "links") {
      for (double v; is >> v;) ep.arm.links.push_back(v);
      is.clear();
    } else if (key == "base") {
      is >> ep.arm.base.x >> ep.arm.base.y >> ep.arm.base.z;
    } else if (key == "limit") {
      JointLimit l;
      is >> l.lo >> l.hi;
      ep.arm.limits.push_back(l);
    } else if (key == "radius") {
      is >> ep.arm.radius;
    } else if (key == "workspace") {
      const Box b = parse_box(is);
      double voxel = 0.0;
      is >> voxel;
      ep.scene.workspace = WorkspaceSpec::create(b.min, b.max, voxel);
    } else if (key == "static") {
      ep.scene.statics.push_back(parse_box(is));
    } else if (key == "object") {
      ep.scene.object = parse_box(is);
    } else if (key == "camera") {
      std::string rest;
      std::getline(is, rest);
      ep.scene.cameras.push_back(CameraModel::from_text(rest));
    } else {
      throw std::runtime_error("load_episode: unknown manifest key '" + key + "'");
    }
    if (!is) throw std::runtime_error("load_episode: malformed manifest line '" + line + "'");
  }
  ep.arm.validate();
  ep.angles = load_tensor<double>((dir / "angles.bin").string());
  ep.keypoints = load_tensor<double>((dir / "keypoints.bin").string());
  ep.depths = load_tensor<double>((dir / "depths.bin").string());
  ep.proprio = load_tensor<double>((dir / "proprio.bin").string());
  ep.actions = load_tensor<double>((dir / "actions.bin").string());
  ep.object = load_tensor<double>((dir / "object.bin").string());
  if (keypoints != ep.arm.keypoints() || steps != ep.steps()) {
    throw std::runtime_error("load_episode: manifest counts disagree with the arm or arrays");
  }
  ep.validate();
  return ep;
}

std::vector<fs::path> generate_dataset(const fs::path& dir, std::size_t episodes, std::uint64_t seed,
                                       const EpisodeConfig& config) {
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < episodes; ++i) {
    const auto ep = generate_episode(i % kEpisodeTasks, splitmix64(seed ^ splitmix64(i + 1)), config);
    std::ostringstream name;
    name << "episode_" << std::setw(4) << std::setfill('0') << i;
    out.push_back(dir / name.str());
    save_episode(out.back(), ep);
  }
  return out;
}

std::vector<fs::path> list_episodes(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) throw std::runtime_error("list_episodes: not a directory: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.txt")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace foresight
