// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
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
// =============================================================================


#include "screwsplat/control.hpp"

#include <algorithm>
#include <cmath>

namespace screwsplat {

namespace {

constexpr double kDegenerateNorm = 1e-9;

double sample_bilinear(const Image& img, double x, double y, int c) {
  x = std::clamp(x, 0.0, img.width - 1.0);
  y = std::clamp(y, 0.0, img.height - 1.0);
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c)) +
         fy * ((1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c));
}

std::vector<int> part_members(const ArticulatedSplatModel& model, int screw) {
  std::vector<int> out;
  for (int i = 0; i < model.num_gaussians(); ++i)
    if (model.gaussians[i].dominant_part() == screw + 1) out.push_back(i);
  return out;
}

}  // namespace

VecX ToyEmbedder::embed(const Image& image) const {
  if (image.width < 1 || image.height < 1) throw Error(Errc::ShapeMismatch, "cannot embed an empty image");
  VecX e(size_ * size_ * 3);
  const double sx = static_cast<double>(image.width) / size_, sy = static_cast<double>(image.height) / size_;
  for (int v = 0; v < size_; ++v)
    for (int u = 0; u < size_; ++u)
      for (int c = 0; c < 3; ++c)
        e[(v * size_ + u) * 3 + c] = sample_bilinear(image, (u + 0.5) * sx - 0.5, (v + 0.5) * sy - 0.5, c);
  e.array() -= e.mean();
  const double n = e.norm();
  if (n < kDegenerateNorm) return VecX::Constant(e.size(), 1.0 / std::sqrt(static_cast<double>(e.size())));
  return e / n;
}

GoalSpec GoalSpec::from_exemplars(std::vector<Camera> cameras, std::vector<Image> current,
                                  const std::vector<Image>& exemplars, const Embedder& embedder) {
  if (cameras.empty() || cameras.size() != current.size() || cameras.size() != exemplars.size())
    throw Error(Errc::ShapeMismatch, "goal needs one current image and one exemplar per camera");
  GoalSpec g;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const VecX d = embedder.embed(exemplars[c]) - embedder.embed(current[c]);
    const double n = d.norm();
    if (n < kDegenerateNorm) throw Error(Errc::DegenerateGoal, "goal exemplar does not differ from the current view");
    g.goal_deltas.push_back(d / n);
  }
  g.cameras = std::move(cameras);
  g.current_images = std::move(current);
  return g;
}

double directional_loss(const VecX& theta, const ArticulatedSplatModel& model, const GoalSpec& goal,
                        const Embedder& embedder) {
  double total = 0.0;
  for (std::size_t c = 0; c < goal.cameras.size(); ++c) {
    const VecX shift =
        embedder.embed(render_model(model, theta, goal.cameras[c])) - embedder.embed(goal.current_images[c]);
    const double n = shift.norm();
    if (n < kDegenerateNorm) {
      total += kDirectionalSentinel;
      continue;
    }
    const double cosine = std::clamp(shift.dot(goal.goal_deltas[c]) / n, -1.0, 1.0);
    total += 1.0 - cosine;
  }
  return total / static_cast<double>(goal.cameras.size());
}

double estimate_loss(const VecX& theta, const ArticulatedSplatModel& model, const std::vector<View>& views,
                     const LossConfig& cfg) {
  if (views.empty()) throw Error(Errc::EmptyObservations, "state estimation needs at least one view");
  double total = 0.0;
  for (const auto& v : views) total += render_loss(render_model(model, theta, v.camera), v.image, cfg);
  return total / static_cast<double>(views.size());
}

SearchSpace model_search_space(const ArticulatedSplatModel& model) {
  const int ns = model.num_screws();
  SearchSpace s{VecX::Zero(ns), VecX::Zero(ns)};
  for (int k = 0; k < model.num_configs(); ++k) {
    const VecX& t = model.joint_angles[k];
    s.lo = k == 0 ? t : VecX(s.lo.cwiseMin(t));
    s.hi = k == 0 ? t : VecX(s.hi.cwiseMax(t));
  }
  return s;
}

VecX optimize_joints(const ArticulatedSplatModel& model, const std::function<double(const VecX&)>& objective,
                     const BoConfig& cfg, BoResult* result) {
  const SearchSpace full = model_search_space(model);
  std::vector<int> free;
  for (int j = 0; j < full.dim(); ++j)
    if (full.hi[j] > full.lo[j]) free.push_back(j);
  if (free.empty()) return full.lo;

  SearchSpace sub{VecX(free.size()), VecX(free.size())};
  for (std::size_t a = 0; a < free.size(); ++a) {
    sub.lo[a] = full.lo[free[a]];
    sub.hi[a] = full.hi[free[a]];
  }
  auto expand = [&](const VecX& x) {
    VecX th = full.lo;
    for (std::size_t a = 0; a < free.size(); ++a) th[free[a]] = x[a];
    return th;
  };
  BoResult r = bayes_opt([&](const VecX& x) { return objective(expand(x)); }, sub, cfg);
  const VecX best = expand(r.best_x);
  if (result != nullptr) *result = std::move(r);
  return best;
}

VecX estimate_state(const ArticulatedSplatModel& model, const std::vector<View>& views, const BoConfig& cfg,
                    const LossConfig& loss) {
  if (views.empty()) throw Error(Errc::EmptyObservations, "state estimation needs at least one view");
  if (model.num_screws() == 0) return VecX(0);
  return optimize_joints(model, [&](const VecX& th) { return estimate_loss(th, model, views, loss); }, cfg);
}

VecX control_to_goal(const ArticulatedSplatModel& model, const GoalSpec& goal, const Embedder& embedder,
                     const BoConfig& cfg) {
  if (model.num_screws() == 0) return VecX(0);
  return optimize_joints(model, [&](const VecX& th) { return directional_loss(th, model, goal, embedder); }, cfg);
}

VecX gradient_descent_control(const ArticulatedSplatModel& model, const GoalSpec& goal, const Embedder& embedder,
                              const VecX& start, const GradientDescentConfig& cfg) {
  const SearchSpace s = model_search_space(model);
  if (start.size() != s.dim()) throw Error(Errc::ShapeMismatch, "start vector does not match the screws");
  const VecX range = s.hi - s.lo;
  VecX th = start.cwiseMax(s.lo).cwiseMin(s.hi);
  auto f = [&](const VecX& t) { return directional_loss(t, model, goal, embedder); };
  for (int it = 0; it < cfg.steps; ++it) {
    VecX grad = VecX::Zero(th.size());
    for (Eigen::Index j = 0; j < th.size(); ++j) {
      if (range[j] <= 0.0) continue;
      const double h = cfg.fd_step * range[j];
      VecX p = th, m = th;
      p[j] += h;
      m[j] -= h;
      grad[j] = (f(p) - f(m)) / (2.0 * h);
    }
    // Step in range-normalized coordinates.
    th -= cfg.learning_rate * range.cwiseProduct(range).cwiseProduct(grad);
    th = th.cwiseMax(s.lo).cwiseMin(s.hi);
  }
  return th;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(Errc::EmptySet, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Vec3 affordance_point(const ArticulatedSplatModel& model, int screw, const PlanConfig& cfg) {
  if (screw < 0 || screw >= model.num_screws() || !model.screws[screw].active ||
      model.screws[screw].confidence() < kRenderConfidenceThreshold)
    throw Error(Errc::DeadScrew, "screw " + std::to_string(screw) + " is not alive");
  const std::vector<int> members = part_members(model, screw);
  if (members.empty()) throw Error(Errc::EmptyPart, "screw " + std::to_string(screw) + " moves no Gaussians");

  const ScrewAxisd axis = model.screws[screw].axis();
  std::vector<double> key;
  for (int i : members) {
    const Vec3& p = model.gaussians[i].position;
    key.push_back(axis.is_revolute() ? (p - axis.point()).cross(axis.omega).norm()
                                     : std::abs((p - cfg.base_point).dot(axis.v)));
  }
  const bool revolute = axis.is_revolute();
  const double cut = percentile(key, revolute ? cfg.revolute_percentile : cfg.prismatic_percentile);
  Vec3 sum = Vec3::Zero();
  int n = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    if (revolute ? key[a] >= cut : key[a] <= cut) {
      sum += model.gaussians[members[a]].position;
      ++n;
    }
  }
  return sum / n;
}

Trajectory plan_trajectory(const ScrewAxisd& axis, const Vec3& affordance, double theta_c, double theta_t,
                           const PlanConfig& cfg) {
  if (cfg.steps < 2) throw Error(Errc::InvalidConfig, "a trajectory needs at least two steps");
  Trajectory tr;
  tr.affordance = affordance;
  const Vec3 rest = screw_exp(axis, -cfg.theta_ref) * affordance;
  const double start = theta_c - cfg.theta_offset;
  for (int i = 0; i < cfg.steps; ++i) {
    const double t = start + (theta_t - start) * i / (cfg.steps - 1);
    const Vec3 tip = screw_exp(axis, t) * rest;
    tr.theta_samples.push_back(t);
    tr.tip_points.push_back(tip);
    tr.gripper_poses.push_back(RigidTransformd{cfg.grip_orientation, tip});
  }
  return tr;
}

Trajectory plan_trajectory(const ArticulatedSplatModel& model, int screw, double theta_c, double theta_t,
                           const PlanConfig& cfg) {
  const Vec3 p = affordance_point(model, screw, cfg);
  return plan_trajectory(model.screws[screw].axis(), p, theta_c, theta_t, cfg);
}

}  // namespace screwsplat
