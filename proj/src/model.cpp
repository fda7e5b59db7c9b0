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

#include "screwsplat/model.hpp"

#include <cmath>

#include "screwsplat/spatial.hpp"

namespace screwsplat {

Mat3 quaternion_to_rotation(const Vec4& quat) {
  const Vec4 q = quat / quat.norm();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat3 PartAwareGaussian::rotation_matrix() const { return quaternion_to_rotation(rotation); }

int PartAwareGaussian::dominant_part() const {
  Eigen::Index idx = 0;
  part_logits.maxCoeff(&idx);
  return static_cast<int>(idx);
}

void ArticulatedSplatModel::validate() const {
  const auto parts = static_cast<Eigen::Index>(screws.size() + 1);
  for (const auto& g : gaussians)
    if (g.part_logits.size() != parts) throw Error(Errc::InvalidConfig, "part logits do not match screw count");
  for (const auto& t : joint_angles)
    if (t.size() != parts - 1) throw Error(Errc::InvalidConfig, "joint angle vector does not match screw count");
}

Mat3 covariance(const Mat3& rotation, const Vec3& scale) {
  return rotation * scale.array().square().matrix().asDiagonal() * rotation.transpose();
}

Mat3 covariance(const PartAwareGaussian& g) { return covariance(g.rotation_matrix(), g.scale()); }

std::vector<double> mean_knn_distance(const std::vector<Vec3>& points, int k) {
  std::vector<double> out(points.size(), 0.0);
  if (points.size() < 2) return out;
  KdTree tree(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = tree.knn(points[i], k, static_cast<int>(i));
    double sum = 0.0;
    for (const auto& [d2, idx] : nn) sum += std::sqrt(d2);
    out[i] = sum / static_cast<double>(nn.size());
  }
  return out;
}

ArticulatedSplatModel init_model(const InitConfig& cfg, std::uint64_t seed) {
  if (cfg.num_gaussians <= 0) throw Error(Errc::InvalidConfig, "num_gaussians must be positive");
  if (cfg.num_configs <= 0) throw Error(Errc::InvalidConfig, "num_configs must be positive");
  if (cfg.num_revolute < 0 || cfg.num_prismatic < 0) throw Error(Errc::InvalidConfig, "negative screw count");
  if (!(cfg.initial_opacity > 0.0 && cfg.initial_opacity < 1.0) ||
      !(cfg.initial_confidence > 0.0 && cfg.initial_confidence < 1.0))
    throw Error(Errc::InvalidConfig, "initial opacity and confidence must lie in (0, 1)");

  Rng rng(seed);
  ArticulatedSplatModel model;
  model.background = cfg.background;

  const int ns = cfg.num_revolute + cfg.num_prismatic;
  for (int j = 0; j < ns; ++j) {
    ScrewPrimitive s;
    s.joint_type = j < cfg.num_revolute ? JointType::Revolute : JointType::Prismatic;
    s.confidence_logit = logit(cfg.initial_confidence);
    for (;;) {
      for (int c = 0; c < 6; ++c) s.raw_axis[c] = uniform(rng, -cfg.raw_axis_range, cfg.raw_axis_range);
      const double n = s.joint_type == JointType::Revolute ? s.raw_axis.head<3>().norm() : s.raw_axis.tail<3>().norm();
      if (n > kAxisNormFloor) {
        if (s.joint_type == JointType::Revolute) s.raw_axis.head<3>() /= n;
        else s.raw_axis.tail<3>() /= n;
        break;
      }
    }
    model.screws.push_back(s);
  }

  std::vector<Vec3> positions(cfg.num_gaussians);
  for (auto& p : positions)
    for (int c = 0; c < 3; ++c) p[c] = uniform(rng, -cfg.half_width, cfg.half_width);
  const auto spacing = mean_knn_distance(positions, 3);

  model.gaussians.resize(cfg.num_gaussians);
  for (int i = 0; i < cfg.num_gaussians; ++i) {
    auto& g = model.gaussians[i];
    g.position = positions[i];
    g.rotation = Vec4(1, 0, 0, 0);
    const double s = spacing[i] > 0.0 ? spacing[i] : cfg.half_width;
    g.log_scale = Vec3::Constant(std::log(s));
    g.opacity_logit = logit(cfg.initial_opacity);
    g.color = Vec3::Constant(0.5);
    g.part_logits = VecX::Zero(ns + 1);
  }
  model.joint_angles.assign(cfg.num_configs, VecX::Zero(ns));
  return model;
}

std::vector<int> rendered_screws(const ArticulatedSplatModel& model) {
  std::vector<int> out;
  for (int j = 0; j < model.num_screws(); ++j)
    if (model.screws[j].active && model.screws[j].confidence() >= kRenderConfidenceThreshold) out.push_back(j);
  return out;
}

std::vector<RenderGaussian> replicate(const ArticulatedSplatModel& model, const VecX& theta) {
  if (theta.size() != model.num_screws()) throw Error(Errc::ShapeMismatch, "theta length must equal screw count");
  const auto live = rendered_screws(model);
  std::vector<RigidTransformd> motions;
  std::vector<double> gammas;
  for (int j : live) {
    motions.push_back(screw_exp(model.screws[j].axis(), theta[j]));
    gammas.push_back(model.screws[j].confidence());
  }

  std::vector<RenderGaussian> out;
  out.reserve(model.gaussians.size() * (live.size() + 1));
  for (int i = 0; i < model.num_gaussians(); ++i) {
    const auto& g = model.gaussians[i];
    const RigidTransformd pose = g.pose();
    const Vec3 scale = g.scale();
    const double sigma = g.opacity();
    const VecX m = g.part_probabilities();
    out.push_back({pose, scale, sigma * m[0], g.color, i, 0});
    for (std::size_t l = 0; l < live.size(); ++l) {
      const int j = live[l];
      out.push_back({motions[l] * pose, scale, sigma * gammas[l] * m[j + 1], g.color, i, j + 1});
    }
  }
  return out;
}

std::vector<RenderGaussian> replicate(const ArticulatedSplatModel& model, int k) {
  if (k < 0 || k >= model.num_configs()) throw Error(Errc::InvalidConfig, "configuration index out of range");
  return replicate(model, model.joint_angles[k]);
}

void prune(ArticulatedSplatModel& model, const std::vector<bool>& keep_gaussian, const std::vector<bool>& keep_screw) {
  if (keep_gaussian.size() != model.gaussians.size() || keep_screw.size() != model.screws.size())
    throw Error(Errc::ShapeMismatch, "prune mask sizes do not match the model");

  std::vector<int> kept_screws;
  for (int j = 0; j < model.num_screws(); ++j)
    if (keep_screw[j]) kept_screws.push_back(j);

  std::vector<PartAwareGaussian> gaussians;
  gaussians.reserve(model.gaussians.size());
  for (std::size_t i = 0; i < model.gaussians.size(); ++i) {
    if (!keep_gaussian[i]) continue;
    PartAwareGaussian g = model.gaussians[i];
    VecX logits(kept_screws.size() + 1);
    logits[0] = g.part_logits[0];
    for (std::size_t l = 0; l < kept_screws.size(); ++l) logits[l + 1] = g.part_logits[kept_screws[l] + 1];
    g.part_logits = std::move(logits);
    gaussians.push_back(std::move(g));
  }
  model.gaussians = std::move(gaussians);

  std::vector<ScrewPrimitive> screws;
  for (int j : kept_screws) screws.push_back(model.screws[j]);
  model.screws = std::move(screws);

  for (auto& theta : model.joint_angles) {
    VecX t(kept_screws.size());
    for (std::size_t l = 0; l < kept_screws.size(); ++l) t[l] = theta[kept_screws[l]];
    theta = std::move(t);
  }
}

}  // namespace screwsplat
