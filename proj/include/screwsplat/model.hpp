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

#pragma once

#include <cstdint>
#include <vector>

#include "screwsplat/screw.hpp"
#include "screwsplat/types.hpp"

namespace screwsplat {

/// Screws below this confidence are skipped when replicating Gaussians.
inline constexpr double kRenderConfidenceThreshold = 0.1;

struct ScrewPrimitive {
  Vec6 raw_axis = Vec6::Zero();
  JointType joint_type = JointType::Revolute;
  double confidence_logit = 0.0;
  bool active = true;

  double confidence() const { return sigmoid(confidence_logit); }
  ScrewAxisd axis() const { return normalize_screw<double>(raw_axis, joint_type); }
};

struct PartAwareGaussian {
  Vec3 position = Vec3::Zero();
  Vec4 rotation = Vec4(1, 0, 0, 0);  // (w, x, y, z)
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Zero();
  VecX part_logits;  // n_s + 1 entries, slot 0 is the static base

  double opacity() const { return sigmoid(opacity_logit); }
  Vec3 scale() const { return log_scale.array().exp(); }
  VecX part_probabilities() const { return softmax(part_logits); }
  Mat3 rotation_matrix() const;
  RigidTransformd pose() const { return {rotation_matrix(), position}; }
  /// argmax of the part simplex (0 = static).
  int dominant_part() const;
};

struct ArticulatedSplatModel {
  std::vector<PartAwareGaussian> gaussians;
  std::vector<ScrewPrimitive> screws;
  std::vector<VecX> joint_angles;  // one per observed configuration
  Vec3 background = Vec3::Zero();

  int num_gaussians() const { return static_cast<int>(gaussians.size()); }
  int num_screws() const { return static_cast<int>(screws.size()); }
  int num_configs() const { return static_cast<int>(joint_angles.size()); }

  /// Throws InvalidConfig when part-logit or joint-angle shapes disagree with the screw count.
  void validate() const;
};

/// Replicated Gaussian handed to the rasterizer.
struct RenderGaussian {
  RigidTransformd pose;
  Vec3 scale = Vec3::Ones();
  double effective_opacity = 0.0;
  Vec3 color = Vec3::Zero();
  int source = -1;  // Gaussian index
  int part = 0;     // 0 = static, j >= 1 = screw j-1
};

struct InitConfig {
  int num_gaussians = 10000;
  double half_width = 1.0;
  int num_configs = 1;
  int num_revolute = 8;
  int num_prismatic = 8;
  double initial_opacity = 0.1;
  double initial_confidence = 0.9;
  double raw_axis_range = 0.5;
  Vec3 background = Vec3::Zero();
};

Mat3 quaternion_to_rotation(const Vec4& q);

ArticulatedSplatModel init_model(const InitConfig& cfg, std::uint64_t seed);

/// Replicas for configuration k: one static replica per Gaussian plus one per
/// screw whose confidence clears the render threshold. Replicas with zero
/// opacity are still emitted; the rasterizer culls them.
std::vector<RenderGaussian> replicate(const ArticulatedSplatModel& model, const VecX& theta);
std::vector<RenderGaussian> replicate(const ArticulatedSplatModel& model, int k);

/// Sigma = R diag(s)^2 R^T.
Mat3 covariance(const PartAwareGaussian& g);
Mat3 covariance(const Mat3& rotation, const Vec3& scale);

/// Screws that participate in rendering (confidence >= threshold).
std::vector<int> rendered_screws(const ArticulatedSplatModel& model);

/// Removes screws and Gaussians by mask, keeping part logits and joint angles congruent.
void prune(ArticulatedSplatModel& model, const std::vector<bool>& keep_gaussian, const std::vector<bool>& keep_screw);

/// Mean distance to the k nearest neighbours of each point (brute force for small sets, grid otherwise).
std::vector<double> mean_knn_distance(const std::vector<Vec3>& points, int k);

}  // namespace screwsplat
