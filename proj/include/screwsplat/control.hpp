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
#include <functional>
#include <vector>

#include "screwsplat/bayes_opt.hpp"
#include "screwsplat/losses.hpp"
#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"

namespace screwsplat {

/// Maps an image to a unit-norm feature vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual VecX embed(const Image& image) const = 0;
};

/// Bilinear downsample to size x size RGB, flatten, subtract the mean, L2-normalize.
class ToyEmbedder : public Embedder {
 public:
  explicit ToyEmbedder(int size = 16) : size_(size) {}
  VecX embed(const Image& image) const override;

 private:
  int size_;
};

/// Per camera: the current image I_c and a unit goal direction in embedding space.
struct GoalSpec {
  std::vector<Camera> cameras;
  std::vector<Image> current_images;
  std::vector<VecX> goal_deltas;

  /// goal_delta = normalize(embed(exemplar) - embed(current)) per camera. Throws DegenerateGoal.
  static GoalSpec from_exemplars(std::vector<Camera> cameras, std::vector<Image> current,
                                 const std::vector<Image>& exemplars, const Embedder& embedder);
};

inline constexpr double kDirectionalSentinel = 2.0;

/// 1 - cos(embed(render(theta)) - embed(I_c), goal_delta), averaged over the
/// goal cameras; the sentinel when the image shift vanishes.
double directional_loss(const VecX& theta, const ArticulatedSplatModel& model, const GoalSpec& goal,
                        const Embedder& embedder);

struct View {
  Camera camera;
  Image image;
};

/// Mean render loss of the views at theta. Throws EmptyObservations.
double estimate_loss(const VecX& theta, const ArticulatedSplatModel& model, const std::vector<View>& views,
                     const LossConfig& cfg = {});

/// Element-wise min and max of the fitted joint angles.
SearchSpace model_search_space(const ArticulatedSplatModel& model);

/// Runs bayes_opt over the joints whose range is non-empty; fixed joints keep their value.
VecX optimize_joints(const ArticulatedSplatModel& model, const std::function<double(const VecX&)>& objective,
                     const BoConfig& cfg, BoResult* result = nullptr);

VecX estimate_state(const ArticulatedSplatModel& model, const std::vector<View>& views, const BoConfig& cfg = {},
                    const LossConfig& loss = {});

VecX control_to_goal(const ArticulatedSplatModel& model, const GoalSpec& goal, const Embedder& embedder,
                     const BoConfig& cfg = {});

struct GradientDescentConfig {
  int steps = 40;
  double learning_rate = 0.05;  // fraction of each joint's range per unit gradient
  double fd_step = 0.01;        // fraction of each joint's range
};

/// Projected gradient descent on the directional loss with central-difference
/// gradients, started at `start`; the comparison baseline for control_to_goal.
VecX gradient_descent_control(const ArticulatedSplatModel& model, const GoalSpec& goal, const Embedder& embedder,
                              const VecX& start, const GradientDescentConfig& cfg = {});

struct Trajectory {
  std::vector<Vec3> tip_points;
  std::vector<RigidTransformd> gripper_poses;
  std::vector<double> theta_samples;
  Vec3 affordance = Vec3::Zero();
};

struct PlanConfig {
  double theta_offset = 0.05;
  int steps = 20;
  Mat3 grip_orientation = Mat3::Identity();
  Vec3 base_point = Vec3(0.0, -2.0, 0.0);
  double revolute_percentile = 0.9;
  double prismatic_percentile = 0.2;
  double theta_ref = 0.0;
};

/// Affordance point of screw j: centroid of its part's Gaussians farthest from
/// the axis (revolute) or nearest the base along the axis (prismatic).
/// Throws DeadScrew, EmptyPart.
Vec3 affordance_point(const ArticulatedSplatModel& model, int screw, const PlanConfig& cfg = {});

/// Gripper tip path from theta_c - offset to theta_t along screw j.
Trajectory plan_trajectory(const ArticulatedSplatModel& model, int screw, double theta_c, double theta_t,
                           const PlanConfig& cfg = {});

/// Tip path for an explicit affordance point.
Trajectory plan_trajectory(const ScrewAxisd& axis, const Vec3& affordance, double theta_c, double theta_t,
                           const PlanConfig& cfg = {});

/// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace screwsplat
