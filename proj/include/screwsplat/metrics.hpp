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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"
#include "screwsplat/scene_synth.hpp"
#include "screwsplat/serialization.hpp"

namespace screwsplat {

/// Which Gaussians feed a point sample: argmax part 0, argmax part j+1, or all.
struct PartSelector {
  enum class Kind { Static, Movable, Whole } kind = Kind::Whole;
  int screw = -1;

  static PartSelector static_part() { return {Kind::Static, -1}; }
  static PartSelector movable(int j) { return {Kind::Movable, j}; }
  static PartSelector whole() { return {Kind::Whole, -1}; }
};

/// Draws n points: a Gaussian is picked with probability proportional to its
/// opacity times its selected part mass, then a point uniformly inside its
/// 1-sigma ellipsoid. Gaussians are posed at `theta` by their argmax part.
/// Throws EmptySelection.
std::vector<Vec3> sample_points(const ArticulatedSplatModel& model, const VecX& theta, const PartSelector& selector,
                                int n, std::uint64_t seed);

/// Bi-directional mean squared nearest-neighbour distance. Throws EmptySet.
double chamfer(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

/// Degrees in [0, 90]; sign invariant. Throws TypeMismatch.
double angular_error(const ScrewAxisd& a, const ScrewAxisd& b);

/// Closest distance between two revolute axis lines. Throws NotRevolute.
double position_error(const ScrewAxisd& a, const ScrewAxisd& b);

/// Matching cost: angle/180 plus position error for revolute pairs; infinite across types.
double axis_match_cost(const ScrewAxisd& a, const ScrewAxisd& b);

struct AxisMatching {
  std::vector<int> gt_to_pred;  // -1 = unmatched
  std::vector<int> pred_to_gt;
  double total_cost = 0.0;
  int matched = 0;
};

/// Maximum-cardinality, then minimum-cost assignment by exhaustive search.
AxisMatching match_axes(const std::vector<ScrewAxisd>& gt, const std::vector<ScrewAxisd>& pred);

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// dB on the [0, 1] range; +infinity when the MSE is below 1e-12. Throws ShapeMismatch.
double psnr(const Image& a, const Image& b);
double ssim_metric(const Image& a, const Image& b);

struct AxisReport {
  int gt = -1;
  int pred = -1;
  JointType type = JointType::Revolute;
  double ang_err = 0.0;                                    // degrees
  double pos_err = std::numeric_limits<double>::quiet_NaN();  // scene units, revolute only
  double cd_movable = std::numeric_limits<double>::quiet_NaN();
};

struct EvalReport {
  std::string object;
  int gt_screws = 0;
  int pred_screws = 0;
  double cd_static = 0.0;  // scene units squared
  double cd_whole = 0.0;
  std::vector<AxisReport> axes;  // one per matched pair
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  double psnr = 0.0;  // dB, mean over held-out views
  double ssim = 0.0;
  int heldout_views = 0;

  Json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct EvalOptions {
  int points = 2048;
  std::uint64_t seed = 0;
  int ssim_window = 11;
};

/// Predicted screws of a fitted model (normalized axes).
std::vector<ScrewAxisd> model_axes(const ArticulatedSplatModel& model);

/// Joint angles for the held-out midpoint between fitted configurations k and k+1.
VecX heldout_theta(const ArticulatedSplatModel& model, int k);

/// Geometry at the first dataset configuration, motion via axis matching,
/// appearance on the held-out midpoint views.
EvalReport evaluate(const ArticulatedSplatModel& fitted, const Dataset& dataset, const EvalOptions& opts = {});

}  // namespace screwsplat
