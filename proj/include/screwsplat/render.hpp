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

#include <optional>
#include <vector>

#include "screwsplat/model.hpp"
#include "screwsplat/screw.hpp"
#include "screwsplat/types.hpp"

namespace screwsplat {

/// Pinhole camera, OpenCV convention (x right, y down, z forward). Pixel
/// (x, y) has its center at (x + 0.5, y + 0.5).
struct Camera {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  int width = 1, height = 1;
  RigidTransformd world_from_camera;

  void validate() const;
  Vec3 position() const { return world_from_camera.translation; }
  Vec3 to_camera(const Vec3& world) const {
    return world_from_camera.rotation.transpose() * (world - world_from_camera.translation);
  }

  /// Camera at `eye` looking at `target`; falls back to `fallback_up` when `up` is parallel to the view ray.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height,
                        const Vec3& fallback_up = Vec3::UnitX());
};

/// Row-major interleaved RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}
  static Image filled(int w, int h, const Vec3& rgb);

  double& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  Vec3 rgb(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }
  std::size_t size() const { return pixels.size(); }
  bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
  Image clamped() const;
};

inline constexpr double kCovarianceDilation = 0.3;
inline constexpr double kAlphaFloor = 1.0 / 255.0;
inline constexpr double kTransmittanceFloor = 1e-4;
inline constexpr double kNearPlane = 0.01;

struct Splat2D {
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  Vec3 conic = Vec3(1, 0, 1);  // (a, b, c) of the inverse covariance [[a b] [b c]]
  double depth = 0.0;
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
  double radius = 0.0;  // pixel extent where alpha can reach the floor
  int replica = -1;     // index into the replicated Gaussian list
};

/// Perspective EWA projection; std::nullopt when culled.
std::optional<Splat2D> project(const RenderGaussian& g, const Camera& cam);
std::optional<Splat2D> project(const Vec3& mean, const Mat3& cov, double opacity, const Vec3& color, const Camera& cam);

std::vector<Splat2D> project_all(const std::vector<RenderGaussian>& gaussians, const Camera& cam);

/// Blending record kept for the backward pass. Contributions are stored in
/// global front-to-back order, so replaying them in reverse visits every
/// pixel's list back to front.
struct RasterTrace {
  struct Contribution {
    int pixel;
    int splat;            // index into the input splat list
    double alpha;
    double gauss;         // exp(-q/2), so alpha = opacity * gauss
    double transmittance; // transmittance in front of this splat
  };
  std::vector<int> order;
  std::vector<Contribution> contributions;
  std::vector<double> final_transmittance;  // per pixel, multiplies the background
};

/// Front-to-back alpha blending over a globally depth-sorted splat list.
Image render(const std::vector<Splat2D>& splats, const Camera& cam, const Vec3& background,
             RasterTrace* trace = nullptr);

Image render_model(const ArticulatedSplatModel& model, const VecX& theta, const Camera& cam);
Image render_model(const ArticulatedSplatModel& model, int config, const Camera& cam);

/// Depth-sort comparator shared by render and tests: depth first, then
/// remaining fields so that the order does not depend on input order.
bool splat_before(const Splat2D& a, const Splat2D& b);

}  // namespace screwsplat
