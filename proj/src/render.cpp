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

#include "screwsplat/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace screwsplat {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(Errc::InvalidConfig, "camera focal lengths must be positive");
  if (width < 1 || height < 1) throw Error(Errc::InvalidConfig, "camera image size must be at least 1x1");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height,
                       const Vec3& fallback_up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(fallback_up);
  x.normalize();
  const Vec3 y = z.cross(x);
  Camera cam;
  cam.fx = cam.fy = focal;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.width = width;
  cam.height = height;
  cam.world_from_camera.rotation.col(0) = x;
  cam.world_from_camera.rotation.col(1) = y;
  cam.world_from_camera.rotation.col(2) = z;
  cam.world_from_camera.translation = eye;
  return cam;
}

Image Image::filled(int w, int h, const Vec3& rgb) {
  Image img(w, h);
  for (std::size_t p = 0; p < img.pixels.size(); p += 3)
    for (int c = 0; c < 3; ++c) img.pixels[p + c] = rgb[c];
  return img;
}

Image Image::clamped() const {
  Image out = *this;
  for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::optional<Splat2D> project(const Vec3& mean, const Mat3& cov, double opacity, const Vec3& color,
                               const Camera& cam) {
  const Vec3 p = cam.to_camera(mean);
  if (p.z() <= kNearPlane) return std::nullopt;
  if (!(opacity >= kAlphaFloor)) return std::nullopt;

  const double iz = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> jac;
  jac << cam.fx * iz, 0.0, -cam.fx * p.x() * iz * iz,
         0.0, cam.fy * iz, -cam.fy * p.y() * iz * iz;
  const Eigen::Matrix<double, 2, 3> m = jac * cam.world_from_camera.rotation.transpose();

  Splat2D s;
  s.mean2d = Vec2(cam.fx * p.x() * iz + cam.cx, cam.fy * p.y() * iz + cam.cy);
  s.cov2d = m * cov * m.transpose();
  s.cov2d(0, 1) = s.cov2d(1, 0) = 0.5 * (s.cov2d(0, 1) + s.cov2d(1, 0));
  s.cov2d += kCovarianceDilation * Mat2::Identity();
  s.depth = p.z();
  s.opacity = opacity;
  s.color = color;

  const double a = s.cov2d(0, 0), b = s.cov2d(0, 1), c = s.cov2d(1, 1);
  const double det = a * c - b * b;
  if (!(det > 0.0)) throw Error(Errc::SingularCovariance, "projected covariance is not invertible");
  s.conic = Vec3(c / det, -b / det, a / det);

  const double mid = 0.5 * (a + c);
  const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
  s.radius = std::sqrt(lambda_max * 2.0 * std::log(255.0 * opacity));

  if (s.mean2d.x() + s.radius < 0.0 || s.mean2d.x() - s.radius > cam.width ||
      s.mean2d.y() + s.radius < 0.0 || s.mean2d.y() - s.radius > cam.height)
    return std::nullopt;
  return s;
}

std::optional<Splat2D> project(const RenderGaussian& g, const Camera& cam) {
  return project(g.pose.translation, covariance(g.pose.rotation, g.scale), g.effective_opacity, g.color, cam);
}

std::vector<Splat2D> project_all(const std::vector<RenderGaussian>& gaussians, const Camera& cam) {
  std::vector<Splat2D> out;
  out.reserve(gaussians.size());
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    if (auto s = project(gaussians[i], cam)) {
      s->replica = static_cast<int>(i);
      out.push_back(*s);
    }
  }
  return out;
}

bool splat_before(const Splat2D& a, const Splat2D& b) {
  auto key = [](const Splat2D& s) {
    return std::make_tuple(s.depth, s.mean2d.x(), s.mean2d.y(), s.opacity, s.color.x(), s.color.y(), s.color.z(),
                           s.conic.x(), s.conic.y(), s.conic.z());
  };
  return key(a) < key(b);
}

Image render(const std::vector<Splat2D>& splats, const Camera& cam, const Vec3& background, RasterTrace* trace) {
  const int w = cam.width, h = cam.height;
  std::vector<int> order(splats.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return splat_before(splats[a], splats[b]); });

  std::vector<double> transmittance(static_cast<std::size_t>(w) * h, 1.0);
  Image img(w, h);
  if (trace) {
    trace->contributions.clear();
    trace->order = order;
  }

  for (int idx : order) {
    const Splat2D& s = splats[idx];
    const int x0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.x() - s.radius - 0.5)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(s.mean2d.x() + s.radius - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.y() - s.radius - 0.5)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(s.mean2d.y() + s.radius - 0.5)));
    const double qmax = 2.0 * std::log(255.0 * s.opacity) + 1e-9;
    for (int y = y0; y <= y1; ++y) {
      const double dy = y + 0.5 - s.mean2d.y();
      for (int x = x0; x <= x1; ++x) {
        const int pix = y * w + x;
        double& t = transmittance[pix];
        if (t < kTransmittanceFloor) continue;
        const double dx = x + 0.5 - s.mean2d.x();
        const double q = s.conic[0] * dx * dx + 2.0 * s.conic[1] * dx * dy + s.conic[2] * dy * dy;
        if (q > qmax) continue;
        const double gauss = std::exp(-0.5 * q);
        const double alpha = s.opacity * gauss;
        if (alpha < kAlphaFloor) continue;
        const double wgt = alpha * t;
        double* px = &img.pixels[static_cast<std::size_t>(pix) * 3];
        px[0] += s.color[0] * wgt;
        px[1] += s.color[1] * wgt;
        px[2] += s.color[2] * wgt;
        if (trace) trace->contributions.push_back({pix, idx, alpha, gauss, t});
        t *= 1.0 - alpha;
      }
    }
  }

  for (int pix = 0; pix < w * h; ++pix)
    for (int c = 0; c < 3; ++c) img.pixels[static_cast<std::size_t>(pix) * 3 + c] += background[c] * transmittance[pix];
  if (trace) trace->final_transmittance = std::move(transmittance);
  return img;
}

Image render_model(const ArticulatedSplatModel& model, const VecX& theta, const Camera& cam) {
  cam.validate();
  return render(project_all(replicate(model, theta), cam), cam, model.background);
}

Image render_model(const ArticulatedSplatModel& model, int config, const Camera& cam) {
  if (config < 0 || config >= model.num_configs()) throw Error(Errc::InvalidConfig, "configuration index out of range");
  return render_model(model, model.joint_angles[config], cam);
}

}  // namespace screwsplat
