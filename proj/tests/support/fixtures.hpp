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


// Small randomized scenes shared by the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Geometry>

#include "screwsplat/gradients.hpp"
#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"

namespace screwsplat::fixtures {

struct GradScene {
  ArticulatedSplatModel model;
  std::vector<Image> targets;
  std::vector<BatchItem> batch;
};

/// Random scene for finite-difference checks: `n_gaussians` wide blobs seen
/// by one camera per configuration at `size` x `size` pixels. Every splat
/// footprint covers the whole image above the alpha floor and targets sit at
/// least 0.1 away from the render, so the loss is smooth in every parameter.
/// Scenes where two replicas sit within `kMinDepthGap` in depth are redrawn:
/// a small parameter step could swap their blending order, which makes the
/// loss jump and finite differences meaningless.
inline constexpr double kMinDepthGap = 1e-2;

inline bool depths_separated(const ArticulatedSplatModel& m, const Camera& cam) {
  for (int k = 0; k < m.num_configs(); ++k) {
    std::vector<double> z;
    for (const auto& r : replicate(m, k)) z.push_back(cam.to_camera(r.pose.translation).z());
    std::sort(z.begin(), z.end());
    for (std::size_t i = 1; i < z.size(); ++i) {
      if (z[i] - z[i - 1] < kMinDepthGap) return false;
    }
  }
  return true;
}

inline GradScene random_grad_scene(std::uint64_t seed, int n_gaussians = 5, int size = 8, int n_configs = 2) {
  Rng rng(seed);
  for (;;) {
    GradScene s;
    auto& m = s.model;
    m.background = Vec3(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1));

    ScrewPrimitive rev;
    rev.joint_type = JointType::Revolute;
    ScrewPrimitive pri;
    pri.joint_type = JointType::Prismatic;
    for (auto* sp : {&rev, &pri}) {
      for (int c = 0; c < 6; ++c) sp->raw_axis[c] = uniform(rng, -0.5, 0.5);
      sp->raw_axis.head<3>() += Vec3(0.3, 0.3, 0.3);
      sp->raw_axis.tail<3>() += Vec3(0.3, -0.3, 0.3);
      sp->confidence_logit = uniform(rng, 0.5, 2.0);
      m.screws.push_back(*sp);
    }
    for (int k = 0; k < n_configs; ++k) {
      VecX t(2);
      t << uniform(rng, -0.5, 0.5), uniform(rng, -0.3, 0.3);
      m.joint_angles.push_back(t);
    }
    for (int i = 0; i < n_gaussians; ++i) {
      PartAwareGaussian g;
      for (int c = 0; c < 3; ++c) g.position[c] = uniform(rng, -0.3, 0.3);
      g.rotation = Vec4(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
      g.rotation *= uniform(rng, 0.8, 1.2) / g.rotation.norm();
      for (int c = 0; c < 3; ++c) g.log_scale[c] = std::log(uniform(rng, 2.5, 3.5));
      g.opacity_logit = logit(uniform(rng, 0.3, 0.7));
      for (int c = 0; c < 3; ++c) g.color[c] = uniform(rng, 0.05, 0.95);
      g.part_logits = VecX(3);
      for (int c = 0; c < 3; ++c) g.part_logits[c] = 0.5 * standard_normal(rng);
      m.gaussians.push_back(g);
    }

    const Vec3 eye(uniform(rng, -0.5, 0.5), -3.0, uniform(rng, -0.5, 0.5));
    const Camera cam = Camera::look_at(eye, Vec3::Zero(), Vec3::UnitZ(), size, size, size);
    if (!depths_separated(m, cam)) continue;
    s.targets.resize(n_configs);
    for (int k = 0; k < n_configs; ++k) {
      Image t = render_model(m, k, cam);
      for (double& v : t.pixels) v += (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.1, 0.3);
      s.targets[k] = t;
    }
    for (int k = 0; k < n_configs; ++k) s.batch.push_back({k, cam, &s.targets[k]});
    return s;
  }
}

}  // namespace screwsplat::fixtures
