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


#include "screwsplat/scene_synth.hpp"

#include "screwsplat/image_io.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <numeric>

namespace screwsplat {

namespace {

constexpr double kHardLogit = 40.0;  // sigmoid/softmax saturate to exactly 1 in double

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(Errc::InvalidSpec, msg);
}

ScrewAxisd revolute(const Vec3& dir, const Vec3& through) {
  Vec6 raw;
  raw << dir, through;
  return normalize_screw<double>(raw, JointType::Revolute);
}

ScrewAxisd prismatic(const Vec3& dir) {
  Vec6 raw;
  raw << Vec3::Zero(), dir;
  return normalize_screw<double>(raw, JointType::Prismatic);
}

Vec4 quat_from_normal(const Vec3& n) {
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), n);
  return Vec4(q.w(), q.x(), q.y(), q.z());
}

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
};

SurfaceSample sample_box(const PartSpec& p, Rng& rng) {
  const Vec3 h = 0.5 * p.extent;
  const double ax = p.extent.y() * p.extent.z();
  const double ay = p.extent.x() * p.extent.z();
  const double az = p.extent.x() * p.extent.y();
  const double pick = uniform(rng, 0.0, ax + ay + az);
  const int axis = pick < ax ? 0 : (pick < ax + ay ? 1 : 2);
  const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  Vec3 local;
  for (int c = 0; c < 3; ++c) local[c] = uniform(rng, -h[c], h[c]);
  local[axis] = sign * h[axis];
  Vec3 n = Vec3::Zero();
  n[axis] = sign;
  return {p.center + local, n};
}

SurfaceSample sample_cylinder(const PartSpec& p, Rng& rng) {
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double z = uniform(rng, -0.5 * p.extent.z(), 0.5 * p.extent.z());
  const Vec3 local(0.5 * p.extent.x() * std::cos(phi), 0.5 * p.extent.y() * std::sin(phi), z);
  const Vec3 n = Vec3(local.x() / p.extent.x(), local.y() / p.extent.y(), 0.0).normalized();
  return {p.center + local, n};
}

double surface_area(const PartSpec& p) {
  const Vec3& e = p.extent;
  if (p.shape == PartShape::CylinderShell) {
    return std::numbers::pi * 0.5 * (e.x() + e.y()) * e.z();
  }
  return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z());
}

}  // namespace

const char* to_string(PartShape s) {
  switch (s) {
    case PartShape::Box: return "box";
    case PartShape::Slab: return "slab";
    case PartShape::CylinderShell: return "cylinder-shell";
  }
  return "?";
}

PartShape part_shape_from_string(const std::string& s) {
  if (s == "box") return PartShape::Box;
  if (s == "slab") return PartShape::Slab;
  if (s == "cylinder-shell") return PartShape::CylinderShell;
  throw Error(Errc::InvalidSpec, "unknown part shape '" + s + "'");
}

void ObjectSpec::validate() const {
  require(!parts.empty(), "object has no parts");
  int statics = 0;
  std::vector<int> used(joints.size(), 0);
  for (const auto& p : parts) {
    require(p.gaussian_count > 0, "part gaussian_count must be positive");
    require((p.extent.array() > 0.0).all(), "part extent must be positive");
    require(p.attached_screw >= -1 && p.attached_screw < static_cast<int>(joints.size()),
            "part attached to an unknown screw");
    if (p.attached_screw < 0) {
      ++statics;
    } else {
      ++used[p.attached_screw];
    }
  }
  require(statics == 1, "object needs exactly one static base part");
  for (std::size_t j = 0; j < joints.size(); ++j) {
    require(joints[j].lo < joints[j].hi, "joint limits need lo < hi");
    require(used[j] > 0, "joint " + std::to_string(j) + " moves no part");
  }
}

std::vector<std::string> preset_names() { return {"laptop", "drawer", "storage-3", "static"}; }

ObjectSpec object_preset(const std::string& name) {
  ObjectSpec s;
  s.name = name;
  if (name == "laptop") {
    // Base lies flat; the lid stands at the back edge and folds backwards about x.
    s.parts.push_back({PartShape::Slab, Vec3(0.0, 0.0, -0.2), Vec3(1.0, 0.7, 0.06), Vec3(0.25, 0.35, 0.8), 220, -1});
    s.parts.push_back({PartShape::Slab, Vec3(0.0, 0.33, 0.17), Vec3(1.0, 0.05, 0.7), Vec3(0.9, 0.5, 0.15), 220, 0});
    s.joints.push_back({revolute(Vec3(-1.0, 0.0, 0.0), Vec3(0.0, 0.35, -0.2)), 0.0, std::numbers::pi / 2.0});
  } else if (name == "drawer") {
    s.parts.push_back({PartShape::Box, Vec3(0.0, 0.0, -0.2), Vec3(0.9, 0.7, 0.35), Vec3(0.3, 0.6, 0.3), 260, -1});
    s.parts.push_back({PartShape::Box, Vec3(0.0, -0.05, 0.13), Vec3(0.6, 0.5, 0.25), Vec3(0.85, 0.2, 0.25), 200, 0});
    s.joints.push_back({prismatic(Vec3(0.0, -1.0, 0.0)), 0.0, 0.4});
  } else if (name == "storage-3") {
    s.parts.push_back({PartShape::Box, Vec3(0.0, 0.0, 0.0), Vec3(0.9, 0.5, 0.9), Vec3(0.55, 0.55, 0.6), 300, -1});
    s.parts.push_back({PartShape::Slab, Vec3(-0.225, -0.28, 0.225), Vec3(0.42, 0.04, 0.42), Vec3(0.9, 0.3, 0.2), 100, 0});
    s.parts.push_back({PartShape::Slab, Vec3(0.225, -0.28, 0.225), Vec3(0.42, 0.04, 0.42), Vec3(0.2, 0.7, 0.3), 100, 1});
    s.parts.push_back({PartShape::Box, Vec3(0.0, -0.1, -0.225), Vec3(0.8, 0.36, 0.38), Vec3(0.2, 0.3, 0.9), 200, 2});
    s.parts.push_back({PartShape::Box, Vec3(0.0, -0.32, -0.16), Vec3(0.36, 0.08, 0.06), Vec3(0.95, 0.85, 0.1), 40, 2});
    s.joints.push_back({revolute(Vec3(0.0, 0.0, -1.0), Vec3(-0.45, -0.28, 0.0)), 0.0, std::numbers::pi / 2.0});
    s.joints.push_back({revolute(Vec3(0.0, 0.0, 1.0), Vec3(0.45, -0.28, 0.0)), 0.0, std::numbers::pi / 2.0});
    s.joints.push_back({prismatic(Vec3(0.0, -1.0, 0.0)), 0.0, 0.3});
  } else if (name == "static") {
    s.parts.push_back({PartShape::Box, Vec3(0.0, 0.0, -0.1), Vec3(0.8, 0.6, 0.5), Vec3(0.7, 0.4, 0.3), 360, -1});
  } else {
    throw Error(Errc::InvalidSpec, "unknown preset '" + name + "'");
  }
  return s;
}

GroundTruthObject make_object(const ObjectSpec& spec, std::uint64_t seed) {
  spec.validate();

  Rng rng(seed);
  GroundTruthObject out;
  out.spec = spec;
  const int ns = static_cast<int>(spec.joints.size());
  for (const auto& j : spec.joints) out.screws.push_back(j.axis);

  auto& m = out.model;
  m.background = Vec3::Zero();
  for (int j = 0; j < ns; ++j) {
    const ScrewAxisd& a = spec.joints[j].axis;
    ScrewPrimitive sp;
    sp.joint_type = a.joint_type;
    if (a.is_revolute()) {
      sp.raw_axis << a.omega, a.point();
    } else {
      sp.raw_axis << Vec3::Zero(), a.v;
    }
    sp.confidence_logit = kHardLogit;
    sp.active = true;
    m.screws.push_back(sp);
  }

  for (const auto& p : spec.parts) {
    const double spacing = std::sqrt(surface_area(p) / p.gaussian_count);
    const double tangential = 0.75 * spacing;
    const double normal = 0.25 * spacing;
    const int slot = p.attached_screw + 1;
    for (int i = 0; i < p.gaussian_count; ++i) {
      const SurfaceSample s = p.shape == PartShape::CylinderShell ? sample_cylinder(p, rng) : sample_box(p, rng);
      PartAwareGaussian g;
      g.position = s.point;
      g.rotation = quat_from_normal(s.normal);
      g.log_scale = Vec3(std::log(tangential), std::log(tangential), std::log(normal));
      g.opacity_logit = logit(0.95);
      Vec3 jitter;
      for (int c = 0; c < 3; ++c) jitter[c] = uniform(rng, -0.04, 0.04);
      g.color = (p.color + jitter).cwiseMax(0.0).cwiseMin(1.0);
      g.part_logits = VecX::Constant(ns + 1, -kHardLogit);
      g.part_logits[slot] = 0.0;
      m.gaussians.push_back(std::move(g));
    }
  }
  m.joint_angles.push_back(VecX::Zero(ns));
  return out;
}

std::vector<Camera> hemisphere_cameras(int n, double radius, const Vec3& target, int width, int height,
                                       double focal) {
  if (n < 1) throw Error(Errc::InvalidConfig, "hemisphere_cameras needs n >= 1");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Camera> cams;
  cams.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - static_cast<double>(i) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Vec3 eye = target + radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    cams.push_back(Camera::look_at(eye, target, Vec3::UnitZ(), focal, width, height));
  }
  return cams;
}

std::vector<VecX> evenly_spaced_configs(const ObjectSpec& spec, int n) {
  if (n < 1) throw Error(Errc::InvalidConfig, "need at least one configuration");
  const int ns = static_cast<int>(spec.joints.size());
  std::vector<VecX> out;
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    VecX th(ns);
    for (int j = 0; j < ns; ++j) th[j] = spec.joints[j].lo + t * (spec.joints[j].hi - spec.joints[j].lo);
    out.push_back(th);
  }
  return out;
}

std::vector<VecX> random_configs(const ObjectSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "need at least one configuration");
  Rng rng(seed);
  const int ns = static_cast<int>(spec.joints.size());
  std::vector<VecX> out(n, VecX(ns));
  // Latin hypercube: each joint draws once from each of n equal strata of its
  // range, so every joint is exercised across its whole travel.
  for (int j = 0; j < ns; ++j) {
    std::vector<int> strata(n);
    std::iota(strata.begin(), strata.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(strata[i], strata[uniform_index(rng, i + 1)]);
    const double lo = spec.joints[j].lo, width = (spec.joints[j].hi - lo) / n;
    for (int k = 0; k < n; ++k) out[k][j] = lo + width * (strata[k] + uniform01(rng));
  }
  return out;
}

std::vector<VecX> training_configs(const ObjectSpec& spec, int n, std::uint64_t seed) {
  return spec.joints.size() > 1 ? random_configs(spec, n, seed) : evenly_spaced_configs(spec, n);
}

std::vector<VecX> midpoint_configs(const std::vector<VecX>& configs) {
  std::vector<VecX> out;
  for (std::size_t k = 0; k + 1 < configs.size(); ++k) out.push_back(0.5 * (configs[k] + configs[k + 1]));
  return out;
}

std::vector<Observation> generate_dataset(const GroundTruthObject& object, const std::vector<VecX>& configs,
                                          const std::vector<Camera>& cameras) {
  const auto& joints = object.spec.joints;
  for (const auto& th : configs) {
    if (th.size() != static_cast<Eigen::Index>(joints.size())) {
      throw Error(Errc::ShapeMismatch, "configuration size does not match the joint count");
    }
    for (std::size_t j = 0; j < joints.size(); ++j) {
      if (th[j] < joints[j].lo - 1e-12 || th[j] > joints[j].hi + 1e-12) {
        throw Error(Errc::OutOfLimits, "joint " + std::to_string(j) + " value " + std::to_string(th[j]) +
                                           " outside its limits");
      }
    }
  }
  std::vector<Observation> out;
  out.reserve(configs.size() * cameras.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    for (const auto& cam : cameras) {
      Observation o;
      o.config_index = static_cast<int>(k);
      o.joint_angles_gt = configs[k];
      o.camera = cam;
      o.image = quantize8(render_model(object.model, configs[k], cam));
      out.push_back(std::move(o));
    }
  }
  return out;
}

Dataset build_dataset(const ObjectSpec& spec, const DatasetOptions& opts, std::uint64_t seed) {
  Dataset ds;
  ds.spec = spec;
  ds.seed = seed;
  const GroundTruthObject gt = make_object(spec, seed);
  ds.configs = spec.joints.empty() ? std::vector<VecX>(opts.configs, VecX::Zero(0))
                                   : training_configs(spec, opts.configs, seed ^ 0x9e3779b97f4a7c15ULL);
  ds.heldout_configs = midpoint_configs(ds.configs);
  ds.cameras = hemisphere_cameras(opts.cameras, opts.radius, Vec3::Zero(), opts.width, opts.height,
                                  opts.focal_scale * opts.width);
  ds.observations = generate_dataset(gt, ds.configs, ds.cameras);
  ds.heldout = generate_dataset(gt, ds.heldout_configs, ds.cameras);
  return ds;
}

ArticulatedSplatModel ground_truth_model(const Dataset& ds) {
  ArticulatedSplatModel m = make_object(ds.spec, ds.seed).model;
  m.joint_angles = ds.configs;
  return m;
}

}  // namespace screwsplat
