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

#include "screwsplat/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace screwsplat {

const char* to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Position: return "position";
    case ParamGroup::Rotation: return "rotation";
    case ParamGroup::LogScale: return "log_scale";
    case ParamGroup::OpacityLogit: return "opacity_logit";
    case ParamGroup::Color: return "color";
    case ParamGroup::PartLogits: return "part_logits";
    case ParamGroup::RawAxis: return "raw_axis";
    case ParamGroup::ConfidenceLogit: return "confidence_logit";
    case ParamGroup::Theta: return "theta";
  }
  return "unknown";
}

bool ParamSet::all_finite() const {
  for (const auto& g : groups)
    if (!g.allFinite()) return false;
  return true;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += static_cast<std::size_t>(g.size());
  return n;
}

VecX pack(const ArticulatedSplatModel& m, ParamGroup group) {
  const int ng = m.num_gaussians(), ns = m.num_screws(), na = m.num_configs();
  VecX out;
  switch (group) {
    case ParamGroup::Position:
      out.resize(3 * ng);
      for (int i = 0; i < ng; ++i) out.segment<3>(3 * i) = m.gaussians[i].position;
      break;
    case ParamGroup::Rotation:
      out.resize(4 * ng);
      for (int i = 0; i < ng; ++i) out.segment<4>(4 * i) = m.gaussians[i].rotation;
      break;
    case ParamGroup::LogScale:
      out.resize(3 * ng);
      for (int i = 0; i < ng; ++i) out.segment<3>(3 * i) = m.gaussians[i].log_scale;
      break;
    case ParamGroup::OpacityLogit:
      out.resize(ng);
      for (int i = 0; i < ng; ++i) out[i] = m.gaussians[i].opacity_logit;
      break;
    case ParamGroup::Color:
      out.resize(3 * ng);
      for (int i = 0; i < ng; ++i) out.segment<3>(3 * i) = m.gaussians[i].color;
      break;
    case ParamGroup::PartLogits:
      out.resize(ng * (ns + 1));
      for (int i = 0; i < ng; ++i) out.segment(i * (ns + 1), ns + 1) = m.gaussians[i].part_logits;
      break;
    case ParamGroup::RawAxis:
      out.resize(6 * ns);
      for (int j = 0; j < ns; ++j) out.segment<6>(6 * j) = m.screws[j].raw_axis;
      break;
    case ParamGroup::ConfidenceLogit:
      out.resize(ns);
      for (int j = 0; j < ns; ++j) out[j] = m.screws[j].confidence_logit;
      break;
    case ParamGroup::Theta:
      out.resize(na * ns);
      for (int k = 0; k < na; ++k) out.segment(k * ns, ns) = m.joint_angles[k];
      break;
  }
  return out;
}

ParamSet pack(const ArticulatedSplatModel& model) {
  ParamSet p;
  for (int g = 0; g < kParamGroupCount; ++g) p.groups[g] = pack(model, static_cast<ParamGroup>(g));
  return p;
}

ParamSet zeros_like(const ArticulatedSplatModel& model) {
  ParamSet p = pack(model);
  for (auto& g : p.groups) g.setZero();
  return p;
}

void unpack(ArticulatedSplatModel& m, ParamGroup group, const VecX& v) {
  const int ng = m.num_gaussians(), ns = m.num_screws(), na = m.num_configs();
  if (v.size() != pack(m, group).size()) throw Error(Errc::ShapeMismatch, "parameter buffer size mismatch");
  switch (group) {
    case ParamGroup::Position:
      for (int i = 0; i < ng; ++i) m.gaussians[i].position = v.segment<3>(3 * i);
      break;
    case ParamGroup::Rotation:
      for (int i = 0; i < ng; ++i) m.gaussians[i].rotation = v.segment<4>(4 * i);
      break;
    case ParamGroup::LogScale:
      for (int i = 0; i < ng; ++i) m.gaussians[i].log_scale = v.segment<3>(3 * i);
      break;
    case ParamGroup::OpacityLogit:
      for (int i = 0; i < ng; ++i) m.gaussians[i].opacity_logit = v[i];
      break;
    case ParamGroup::Color:
      for (int i = 0; i < ng; ++i) m.gaussians[i].color = v.segment<3>(3 * i);
      break;
    case ParamGroup::PartLogits:
      for (int i = 0; i < ng; ++i) m.gaussians[i].part_logits = v.segment(i * (ns + 1), ns + 1);
      break;
    case ParamGroup::RawAxis:
      for (int j = 0; j < ns; ++j) m.screws[j].raw_axis = v.segment<6>(6 * j);
      break;
    case ParamGroup::ConfidenceLogit:
      for (int j = 0; j < ns; ++j) m.screws[j].confidence_logit = v[j];
      break;
    case ParamGroup::Theta:
      for (int k = 0; k < na; ++k) m.joint_angles[k] = v.segment(k * ns, ns);
      break;
  }
}

namespace {

struct SplatGrad {
  double opacity = 0.0;
  Vec2 mean2d = Vec2::Zero();
  Vec3 conic = Vec3::Zero();
  Vec3 color = Vec3::Zero();
};

// Gradient of L w.r.t. the unit quaternion entries given dL/dR.
Vec4 rotation_grad_to_unit_quaternion(const Vec4& q, const Mat3& g) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Vec4 d;
  d[0] = 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
  d[1] = 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - w * g(1, 2) + z * g(2, 0) +
                w * g(2, 1) - 2.0 * x * g(2, 2));
  d[2] = 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) - w * g(2, 0) +
                z * g(2, 1) - 2.0 * y * g(2, 2));
  d[3] = 2.0 * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2.0 * z * g(1, 1) + y * g(1, 2) +
                x * g(2, 0) + y * g(2, 1));
  return d;
}

Vec3 unskew(const Mat3& g) { return Vec3(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1)); }

// Per-rendered-screw accumulators for one configuration.
struct MotionGrad {
  int screw = -1;
  ScrewAxisd axis;
  RigidTransformd motion;
  double gamma = 0.0;
  Mat3 d_rotation = Mat3::Zero();
  Vec3 d_translation = Vec3::Zero();
  double d_gamma = 0.0;
};

// Per-Gaussian values shared by every replica.
struct GaussianCache {
  Mat3 rotation;
  Vec3 scale;
  Mat3 cov;
  double sigma;
  VecX m;
};

// Rasterizes one view and returns its loss; when `grads` is non-null,
// accumulates the full reverse pass into it.
double view_loss(const ArticulatedSplatModel& model, const std::vector<GaussianCache>& cache, const BatchItem& item,
                 const LossConfig& cfg, ParamGradients* grads) {
  const VecX& theta = model.joint_angles.at(item.config);
  const auto live = rendered_screws(model);

  std::vector<MotionGrad> motions;
  for (int j : live) {
    MotionGrad mg;
    mg.screw = j;
    mg.axis = model.screws[j].axis();
    mg.motion = screw_exp(mg.axis, theta[j]);
    mg.gamma = model.screws[j].confidence();
    motions.push_back(mg);
  }

  // Same forward path as render_model so that losses agree bit for bit.
  const std::vector<RenderGaussian> replicas = replicate(model, theta);
  const int per = static_cast<int>(live.size()) + 1;
  const int ng = model.num_gaussians();
  std::vector<Splat2D> splats;
  splats.reserve(replicas.size());
  for (std::size_t idx = 0; idx < replicas.size(); ++idx) {
    if (auto s = project(replicas[idx], item.camera)) {
      s->replica = static_cast<int>(idx);
      splats.push_back(*s);
    }
  }

  RasterTrace trace;
  const Image img = render(splats, item.camera, model.background, grads ? &trace : nullptr);
  if (!grads) return render_loss(img, *item.target, cfg);

  const ImageLossGrad lg = render_loss_with_grad(img, *item.target, cfg);

  // Rasterizer adjoint.
  const Camera& cam = item.camera;
  std::vector<SplatGrad> sg(splats.size());
  std::vector<double> behind(static_cast<std::size_t>(cam.width) * cam.height * 3);
  for (std::size_t p = 0; p < behind.size() / 3; ++p)
    for (int c = 0; c < 3; ++c) behind[p * 3 + c] = model.background[c];
  for (auto it = trace.contributions.rbegin(); it != trace.contributions.rend(); ++it) {
    const auto& ct = *it;
    const Splat2D& s = splats[ct.splat];
    SplatGrad& g = sg[ct.splat];
    const double* dl = &lg.grad[static_cast<std::size_t>(ct.pixel) * 3];
    double* b = &behind[static_cast<std::size_t>(ct.pixel) * 3];
    const double wgt = ct.alpha * ct.transmittance;
    double d_alpha = 0.0;
    for (int c = 0; c < 3; ++c) {
      g.color[c] += wgt * dl[c];
      d_alpha += dl[c] * (s.color[c] - b[c]);
      b[c] = s.color[c] * ct.alpha + (1.0 - ct.alpha) * b[c];
    }
    d_alpha *= ct.transmittance;
    g.opacity += d_alpha * ct.gauss;
    const double d_q = -0.5 * ct.alpha * d_alpha;
    const int px = ct.pixel % cam.width, py = ct.pixel / cam.width;
    const double dx = px + 0.5 - s.mean2d.x(), dy = py + 0.5 - s.mean2d.y();
    g.mean2d.x() += d_q * -2.0 * (s.conic[0] * dx + s.conic[1] * dy);
    g.mean2d.y() += d_q * -2.0 * (s.conic[1] * dx + s.conic[2] * dy);
    g.conic += d_q * Vec3(dx * dx, 2.0 * dx * dy, dy * dy);
  }

  auto& d_pos = (*grads)[ParamGroup::Position];
  auto& d_rot = (*grads)[ParamGroup::Rotation];
  auto& d_lsc = (*grads)[ParamGroup::LogScale];
  auto& d_opa = (*grads)[ParamGroup::OpacityLogit];
  auto& d_col = (*grads)[ParamGroup::Color];
  auto& d_part = (*grads)[ParamGroup::PartLogits];
  const int np = model.num_screws() + 1;

  // Per-Gaussian accumulators filled from replicas, then pushed through the
  // reparameterizations once per Gaussian.
  std::vector<Mat3> d_cov(ng, Mat3::Zero());
  std::vector<double> d_sigma(ng, 0.0);
  std::vector<VecX> d_m(ng);
  std::vector<bool> touched(ng, false);
  const Mat3 rc = cam.world_from_camera.rotation;

  for (std::size_t si = 0; si < splats.size(); ++si) {
    const Splat2D& s = splats[si];
    const SplatGrad& g = sg[si];
    if (g.opacity == 0.0 && g.mean2d.isZero(0.0) && g.conic.isZero(0.0) && g.color.isZero(0.0)) continue;
    const int idx = s.replica;
    const int i = idx / per, r = idx % per;
    const auto& c = cache[i];

    // Conic -> 2-d covariance.
    const Mat2 conic_m = (Mat2() << s.conic[0], s.conic[1], s.conic[1], s.conic[2]).finished();
    const Mat2 g_conic = (Mat2() << g.conic[0], 0.5 * g.conic[1], 0.5 * g.conic[1], g.conic[2]).finished();
    const Mat2 g_cov2 = -conic_m * g_conic * conic_m;

    // 2-d covariance and mean -> camera-frame point and world covariance.
    const RenderGaussian& rg = replicas[idx];
    const Vec3 p = cam.to_camera(rg.pose.translation);
    const double iz = 1.0 / p.z(), iz2 = iz * iz;
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx * iz, 0.0, -cam.fx * p.x() * iz2,
           0.0, cam.fy * iz, -cam.fy * p.y() * iz2;
    const Eigen::Matrix<double, 2, 3> mm = jac * rc.transpose();
    const Mat3 g_cov3 = mm.transpose() * g_cov2 * mm;
    const Eigen::Matrix<double, 2, 3> g_m = 2.0 * g_cov2 * mm * covariance(rg.pose.rotation, rg.scale);
    const Eigen::Matrix<double, 2, 3> g_j = g_m * rc;

    Vec3 g_p;
    g_p.x() = g_j(0, 2) * (-cam.fx * iz2) + g.mean2d.x() * cam.fx * iz;
    g_p.y() = g_j(1, 2) * (-cam.fy * iz2) + g.mean2d.y() * cam.fy * iz;
    g_p.z() = g_j(0, 0) * (-cam.fx * iz2) + g_j(0, 2) * (2.0 * cam.fx * p.x() * iz2 * iz) +
              g_j(1, 1) * (-cam.fy * iz2) + g_j(1, 2) * (2.0 * cam.fy * p.y() * iz2 * iz) -
              g.mean2d.x() * cam.fx * p.x() * iz2 - g.mean2d.y() * cam.fy * p.y() * iz2;
    const Vec3 g_mean = rc * g_p;

    if (!touched[i]) {
      d_m[i] = VecX::Zero(np);
      touched[i] = true;
    }
    d_col.segment<3>(3 * i) += g.color;

    if (r == 0) {
      d_pos.segment<3>(3 * i) += g_mean;
      d_cov[i] += g_cov3;
      d_sigma[i] += g.opacity * c.m[0];
      d_m[i][0] += g.opacity * c.sigma;
    } else {
      MotionGrad& mg = motions[r - 1];
      const Mat3& re = mg.motion.rotation;
      const Vec3& mu = model.gaussians[i].position;
      d_pos.segment<3>(3 * i) += re.transpose() * g_mean;
      d_cov[i] += re.transpose() * g_cov3 * re;
      mg.d_rotation += g_mean * mu.transpose() + 2.0 * g_cov3 * re * c.cov;
      mg.d_translation += g_mean;
      const int part = mg.screw + 1;
      d_sigma[i] += g.opacity * mg.gamma * c.m[part];
      d_m[i][part] += g.opacity * c.sigma * mg.gamma;
      mg.d_gamma += g.opacity * c.sigma * c.m[part];
    }
  }

  for (int i = 0; i < ng; ++i) {
    if (!touched[i]) continue;
    const auto& c = cache[i];
    const auto& gi = model.gaussians[i];
    // Sigma = R S^2 R^T.
    const Mat3 s2 = c.scale.array().square().matrix().asDiagonal();
    const Mat3 g_r = 2.0 * d_cov[i] * c.rotation * s2;
    const Mat3 rgr = c.rotation.transpose() * d_cov[i] * c.rotation;
    for (int a = 0; a < 3; ++a) d_lsc[3 * i + a] += 2.0 * c.scale[a] * rgr(a, a) * c.scale[a];
    const double qn = gi.rotation.norm();
    const Vec4 qh = gi.rotation / qn;
    const Vec4 g_qh = rotation_grad_to_unit_quaternion(qh, g_r);
    d_rot.segment<4>(4 * i) += (g_qh - qh * qh.dot(g_qh)) / qn;

    d_opa[i] += d_sigma[i] * c.sigma * (1.0 - c.sigma);
    const VecX& m = c.m;
    d_part.segment(i * np, np) += (m.array() * (d_m[i].array() - d_m[i].dot(m))).matrix();
  }

  // Screw motions -> raw axes, confidences, joint angles.
  auto& d_raw = (*grads)[ParamGroup::RawAxis];
  auto& d_conf = (*grads)[ParamGroup::ConfidenceLogit];
  auto& d_theta = (*grads)[ParamGroup::Theta];
  const int ns = model.num_screws();
  for (const auto& mg : motions) {
    const int j = mg.screw;
    const double th = theta[j];
    const Vec3& gt = mg.d_translation;
    const Mat3& gr = mg.d_rotation;
    const Vec6& raw = model.screws[j].raw_axis;
    if (mg.axis.is_revolute()) {
      const Mat3 k = skew(mg.axis.omega);
      const Mat3 k2 = k * k;
      const double st = std::sin(th), ct = std::cos(th);
      const Vec3& v = mg.axis.v;
      const Mat3 gmat = Mat3::Identity() * th + (1.0 - ct) * k + (th - st) * k2;
      d_theta[item.config * ns + j] += (gr.array() * (ct * k + st * k2).array()).sum() + gt.dot(mg.motion.rotation * v);
      const Vec3 g_v = gmat.transpose() * gt;
      Mat3 g_k = st * gr + (1.0 - ct) * (gr * k.transpose() + k.transpose() * gr);
      g_k += (1.0 - ct) * gt * v.transpose() + (th - st) * (gt * (k * v).transpose() + k.transpose() * gt * v.transpose());
      Vec3 g_omega = unskew(g_k);
      // v = -omega x q.
      const Vec3 q = raw.tail<3>();
      g_omega += g_v.cross(q);
      const Vec3 g_q = mg.axis.omega.cross(g_v);
      const Vec3 x = raw.head<3>();
      const double xn = x.norm();
      const Vec3& w = mg.axis.omega;
      d_raw.segment<3>(6 * j) += (g_omega - w * w.dot(g_omega)) / xn;
      d_raw.segment<3>(6 * j + 3) += g_q;
    } else {
      const Vec3& v = mg.axis.v;
      d_theta[item.config * ns + j] += gt.dot(v);
      const Vec3 g_v = th * gt;
      const double qn = raw.tail<3>().norm();
      d_raw.segment<3>(6 * j + 3) += (g_v - v * v.dot(g_v)) / qn;
    }
    d_conf[j] += mg.d_gamma * mg.gamma * (1.0 - mg.gamma);
  }
  return lg.value;
}

std::vector<GaussianCache> build_cache(const ArticulatedSplatModel& model) {
  std::vector<GaussianCache> cache(model.gaussians.size());
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto& g = model.gaussians[i];
    cache[i].rotation = g.rotation_matrix();
    cache[i].scale = g.scale();
    cache[i].cov = covariance(cache[i].rotation, cache[i].scale);
    cache[i].sigma = g.opacity();
    cache[i].m = g.part_probabilities();
  }
  return cache;
}

double parsimony_term(const ArticulatedSplatModel& model, double beta) {
  std::vector<double> gammas;
  for (const auto& s : model.screws)
    if (s.active) gammas.push_back(s.confidence());
  return parsimony(gammas, beta);
}

void check_batch(const ArticulatedSplatModel& model, std::span<const BatchItem> batch) {
  if (batch.empty()) throw Error(Errc::InvalidConfig, "empty batch");
  model.validate();
  for (const auto& item : batch) {
    if (!item.target) throw Error(Errc::InvalidConfig, "batch item without target image");
    if (item.target->width != item.camera.width || item.target->height != item.camera.height)
      throw Error(Errc::ShapeMismatch, "target image does not match camera size");
    if (item.config < 0 || item.config >= model.num_configs())
      throw Error(Errc::InvalidConfig, "configuration index out of range");
  }
}

}  // namespace

LossBreakdown evaluate_loss(const ArticulatedSplatModel& model, std::span<const BatchItem> batch,
                            const LossConfig& cfg) {
  check_batch(model, batch);
  const auto cache = build_cache(model);
  LossBreakdown out;
  for (const auto& item : batch) out.render += view_loss(model, cache, item, cfg, nullptr);
  out.parsimony = parsimony_term(model, cfg.beta);
  out.total = out.render + out.parsimony;
  return out;
}

BackwardResult backward(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg) {
  check_batch(model, batch);
  const auto cache = build_cache(model);
  BackwardResult out;
  out.grads = zeros_like(model);
  for (const auto& item : batch) out.loss.render += view_loss(model, cache, item, cfg, &out.grads);
  out.loss.parsimony = parsimony_term(model, cfg.beta);
  out.loss.total = out.loss.render + out.loss.parsimony;
  auto& d_conf = out.grads[ParamGroup::ConfidenceLogit];
  for (int j = 0; j < model.num_screws(); ++j)
    if (model.screws[j].active) d_conf[j] += parsimony_logit_grad(model.screws[j].confidence_logit, cfg.beta);
  if (!std::isfinite(out.loss.total) || !out.grads.all_finite())
    throw Error(Errc::NonFiniteLoss, "loss or gradient is not finite");
  return out;
}

FdReport fd_check(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg,
                  double h, int sample, std::uint64_t seed, const ParamGradients& analytic, double abs_floor) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::InvalidStep, "finite-difference step must be positive");
  if (sample < 1) throw Error(Errc::InvalidConfig, "sample must be at least 1");

  std::vector<std::pair<int, int>> entries;  // (group, index)
  for (int g = 0; g < kParamGroupCount; ++g)
    for (Eigen::Index i = 0; i < analytic.groups[g].size(); ++i) entries.emplace_back(g, static_cast<int>(i));
  if (static_cast<std::size_t>(sample) < entries.size()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(sample); ++i)
      std::swap(entries[i], entries[i + uniform_index(rng, entries.size() - i)]);
    entries.resize(sample);
  }

  FdReport report;
  for (const auto& [g, i] : entries) {
    const auto group = static_cast<ParamGroup>(g);
    const VecX base = pack(model, group);
    ArticulatedSplatModel plus = model, minus = model;
    VecX vp = base, vm = base;
    vp[i] += h;
    vm[i] -= h;
    unpack(plus, group, vp);
    unpack(minus, group, vm);
    const double fd = (evaluate_loss(plus, batch, cfg).total - evaluate_loss(minus, batch, cfg).total) / (2.0 * h);
    const double an = analytic[group][i];
    const double diff = std::abs(fd - an);
    const double rel = diff <= abs_floor ? 0.0 : diff / std::max(std::abs(fd), std::abs(an));
    ++report.checked;
    report.max_abs_error = std::max(report.max_abs_error, diff);
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_group = group;
      report.worst_index = i;
    }
  }
  return report;
}

FdReport fd_check(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg,
                  double h, int sample, std::uint64_t seed, double abs_floor) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::InvalidStep, "finite-difference step must be positive");
  return fd_check(model, batch, cfg, h, sample, seed, backward(model, batch, cfg).grads, abs_floor);
}

}  // namespace screwsplat
