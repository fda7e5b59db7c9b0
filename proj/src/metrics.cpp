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


#include "screwsplat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "screwsplat/losses.hpp"
#include "screwsplat/spatial.hpp"

namespace screwsplat {

namespace {

double selected_mass(const PartAwareGaussian& g, const PartSelector& sel) {
  switch (sel.kind) {
    case PartSelector::Kind::Whole: return 1.0;
    case PartSelector::Kind::Static: return g.dominant_part() == 0 ? g.part_probabilities()[0] : 0.0;
    case PartSelector::Kind::Movable: {
      const int slot = sel.screw + 1;
      return g.dominant_part() == slot ? g.part_probabilities()[slot] : 0.0;
    }
  }
  return 0.0;
}

Vec3 unit_ball(Rng& rng) {
  const Vec3 d = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)).normalized();
  return std::cbrt(uniform01(rng)) * d;
}

double nn_mean(const std::vector<Vec3>& from, const KdTree& to) {
  double s = 0.0;
  for (const auto& p : from) s += to.nearest(p).first;
  return s / static_cast<double>(from.size());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::vector<Vec3> sample_points(const ArticulatedSplatModel& model, const VecX& theta, const PartSelector& selector,
                                int n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "sample_points needs n >= 1");
  if (selector.kind == PartSelector::Kind::Movable && (selector.screw < 0 || selector.screw >= model.num_screws()))
    throw Error(Errc::EmptySelection, "selector names an unknown screw");
  if (theta.size() != model.num_screws()) throw Error(Errc::ShapeMismatch, "theta size does not match the screws");

  std::vector<double> cdf;
  cdf.reserve(model.gaussians.size());
  double total = 0.0;
  for (const auto& g : model.gaussians) {
    total += g.opacity() * selected_mass(g, selector);
    cdf.push_back(total);
  }
  if (!(total > 0.0)) throw Error(Errc::EmptySelection, "selected Gaussians carry no mass");

  std::vector<RigidTransformd> motion;
  for (int j = 0; j < model.num_screws(); ++j) motion.push_back(screw_exp(model.screws[j].axis(), theta[j]));

  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto& g = model.gaussians[static_cast<std::size_t>(it - cdf.begin())];
    Vec3 p = g.position + g.rotation_matrix() * g.scale().cwiseProduct(unit_ball(rng));
    const int part = g.dominant_part();
    if (part > 0) p = motion[part - 1] * p;
    out.push_back(p);
  }
  return out;
}

double chamfer(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  if (p.empty() || q.empty()) throw Error(Errc::EmptySet, "chamfer needs two nonempty point sets");
  const KdTree tp(p), tq(q);
  return nn_mean(p, tq) + nn_mean(q, tp);
}

double angular_error(const ScrewAxisd& a, const ScrewAxisd& b) {
  if (a.joint_type != b.joint_type) throw Error(Errc::TypeMismatch, "angular_error across joint types");
  const double c = std::clamp(std::abs(a.direction().normalized().dot(b.direction().normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double position_error(const ScrewAxisd& a, const ScrewAxisd& b) { return line_line_distance(a, b); }

double axis_match_cost(const ScrewAxisd& a, const ScrewAxisd& b) {
  if (a.joint_type != b.joint_type) return std::numeric_limits<double>::infinity();
  double c = angular_error(a, b) / 180.0;
  if (a.is_revolute()) c += position_error(a, b);
  return c;
}

AxisMatching match_axes(const std::vector<ScrewAxisd>& gt, const std::vector<ScrewAxisd>& pred) {
  const int ng = static_cast<int>(gt.size()), np = static_cast<int>(pred.size());
  const bool flip = ng > np;  // search over the shorter side
  const int rows = flip ? np : ng, cols = flip ? ng : np;
  MatX cost(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) cost(r, c) = flip ? axis_match_cost(gt[c], pred[r]) : axis_match_cost(gt[r], pred[c]);

  std::vector<int> cur(rows, -1), best(rows, -1);
  std::vector<bool> used(cols, false);
  int best_count = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> dfs = [&](int r, int count, double acc) {
    if (count + (rows - r) < best_count) return;
    if (r == rows) {
      if (count > best_count || (count == best_count && acc < best_cost)) {
        best_count = count;
        best_cost = acc;
        best = cur;
      }
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[c] || !std::isfinite(cost(r, c))) continue;
      used[c] = true;
      cur[r] = c;
      dfs(r + 1, count + 1, acc + cost(r, c));
      used[c] = false;
    }
    cur[r] = -1;
    dfs(r + 1, count, acc);
  };
  dfs(0, 0, 0.0);

  AxisMatching m;
  m.gt_to_pred.assign(ng, -1);
  m.pred_to_gt.assign(np, -1);
  for (int r = 0; r < rows; ++r) {
    if (best[r] < 0) continue;
    const int g = flip ? best[r] : r, p = flip ? r : best[r];
    m.gt_to_pred[g] = p;
    m.pred_to_gt[p] = g;
    ++m.matched;
  }
  m.total_cost = m.matched > 0 ? best_cost : 0.0;
  return m;
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error(Errc::ShapeMismatch, "psnr needs equally sized images");
  double se = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.pixels.size());
  if (mse < 1e-12) return kPsnrIdentical;
  return -10.0 * std::log10(mse);
}

double ssim_metric(const Image& a, const Image& b) { return ssim(a, b); }

std::vector<ScrewAxisd> model_axes(const ArticulatedSplatModel& model) {
  std::vector<ScrewAxisd> out;
  for (const auto& s : model.screws) out.push_back(s.axis());
  return out;
}

VecX heldout_theta(const ArticulatedSplatModel& model, int k) {
  if (k < 0 || k + 1 >= model.num_configs()) throw Error(Errc::InvalidConfig, "no held-out midpoint after config");
  return 0.5 * (model.joint_angles[k] + model.joint_angles[k + 1]);
}

EvalReport evaluate(const ArticulatedSplatModel& fitted, const Dataset& ds, const EvalOptions& opts) {
  if (fitted.num_configs() != ds.num_configs())
    throw Error(Errc::ShapeMismatch, "model and dataset disagree on the configuration count");
  const ArticulatedSplatModel gt = ground_truth_model(ds);
  EvalReport rep;
  rep.object = ds.spec.name;
  rep.gt_screws = gt.num_screws();
  rep.pred_screws = fitted.num_screws();

  const VecX& th_gt = gt.joint_angles.front();
  const VecX& th_fit = fitted.joint_angles.front();
  auto cd = [&](const PartSelector& a, const PartSelector& b, std::uint64_t salt) {
    try {
      return chamfer(sample_points(gt, th_gt, a, opts.points, opts.seed + salt),
                     sample_points(fitted, th_fit, b, opts.points, opts.seed + salt + 1));
    } catch (const Error& e) {
      if (e.code() == Errc::EmptySelection) return std::numeric_limits<double>::quiet_NaN();
      throw;
    }
  };
  rep.cd_static = cd(PartSelector::static_part(), PartSelector::static_part(), 10);
  rep.cd_whole = cd(PartSelector::whole(), PartSelector::whole(), 20);

  const auto gt_axes = model_axes(gt);
  const auto pred_axes = model_axes(fitted);
  const AxisMatching match = match_axes(gt_axes, pred_axes);
  for (int g = 0; g < rep.gt_screws; ++g) {
    const int p = match.gt_to_pred[g];
    if (p < 0) {
      rep.unmatched_gt.push_back(g);
      continue;
    }
    AxisReport ar;
    ar.gt = g;
    ar.pred = p;
    ar.type = gt_axes[g].joint_type;
    ar.ang_err = angular_error(gt_axes[g], pred_axes[p]);
    if (gt_axes[g].is_revolute()) ar.pos_err = position_error(gt_axes[g], pred_axes[p]);
    ar.cd_movable = cd(PartSelector::movable(g), PartSelector::movable(p), 100 + 10 * g);
    rep.axes.push_back(ar);
  }
  for (int p = 0; p < rep.pred_screws; ++p)
    if (match.pred_to_gt[p] < 0) rep.unmatched_pred.push_back(p);

  double psum = 0.0, ssum = 0.0;
  for (const auto& o : ds.heldout) {
    const Image r = render_model(fitted, heldout_theta(fitted, o.config_index), o.camera);
    psum += psnr(r, o.image);
    ssum += std::min(o.image.width, o.image.height) >= opts.ssim_window ? ssim(r, o.image, opts.ssim_window) : 0.0;
    ++rep.heldout_views;
  }
  if (rep.heldout_views > 0) {
    rep.psnr = psum / rep.heldout_views;
    rep.ssim = ssum / rep.heldout_views;
  }
  return rep;
}

Json EvalReport::to_json() const {
  Json axes_j = Json::array();
  for (const auto& a : axes) {
    axes_j.push_back({{"gt", a.gt},
                      {"pred", a.pred},
                      {"type", a.type == JointType::Revolute ? "revolute" : "prismatic"},
                      {"ang_err_deg", a.ang_err},
                      {"pos_err", number_or_null(a.pos_err)},
                      {"cd_movable", number_or_null(a.cd_movable)}});
  }
  return {{"object", object},
          {"gt_screws", gt_screws},
          {"pred_screws", pred_screws},
          {"units", {{"cd", "scene_units^2"}, {"ang_err", "degrees"}, {"pos_err", "scene_units"}, {"psnr", "dB"}}},
          {"cd_static", number_or_null(cd_static)},
          {"cd_whole", number_or_null(cd_whole)},
          {"axes", axes_j},
          {"unmatched_gt", unmatched_gt},
          {"unmatched_pred", unmatched_pred},
          {"psnr", number_or_null(psnr)},
          {"psnr_identical", std::isinf(psnr)},
          {"ssim", ssim},
          {"heldout_views", heldout_views}};
}

std::string EvalReport::csv_header() {
  return "object,gt_screws,pred_screws,matched,cd_static,cd_whole,mean_ang_err_deg,mean_pos_err,psnr_db,ssim";
}

std::string EvalReport::csv_row() const {
  double ang = 0.0, pos = 0.0;
  int npos = 0;
  for (const auto& a : axes) {
    ang += a.ang_err;
    if (std::isfinite(a.pos_err)) {
      pos += a.pos_err;
      ++npos;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream os;
  os << object << ',' << gt_screws << ',' << pred_screws << ',' << axes.size() << ',' << fmt(cd_static) << ','
     << fmt(cd_whole) << ',' << fmt(axes.empty() ? nan : ang / axes.size()) << ',' << fmt(npos ? pos / npos : nan)
     << ',' << fmt(psnr) << ',' << fmt(ssim);
  return os.str();
}

}  // namespace screwsplat
