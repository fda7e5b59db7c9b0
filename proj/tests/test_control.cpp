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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "screwsplat/control.hpp"
#include "screwsplat/scene_synth.hpp"

using namespace screwsplat;

namespace {

// Ground-truth laptop whose configurations span the joint range.
ArticulatedSplatModel laptop_model() {
  const auto gt = make_object(object_preset("laptop"), 5);
  ArticulatedSplatModel m = gt.model;
  m.joint_angles = evenly_spaced_configs(gt.spec, 5);
  return m;
}

std::vector<Camera> small_rig(int n) { return hemisphere_cameras(n + 1, 2.5, Vec3::Zero(), 32, 32, 40.0); }

// Wraps an embedder with a fixed orthogonal map.
class RotatedEmbedder : public Embedder {
 public:
  RotatedEmbedder(const Embedder& inner, const MatX& q) : inner_(inner), q_(q) {}
  VecX embed(const Image& image) const override { return q_ * inner_.embed(image); }

 private:
  const Embedder& inner_;
  MatX q_;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("toy embedder output is unit norm and deterministic") {
  Rng rng(1);
  Image img(40, 24);
  for (auto& v : img.pixels) v = uniform01(rng);
  const ToyEmbedder e;
  const VecX a = e.embed(img);
  CHECK(a.size() == 16 * 16 * 3);
  CHECK(std::abs(a.norm() - 1.0) < 1e-9);
  CHECK(a == e.embed(img));
  CHECK(std::abs(e.embed(Image(10, 10, 0.3)).norm() - 1.0) < 1e-9);
}

TEST_CASE("directional loss examples") {
  const auto m = laptop_model();
  const ToyEmbedder e;
  const std::vector<Camera> cams = {small_rig(3)[2]};
  VecX cur(1), goal(1);
  cur << 0.2;
  goal << 1.1;
  const GoalSpec g = GoalSpec::from_exemplars(cams, {render_model(m, cur, cams[0])}, {render_model(m, goal, cams[0])}, e);
  CHECK(directional_loss(goal, m, g, e) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(directional_loss(cur, m, g, e) == kDirectionalSentinel);
  for (double t = 0.0; t <= std::numbers::pi / 2; t += 0.1) {
    const double l = directional_loss(VecX::Constant(1, t), m, g, e);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0);
  }
  CHECK_THROWS_AS(GoalSpec::from_exemplars(cams, {render_model(m, cur, cams[0])}, {render_model(m, cur, cams[0])}, e),
                  Error);
}

TEST_CASE("directional loss is invariant to a rotation of the embedding space") {
  const auto m = laptop_model();
  const ToyEmbedder e;
  Rng rng(4);
  MatX a(768, 768);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
  const MatX q = Eigen::HouseholderQR<MatX>(a).householderQ();
  const RotatedEmbedder r(e, q);
  const auto cams = small_rig(2);
  std::vector<Image> cur, ex;
  for (const auto& c : cams) {
    cur.push_back(render_model(m, VecX::Constant(1, 0.3), c));
    ex.push_back(render_model(m, VecX::Constant(1, 1.2), c));
  }
  const GoalSpec g1 = GoalSpec::from_exemplars(cams, cur, ex, e);
  const GoalSpec g2 = GoalSpec::from_exemplars(cams, cur, ex, r);
  for (double t : {0.0, 0.5, 0.9, 1.4}) {
    CHECK(directional_loss(VecX::Constant(1, t), m, g1, e) ==
          doctest::Approx(directional_loss(VecX::Constant(1, t), m, g2, r)).epsilon(1e-9));
  }
}

TEST_CASE("estimate loss is minimal at the planted state") {
  const auto m = laptop_model();
  const double planted = 0.7;
  std::vector<View> views;
  for (const auto& c : small_rig(4)) views.push_back({c, render_model(m, VecX::Constant(1, planted), c)});
  const double at = estimate_loss(VecX::Constant(1, planted), m, views);
  CHECK(at == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  for (int i = 0; i < 50; ++i) {
    const double t = std::numbers::pi / 2 * i / 49.0;
    if (std::abs(t - planted) < 1e-9) continue;
    const double l = estimate_loss(VecX::Constant(1, t), m, views);
    CHECK(l >= at);
    CHECK(l >= 0.0);
  }
  CHECK_THROWS_AS(estimate_loss(VecX::Constant(1, 0.1), m, {}), Error);
}

TEST_CASE("expected improvement closed forms") {
  CHECK(expected_improvement(0.4, 0.0, 0.4) == 0.0);
  CHECK(expected_improvement(0.7, 0.0, 0.4) == 0.0);
  CHECK(expected_improvement(0.1, 0.0, 0.4) == doctest::Approx(0.3));
  CHECK(expected_improvement(0.4, 0.25, 0.4) == doctest::Approx(0.25 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("gp posterior collapses at evaluated points") {
  std::vector<VecX> xs;
  VecX ys(6);
  for (int i = 0; i < 6; ++i) {
    xs.push_back(VecX::Constant(1, i / 5.0));
    ys[i] = std::sin(3.0 * i / 5.0);
  }
  const GaussianProcess gp = fit_gp(xs, ys, 1e-10);
  for (int i = 0; i < 6; ++i) {
    const auto [mean, var] = gp.predict(xs[i]);
    CHECK(mean == doctest::Approx(ys[i]).epsilon(1e-4));
    CHECK(expected_improvement(mean, std::sqrt(var), ys.minCoeff()) <= 1e-3);
    CHECK(expected_improvement(ys[i], 0.0, ys.minCoeff()) <= 1e-9);
  }
}

TEST_CASE("bayes_opt finds a quadratic minimum") {
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BoConfig cfg;
    cfg.seed = seed;
    const auto r = bayes_opt([](const VecX& x) { return (x[0] - 0.3) * (x[0] - 0.3); },
                             SearchSpace{VecX::Zero(1), VecX::Ones(1)}, cfg);
    CHECK(r.xs.size() == 50);
    // The answer is an evaluated point and no worse than the random phase.
    CHECK(std::find(r.ys.begin(), r.ys.end(), r.best_value) != r.ys.end());
    CHECK(r.best_value <= *std::min_element(r.ys.begin(), r.ys.begin() + 10));
    errs.push_back(std::abs(r.best_x[0] - 0.3));
  }
  CHECK(median(errs) <= 0.02);
}

TEST_CASE("bayes_opt rejects degenerate spaces") {
  auto f = [](const VecX& x) { return x.squaredNorm(); };
  CHECK_THROWS_AS(bayes_opt(f, SearchSpace{VecX::Zero(1), VecX::Zero(1)}), Error);
  CHECK_THROWS_AS(bayes_opt(f, SearchSpace{VecX::Zero(0), VecX::Zero(0)}), Error);
  CHECK_THROWS_AS(bayes_opt(f, SearchSpace{VecX::Zero(7), VecX::Ones(7)}), Error);
  BoConfig bad;
  bad.n_random = 50;
  CHECK_THROWS_AS(bayes_opt(f, SearchSpace{VecX::Zero(1), VecX::Ones(1)}, bad), Error);
}

TEST_CASE("state estimation recovers a planted angle") {
  const auto m = laptop_model();
  std::vector<View> views;
  for (const auto& c : small_rig(4)) views.push_back({c, render_model(m, VecX::Constant(1, 0.7), c)});
  BoConfig cfg;
  cfg.seed = 3;
  const VecX th = estimate_state(m, views, cfg);
  REQUIRE(th.size() == 1);
  CHECK(std::abs(th[0] - 0.7) <= 0.05 * std::numbers::pi / 2);

  // A training configuration is recovered as itself.
  views.clear();
  for (const auto& c : small_rig(4)) views.push_back({c, render_model(m, 2, c)});
  const VecX self = estimate_state(m, views, cfg);
  CHECK(std::abs(self[0] - m.joint_angles[2][0]) <= 0.02 * std::numbers::pi / 2);

  ArticulatedSplatModel rigid = make_object(object_preset("static"), 1).model;
  CHECK(estimate_state(rigid, views, cfg).size() == 0);
}

TEST_CASE("goal control recovers the exemplar angle") {
  const auto m = laptop_model();
  const ToyEmbedder e;
  const std::vector<Camera> cams = {small_rig(3)[1]};
  const GoalSpec g = GoalSpec::from_exemplars(cams, {render_model(m, VecX::Constant(1, 0.1), cams[0])},
                                              {render_model(m, VecX::Constant(1, 1.3), cams[0])}, e);
  BoConfig cfg;
  cfg.seed = 2;
  const VecX th = control_to_goal(m, g, e, cfg);
  CHECK(std::abs(th[0] - 1.3) <= 0.1 * std::numbers::pi / 2);
}

TEST_CASE("trajectory examples") {
  Vec6 raw;
  raw << 0, 0, 1, 0, 0, 0;
  const ScrewAxisd z = normalize_screw<double>(raw, JointType::Revolute);
  PlanConfig cfg;
  cfg.theta_offset = 0.0;
  cfg.steps = 3;
  const auto tr = plan_trajectory(z, Vec3(1, 0, 0), 0.0, std::numbers::pi / 2, cfg);
  REQUIRE(tr.tip_points.size() == 3);
  const double h = std::sqrt(0.5);
  CHECK((tr.tip_points[0] - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((tr.tip_points[1] - Vec3(h, h, 0)).norm() < 1e-12);
  CHECK((tr.tip_points[2] - Vec3(0, 1, 0)).norm() < 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tr.gripper_poses[i].translation == tr.tip_points[i]);
    CHECK(tr.gripper_poses[i].rotation == Mat3::Identity());
  }

  raw << 0, 0, 0, 1, 0, 0;
  const ScrewAxisd x = normalize_screw<double>(raw, JointType::Prismatic);
  const auto line = plan_trajectory(x, Vec3(0.2, 0.1, 0), 0.0, 0.3, cfg);
  CHECK((line.tip_points.back() - line.tip_points.front()).norm() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("trajectories respect the screw constraint") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    Vec6 raw;
    for (int i = 0; i < 6; ++i) raw[i] = standard_normal(rng);
    const auto type = t % 2 == 0 ? JointType::Revolute : JointType::Prismatic;
    const ScrewAxisd s = normalize_screw<double>(raw, type);
    const Vec3 p(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    PlanConfig cfg;
    cfg.steps = 15;
    const auto tr = plan_trajectory(s, p, uniform(rng, -1, 0), uniform(rng, 0, 1), cfg);
    for (const auto& tip : tr.tip_points) {
      if (s.is_revolute()) {
        const double r0 = (p - s.point()).cross(s.omega).norm();
        CHECK(std::abs((tip - s.point()).cross(s.omega).norm() - r0) < 1e-9);
      } else {
        CHECK((tip - p).cross(s.v).norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("affordance selection") {
  ArticulatedSplatModel m;
  ScrewPrimitive s;
  s.joint_type = JointType::Revolute;
  s.raw_axis << 0, 0, 1, 0, 0, 0;
  s.confidence_logit = 3.0;
  m.screws.push_back(s);
  m.joint_angles.push_back(VecX::Zero(1));
  for (int d = 1; d <= 10; ++d) {
    PartAwareGaussian g;
    g.position = Vec3(d, 0, 0.5);
    g.part_logits = Vec2(-5.0, 5.0);
    m.gaussians.push_back(g);
  }
  CHECK((affordance_point(m, 0) - Vec3(10, 0, 0.5)).norm() < 1e-12);
  CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.9) == doctest::Approx(9.1));

  auto prism = m;
  prism.screws[0].joint_type = JointType::Prismatic;
  prism.screws[0].raw_axis << 0, 0, 0, 1, 0, 0;
  PlanConfig cfg;
  cfg.base_point = Vec3(-2, 0, 0);
  const Vec3 a = affordance_point(prism, 0, cfg);
  CHECK(a.x() == doctest::Approx(1.5));

  auto dead = m;
  dead.screws[0].confidence_logit = -5.0;
  CHECK_THROWS_AS(affordance_point(dead, 0), Error);
  CHECK_THROWS_AS(affordance_point(m, 3), Error);
  auto empty = m;
  for (auto& g : empty.gaussians) g.part_logits = Vec2(5.0, -5.0);
  CHECK_THROWS_AS(affordance_point(empty, 0), Error);
}
