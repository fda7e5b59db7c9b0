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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <set>

#include "screwsplat/model.hpp"
#include "screwsplat/serialization.hpp"
#include "screwsplat/spatial.hpp"

using namespace screwsplat;

namespace {

InitConfig small_init(int n = 200) {
  InitConfig cfg;
  cfg.num_gaussians = n;
  cfg.num_configs = 3;
  return cfg;
}

ArticulatedSplatModel one_gaussian(int ns) {
  ArticulatedSplatModel m;
  PartAwareGaussian g;
  g.position = Vec3(0.1, -0.2, 0.3);
  g.log_scale = Vec3(-2.0, -2.5, -3.0);
  g.opacity_logit = logit(0.8);
  g.color = Vec3(0.2, 0.4, 0.6);
  g.part_logits = VecX::Zero(ns + 1);
  m.gaussians.push_back(g);
  for (int j = 0; j < ns; ++j) {
    ScrewPrimitive s;
    s.joint_type = j % 2 == 0 ? JointType::Revolute : JointType::Prismatic;
    s.raw_axis << 0.0, 0.0, 1.0, 0.0, 1.0, 0.0;
    s.confidence_logit = logit(0.9);
    m.screws.push_back(s);
  }
  m.joint_angles.push_back(VecX::Zero(ns));
  return m;
}

}  // namespace

TEST_CASE("init_model is deterministic for a fixed seed") {
  const auto a = init_model(small_init(), 42);
  const auto b = init_model(small_init(), 42);
  CHECK(to_json(a).dump() == to_json(b).dump());
  const auto c = init_model(small_init(), 43);
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("default init spawns 8 revolute and 8 prismatic screws at confidence 0.9") {
  const auto m = init_model(small_init(), 1);
  REQUIRE(m.num_screws() == 16);
  int rev = 0;
  for (const auto& s : m.screws) {
    rev += s.joint_type == JointType::Revolute ? 1 : 0;
    CHECK(s.confidence() == doctest::Approx(0.9).epsilon(1e-12));
  }
  CHECK(rev == 8);
  for (const auto& g : m.gaussians) {
    const VecX p = g.part_probabilities();
    REQUIRE(p.size() == 17);
    for (Eigen::Index j = 0; j < p.size(); ++j) CHECK(p[j] == doctest::Approx(1.0 / 17.0).epsilon(1e-12));
    CHECK(g.opacity() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK((g.position.array().abs() <= 1.0).all());
  }
  CHECK(m.num_configs() == 3);
  for (const auto& th : m.joint_angles) CHECK(th.isZero(0.0));
}

TEST_CASE("initial scale is the mean distance to the three nearest neighbours") {
  const auto m = init_model(small_init(60), 5);
  std::vector<Vec3> pts;
  for (const auto& g : m.gaussians) pts.push_back(g.position);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> d;
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != i) d.push_back((pts[k] - pts[i]).norm());
    std::sort(d.begin(), d.end());
    const double expected = (d[0] + d[1] + d[2]) / 3.0;
    const Vec3 s = m.gaussians[i].scale();
    CHECK(s.x() == doctest::Approx(expected).epsilon(1e-9));
    CHECK(s.y() == doctest::Approx(expected).epsilon(1e-9));
    CHECK(s.z() == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("kd-tree knn agrees with brute force") {
  Rng rng(3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  const KdTree tree(pts);
  for (int t = 0; t < 50; ++t) {
    const Vec3 q(uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2));
    std::vector<std::pair<double, int>> brute;
    for (int i = 0; i < 300; ++i) brute.emplace_back((pts[i] - q).squaredNorm(), i);
    std::sort(brute.begin(), brute.end());
    const auto nn = tree.nearest(q);
    CHECK(nn.first == brute[0].first);
    CHECK(nn.second == brute[0].second);
    const auto k5 = tree.knn(q, 5);
    REQUIRE(k5.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(k5[k].first == brute[k].first);
  }
}

TEST_CASE("replicas at zero joint angle share the Gaussian pose") {
  auto m = one_gaussian(2);
  m.screws[1].confidence_logit = logit(0.5);
  const auto reps = replicate(m, 0);
  REQUIRE(reps.size() == 3);
  const double third = 1.0 / 3.0;
  CHECK(reps[0].effective_opacity == doctest::Approx(0.8 * third).epsilon(1e-12));
  CHECK(reps[1].effective_opacity == doctest::Approx(0.8 * 0.9 * third).epsilon(1e-12));
  CHECK(reps[2].effective_opacity == doctest::Approx(0.8 * 0.5 * third).epsilon(1e-12));
  for (const auto& r : reps) {
    CHECK((r.pose.translation - m.gaussians[0].position).norm() < 1e-15);
    CHECK((r.pose.rotation - m.gaussians[0].rotation_matrix()).norm() < 1e-15);
  }
  CHECK(reps[0].part == 0);
  CHECK(reps[1].part == 1);
  CHECK(reps[2].part == 2);
}

TEST_CASE("replica opacities follow sigma times confidence times part mass") {
  auto m = one_gaussian(1);
  const auto reps = replicate(m, 0);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].effective_opacity == doctest::Approx(0.40).epsilon(1e-12));
  CHECK(reps[1].effective_opacity == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("low-confidence screws produce no replicas") {
  auto m = one_gaussian(3);
  m.screws[1].confidence_logit = logit(0.05);
  const auto reps = replicate(m, 0);
  CHECK(reps.size() == 3);
  for (const auto& r : reps) CHECK(r.part != 2);
  CHECK(rendered_screws(m) == std::vector<int>{0, 2});
}

TEST_CASE("replicas move with their screw") {
  auto m = one_gaussian(2);
  VecX th(2);
  th << 0.7, 0.25;
  const auto reps = replicate(m, th);
  const auto& g = m.gaussians[0];
  const RigidTransformd r1 = screw_exp(m.screws[0].axis(), 0.7) * g.pose();
  const RigidTransformd r2 = screw_exp(m.screws[1].axis(), 0.25) * g.pose();
  CHECK((reps[1].pose.translation - r1.translation).norm() < 1e-12);
  CHECK((reps[1].pose.rotation - r1.rotation).norm() < 1e-12);
  CHECK((reps[2].pose.translation - r2.translation).norm() < 1e-12);
  CHECK((reps[2].pose.translation - (g.position + Vec3(0, 0.25, 0))).norm() < 1e-12);
}

TEST_CASE("replica count and opacity budget") {
  const auto m = init_model(small_init(50), 8);
  Rng rng(2);
  auto mm = m;
  for (auto& s : mm.screws) s.confidence_logit = uniform(rng, -4.0, 4.0);
  for (auto& g : mm.gaussians)
    for (Eigen::Index j = 0; j < g.part_logits.size(); ++j) g.part_logits[j] = uniform(rng, -3.0, 3.0);
  const auto live = rendered_screws(mm);
  const auto reps = replicate(mm, 1);
  CHECK(reps.size() == mm.gaussians.size() * (1 + live.size()));
  std::vector<double> budget(mm.gaussians.size(), 0.0);
  for (const auto& r : reps) budget[r.source] += r.effective_opacity;
  for (std::size_t i = 0; i < budget.size(); ++i) {
    const auto& g = mm.gaussians[i];
    const VecX p = g.part_probabilities();
    double bound = p[0];
    for (int j = 0; j < mm.num_screws(); ++j) bound += mm.screws[j].confidence() * p[j + 1];
    CHECK(budget[i] <= g.opacity() * bound + 1e-15);
    CHECK(g.opacity() * bound <= g.opacity() + 1e-15);
  }
}

TEST_CASE("extreme logits stay inside valid ranges") {
  for (double z : {-800.0, -40.0, 0.0, 40.0, 800.0}) {
    const double s = sigmoid(z);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    VecX l(3);
    l << z, -z, 0.0;
    const VecX p = softmax(l);
    CHECK(p.allFinite());
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("covariance from rotation and scale") {
  CHECK((covariance(Mat3::Identity(), Vec3(1, 2, 3)) - Vec3(1, 4, 9).asDiagonal().toDenseMatrix()).norm() < 1e-15);
  const Mat3 r = rodrigues(Vec3(1, 2, 3).normalized(), 0.8);
  CHECK((covariance(r, Vec3::Constant(0.5)) - 0.25 * Mat3::Identity()).norm() < 1e-12);

  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    PartAwareGaussian g;
    g.rotation = Vec4(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
    g.log_scale = Vec3(uniform(rng, -3, 1), uniform(rng, -3, 1), uniform(rng, -3, 1));
    const Eigen::SelfAdjointEigenSolver<Mat3> es(covariance(g));
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
    Vec3 s2 = g.scale().cwiseAbs2();
    std::vector<double> want(s2.data(), s2.data() + 3);
    std::sort(ev.begin(), ev.end());
    std::sort(want.begin(), want.end());
    for (int k = 0; k < 3; ++k) CHECK(ev[k] == doctest::Approx(want[k]).epsilon(1e-9));
  }
}

TEST_CASE("prune compacts part logits and joint angles") {
  auto m = one_gaussian(3);
  m.gaussians.push_back(m.gaussians[0]);
  m.gaussians[0].part_logits << 0.0, 1.0, 2.0, 3.0;
  m.joint_angles[0] << 0.1, 0.2, 0.3;
  prune(m, {true, false}, {true, false, true});
  REQUIRE(m.num_gaussians() == 1);
  REQUIRE(m.num_screws() == 2);
  CHECK(m.gaussians[0].part_logits == (VecX(3) << 0.0, 1.0, 3.0).finished());
  CHECK(m.joint_angles[0] == (VecX(2) << 0.1, 0.3).finished());
  CHECK(m.screws[1].joint_type == JointType::Revolute);
  CHECK_NOTHROW(m.validate());
  CHECK_THROWS_AS(prune(m, {true, true}, {true, true}), Error);
}

TEST_CASE("validate rejects inconsistent shapes") {
  auto m = one_gaussian(2);
  m.gaussians[0].part_logits = VecX::Zero(2);
  CHECK_THROWS_AS(m.validate(), Error);
  auto n = one_gaussian(2);
  n.joint_angles[0] = VecX::Zero(3);
  CHECK_THROWS_AS(n.validate(), Error);
}

TEST_CASE("model json round trip is exact") {
  const auto m = init_model(small_init(30), 11);
  const std::string once = to_json(m).dump();
  const auto back = model_from_json(Json::parse(once));
  CHECK(to_json(back).dump() == once);
  CHECK(back.gaussians[7].position == m.gaussians[7].position);
  Json bad = to_json(m);
  bad["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(bad), Error);
}
