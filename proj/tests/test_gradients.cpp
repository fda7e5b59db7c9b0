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

#include "screwsplat/gradients.hpp"
#include "support/fixtures.hpp"

using namespace screwsplat;

namespace {

LossConfig small_window_loss(double beta = 0.002) {
  LossConfig cfg;
  cfg.beta = beta;
  cfg.ssim_window = 5;
  return cfg;
}

}  // namespace

TEST_CASE("backward matches central differences on random scenes") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto scene = fixtures::random_grad_scene(seed);
    const auto cfg = small_window_loss();
    const auto bw = backward(scene.model, scene.batch, cfg);
    for (int g = 0; g < kParamGroupCount; ++g) {
      const auto group = static_cast<ParamGroup>(g);
      CAPTURE(to_string(group));
      CAPTURE(seed);
      CHECK(bw.grads[group].size() > 0);
    }
    const auto report = fd_check(scene.model, scene.batch, cfg, 1e-4, 100000, seed, bw.grads);
    CAPTURE(to_string(report.worst_group));
    CAPTURE(report.worst_index);
    CHECK(report.checked == static_cast<int>(bw.grads.total_size()));
    CHECK(report.max_relative_error <= 1e-3);
  }
}

TEST_CASE("l1 gradient vanishes at an exact fit") {
  auto scene = fixtures::random_grad_scene(9);
  std::vector<Image> exact;
  for (const auto& item : scene.batch) exact.push_back(render_model(scene.model, item.config, item.camera));
  std::vector<BatchItem> batch;
  for (std::size_t b = 0; b < scene.batch.size(); ++b) batch.push_back({scene.batch[b].config, scene.batch[b].camera, &exact[b]});
  LossConfig cfg;
  cfg.lambda = 0.0;
  cfg.beta = 0.0;
  const auto bw = backward(scene.model, batch, cfg);
  CHECK(bw.loss.total == 0.0);
  for (const auto& g : bw.grads.groups) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parsimony contribution") {
  auto scene = fixtures::random_grad_scene(4);
  auto& m = scene.model;
  m.screws[0].confidence_logit = logit(0.81);
  LossConfig with = small_window_loss(0.002), without = small_window_loss(0.0);
  const auto a = backward(m, scene.batch, with);
  const auto b = backward(m, scene.batch, without);
  const double g1 = std::sqrt(m.screws[1].confidence());
  CHECK(a.loss.parsimony == doctest::Approx(0.002 * (0.9 + g1)).epsilon(1e-12));
  const double dl = a.grads[ParamGroup::ConfidenceLogit][0] - b.grads[ParamGroup::ConfidenceLogit][0];
  CHECK(dl == doctest::Approx(0.002 * (0.5 / 0.9) * 0.81 * 0.19).epsilon(1e-9));
}

TEST_CASE("screws below the render threshold get no render gradient") {
  auto scene = fixtures::random_grad_scene(6);
  auto& m = scene.model;
  m.screws[0].confidence_logit = logit(0.05);
  const auto bw = backward(m, scene.batch, small_window_loss());
  CHECK(bw.grads[ParamGroup::RawAxis].segment<6>(0).isZero(0.0));
  CHECK(bw.grads[ParamGroup::Theta][0] == 0.0);
  CHECK(bw.grads[ParamGroup::Theta][2] == 0.0);
  CHECK(bw.grads[ParamGroup::ConfidenceLogit][0] == doctest::Approx(parsimony_logit_grad(logit(0.05), 0.002)));
  CHECK(bw.grads[ParamGroup::ConfidenceLogit][0] != 0.0);
}

TEST_CASE("prismatic raw direction part has no gradient") {
  auto scene = fixtures::random_grad_scene(7);
  const auto bw = backward(scene.model, scene.batch, small_window_loss());
  // Slot 1 is prismatic: its x half never enters the motion.
  CHECK(bw.grads[ParamGroup::RawAxis].segment<3>(6).isZero(0.0));
}

TEST_CASE("dssim gradient matches finite differences on 16x16 images") {
  Rng rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    Image a(16, 16), b(16, 16);
    for (auto& v : a.pixels) v = uniform01(rng);
    for (auto& v : b.pixels) v = uniform01(rng);
    const auto g = dssim_with_grad(a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); i += 7) {
      Image p = a, q = a;
      p.pixels[i] += 1e-4;
      q.pixels[i] -= 1e-4;
      const double fd = (dssim(p, b) - dssim(q, b)) / 2e-4;
      const double diff = std::abs(fd - g.grad[i]);
      if (diff > 1e-9) worst = std::max(worst, diff / std::max(std::abs(fd), std::abs(g.grad[i])));
    }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("fd_check rejects bad steps and catches corrupted gradients") {
  auto scene = fixtures::random_grad_scene(2);
  const auto cfg = small_window_loss();
  CHECK_THROWS_AS(fd_check(scene.model, scene.batch, cfg, 0.0, 10), Error);
  auto bw = backward(scene.model, scene.batch, cfg);
  bw.grads[ParamGroup::Color] *= 1.5;
  const auto bad = fd_check(scene.model, scene.batch, cfg, 1e-4, 100000, 0, bw.grads);
  CHECK(bad.max_relative_error > 1e-3);
  CHECK(bad.worst_group == ParamGroup::Color);
}
