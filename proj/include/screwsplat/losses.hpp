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

#include <vector>

#include "screwsplat/render.hpp"

namespace screwsplat {

struct LossConfig {
  double lambda = 0.2;
  double beta = 0.002;
  int ssim_window = 11;
  double ssim_sigma = 1.5;

  void validate() const;
};

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

double l1(const Image& a, const Image& b);

/// Mean SSIM over the valid (unpadded) window positions, averaged over channels.
double ssim(const Image& a, const Image& b, int window = 11, double sigma = 1.5);

/// (1 - SSIM) / 2.
double dssim(const Image& a, const Image& b, int window = 11, double sigma = 1.5);

double render_loss(const Image& rendered, const Image& target, const LossConfig& cfg);

/// beta * sum sqrt(gamma).
double parsimony(const std::vector<double>& gammas, double beta);

/// Value and gradient with respect to the first argument.
struct ImageLossGrad {
  double value = 0.0;
  std::vector<double> grad;  // same layout as Image::pixels
};

ImageLossGrad l1_with_grad(const Image& rendered, const Image& target);
ImageLossGrad dssim_with_grad(const Image& rendered, const Image& target, int window = 11, double sigma = 1.5);
ImageLossGrad render_loss_with_grad(const Image& rendered, const Image& target, const LossConfig& cfg);

/// d(beta sqrt(sigmoid(l)))/dl.
double parsimony_logit_grad(double confidence_logit, double beta);

/// Normalized 1-d Gaussian window.
std::vector<double> gaussian_window(int size, double sigma);

}  // namespace screwsplat
