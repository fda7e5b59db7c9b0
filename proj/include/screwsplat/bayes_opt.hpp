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

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>

#include "screwsplat/types.hpp"

namespace screwsplat {

struct SearchSpace {
  VecX lo;
  VecX hi;

  int dim() const { return static_cast<int>(lo.size()); }
  /// Throws DegenerateSpace on empty, oversized or zero-width boxes.
  void validate() const;
};

/// Zero-mean GP with an isotropic RBF kernel on inputs scaled to the unit box.
class GaussianProcess {
 public:
  GaussianProcess(double length_scale, double signal_variance, double noise);

  void fit(const std::vector<VecX>& xs, const VecX& ys);
  /// (mean, variance) at x.
  std::pair<double, double> predict(const VecX& x) const;
  double log_marginal_likelihood() const { return lml_; }
  /// K^{-1} y of the last fit.
  const VecX& weights() const { return alpha_; }

  double kernel(const VecX& a, const VecX& b) const;

 private:
  double length_scale_, signal_variance_, noise_;
  std::vector<VecX> xs_;
  Eigen::LLT<MatX> chol_;
  VecX alpha_;
  double lml_ = 0.0;
};

/// Fits length scale (log grid) and signal variance (closed form) by maximum likelihood.
GaussianProcess fit_gp(const std::vector<VecX>& xs, const VecX& ys, double noise);

/// Expected improvement below `best` for a Gaussian prediction.
double expected_improvement(double mean, double stddev, double best);

/// Points of the Halton sequence in [0,1)^dim starting at `offset`.
std::vector<VecX> halton(int n, int dim, int offset = 0);

struct BoConfig {
  int n_calls = 50;
  int n_random = 10;
  int n_candidates = 2048;
  double noise = 1e-6;
  std::uint64_t seed = 0;
};

struct BoResult {
  VecX best_x;
  double best_value = 0.0;
  std::vector<VecX> xs;
  std::vector<double> ys;
};

/// Minimizes `objective` over the box. The returned point is always one
/// that was evaluated.
BoResult bayes_opt(const std::function<double(const VecX&)>& objective, const SearchSpace& space,
                   const BoConfig& cfg = {});

}  // namespace screwsplat
