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


#include "screwsplat/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace screwsplat {

namespace {

constexpr int kMaxDim = 6;
constexpr int kLengthGrid = 25;

double radical_inverse(int i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

VecX from_unit(const VecX& u, const SearchSpace& s) { return s.lo + u.cwiseProduct(s.hi - s.lo); }

}  // namespace

void SearchSpace::validate() const {
  if (lo.size() != hi.size()) throw Error(Errc::DegenerateSpace, "search bounds differ in size");
  if (lo.size() < 1 || lo.size() > kMaxDim) throw Error(Errc::DegenerateSpace, "search space needs 1 to 6 dimensions");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) throw Error(Errc::DegenerateSpace, "search interval " + std::to_string(j) + " is empty");
  }
}

GaussianProcess::GaussianProcess(double length_scale, double signal_variance, double noise)
    : length_scale_(length_scale), signal_variance_(signal_variance), noise_(noise) {}

double GaussianProcess::kernel(const VecX& a, const VecX& b) const {
  return signal_variance_ * std::exp(-0.5 * (a - b).squaredNorm() / (length_scale_ * length_scale_));
}

void GaussianProcess::fit(const std::vector<VecX>& xs, const VecX& ys) {
  const int n = static_cast<int>(xs.size());
  if (n == 0 || ys.size() != n) throw Error(Errc::ShapeMismatch, "GP needs matching, nonempty data");
  xs_ = xs;
  MatX k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(xs[i], xs[j]);
  k.diagonal().array() += noise_ * signal_variance_ + 1e-12;
  chol_.compute(k);
  if (chol_.info() != Eigen::Success) throw Error(Errc::NonFiniteLoss, "GP kernel matrix is not positive definite");
  alpha_ = chol_.solve(ys);
  const MatX l = chol_.matrixL();
  lml_ = -0.5 * ys.dot(alpha_) - l.diagonal().array().log().sum() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::pair<double, double> GaussianProcess::predict(const VecX& x) const {
  const int n = static_cast<int>(xs_.size());
  VecX ks(n);
  for (int i = 0; i < n; ++i) ks[i] = kernel(x, xs_[i]);
  const double mean = ks.dot(alpha_);
  const VecX v = chol_.matrixL().solve(ks);
  const double var = std::max(0.0, signal_variance_ - v.squaredNorm());
  return {mean, var};
}

GaussianProcess fit_gp(const std::vector<VecX>& xs, const VecX& ys, double noise) {
  const int n = static_cast<int>(xs.size());
  GaussianProcess best(1.0, 1.0, noise);
  double best_lml = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < kLengthGrid; ++g) {
    const double ell = std::pow(10.0, -2.0 + 3.0 * g / (kLengthGrid - 1));  // 0.01 .. 10 in unit-box units
    GaussianProcess unit(ell, 1.0, noise);
    unit.fit(xs, ys);
    // Closed-form signal variance for this length scale.
    const double s2 = std::max(ys.dot(unit.weights()), 1e-12) / n;
    GaussianProcess gp(ell, s2, noise);
    gp.fit(xs, ys);
    if (gp.log_marginal_likelihood() > best_lml) {
      best_lml = gp.log_marginal_likelihood();
      best = gp;
    }
  }
  return best;
}

double expected_improvement(double mean, double stddev, double best) {
  const double gain = best - mean;
  if (stddev <= 0.0) return std::max(gain, 0.0);
  const double z = gain / stddev;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + stddev * pdf);
}

std::vector<VecX> halton(int n, int dim, int offset) {
  static constexpr int kPrimes[kMaxDim] = {2, 3, 5, 7, 11, 13};
  if (dim < 1 || dim > kMaxDim) throw Error(Errc::DegenerateSpace, "halton supports 1 to 6 dimensions");
  std::vector<VecX> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    VecX p(dim);
    for (int d = 0; d < dim; ++d) p[d] = radical_inverse(offset + i + 1, kPrimes[d]);
    out.push_back(p);
  }
  return out;
}

BoResult bayes_opt(const std::function<double(const VecX&)>& objective, const SearchSpace& space,
                   const BoConfig& cfg) {
  space.validate();
  if (cfg.n_random < 1 || cfg.n_random >= cfg.n_calls)
    throw Error(Errc::InvalidConfig, "bayes_opt needs 1 <= n_random < n_calls");
  if (cfg.n_candidates < 1) throw Error(Errc::InvalidConfig, "bayes_opt needs candidates");
  const int dim = space.dim();
  Rng rng(cfg.seed);
  BoResult res;
  std::vector<VecX> unit_xs;
  auto evaluate = [&](const VecX& u) {
    const VecX x = from_unit(u, space);
    const double y = objective(x);
    if (!std::isfinite(y)) throw Error(Errc::NonFiniteLoss, "objective returned a non-finite value");
    unit_xs.push_back(u);
    res.xs.push_back(x);
    res.ys.push_back(y);
  };

  for (int i = 0; i < cfg.n_random; ++i) {
    VecX u(dim);
    for (int d = 0; d < dim; ++d) u[d] = uniform01(rng);
    evaluate(u);
  }
  const std::vector<VecX> base = halton(cfg.n_candidates, dim);
  for (int call = cfg.n_random; call < cfg.n_calls; ++call) {
    const VecX y = Eigen::Map<const VecX>(res.ys.data(), static_cast<Eigen::Index>(res.ys.size()));
    const double mu = y.mean();
    const double sd = std::sqrt((y.array() - mu).square().mean());
    const double scale = sd > 1e-12 ? sd : 1.0;
    const VecX ystd = (y.array() - mu) / scale;
    const GaussianProcess gp = fit_gp(unit_xs, ystd, cfg.noise);
    const double best = ystd.minCoeff();

    // Random shift of the low-discrepancy set so successive calls probe new points.
    VecX shift(dim);
    for (int d = 0; d < dim; ++d) shift[d] = uniform01(rng);
    double best_ei = -1.0;
    VecX pick;
    for (const auto& b : base) {
      VecX u = b + shift;
      for (int d = 0; d < dim; ++d) u[d] -= std::floor(u[d]);
      const auto [m, v] = gp.predict(u);
      const double ei = expected_improvement(m, std::sqrt(v), best);
      if (ei > best_ei) {
        best_ei = ei;
        pick = u;
      }
    }
    evaluate(pick);
  }
  const auto it = std::min_element(res.ys.begin(), res.ys.end());
  const auto idx = static_cast<std::size_t>(it - res.ys.begin());
  res.best_x = res.xs[idx];
  res.best_value = *it;
  return res;
}

}  // namespace screwsplat
