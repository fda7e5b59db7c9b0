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

#include "screwsplat/losses.hpp"

#include <cmath>

namespace screwsplat {

namespace {

void check_pair(const Image& a, const Image& b) {
  if (!a.same_shape(b) || a.pixels.size() != b.pixels.size())
    throw Error(Errc::ShapeMismatch, "images differ in size");
}

// Single-channel planar buffer.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane channel(const Image& img, int c) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) p(x, y) = img.at(x, y, c);
  return p;
}

// Separable "valid" correlation with window k.
Plane filter_valid(const Plane& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.w - n + 1, oh = in.h - n + 1;
  Plane tmp(ow, in.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * in(x + i, y);
      tmp(x, y) = s;
    }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * tmp(x, y + i);
      out(x, y) = s;
    }
  return out;
}

// Adjoint of filter_valid.
Plane filter_valid_adjoint(const Plane& g, const std::vector<double>& k, int w, int h) {
  const int n = static_cast<int>(k.size());
  Plane tmp(g.w, h);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x)
      for (int i = 0; i < n; ++i) tmp(x, y + i) += k[i] * g(x, y);
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < g.w; ++x)
      for (int i = 0; i < n; ++i) out(x + i, y) += k[i] * tmp(x, y);
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.w, a.h);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Mean SSIM over channels, optionally with its gradient w.r.t. `a`.
double ssim_impl(const Image& a, const Image& b, int window, double sigma, std::vector<double>* grad) {
  check_pair(a, b);
  if (window < 1 || window % 2 == 0) throw Error(Errc::InvalidConfig, "SSIM window must be odd");
  if (a.width < window || a.height < window) throw Error(Errc::TooSmall, "image smaller than SSIM window");
  const auto k = gaussian_window(window, sigma);
  const int ow = a.width - window + 1, oh = a.height - window + 1;
  const double norm = 1.0 / (3.0 * ow * oh);
  if (grad) grad->assign(a.pixels.size(), 0.0);

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Plane x = channel(a, c), y = channel(b, c);
    const Plane mx = filter_valid(x, k), my = filter_valid(y, k);
    const Plane exx = filter_valid(product(x, x), k), eyy = filter_valid(product(y, y), k);
    const Plane exy = filter_valid(product(x, y), k);
    Plane g_mu(ow, oh), g_xx(ow, oh), g_xy(ow, oh);
    for (std::size_t p = 0; p < mx.v.size(); ++p) {
      const double ux = mx.v[p], uy = my.v[p];
      const double vx = exx.v[p] - ux * ux, vy = eyy.v[p] - uy * uy, cxy = exy.v[p] - ux * uy;
      const double a1 = 2.0 * ux * uy + kSsimC1, a2 = 2.0 * cxy + kSsimC2;
      const double b1 = ux * ux + uy * uy + kSsimC1, b2 = vx + vy + kSsimC2;
      const double s = (a1 * a2) / (b1 * b2);
      total += s;
      if (grad) {
        const double da1 = 2.0 * uy, da2 = -2.0 * uy, db1 = 2.0 * ux, db2 = -2.0 * ux;
        g_mu.v[p] = norm * ((da1 * a2 + a1 * da2) / (b1 * b2) - s * (db1 * b2 + b1 * db2) / (b1 * b2));
        g_xx.v[p] = norm * (-s / b2);
        g_xy.v[p] = norm * (2.0 * a1 / (b1 * b2));
      }
    }
    if (grad) {
      const Plane t_mu = filter_valid_adjoint(g_mu, k, a.width, a.height);
      const Plane t_xx = filter_valid_adjoint(g_xx, k, a.width, a.height);
      const Plane t_xy = filter_valid_adjoint(g_xy, k, a.width, a.height);
      for (int yy = 0; yy < a.height; ++yy)
        for (int xx = 0; xx < a.width; ++xx)
          (*grad)[(static_cast<std::size_t>(yy) * a.width + xx) * 3 + c] =
              t_mu(xx, yy) + 2.0 * x(xx, yy) * t_xx(xx, yy) + y(xx, yy) * t_xy(xx, yy);
    }
  }
  return total * norm;
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::InvalidConfig, "lambda must lie in [0, 1]");
  if (!(beta >= 0.0)) throw Error(Errc::InvalidConfig, "beta must be non-negative");
  if (ssim_window < 1 || ssim_window % 2 == 0) throw Error(Errc::InvalidConfig, "SSIM window must be odd");
  if (!(ssim_sigma > 0.0)) throw Error(Errc::InvalidConfig, "SSIM sigma must be positive");
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> k(size);
  const int half = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

double l1(const Image& a, const Image& b) {
  check_pair(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return a.pixels.empty() ? 0.0 : s / static_cast<double>(a.pixels.size());
}

double ssim(const Image& a, const Image& b, int window, double sigma) {
  return ssim_impl(a, b, window, sigma, nullptr);
}

double dssim(const Image& a, const Image& b, int window, double sigma) {
  return 0.5 * (1.0 - ssim(a, b, window, sigma));
}

double render_loss(const Image& rendered, const Image& target, const LossConfig& cfg) {
  double value = 0.0;
  if (cfg.lambda < 1.0) value += (1.0 - cfg.lambda) * l1(rendered, target);
  if (cfg.lambda > 0.0) value += cfg.lambda * dssim(rendered, target, cfg.ssim_window, cfg.ssim_sigma);
  return value;
}

double parsimony(const std::vector<double>& gammas, double beta) {
  double s = 0.0;
  for (double g : gammas) s += std::sqrt(g);
  return beta * s;
}

double parsimony_logit_grad(double confidence_logit, double beta) {
  const double g = sigmoid(confidence_logit);
  return beta * 0.5 / std::sqrt(g) * g * (1.0 - g);
}

ImageLossGrad l1_with_grad(const Image& rendered, const Image& target) {
  check_pair(rendered, target);
  ImageLossGrad out;
  out.grad.assign(rendered.pixels.size(), 0.0);
  const double n = static_cast<double>(rendered.pixels.size());
  for (std::size_t i = 0; i < rendered.pixels.size(); ++i) {
    const double d = rendered.pixels[i] - target.pixels[i];
    out.value += std::abs(d);
    out.grad[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  out.value /= n;
  return out;
}

ImageLossGrad dssim_with_grad(const Image& rendered, const Image& target, int window, double sigma) {
  ImageLossGrad out;
  const double s = ssim_impl(rendered, target, window, sigma, &out.grad);
  out.value = 0.5 * (1.0 - s);
  for (double& g : out.grad) g *= -0.5;
  return out;
}

ImageLossGrad render_loss_with_grad(const Image& rendered, const Image& target, const LossConfig& cfg) {
  ImageLossGrad out;
  out.grad.assign(rendered.pixels.size(), 0.0);
  if (cfg.lambda < 1.0) {
    auto a = l1_with_grad(rendered, target);
    out.value += (1.0 - cfg.lambda) * a.value;
    for (std::size_t i = 0; i < a.grad.size(); ++i) out.grad[i] += (1.0 - cfg.lambda) * a.grad[i];
  }
  if (cfg.lambda > 0.0) {
    auto b = dssim_with_grad(rendered, target, cfg.ssim_window, cfg.ssim_sigma);
    out.value += cfg.lambda * b.value;
    for (std::size_t i = 0; i < b.grad.size(); ++i) out.grad[i] += cfg.lambda * b.grad[i];
  }
  return out;
}

}  // namespace screwsplat
