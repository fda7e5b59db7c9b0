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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "screwsplat/losses.hpp"
#include "screwsplat/model.hpp"
#include "screwsplat/render.hpp"

namespace screwsplat {

enum class ParamGroup : int {
  Position,
  Rotation,
  LogScale,
  OpacityLogit,
  Color,
  PartLogits,
  RawAxis,
  ConfidenceLogit,
  Theta,
};
inline constexpr int kParamGroupCount = 9;

const char* to_string(ParamGroup g);

/// One flat buffer per parameter group. Layouts are row-major per item:
/// Position/LogScale/Color 3*i+c, Rotation 4*i+c, OpacityLogit i,
/// PartLogits i*(n_s+1)+j, RawAxis 6*j+c, ConfidenceLogit j, Theta k*n_s+j.
struct ParamSet {
  std::array<VecX, kParamGroupCount> groups;

  VecX& operator[](ParamGroup g) { return groups[static_cast<int>(g)]; }
  const VecX& operator[](ParamGroup g) const { return groups[static_cast<int>(g)]; }
  bool all_finite() const;
  std::size_t total_size() const;
};
using ParamGradients = ParamSet;

ParamSet pack(const ArticulatedSplatModel& model);
VecX pack(const ArticulatedSplatModel& model, ParamGroup group);
void unpack(ArticulatedSplatModel& model, ParamGroup group, const VecX& values);
ParamSet zeros_like(const ArticulatedSplatModel& model);

struct BatchItem {
  int config = 0;
  Camera camera;
  const Image* target = nullptr;
};

struct LossBreakdown {
  double total = 0.0;
  double render = 0.0;
  double parsimony = 0.0;
};

struct BackwardResult {
  LossBreakdown loss;
  ParamGradients grads;
};

/// Loss sum_batch L_render + beta sum_j sqrt(gamma_j) and its gradient
/// with respect to every parameter group. Throws NonFiniteLoss.
BackwardResult backward(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg);

LossBreakdown evaluate_loss(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg);

struct FdReport {
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  ParamGroup worst_group = ParamGroup::Position;
  int worst_index = -1;
  int checked = 0;
};

/// Central differences on `sample` randomly chosen scalar parameters
/// (all of them when sample >= the parameter count). Entries whose absolute
/// discrepancy is at most `abs_floor` count as exact.
FdReport fd_check(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg,
                  double h, int sample, std::uint64_t seed, const ParamGradients& analytic, double abs_floor = 1e-6);
FdReport fd_check(const ArticulatedSplatModel& model, std::span<const BatchItem> batch, const LossConfig& cfg,
                  double h, int sample, std::uint64_t seed = 0, double abs_floor = 1e-6);

}  // namespace screwsplat
