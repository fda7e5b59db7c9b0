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
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "screwsplat/gradients.hpp"
#include "screwsplat/model.hpp"
#include "screwsplat/scene_synth.hpp"

namespace screwsplat {

struct FitConfig {
  int iterations = 30000;

  double lr_position = 1.6e-4;
  double lr_position_final = 1.6e-6;
  double lr_rotation = 1e-3;
  double lr_scale = 5e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  double lr_part_logits = 0.1;
  double lr_raw_axis = 3e-3;
  double lr_confidence_logit = 1e-2;
  double lr_theta = 1e-2;

  int reset_interval = 2500;
  int opacity_reset_interval = 3000;
  int selection_iteration = -1;  // < 0 means 0.8 * iterations

  double confidence_threshold = 0.1;
  double interval_threshold_revolute = 0.1;
  double interval_threshold_prismatic = 0.03;
  double reset_confidence = 0.9;
  double opacity_reset_value = 0.05;
  double prune_opacity = 0.005;

  LossConfig loss;
  InitConfig init;
  std::uint64_t seed = 0;

  int selection_at() const { return selection_iteration < 0 ? (iterations * 4) / 5 : selection_iteration; }
  /// Throws InvalidConfig.
  void validate() const;
};

/// Settings for small synthetic scenes (64x64 views, a few thousand Gaussians):
/// shorter schedule, faster position rate and reset periods of 500 and 700.
FitConfig desk_fit_config(int iterations = 6000);

struct LossRecord {
  int iteration = 0;
  LossBreakdown loss;
  int active_screws = 0;
  int gaussians = 0;
};

struct TrainState {
  int iteration = 0;
  ParamSet first_moment;
  ParamSet second_moment;
  std::array<int, kParamGroupCount> steps{};
  Rng rng;
  std::deque<LossRecord> history;
  std::size_t history_capacity = 4096;
};

TrainState make_train_state(const ArticulatedSplatModel& model, std::uint64_t seed);

/// Learning rate of a group at the state's iteration (position decays exponentially).
double learning_rate(const FitConfig& cfg, ParamGroup group, int iteration);

/// One adaptive-moment step on the batch, followed by quaternion and axis
/// renormalization and color clamping. Returns the pre-step loss.
LossBreakdown train_step(ArticulatedSplatModel& model, TrainState& state, std::span<const BatchItem> batch,
                         const FitConfig& cfg);

/// Confidence and part logits back to their initial values, after re-basing
/// every Gaussian onto a randomly chosen configuration.
void periodic_reset(ArticulatedSplatModel& model, TrainState& state, double reset_confidence = 0.9);

struct SelectionReport {
  std::vector<int> removed_low_confidence;
  std::vector<int> removed_short_interval;
  int removed_gaussians = 0;
};

/// Drops screws with low confidence or a joint-angle range below the type
/// threshold. Moment buffers in `state` (if given) follow the pruning.
SelectionReport select_screws(ArticulatedSplatModel& model, TrainState* state, const FitConfig& cfg);

/// Clamps every opacity to at most `value`; returns how many changed.
int opacity_reset(ArticulatedSplatModel& model, double value = 0.05);

/// Removes Gaussians with opacity below `threshold`; returns how many went.
int prune_transparent(ArticulatedSplatModel& model, TrainState* state, double threshold);

/// Prunes model and moment buffers together with the same masks.
void prune_with_state(ArticulatedSplatModel& model, TrainState* state, const std::vector<bool>& keep_gaussian,
                      const std::vector<bool>& keep_screw);

struct FitHooks {
  std::function<void(const LossRecord&)> on_log;
  int log_interval = 100;
  std::function<void(const ArticulatedSplatModel&, int)> on_checkpoint;
  int checkpoint_interval = 0;
  /// Where the model is dumped before a NonFiniteLoss propagates (empty = no dump).
  std::string failure_dump_path;
};

struct FitResult {
  ArticulatedSplatModel model;
  std::vector<LossRecord> history;
  SelectionReport selection;
};

/// Full procedure: init, optimization with periodic and opacity resets,
/// screw selection, fine-tuning and a final validator pass.
FitResult fit(const std::vector<Observation>& observations, int num_configs, const FitConfig& cfg,
              const FitHooks& hooks = {});
FitResult fit(const Dataset& dataset, const FitConfig& cfg, const FitHooks& hooks = {});

}  // namespace screwsplat
