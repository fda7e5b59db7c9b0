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


#include "screwsplat/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "screwsplat/serialization.hpp"

namespace screwsplat {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-15;

constexpr std::array<ParamGroup, kParamGroupCount> kAllGroups = {
    ParamGroup::Position,  ParamGroup::Rotation, ParamGroup::LogScale,        ParamGroup::OpacityLogit, ParamGroup::Color,
    ParamGroup::PartLogits, ParamGroup::RawAxis, ParamGroup::ConfidenceLogit, ParamGroup::Theta};

void zero_group(TrainState& state, ParamGroup g) {
  state.first_moment[g].setZero();
  state.second_moment[g].setZero();
  state.steps[static_cast<int>(g)] = 0;
}

void renormalize(ArticulatedSplatModel& model) {
  for (auto& g : model.gaussians) {
    const double n = g.rotation.norm();
    g.rotation = n > 0.0 ? Vec4(g.rotation / n) : Vec4(1, 0, 0, 0);
    g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
  }
  for (auto& s : model.screws) {
    auto part = s.joint_type == JointType::Revolute ? s.raw_axis.head<3>() : s.raw_axis.tail<3>();
    const double n = part.norm();
    if (n < kAxisNormFloor) throw Error(Errc::DegenerateAxis, "screw axis collapsed during optimization");
    part /= n;
  }
}

// Applies T <- exp([S] theta) T to one Gaussian.
void rebase(PartAwareGaussian& g, const ScrewAxisd& axis, double theta) {
  const RigidTransformd motion = screw_exp(axis, theta);
  const RigidTransformd posed = motion * g.pose();
  g.position = posed.translation;
  const Eigen::Quaterniond q(posed.rotation);
  g.rotation = Vec4(q.w(), q.x(), q.y(), q.z());
}

}  // namespace

void FitConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (iterations < 1) bad("iterations must be positive");
  if (reset_interval < 1 || opacity_reset_interval < 1) bad("reset intervals must be positive");
  if (reset_interval == opacity_reset_interval || opacity_reset_interval % reset_interval == 0 ||
      reset_interval % opacity_reset_interval == 0) {
    bad("reset_interval and opacity_reset_interval must not be multiples of each other");
  }
  if (confidence_threshold <= 0.0 || interval_threshold_revolute <= 0.0 || interval_threshold_prismatic <= 0.0)
    bad("selection thresholds must be positive");
  for (double lr : {lr_position, lr_position_final, lr_rotation, lr_scale, lr_opacity, lr_color, lr_part_logits,
                    lr_raw_axis, lr_confidence_logit, lr_theta}) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) bad("learning rates must be finite and non-negative");
  }
  if (!(reset_confidence > 0.0 && reset_confidence < 1.0)) bad("reset_confidence must lie in (0, 1)");
  if (!(opacity_reset_value > 0.0 && opacity_reset_value < 1.0)) bad("opacity_reset_value must lie in (0, 1)");
  if (init.num_gaussians < 1) bad("need at least one Gaussian");
  loss.validate();
}

FitConfig desk_fit_config(int iterations) {
  FitConfig cfg;
  cfg.iterations = iterations;
  cfg.init.num_gaussians = 2000;
  cfg.lr_position = 1.6e-3;
  cfg.lr_position_final = 1.6e-5;
  cfg.reset_interval = 500;
  cfg.opacity_reset_interval = 700;
  return cfg;
}

TrainState make_train_state(const ArticulatedSplatModel& model, std::uint64_t seed) {
  TrainState s;
  s.first_moment = zeros_like(model);
  s.second_moment = zeros_like(model);
  s.rng.seed(seed);
  return s;
}

double learning_rate(const FitConfig& cfg, ParamGroup group, int iteration) {
  switch (group) {
    case ParamGroup::Position: {
      const double t = std::clamp(static_cast<double>(iteration) / cfg.iterations, 0.0, 1.0);
      if (cfg.lr_position <= 0.0 || cfg.lr_position_final <= 0.0) return cfg.lr_position;
      return std::exp((1.0 - t) * std::log(cfg.lr_position) + t * std::log(cfg.lr_position_final));
    }
    case ParamGroup::Rotation: return cfg.lr_rotation;
    case ParamGroup::LogScale: return cfg.lr_scale;
    case ParamGroup::OpacityLogit: return cfg.lr_opacity;
    case ParamGroup::Color: return cfg.lr_color;
    case ParamGroup::PartLogits: return cfg.lr_part_logits;
    case ParamGroup::RawAxis: return cfg.lr_raw_axis;
    case ParamGroup::ConfidenceLogit: return cfg.lr_confidence_logit;
    case ParamGroup::Theta: return cfg.lr_theta;
  }
  return 0.0;
}

LossBreakdown train_step(ArticulatedSplatModel& model, TrainState& state, std::span<const BatchItem> batch,
                         const FitConfig& cfg) {
  const BackwardResult res = backward(model, batch, cfg.loss);
  for (ParamGroup g : kAllGroups) {
    VecX& m1 = state.first_moment[g];
    VecX& m2 = state.second_moment[g];
    const VecX& grad = res.grads[g];
    if (grad.size() == 0) continue;
    if (m1.size() != grad.size()) throw Error(Errc::ShapeMismatch, "moment buffers out of sync with the model");
    int& t = state.steps[static_cast<int>(g)];
    ++t;
    m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
    m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    const double lr = learning_rate(cfg, g, state.iteration);
    VecX values = pack(model, g);
    values.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + kAdamEps);
    unpack(model, g, values);
  }
  renormalize(model);
  ++state.iteration;
  return res.loss;
}

void periodic_reset(ArticulatedSplatModel& model, TrainState& state, double reset_confidence) {
  const int ns = model.num_screws();
  const int na = model.num_configs();
  if (na > 0 && ns > 0) {
    const int m = uniform_index(state.rng, na);
    std::vector<ScrewAxisd> axes;
    for (const auto& s : model.screws) axes.push_back(s.axis());
    const VecX anchor = model.joint_angles[m];
    for (auto& g : model.gaussians) {
      const int j = g.dominant_part();
      if (j > 0) rebase(g, axes[j - 1], anchor[j - 1]);
    }
    for (auto& th : model.joint_angles) th -= anchor;
    model.joint_angles[m].setZero();
  }
  for (auto& s : model.screws) s.confidence_logit = logit(reset_confidence);
  for (auto& g : model.gaussians) g.part_logits.setZero();
  if (state.first_moment[ParamGroup::ConfidenceLogit].size() == ns) {
    zero_group(state, ParamGroup::ConfidenceLogit);
    zero_group(state, ParamGroup::PartLogits);
  }
}

void prune_with_state(ArticulatedSplatModel& model, TrainState* state, const std::vector<bool>& keep_gaussian,
                      const std::vector<bool>& keep_screw) {
  if (state != nullptr) {
    for (ParamSet* buf : {&state->first_moment, &state->second_moment}) {
      ArticulatedSplatModel shadow = model;
      for (ParamGroup g : kAllGroups) unpack(shadow, g, (*buf)[g]);
      prune(shadow, keep_gaussian, keep_screw);
      *buf = pack(shadow);
    }
  }
  prune(model, keep_gaussian, keep_screw);
}

SelectionReport select_screws(ArticulatedSplatModel& model, TrainState* state, const FitConfig& cfg) {
  SelectionReport rep;
  const int ns = model.num_screws();
  const int ng = model.num_gaussians();
  std::vector<bool> keep_screw(ns, true);
  std::vector<bool> keep_gaussian(ng, true);
  std::vector<bool> merge(ns, false);
  for (int j = 0; j < ns; ++j) {
    const ScrewPrimitive& s = model.screws[j];
    if (s.confidence() < cfg.confidence_threshold) {
      keep_screw[j] = false;
      rep.removed_low_confidence.push_back(j);
      continue;
    }
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < model.num_configs(); ++k) {
      const double t = model.joint_angles[k][j];
      lo = k == 0 ? t : std::min(lo, t);
      hi = k == 0 ? t : std::max(hi, t);
    }
    const double threshold =
        s.joint_type == JointType::Revolute ? cfg.interval_threshold_revolute : cfg.interval_threshold_prismatic;
    if (hi - lo < threshold) {
      keep_screw[j] = false;
      merge[j] = true;
      rep.removed_short_interval.push_back(j);
    }
  }
  if (rep.removed_low_confidence.empty() && rep.removed_short_interval.empty()) return rep;

  Rng fallback(cfg.seed);
  Rng& rng = state != nullptr ? state->rng : fallback;
  std::vector<double> rebase_theta(ns, 0.0);
  for (int j = 0; j < ns; ++j) {
    if (merge[j] && model.num_configs() > 0) {
      rebase_theta[j] = model.joint_angles[uniform_index(rng, model.num_configs())][j];
    }
  }

  std::vector<double> gamma(ns);
  for (int j = 0; j < ns; ++j) gamma[j] = model.screws[j].confidence();
  for (int i = 0; i < ng; ++i) {
    PartAwareGaussian& g = model.gaussians[i];
    const int dom = g.dominant_part();
    const VecX p = g.part_probabilities();
    if (dom > 0 && !keep_screw[dom - 1] && !merge[dom - 1] && p[dom] > 0.5) {
      keep_gaussian[i] = false;
      ++rep.removed_gaussians;
      continue;
    }
    if (dom > 0 && merge[dom - 1]) rebase(g, model.screws[dom - 1].axis(), rebase_theta[dom - 1]);
    // Redistribute rendered mass so every surviving replica keeps its opacity:
    // a merged screw's replica folds into the static one, a dropped screw's
    // replica was invisible anyway. The opacity absorbs the lost mass.
    VecX w = p;
    for (int j = 0; j < ns; ++j) {
      if (merge[j]) w[0] += gamma[j] * p[j + 1];
      if (!keep_screw[j]) w[j + 1] = 0.0;
    }
    const double total = w.sum();
    for (Eigen::Index l = 0; l < w.size(); ++l) g.part_logits[l] = std::log(std::max(w[l] / total, 1e-300));
    g.opacity_logit = logit(std::clamp(g.opacity() * total, 1e-12, 1.0 - 1e-12));
  }
  prune_with_state(model, state, keep_gaussian, keep_screw);
  return rep;
}

int opacity_reset(ArticulatedSplatModel& model, double value) {
  const double cap = logit(value);
  int changed = 0;
  for (auto& g : model.gaussians) {
    if (g.opacity_logit > cap) {
      g.opacity_logit = cap;
      ++changed;
    }
  }
  return changed;
}

int prune_transparent(ArticulatedSplatModel& model, TrainState* state, double threshold) {
  std::vector<bool> keep(model.gaussians.size(), true);
  int removed = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (model.gaussians[i].opacity() < threshold) {
      keep[i] = false;
      ++removed;
    }
  }
  if (removed == static_cast<int>(keep.size())) return 0;  // never empty the model
  if (removed > 0) prune_with_state(model, state, keep, std::vector<bool>(model.screws.size(), true));
  return removed;
}

FitResult fit(const std::vector<Observation>& observations, int num_configs, const FitConfig& cfg,
              const FitHooks& hooks) {
  cfg.validate();
  if (num_configs < 2) throw Error(Errc::InvalidConfig, "fitting needs at least two configurations");
  std::vector<int> per_config(num_configs, 0);
  for (const auto& o : observations) {
    if (o.config_index < 0 || o.config_index >= num_configs)
      throw Error(Errc::InvalidConfig, "observation references an unknown configuration");
    ++per_config[o.config_index];
  }
  for (int c : per_config) {
    if (c < 4) throw Error(Errc::InvalidConfig, "every configuration needs at least four views");
  }

  InitConfig init = cfg.init;
  init.num_configs = num_configs;
  FitResult out;
  out.model = init_model(init, cfg.seed);
  ArticulatedSplatModel& model = out.model;
  TrainState state = make_train_state(model, cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL);

  const int selection = cfg.selection_at();
  bool selected = false;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const Observation& o = observations[uniform_index(state.rng, static_cast<int>(observations.size()))];
    const BatchItem item{o.config_index, o.camera, &o.image};
    LossBreakdown loss;
    try {
      loss = train_step(model, state, std::span<const BatchItem>(&item, 1), cfg);
    } catch (const Error& e) {
      if (e.code() == Errc::NonFiniteLoss && !hooks.failure_dump_path.empty()) {
        Json dump = to_json(model);
        dump["failure"] = {{"iteration", it}, {"config", o.config_index}, {"message", e.what()}};
        write_json(hooks.failure_dump_path, dump);
      }
      throw;
    }

    LossRecord rec{it, loss, static_cast<int>(rendered_screws(model).size()), model.num_gaussians()};
    state.history.push_back(rec);
    if (state.history.size() > state.history_capacity) state.history.pop_front();
    if (hooks.log_interval > 0 && it % hooks.log_interval == 0) {
      out.history.push_back(rec);
      if (hooks.on_log) hooks.on_log(rec);
    }

    if (it == selection && !selected) {
      out.selection = select_screws(model, &state, cfg);
      selected = true;
    } else if (!selected && it < cfg.iterations) {
      const bool part_reset = it % cfg.reset_interval == 0;
      if (part_reset) periodic_reset(model, state, cfg.reset_confidence);
      // Uniform part logits plus capped opacity would drop every replica below
      // the alpha floor, so the opacity reset yields when both fall together.
      if (!part_reset && it % cfg.opacity_reset_interval == 0) {
        prune_transparent(model, &state, cfg.prune_opacity);
        opacity_reset(model, cfg.opacity_reset_value);
        zero_group(state, ParamGroup::OpacityLogit);
      }
    }
    if (hooks.checkpoint_interval > 0 && hooks.on_checkpoint && it % hooks.checkpoint_interval == 0) {
      hooks.on_checkpoint(model, it);
    }
  }
  // Validator pass: the survivors must satisfy both selection criteria.
  const SelectionReport final_pass = select_screws(model, &state, cfg);
  for (int j : final_pass.removed_low_confidence) out.selection.removed_low_confidence.push_back(j);
  for (int j : final_pass.removed_short_interval) out.selection.removed_short_interval.push_back(j);
  out.selection.removed_gaussians += final_pass.removed_gaussians;
  return out;
}

FitResult fit(const Dataset& dataset, const FitConfig& cfg, const FitHooks& hooks) {
  return fit(dataset.observations, dataset.num_configs(), cfg, hooks);
}

}  // namespace screwsplat
