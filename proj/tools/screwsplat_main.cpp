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


// Command-line front end: synth, fit, render, eval, estimate, control, plan.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "screwsplat/control.hpp"
#include "screwsplat/image_io.hpp"
#include "screwsplat/metrics.hpp"
#include "screwsplat/scene_synth.hpp"
#include "screwsplat/serialization.hpp"
#include "screwsplat/trainer.hpp"

namespace fs = std::filesystem;
using namespace screwsplat;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kInput = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { Error, Warn, Info, Debug };

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
  std::string log_level = "info";
  LogLevel level = LogLevel::Info;
};

Globals g_globals;

void log(LogLevel lv, const std::string& msg) {
  if (lv > g_globals.level) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(lv)] << "] " << msg << '\n';
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::NonFiniteLoss:
    case Errc::SingularCovariance:
    case Errc::DegenerateAxis:
      return kNumeric;
    default:
      return kInput;
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "'");
    }
    if (used != item.size()) throw UsageError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

VecX to_vec(const std::vector<double>& v) {
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec3 parse_vec3(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 3) throw UsageError("expected three comma-separated numbers, got '" + s + "'");
  return {v[0], v[1], v[2]};
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("size must look like WxH");
  try {
    const int w = std::stoi(s.substr(0, x)), h = std::stoi(s.substr(x + 1));
    if (w < 1 || h < 1) throw UsageError("size must be positive");
    return {w, h};
  } catch (const std::invalid_argument&) {
    throw UsageError("size must look like WxH");
  }
}

fs::path out_path(const std::string& name) {
  fs::create_directories(g_globals.out_dir);
  return fs::path(g_globals.out_dir) / name;
}

void write_config(const std::string& command, Json cfg) {
  cfg["command"] = command;
  cfg["seed"] = g_globals.seed;
  cfg["out_dir"] = g_globals.out_dir;
  cfg["threads"] = g_globals.threads;
  cfg["log_level"] = g_globals.log_level;
  write_json(out_path("config.json"), cfg);
}

Json theta_json(const VecX& th) { return to_json(th); }

Json trajectory_json(const Trajectory& tr) {
  Json tips = Json::array(), poses = Json::array();
  for (const auto& p : tr.tip_points) tips.push_back(to_json(p));
  for (const auto& p : tr.gripper_poses) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)});
    poses.push_back({{"rotation", rows}, {"translation", to_json(p.translation)}});
  }
  return {{"affordance", to_json(tr.affordance)},
          {"theta_samples", tr.theta_samples},
          {"tip_points", tips},
          {"gripper_poses", poses}};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string preset, spec;
  int cameras = 8, configs = 5;
  std::string size = "64x64";
  double radius = 2.5, focal_scale = 1.25;
};

int run_synth(const SynthArgs& a) {
  if (a.preset.empty() == a.spec.empty()) throw UsageError("give exactly one of --preset or --spec");
  const ObjectSpec spec = a.preset.empty() ? object_spec_from_json(read_json(a.spec)) : object_preset(a.preset);
  DatasetOptions o;
  o.cameras = a.cameras;
  o.configs = a.configs;
  std::tie(o.width, o.height) = parse_size(a.size);
  o.radius = a.radius;
  o.focal_scale = a.focal_scale;
  if (o.cameras < 1 || o.configs < 1) throw UsageError("--cameras and --configs must be positive");
  const Dataset ds = build_dataset(spec, o, g_globals.seed);
  save_dataset(g_globals.out_dir, ds);
  save_model(out_path("gt_model.json"), ground_truth_model(ds));
  write_config("synth", {{"preset", a.preset}, {"spec", a.spec}, {"cameras", a.cameras}, {"configs", a.configs},
                         {"size", a.size}, {"radius", a.radius}, {"focal_scale", a.focal_scale}});
  log(LogLevel::Info, "wrote " + std::to_string(ds.observations.size()) + " training views and " +
                          std::to_string(ds.heldout.size()) + " held-out views to " + g_globals.out_dir);
  return kOk;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string dataset, out = "model.json";
  bool desk = false;
  std::optional<int> iters, gaussians, revolute, prismatic, reset_interval, opacity_reset_interval, selection_iter;
  std::optional<double> beta, lambda, lr_position, lr_position_final, lr_theta, lr_raw_axis, lr_confidence,
      lr_part_logits;
  int log_interval = 100, checkpoint_interval = 0;
};

Json fit_config_json(const FitConfig& c) {
  return {{"iterations", c.iterations},
          {"lr_position", c.lr_position},
          {"lr_position_final", c.lr_position_final},
          {"lr_rotation", c.lr_rotation},
          {"lr_scale", c.lr_scale},
          {"lr_opacity", c.lr_opacity},
          {"lr_color", c.lr_color},
          {"lr_part_logits", c.lr_part_logits},
          {"lr_raw_axis", c.lr_raw_axis},
          {"lr_confidence_logit", c.lr_confidence_logit},
          {"lr_theta", c.lr_theta},
          {"reset_interval", c.reset_interval},
          {"opacity_reset_interval", c.opacity_reset_interval},
          {"selection_iteration", c.selection_at()},
          {"confidence_threshold", c.confidence_threshold},
          {"interval_threshold_revolute", c.interval_threshold_revolute},
          {"interval_threshold_prismatic", c.interval_threshold_prismatic},
          {"beta", c.loss.beta},
          {"lambda", c.loss.lambda},
          {"num_gaussians", c.init.num_gaussians},
          {"num_revolute", c.init.num_revolute},
          {"num_prismatic", c.init.num_prismatic},
          {"seed", c.seed}};
}

int run_fit(const FitArgs& a) {
  const fs::path dir(a.dataset);
  if (!fs::exists(dir / "dataset.json")) throw Error(Errc::Io, "no dataset.json in " + a.dataset);
  const Dataset ds = load_dataset(dir);

  FitConfig cfg = a.desk ? desk_fit_config(a.iters.value_or(6000)) : FitConfig{};
  if (a.iters) cfg.iterations = *a.iters;
  if (a.gaussians) cfg.init.num_gaussians = *a.gaussians;
  if (a.revolute) cfg.init.num_revolute = *a.revolute;
  if (a.prismatic) cfg.init.num_prismatic = *a.prismatic;
  if (a.reset_interval) cfg.reset_interval = *a.reset_interval;
  if (a.opacity_reset_interval) cfg.opacity_reset_interval = *a.opacity_reset_interval;
  if (a.selection_iter) cfg.selection_iteration = *a.selection_iter;
  if (a.beta) cfg.loss.beta = *a.beta;
  if (a.lambda) cfg.loss.lambda = *a.lambda;
  if (a.lr_position) cfg.lr_position = *a.lr_position;
  if (a.lr_position_final) cfg.lr_position_final = *a.lr_position_final;
  if (a.lr_theta) cfg.lr_theta = *a.lr_theta;
  if (a.lr_raw_axis) cfg.lr_raw_axis = *a.lr_raw_axis;
  if (a.lr_confidence) cfg.lr_confidence_logit = *a.lr_confidence;
  if (a.lr_part_logits) cfg.lr_part_logits = *a.lr_part_logits;
  cfg.seed = g_globals.seed;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  Json echo = fit_config_json(cfg);
  echo["dataset"] = a.dataset;
  echo["desk"] = a.desk;
  write_config("fit", echo);

  std::ofstream csv(out_path("loss.csv"));
  csv << "iteration,total,render,parsimony,active_screws,gaussians\n";
  csv.precision(10);
  FitHooks hooks;
  hooks.log_interval = a.log_interval;
  hooks.on_log = [&](const LossRecord& r) {
    csv << r.iteration << ',' << r.loss.total << ',' << r.loss.render << ',' << r.loss.parsimony << ','
        << r.active_screws << ',' << r.gaussians << '\n';
    log(LogLevel::Debug, "iteration " + std::to_string(r.iteration) + " loss " + std::to_string(r.loss.total) +
                             " live screws " + std::to_string(r.active_screws));
  };
  hooks.failure_dump_path = out_path("failure_dump.json").string();
  if (a.checkpoint_interval > 0) {
    hooks.checkpoint_interval = a.checkpoint_interval;
    hooks.on_checkpoint = [](const ArticulatedSplatModel& m, int it) {
      save_model(out_path("checkpoint_" + std::to_string(it) + ".json"), m);
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  FitResult res;
  try {
    res = fit(ds, cfg, hooks);
  } catch (const Error& e) {
    if (e.code() == Errc::NonFiniteLoss) std::cerr << "state dumped to " << hooks.failure_dump_path << '\n';
    throw;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path model_path = fs::path(a.out).is_absolute() ? fs::path(a.out) : out_path(a.out);
  save_model(model_path, res.model);

  Json per_config = Json::array();
  for (int k = 0; k < ds.num_configs(); ++k) {
    double sum = 0.0;
    int n = 0;
    for (const auto& o : ds.observations) {
      if (o.config_index != k) continue;
      sum += psnr(render_model(res.model, k, o.camera), o.image);
      ++n;
    }
    per_config.push_back({{"config", k}, {"train_psnr", sum / n}});
  }
  Json summary = {{"model", model_path.string()},
                  {"seconds", secs},
                  {"screws", res.model.num_screws()},
                  {"gaussians", res.model.num_gaussians()},
                  {"removed_low_confidence", res.selection.removed_low_confidence.size()},
                  {"removed_short_interval", res.selection.removed_short_interval.size()},
                  {"train_psnr", per_config}};
  write_json(out_path("fit_summary.json"), summary);
  log(LogLevel::Info, "fit done in " + std::to_string(secs) + " s: " + std::to_string(res.model.num_screws()) +
                          " screws, model at " + model_path.string());
  return kOk;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string model, theta, dataset;
  std::optional<int> config, camera, orbit;
  std::string size = "64x64";
  double radius = 2.5, focal_scale = 1.25;
};

int run_render(const RenderArgs& a) {
  const ArticulatedSplatModel m = load_model(a.model);
  VecX th;
  if (!a.theta.empty()) {
    th = to_vec(parse_list(a.theta));
    if (th.size() != m.num_screws())
      throw UsageError("--theta has " + std::to_string(th.size()) + " entries but the model has " +
                       std::to_string(m.num_screws()) + " screws");
  } else if (a.config) {
    if (*a.config < 0 || *a.config >= m.num_configs()) throw UsageError("--config out of range");
    th = m.joint_angles[*a.config];
  } else {
    th = m.num_configs() > 0 ? m.joint_angles.front() : VecX::Zero(m.num_screws());
  }

  std::vector<Camera> cams;
  if (a.orbit) {
    if (*a.orbit < 1) throw UsageError("--orbit must be positive");
    const auto [w, h] = parse_size(a.size);
    cams = hemisphere_cameras(*a.orbit, a.radius, Vec3::Zero(), w, h, a.focal_scale * w);
  } else {
    if (a.dataset.empty()) throw UsageError("give --orbit N or --dataset DIR [--camera IDX]");
    const Json j = read_json(fs::path(a.dataset) / "dataset.json");
    for (const auto& c : j.at("cameras")) cams.push_back(camera_from_json(c));
    if (a.camera) {
      if (*a.camera < 0 || *a.camera >= static_cast<int>(cams.size())) throw UsageError("--camera out of range");
      cams = {cams[*a.camera]};
    }
  }
  write_config("render", {{"model", a.model}, {"theta", theta_json(th)}, {"cameras", cams.size()}});
  for (std::size_t c = 0; c < cams.size(); ++c) {
    const int idx = a.camera && !a.orbit ? *a.camera : static_cast<int>(c);
    write_png(out_path("render_c" + std::to_string(idx) + ".png").string(), render_model(m, th, cams[c]));
  }
  log(LogLevel::Info, "rendered " + std::to_string(cams.size()) + " views");
  return kOk;
}

// ---------------------------------------------------------------------------

int run_eval(const std::string& model, const std::string& dataset, const std::string& out, int points) {
  const ArticulatedSplatModel m = load_model(model);
  const Dataset ds = load_dataset(dataset);
  EvalOptions opts;
  opts.points = points;
  opts.seed = g_globals.seed;
  const EvalReport rep = evaluate(m, ds, opts);
  write_config("eval", {{"model", model}, {"dataset", dataset}, {"points", points}});
  const fs::path p = fs::path(out).is_absolute() ? fs::path(out) : out_path(out);
  write_json(p, rep.to_json());
  std::ofstream csv(out_path("report.csv"));
  csv << EvalReport::csv_header() << '\n' << rep.csv_row() << '\n';
  std::cout << rep.to_json().dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct StateArgs {
  std::string model, observations, goal, trajectory;
  int config = 0;
  bool heldout = false;
  std::vector<int> cameras;
  int calls = 50, random_calls = 10;
};

std::vector<View> load_views(const StateArgs& a) {
  const Dataset ds = load_dataset(a.observations);
  const auto& set = a.heldout ? ds.heldout : ds.observations;
  std::vector<View> views;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int cam = static_cast<int>(i % ds.cameras.size());
    if (set[i].config_index != a.config) continue;
    if (!a.cameras.empty() && std::find(a.cameras.begin(), a.cameras.end(), cam) == a.cameras.end()) continue;
    views.push_back({set[i].camera, set[i].image});
  }
  if (views.empty()) throw Error(Errc::EmptyObservations, "no views match the requested configuration and cameras");
  return views;
}

BoConfig bo_config(const StateArgs& a) {
  BoConfig c;
  c.n_calls = a.calls;
  c.n_random = a.random_calls;
  c.seed = g_globals.seed;
  return c;
}

int run_estimate(const StateArgs& a) {
  const ArticulatedSplatModel m = load_model(a.model);
  const auto views = load_views(a);
  const VecX th = estimate_state(m, views, bo_config(a));
  write_config("estimate", {{"model", a.model}, {"observations", a.observations}, {"config", a.config},
                            {"heldout", a.heldout}, {"views", views.size()}, {"calls", a.calls}});
  const Json out = {{"theta", theta_json(th)}};
  write_json(out_path("estimate.json"), out);
  std::cout << out.dump() << '\n';
  return kOk;
}

int run_control(const StateArgs& a, const PlanConfig& plan, int screw) {
  const ArticulatedSplatModel m = load_model(a.model);
  if (a.goal.empty()) throw UsageError("--goal is required");
  const auto views = load_views(a);
  const Image exemplar = read_png(a.goal);
  const View& v = views.front();
  if (!exemplar.same_shape(v.image)) throw Error(Errc::ShapeMismatch, "goal exemplar size differs from the view");
  const ToyEmbedder embedder;
  const GoalSpec goal = GoalSpec::from_exemplars({v.camera}, {v.image}, {exemplar}, embedder);
  const VecX th = control_to_goal(m, goal, embedder, bo_config(a));
  Json out = {{"theta", theta_json(th)}};
  if (!a.trajectory.empty()) {
    const VecX current = estimate_state(m, views, bo_config(a));
    const int j = screw >= 0 ? screw : 0;
    if (j >= m.num_screws()) throw Error(Errc::DeadScrew, "model has no screw " + std::to_string(j));
    const Trajectory tr = plan_trajectory(m, j, current[j], th[j], plan);
    out["current_theta"] = theta_json(current);
    write_json(fs::path(a.trajectory).is_absolute() ? fs::path(a.trajectory) : out_path(a.trajectory),
               trajectory_json(tr));
  }
  write_config("control", {{"model", a.model}, {"observations", a.observations}, {"goal", a.goal},
                           {"config", a.config}, {"calls", a.calls}});
  write_json(out_path("control.json"), out);
  std::cout << out.dump() << '\n';
  return kOk;
}

int run_plan(const std::string& model, int screw, double from, double to, const PlanConfig& plan,
             const std::string& out) {
  const ArticulatedSplatModel m = load_model(model);
  const Trajectory tr = plan_trajectory(m, screw, from, to, plan);
  write_config("plan", {{"model", model}, {"screw", screw}, {"from", from}, {"to", to},
                        {"offset", plan.theta_offset}, {"steps", plan.steps},
                        {"base_point", to_json(plan.base_point)}});
  write_json(fs::path(out).is_absolute() ? fs::path(out) : out_path(out), trajectory_json(tr));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated Gaussian splatting with screw primitives"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g_globals.seed, "Random seed")->capture_default_str();
  app.add_option("--out-dir", g_globals.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", g_globals.threads, "Worker threads (computation is sequential)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", g_globals.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-configuration dataset");
  synth->add_option("--preset", sa.preset, "laptop, drawer, storage-3 or static");
  synth->add_option("--spec", sa.spec, "Object spec JSON file");
  synth->add_option("--cameras", sa.cameras)->capture_default_str();
  synth->add_option("--configs", sa.configs)->capture_default_str();
  synth->add_option("--size", sa.size, "WxH")->capture_default_str();
  synth->add_option("--radius", sa.radius)->capture_default_str();
  synth->add_option("--focal-scale", sa.focal_scale, "Focal length in units of the image width")->capture_default_str();

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit an articulated model to a dataset");
  fitc->add_option("--dataset", fa.dataset)->required();
  fitc->add_option("--out", fa.out, "Model JSON (relative to --out-dir)")->capture_default_str();
  fitc->add_flag("--desk", fa.desk, "Small-scene schedule (6000 iterations, 2000 Gaussians)");
  fitc->add_option("--iters", fa.iters);
  fitc->add_option("--gaussians", fa.gaussians);
  fitc->add_option("--revolute", fa.revolute);
  fitc->add_option("--prismatic", fa.prismatic);
  fitc->add_option("--beta", fa.beta);
  fitc->add_option("--lambda", fa.lambda);
  fitc->add_option("--reset-interval", fa.reset_interval);
  fitc->add_option("--opacity-reset-interval", fa.opacity_reset_interval);
  fitc->add_option("--selection-iter", fa.selection_iter);
  fitc->add_option("--lr-position", fa.lr_position);
  fitc->add_option("--lr-position-final", fa.lr_position_final);
  fitc->add_option("--lr-theta", fa.lr_theta);
  fitc->add_option("--lr-raw-axis", fa.lr_raw_axis);
  fitc->add_option("--lr-confidence", fa.lr_confidence);
  fitc->add_option("--lr-part-logits", fa.lr_part_logits);
  fitc->add_option("--log-interval", fa.log_interval)->capture_default_str();
  fitc->add_option("--checkpoint-interval", fa.checkpoint_interval)->capture_default_str();

  RenderArgs ra;
  auto* renderc = app.add_subcommand("render", "Render a model at given joint angles");
  renderc->add_option("--model", ra.model)->required();
  renderc->add_option("--theta", ra.theta, "Comma-separated joint angles");
  renderc->add_option("--config", ra.config, "Use the model's fitted configuration");
  renderc->add_option("--dataset", ra.dataset, "Take cameras from this dataset");
  renderc->add_option("--camera", ra.camera, "Single dataset camera index");
  renderc->add_option("--orbit", ra.orbit, "N hemisphere cameras");
  renderc->add_option("--out", g_globals.out_dir, "Output directory (same as --out-dir)");
  renderc->add_option("--size", ra.size)->capture_default_str();
  renderc->add_option("--radius", ra.radius)->capture_default_str();
  renderc->add_option("--focal-scale", ra.focal_scale)->capture_default_str();

  std::string em, ed, eo = "report.json";
  int points = 2048;
  auto* evalc = app.add_subcommand("eval", "Evaluate a fitted model against its dataset");
  evalc->add_option("--model", em)->required();
  evalc->add_option("--dataset", ed)->required();
  evalc->add_option("--out", eo)->capture_default_str();
  evalc->add_option("--points", points)->capture_default_str();

  StateArgs st;
  PlanConfig plan;
  int control_screw = -1;
  auto add_state = [&](CLI::App* c) {
    c->add_option("--model", st.model)->required();
    c->add_option("--observations", st.observations, "Dataset directory holding the views")->required();
    c->add_option("--config", st.config, "Configuration index of the current state")->capture_default_str();
    c->add_flag("--heldout", st.heldout, "Use held-out views");
    c->add_option("--cameras", st.cameras, "Restrict to these camera indices");
    c->add_option("--calls", st.calls)->capture_default_str();
    c->add_option("--random-calls", st.random_calls)->capture_default_str();
  };
  auto* estc = app.add_subcommand("estimate", "Estimate the current joint angles");
  add_state(estc);
  auto* ctlc = app.add_subcommand("control", "Find joint angles that match a goal exemplar");
  add_state(ctlc);
  ctlc->add_option("--goal", st.goal, "Goal exemplar PNG seen from the first selected camera")->required();
  ctlc->add_option("--trajectory", st.trajectory, "Also plan a trajectory to this JSON file");
  ctlc->add_option("--screw", control_screw, "Screw used for the trajectory");

  std::string pm, po = "trajectory.json", base = "0,-2,0";
  int ps = 0;
  double from = 0.0, to = 0.0;
  auto* planc = app.add_subcommand("plan", "Plan a gripper tip trajectory along a screw");
  planc->add_option("--model", pm)->required();
  planc->add_option("--screw", ps)->required();
  planc->add_option("--from", from)->required();
  planc->add_option("--to", to)->required();
  planc->add_option("--out", po)->capture_default_str();
  for (auto* c : {planc, ctlc}) {
    c->add_option("--offset", plan.theta_offset)->capture_default_str();
    c->add_option("--steps", plan.steps)->capture_default_str();
    c->add_option("--base", base, "Robot base point x,y,z")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  g_globals.level = g_globals.log_level == "error"  ? LogLevel::Error
                    : g_globals.log_level == "warn" ? LogLevel::Warn
                    : g_globals.log_level == "debug" ? LogLevel::Debug
                                                     : LogLevel::Info;
  try {
    plan.base_point = parse_vec3(base);
    if (*synth) return run_synth(sa);
    if (*fitc) return run_fit(fa);
    if (*renderc) return run_render(ra);
    if (*evalc) return run_eval(em, ed, eo, points);
    if (*estc) return run_estimate(st);
    if (*ctlc) return run_control(st, plan, control_screw);
    if (*planc) return run_plan(pm, ps, from, to, plan, po);
  } catch (const UsageError& e) {
    log(LogLevel::Error, e.what());
    return kUsage;
  } catch (const Error& e) {
    log(LogLevel::Error, e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log(LogLevel::Error, e.what());
    return kInput;
  }
  return kUsage;
}
