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


// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `acceptance 1 2 9`.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "screwsplat/control.hpp"
#include "screwsplat/gradients.hpp"
#include "screwsplat/image_io.hpp"
#include "screwsplat/metrics.hpp"
#include "screwsplat/scene_synth.hpp"
#include "screwsplat/screw.hpp"
#include "screwsplat/serialization.hpp"
#include "screwsplat/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace screwsplat;
using std::numbers::pi;

namespace {

// ---- Pinned tolerances --------------------------------------------------

constexpr double kExpSeriesTol = 1e-9;
constexpr double kSubgroupTol = 1e-8;
constexpr double kScrewMathSeconds = 1.0;

constexpr double kFdStep = 1e-4;
constexpr double kFdRelTol = 1e-3;
constexpr double kFdAbsFloor = 1e-6;
constexpr double kGradientSeconds = 120.0;

constexpr double kSingleAngDeg = 2.0;
constexpr double kSinglePos = 0.02;
constexpr double kSinglePsnr = 30.0;
constexpr double kSingleRunSeconds = 900.0;

constexpr double kMultiAngDeg = 3.0;
constexpr int kMultiCameras = 48;
constexpr int kMultiGaussians = 3500;
constexpr int kMultiIterations = 10000;

constexpr double kParsimonyDegenerateBeta = 0.05;

constexpr int kStaticRequired = 9;

constexpr double kStateTolFraction = 0.05;
constexpr double kGoalTolFraction = 0.10;

constexpr double kChamferTol = 1e-12;
constexpr double kFormulaTol = 1e-9;

// ---- Helpers --------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

struct RunResult {
  FitResult fit;
  EvalReport report;
  double seconds = 0.0;
};

RunResult fit_and_eval(const std::string& preset, const DatasetOptions& opts, const FitConfig& base,
                       std::uint64_t seed) {
  const Dataset ds = build_dataset(object_preset(preset), opts, seed);
  FitConfig cfg = base;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.fit = fit(ds, cfg);
  r.seconds = seconds_since(t0);
  if (!ds.spec.joints.empty()) {
    EvalOptions eo;
    eo.seed = seed;
    r.report = evaluate(r.fit.model, ds, eo);
  }
  return r;
}

// Ground-truth model whose fitted range spans the joint limits.
ArticulatedSplatModel ranged_model(const ObjectSpec& spec, std::uint64_t seed) {
  auto m = make_object(spec, seed).model;
  VecX lo(spec.joints.size()), hi(spec.joints.size());
  for (std::size_t j = 0; j < spec.joints.size(); ++j) {
    lo[j] = spec.joints[j].lo;
    hi[j] = spec.joints[j].hi;
  }
  m.joint_angles = {lo, hi};
  return m;
}

ObjectSpec two_door_spec() {
  ObjectSpec s = object_preset("storage-3");
  s.name = "two-door";
  const int drawer = static_cast<int>(s.joints.size()) - 1;
  std::erase_if(s.parts, [&](const PartSpec& p) { return p.attached_screw == drawer; });
  s.joints.pop_back();
  return s;
}

VecX random_theta(const ObjectSpec& spec, Rng& rng) {
  VecX t(spec.joints.size());
  for (std::size_t j = 0; j < spec.joints.size(); ++j) t[j] = uniform(rng, spec.joints[j].lo, spec.joints[j].hi);
  return t;
}

// Largest per-joint error as a fraction of the joint range.
double range_error(const ObjectSpec& spec, const VecX& a, const VecX& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < spec.joints.size(); ++j)
    e = std::max(e, std::abs(a[j] - b[j]) / (spec.joints[j].hi - spec.joints[j].lo));
  return e;
}

// ---- Criteria -------------------------------------------------------------

Outcome screw_math() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20260101);
  double worst_series = 0.0, worst_group = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto type = n % 2 == 0 ? JointType::Revolute : JointType::Prismatic;
    Vec6 raw;
    for (int c = 0; c < 6; ++c) raw[c] = uniform(rng, -1.0, 1.0);
    const ScrewAxisd s = normalize_screw<double>(raw, type);
    const double th = uniform(rng, -pi, pi);
    worst_series = std::max(worst_series, max_abs(screw_exp(s, th).matrix() - oracle::exp_series(s, th, 30)));
    const double a = uniform(rng, -pi, pi), b = uniform(rng, -pi, pi);
    worst_group = std::max(worst_group,
                           max_abs((screw_exp(s, a) * screw_exp(s, b)).matrix() - screw_exp(s, a + b).matrix()));
  }
  const double secs = seconds_since(t0);
  return {worst_series <= kExpSeriesTol && worst_group <= kSubgroupTol && secs < kScrewMathSeconds,
          "series err " + fmt("%.2e", worst_series) + ", subgroup err " + fmt("%.2e", worst_group) + ", " +
              fmt("%.3f", secs) + " s"};
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  LossConfig cfg;
  cfg.ssim_window = 5;
  double worst = 0.0, worst_abs = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 101; seed <= 105; ++seed) {
    const auto scene = fixtures::random_grad_scene(seed, 5, 8, 2);
    const auto rep = fd_check(scene.model, scene.batch, cfg, kFdStep, 1 << 30, seed, kFdAbsFloor);
    worst = std::max(worst, rep.max_relative_error);
    worst_abs = std::max(worst_abs, rep.max_abs_error);
    checked += rep.checked;
  }
  const double secs = seconds_since(t0);
  return {worst <= kFdRelTol && secs < kGradientSeconds,
          std::to_string(checked) + " parameters, worst rel err " + fmt("%.2e", worst) + ", worst abs diff " +
              fmt("%.2e", worst_abs) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome single_joint() {
  bool ok = true;
  std::ostringstream d;
  for (const std::string preset : {"laptop", "drawer"}) {
    const JointType want = object_preset(preset).joints[0].axis.joint_type;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto r = fit_and_eval(preset, DatasetOptions{}, desk_fit_config(6000), seed);
      const auto& m = r.fit.model;
      bool run_ok = m.num_screws() == 1 && m.screws[0].joint_type == want && r.report.axes.size() == 1 &&
                    r.report.psnr >= kSinglePsnr && r.seconds <= kSingleRunSeconds;
      d << preset << "/" << seed << ": " << m.num_screws() << " screw";
      if (r.report.axes.size() == 1) {
        const auto& a = r.report.axes[0];
        run_ok = run_ok && a.ang_err <= kSingleAngDeg && (want == JointType::Prismatic || a.pos_err <= kSinglePos);
        d << " ang " << fmt("%.2f", a.ang_err);
        if (want == JointType::Revolute) d << " pos " << fmt("%.4f", a.pos_err);
      }
      d << " psnr " << fmt("%.1f", r.report.psnr) << " " << fmt("%.0f", r.seconds) << "s; ";
      ok = ok && run_ok;
    }
  }
  return {ok, d.str()};
}

Outcome multi_joint() {
  DatasetOptions opts;
  opts.cameras = kMultiCameras;
  FitConfig cfg = desk_fit_config(kMultiIterations);
  cfg.init.num_gaussians = kMultiGaussians;
  int passed = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = fit_and_eval("storage-3", opts, cfg, seed);
    bool run_ok = r.report.axes.size() == 3;
    d << "seed " << seed << ": " << r.report.axes.size() << " matched [";
    for (const auto& a : r.report.axes) {
      run_ok = run_ok && a.ang_err <= kMultiAngDeg;
      d << (a.type == JointType::Revolute ? "R " : "P ") << fmt("%.2f", a.ang_err) << " ";
    }
    d << "] " << r.report.unmatched_pred.size() << " extra; ";
    passed += run_ok ? 1 : 0;
  }
  d << passed << "/5 seeds";
  return {passed >= 3, d.str()};
}

// Shared small-scene setup for the many-seed ablations.
DatasetOptions ablation_data() {
  DatasetOptions o;
  o.width = o.height = 48;
  return o;
}

FitConfig ablation_fit(double beta) {
  FitConfig cfg = desk_fit_config(3000);
  cfg.init.num_gaussians = 1200;
  cfg.loss.beta = beta;
  return cfg;
}

Outcome parsimony() {
  const std::vector<double> betas = {0.0, 0.002, kParsimonyDegenerateBeta};
  std::vector<double> mean(3, 0.0);
  int degenerate = 0;
  constexpr int seeds = 10;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const auto r = fit_and_eval("laptop", ablation_data(), ablation_fit(betas[b]), seed);
      mean[b] += static_cast<double>(r.fit.model.num_screws()) / seeds;
      if (b == 2 && r.fit.model.num_screws() == 0) ++degenerate;
    }
  }
  return {mean[1] < mean[0] && degenerate == seeds,
          "mean survivors beta=0: " + fmt("%.1f", mean[0]) + ", beta=0.002: " + fmt("%.1f", mean[1]) +
              ", beta=0.05: " + fmt("%.1f", mean[2]) + ", zero in " + std::to_string(degenerate) + "/" + std::to_string(seeds)};
}

Outcome static_object() {
  int zero = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = fit_and_eval("static", ablation_data(), ablation_fit(0.002), seed);
    zero += r.fit.model.num_screws() == 0 ? 1 : 0;
    d << r.fit.model.num_screws() << " ";
  }
  return {zero >= kStaticRequired, "survivors per seed: " + d.str() + "(" + std::to_string(zero) + "/10 at zero)"};
}

Outcome state_estimation() {
  const ObjectSpec spec = object_preset("laptop");
  const auto cams = hemisphere_cameras(4, 2.5, Vec3::Zero(), 48, 48, 60.0);
  std::vector<double> errs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = ranged_model(spec, seed);
    Rng rng(seed * 7919);
    const VecX planted = random_theta(spec, rng);
    std::vector<View> views;
    for (const auto& c : cams) views.push_back({c, quantize8(render_model(m, planted, c))});
    BoConfig bo;
    bo.seed = seed;
    const VecX est = estimate_state(m, views, bo);
    errs.push_back(range_error(spec, est, planted));
  }
  const double med = median(errs);
  return {med <= kStateTolFraction, "median error " + fmt("%.4f", med) + " of range (worst " +
                                        fmt("%.4f", *std::max_element(errs.begin(), errs.end())) + ")"};
}

struct ControlStats {
  double bo_median = 0.0;
  int bo_success = 0;
  int gd_success = 0;
};

ControlStats control_trials(const ObjectSpec& spec) {
  const auto rig = hemisphere_cameras(8, 2.5, Vec3::Zero(), 48, 48, 60.0);
  const std::vector<Camera> cams = {rig[1], rig[4]};
  const ToyEmbedder embedder;
  ControlStats st;
  std::vector<double> errs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = ranged_model(spec, seed);
    Rng rng(seed * 104729);
    VecX current = random_theta(spec, rng), goal = random_theta(spec, rng);
    while (range_error(spec, current, goal) < 0.3) goal = random_theta(spec, rng);
    std::vector<Image> now, target;
    for (const auto& c : cams) {
      now.push_back(render_model(m, current, c));
      target.push_back(render_model(m, goal, c));
    }
    const GoalSpec gs = GoalSpec::from_exemplars(cams, now, target, embedder);
    BoConfig bo;
    bo.seed = seed;
    const double e_bo = range_error(spec, control_to_goal(m, gs, embedder, bo), goal);
    const double e_gd = range_error(spec, gradient_descent_control(m, gs, embedder, current), goal);
    errs.push_back(e_bo);
    st.bo_success += e_bo <= kGoalTolFraction ? 1 : 0;
    st.gd_success += e_gd <= kGoalTolFraction ? 1 : 0;
  }
  st.bo_median = median(errs);
  return st;
}

Outcome goal_control() {
  const auto one = control_trials(object_preset("laptop"));
  const auto two = control_trials(two_door_spec());
  const bool ok = one.bo_median <= kGoalTolFraction && two.bo_median <= kGoalTolFraction &&
                  one.bo_success + two.bo_success > one.gd_success + two.gd_success;
  auto line = [](const char* name, const ControlStats& s) {
    return std::string(name) + ": BO median " + fmt("%.3f", s.bo_median) + ", success BO " +
           std::to_string(s.bo_success) + "/10 vs GD " + std::to_string(s.gd_success) + "/10";
  };
  return {ok, line("1-joint", one) + "; " + line("2-joint", two)};
}

Outcome metric_oracles() {
  bool ok = true;
  std::ostringstream d;
  Rng rng(77);
  double worst_cd = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec3> p(50 + t), q(40 + 2 * t);
    for (auto& x : p) x = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    for (auto& x : q) x = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    worst_cd = std::max(worst_cd, std::abs(chamfer(p, q) - oracle::chamfer_brute(p, q)));
  }
  const std::vector<Vec3> origin{Vec3::Zero()}, unit_x{Vec3::UnitX()};
  ok = ok && worst_cd <= kChamferTol && chamfer(origin, origin) == 0.0 && chamfer(origin, unit_x) == 2.0;
  d << "chamfer err " << fmt("%.1e", worst_cd);

  auto revolute_axis = [](const Vec3& w, const Vec3& point) {
    ScrewAxisd s;
    s.joint_type = JointType::Revolute;
    s.omega = w.normalized();
    s.v = -s.omega.cross(point);
    return s;
  };
  const auto z0 = revolute_axis(Vec3::UnitZ(), Vec3::Zero());
  const bool unit_cases = angular_error(z0, z0) == 0.0 && position_error(z0, z0) == 0.0 &&
                          angular_error(z0, revolute_axis(-Vec3::UnitZ(), Vec3::Zero())) == 0.0 &&
                          angular_error(z0, revolute_axis(Vec3::UnitX(), Vec3::Zero())) == 90.0 &&
                          position_error(z0, revolute_axis(Vec3::UnitZ(), Vec3(1, 0, 0))) == 1.0 &&
                          position_error(z0, revolute_axis(Vec3::UnitX(), Vec3(0, 3, 0))) == 3.0;
  ok = ok && unit_cases;
  d << ", axis unit cases " << (unit_cases ? "exact" : "WRONG");

  Image a(8, 8, 0.5), b(8, 8, 0.6);
  const double p20 = psnr(a, b);
  Image tex(16, 16);
  for (auto& v : tex.pixels) v = uniform01(rng);
  const double s1 = ssim_metric(tex, tex);
  const bool formula = std::abs(p20 - 20.0) <= kFormulaTol && std::abs(s1 - 1.0) <= kFormulaTol &&
                       std::isinf(psnr(tex, tex));
  ok = ok && formula;
  d << ", PSNR(MSE 0.01) " << fmt("%.12f", p20) << ", SSIM(a,a) " << fmt("%.12f", s1);
  return {ok, d.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SCREWSPLAT_CLI) + " --log-level error " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "screwsplat_acceptance_determinism";
  fs::remove_all(root);
  const std::string ds = (root / "ds").string();
  if (run_cli("--seed 5 --out-dir " + ds + " synth --preset laptop --cameras 8 --configs 5 --size 32x32") != 0)
    return {false, "synth failed"};
  const std::string fit_args = " fit --desk --iters 1500 --gaussians 800 --dataset " + ds;
  if (run_cli("--seed 9 --threads 1 --out-dir " + (root / "a").string() + fit_args) != 0 ||
      run_cli("--seed 9 --threads 1 --out-dir " + (root / "b").string() + fit_args) != 0)
    return {false, "fit failed"};
  const std::string a = slurp(root / "a" / "model.json"), b = slurp(root / "b" / "model.json");
  const bool same = !a.empty() && a == b;
  fs::remove_all(root);
  return {same, std::to_string(a.size()) + " bytes, " + (same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {"screw math oracle", screw_math},
      {"gradient correctness", gradients},
      {"single-joint recovery", single_joint},
      {"multi-joint recovery", multi_joint},
      {"parsimony ablation", parsimony},
      {"static-object control", static_object},
      {"state estimation", state_estimation},
      {"goal control", goal_control},
      {"metric oracles", metric_oracles},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[c].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %-24s %s  (%s) [%.0f s]\n", id, criteria[c].name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
