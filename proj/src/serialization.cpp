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


#include "screwsplat/serialization.hpp"

#include <fstream>

#include "screwsplat/image_io.hpp"

namespace screwsplat {

namespace {

template <typename Fn>
auto parse_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, std::string(what) + ": " + e.what());
  }
}

Json mat3_to_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Mat3 mat3_from_json(const Json& j) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

const char* joint_name(JointType t) { return t == JointType::Revolute ? "revolute" : "prismatic"; }

JointType joint_from_name(const std::string& s) {
  if (s == "revolute") return JointType::Revolute;
  if (s == "prismatic") return JointType::Prismatic;
  throw Error(Errc::Parse, "unknown joint type '" + s + "'");
}

std::string image_name(const char* prefix, int k, int c) {
  return std::string(prefix) + "_k" + std::to_string(k) + "_c" + std::to_string(c) + ".png";
}

}  // namespace

Json to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Json to_json(const VecX& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::Parse, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

VecX vecx_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::Parse, "expected an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json to_json(const ScrewAxisd& a) {
  return {{"type", joint_name(a.joint_type)}, {"omega", to_json(a.omega)}, {"v", to_json(a.v)}};
}

ScrewAxisd screw_from_json(const Json& j) {
  return parse_guard("screw", [&] {
    ScrewAxisd a;
    a.joint_type = joint_from_name(j.at("type").get<std::string>());
    a.omega = vec3_from_json(j.at("omega"));
    a.v = vec3_from_json(j.at("v"));
    return a;
  });
}

Json to_json(const Camera& c) {
  return {{"fx", c.fx},
          {"fy", c.fy},
          {"cx", c.cx},
          {"cy", c.cy},
          {"width", c.width},
          {"height", c.height},
          {"rotation", mat3_to_json(c.world_from_camera.rotation)},
          {"translation", to_json(c.world_from_camera.translation)}};
}

Camera camera_from_json(const Json& j) {
  return parse_guard("camera", [&] {
    Camera c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.world_from_camera.rotation = mat3_from_json(j.at("rotation"));
    c.world_from_camera.translation = vec3_from_json(j.at("translation"));
    c.validate();
    return c;
  });
}

Json to_json(const ObjectSpec& s) {
  Json parts = Json::array();
  for (const auto& p : s.parts) {
    parts.push_back({{"shape", to_string(p.shape)},
                     {"center", to_json(p.center)},
                     {"extent", to_json(p.extent)},
                     {"color", to_json(p.color)},
                     {"gaussian_count", p.gaussian_count},
                     {"attached_screw", p.attached_screw}});
  }
  Json joints = Json::array();
  for (const auto& jt : s.joints) joints.push_back({{"axis", to_json(jt.axis)}, {"lo", jt.lo}, {"hi", jt.hi}});
  return {{"name", s.name}, {"parts", parts}, {"joints", joints}};
}

ObjectSpec object_spec_from_json(const Json& j) {
  return parse_guard("object spec", [&] {
    ObjectSpec s;
    s.name = j.value("name", std::string("custom"));
    for (const auto& p : j.at("parts")) {
      PartSpec ps;
      ps.shape = part_shape_from_string(p.at("shape").get<std::string>());
      ps.center = vec3_from_json(p.at("center"));
      ps.extent = vec3_from_json(p.at("extent"));
      ps.color = vec3_from_json(p.at("color"));
      ps.gaussian_count = p.at("gaussian_count").get<int>();
      ps.attached_screw = p.value("attached_screw", -1);
      s.parts.push_back(ps);
    }
    if (j.contains("joints")) {
      for (const auto& jt : j.at("joints")) {
        JointSpec js;
        js.axis = screw_from_json(jt.at("axis"));
        js.lo = jt.at("lo").get<double>();
        js.hi = jt.at("hi").get<double>();
        s.joints.push_back(js);
      }
    }
    s.validate();
    return s;
  });
}

Json to_json(const ArticulatedSplatModel& m) {
  Json gs = Json::array();
  for (const auto& g : m.gaussians) {
    gs.push_back({{"position", to_json(g.position)},
                  {"rotation", {g.rotation[0], g.rotation[1], g.rotation[2], g.rotation[3]}},
                  {"log_scale", to_json(g.log_scale)},
                  {"opacity_logit", g.opacity_logit},
                  {"color", to_json(g.color)},
                  {"part_logits", to_json(g.part_logits)}});
  }
  Json ss = Json::array();
  for (const auto& s : m.screws) {
    ss.push_back({{"type", joint_name(s.joint_type)},
                  {"raw_axis", to_json(VecX(s.raw_axis))},
                  {"confidence_logit", s.confidence_logit},
                  {"active", s.active}});
  }
  Json th = Json::array();
  for (const auto& t : m.joint_angles) th.push_back(to_json(t));
  return {{"format_version", kModelFormatVersion},
          {"background", to_json(m.background)},
          {"gaussians", gs},
          {"screws", ss},
          {"joint_angles", th}};
}

ArticulatedSplatModel model_from_json(const Json& j) {
  return parse_guard("model", [&] {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(Errc::Parse, "unsupported model format version " + std::to_string(version));
    }
    ArticulatedSplatModel m;
    m.background = vec3_from_json(j.at("background"));
    for (const auto& g : j.at("gaussians")) {
      PartAwareGaussian pg;
      pg.position = vec3_from_json(g.at("position"));
      const VecX q = vecx_from_json(g.at("rotation"));
      if (q.size() != 4) throw Error(Errc::Parse, "rotation needs 4 entries");
      pg.rotation = q;
      pg.log_scale = vec3_from_json(g.at("log_scale"));
      pg.opacity_logit = g.at("opacity_logit").get<double>();
      pg.color = vec3_from_json(g.at("color"));
      pg.part_logits = vecx_from_json(g.at("part_logits"));
      m.gaussians.push_back(std::move(pg));
    }
    for (const auto& s : j.at("screws")) {
      ScrewPrimitive sp;
      sp.joint_type = joint_from_name(s.at("type").get<std::string>());
      const VecX raw = vecx_from_json(s.at("raw_axis"));
      if (raw.size() != 6) throw Error(Errc::Parse, "raw_axis needs 6 entries");
      sp.raw_axis = raw;
      sp.confidence_logit = s.at("confidence_logit").get<double>();
      sp.active = s.value("active", true);
      m.screws.push_back(sp);
    }
    for (const auto& t : j.at("joint_angles")) m.joint_angles.push_back(vecx_from_json(t));
    m.validate();
    return m;
  });
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ArticulatedSplatModel& model) {
  write_json(path, to_json(model));
}

ArticulatedSplatModel load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  Json cams = Json::array();
  for (const auto& c : ds.cameras) cams.push_back(to_json(c));
  Json configs = Json::array();
  for (const auto& t : ds.configs) configs.push_back(to_json(t));
  Json heldout = Json::array();
  for (const auto& t : ds.heldout_configs) heldout.push_back(to_json(t));
  Json screws = Json::array();
  for (const auto& jt : ds.spec.joints) screws.push_back(to_json(jt.axis));
  write_json(dir / "dataset.json", {{"format_version", kDatasetFormatVersion},
                                    {"seed", ds.seed},
                                    {"object", to_json(ds.spec)},
                                    {"gt_screws", screws},
                                    {"configs", configs},
                                    {"heldout_configs", heldout},
                                    {"cameras", cams}});
  const int nc = static_cast<int>(ds.cameras.size());
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    write_png(dir / image_name("img", ds.observations[i].config_index, static_cast<int>(i) % nc),
              ds.observations[i].image);
  }
  for (std::size_t i = 0; i < ds.heldout.size(); ++i) {
    write_png(dir / image_name("heldout", ds.heldout[i].config_index, static_cast<int>(i) % nc), ds.heldout[i].image);
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const Json j = read_json(dir / "dataset.json");
  Dataset ds;
  parse_guard("dataset", [&] {
    const int version = j.at("format_version").get<int>();
    if (version != kDatasetFormatVersion) {
      throw Error(Errc::Parse, "unsupported dataset format version " + std::to_string(version));
    }
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.spec = object_spec_from_json(j.at("object"));
    for (const auto& t : j.at("configs")) ds.configs.push_back(vecx_from_json(t));
    for (const auto& t : j.at("heldout_configs")) ds.heldout_configs.push_back(vecx_from_json(t));
    for (const auto& c : j.at("cameras")) ds.cameras.push_back(camera_from_json(c));
    return 0;
  });
  auto load_set = [&](const char* prefix, const std::vector<VecX>& configs, std::vector<Observation>& out) {
    for (std::size_t k = 0; k < configs.size(); ++k) {
      for (std::size_t c = 0; c < ds.cameras.size(); ++c) {
        Observation o;
        o.config_index = static_cast<int>(k);
        o.joint_angles_gt = configs[k];
        o.camera = ds.cameras[c];
        o.image = read_png(dir / image_name(prefix, static_cast<int>(k), static_cast<int>(c)));
        if (o.image.width != o.camera.width || o.image.height != o.camera.height) {
          throw Error(Errc::ShapeMismatch, "image size differs from its camera");
        }
        out.push_back(std::move(o));
      }
    }
  };
  load_set("img", ds.configs, ds.observations);
  load_set("heldout", ds.heldout_configs, ds.heldout);
  return ds;
}

}  // namespace screwsplat
