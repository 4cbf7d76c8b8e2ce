// Copyright 2026 The facesweep Authors
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

#include "facesweep/run_config.hpp"

#include <set>

#include "facesweep/error.hpp"
#include "facesweep/serialization.hpp"

namespace facesweep {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::kSchema, what); }

// JSON integers parse as signed unless they exceed the signed range.
std::uint64_t non_negative(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  schema(key + " must be a non-negative integer");
}

void check_keys(const Json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) schema(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) schema("unknown key \"" + key + "\" in " + where);
  }
}

std::string string_field(const Json& v, const std::string& what) {
  if (!v.is_string()) schema(what + " must be a string");
  return v.get<std::string>();
}

double number_field(const Json& v, const std::string& what) {
  if (!v.is_number()) schema(what + " must be a number");
  return v.get<double>();
}

}  // namespace

double RunConfig::range_for(const std::string& param) const {
  const auto it = sweep_ranges.find(param);
  return it == sweep_ranges.end() ? sweep_range : it->second;
}

BackendKind parse_backend_kind(const std::string& text) {
  if (text == "stub") return BackendKind::kStub;
  if (text == "external") return BackendKind::kExternal;
  throw Error(ErrorKind::kInvalidArgument, "backend must be stub or external, got " + text);
}

std::string to_string(BackendKind kind) { return kind == BackendKind::kStub ? "stub" : "external"; }

RunConfig config_from_json(const Json& doc, RunConfig c) {
  check_keys(doc,
             {"model", "landmarks", "output_dir", "seed", "workers", "camera", "light", "sweep", "backend"},
             "config");
  if (doc.contains("model")) c.model_path = string_field(doc["model"], "model");
  if (doc.contains("landmarks")) c.landmarks_path = string_field(doc["landmarks"], "landmarks");
  if (doc.contains("output_dir")) c.output_dir = string_field(doc["output_dir"], "output_dir");
  if (doc.contains("seed")) c.seed = non_negative(doc["seed"], "seed");
  if (doc.contains("workers")) c.workers = static_cast<unsigned>(non_negative(doc["workers"], "workers"));
  if (doc.contains("camera")) c.camera = camera_from_json(doc["camera"], c.camera);
  if (doc.contains("light")) c.light = light_from_json(doc["light"], c.light);
  if (doc.contains("sweep")) {
    const Json& s = doc["sweep"];
    check_keys(s, {"range", "n_samples", "additive", "ranges"}, "sweep");
    if (s.contains("range")) c.sweep_range = number_field(s["range"], "sweep.range");
    if (s.contains("n_samples")) {
      if (!s["n_samples"].is_number_integer()) schema("sweep.n_samples must be an integer");
      c.sweep_samples = s["n_samples"].get<int>();
    }
    if (s.contains("additive")) {
      if (!s["additive"].is_boolean()) schema("sweep.additive must be a boolean");
      c.sweep_additive = s["additive"].get<bool>();
    }
    if (s.contains("ranges")) {
      if (!s["ranges"].is_object()) schema("sweep.ranges must be an object");
      for (const auto& [param, k] : s["ranges"].items()) {
        c.sweep_ranges[param] = number_field(k, "sweep.ranges." + param);
      }
    }
  }
  if (doc.contains("backend")) {
    const Json& b = doc["backend"];
    check_keys(b, {"kind", "command"}, "backend");
    if (b.contains("kind")) c.backend = parse_backend_kind(string_field(b["kind"], "backend.kind"));
    if (b.contains("command")) c.backend_command = string_field(b["command"], "backend.command");
  }
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json ranges = Json::object();
  for (const auto& [param, k] : c.sweep_ranges) ranges[param] = k;
  return Json{{"model", c.model_path},
              {"landmarks", c.landmarks_path},
              {"output_dir", c.output_dir},
              {"seed", c.seed},
              {"workers", c.workers},
              {"camera", camera_to_json(c.camera)},
              {"light", light_to_json(c.light)},
              {"sweep",
               {{"range", c.sweep_range},
                {"n_samples", c.sweep_samples},
                {"additive", c.sweep_additive},
                {"ranges", ranges}}},
              {"backend", {{"kind", to_string(c.backend)}, {"command", c.backend_command}}}};
}

RunConfig resolve_config(const std::optional<Json>& file, const ConfigOverrides& f) {
  RunConfig c = file ? config_from_json(*file) : RunConfig{};
  if (f.model_path) c.model_path = *f.model_path;
  if (f.landmarks_path) c.landmarks_path = *f.landmarks_path;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.sweep_range) {
    // An explicit K on the command line applies to every parameter.
    c.sweep_range = *f.sweep_range;
    c.sweep_ranges.clear();
  }
  if (f.sweep_samples) c.sweep_samples = *f.sweep_samples;
  if (f.sweep_additive) c.sweep_additive = *f.sweep_additive;
  if (f.projection) {
    if (*f.projection == "pinhole") {
      c.camera.mode = Projection::kPinhole;
    } else if (*f.projection == "weak_perspective") {
      c.camera.mode = Projection::kWeakPerspective;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "projection must be weak_perspective or pinhole");
    }
  }
  if (f.scale) c.camera.scale = *f.scale;
  if (f.cx) c.camera.cx = *f.cx;
  if (f.cy) c.camera.cy = *f.cy;
  if (f.width) c.camera.width = *f.width;
  if (f.height) c.camera.height = *f.height;
  if (f.ambient) c.light.ambient = *f.ambient;
  if (f.diffuse) c.light.diffuse = *f.diffuse;
  if (f.backend) c.backend = parse_backend_kind(*f.backend);
  if (f.backend_command) c.backend_command = *f.backend_command;
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  validate(c.camera);
  validate(c.light);
  if (c.output_dir.empty()) throw Error(ErrorKind::kInvalidArgument, "output directory must not be empty");
  if (!(c.sweep_range > 0.0)) throw Error(ErrorKind::kInvalidArgument, "sweep range must be positive");
  for (const auto& [param, k] : c.sweep_ranges) {
    if (!(k > 0.0)) throw Error(ErrorKind::kInvalidArgument, "sweep range for " + param + " must be positive");
  }
  if (c.sweep_samples < 3 || c.sweep_samples % 2 == 0) {
    throw Error(ErrorKind::kInvalidArgument, "sweep sample count must be odd and at least 3");
  }
  if (c.backend == BackendKind::kExternal && c.backend_command.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "the external backend needs a command");
  }
}

}  // namespace facesweep
