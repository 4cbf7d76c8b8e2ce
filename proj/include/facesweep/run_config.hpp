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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "facesweep/render.hpp"

namespace facesweep {

enum class BackendKind { kStub, kExternal };

// Settings shared by every command. A value comes from the command line if
// given there, else from the config file, else from the defaults below.
// Environment variables are never consulted.
struct RunConfig {
  std::string model_path;
  std::string landmarks_path;  // a landmark file or an id -> file manifest
  std::string output_dir = ".";
  double sweep_range = 0.5;
  int sweep_samples = 21;
  std::map<std::string, double> sweep_ranges;  // per-parameter K, overriding sweep_range
  bool sweep_additive = false;
  CameraParams camera;
  LightingParams light;
  BackendKind backend = BackendKind::kStub;
  std::string backend_command;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  double range_for(const std::string& param) const;
};

// Values set on the command line. Unset fields defer to the config file.
struct ConfigOverrides {
  std::optional<std::string> model_path;
  std::optional<std::string> landmarks_path;
  std::optional<std::string> output_dir;
  std::optional<double> sweep_range;
  std::optional<int> sweep_samples;
  std::optional<bool> sweep_additive;
  std::optional<std::string> projection;
  std::optional<double> scale, cx, cy;
  std::optional<int> width, height;
  std::optional<double> ambient, diffuse;
  std::optional<std::string> backend;
  std::optional<std::string> backend_command;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

// Config file schema, all keys optional:
//   {"model", "landmarks", "output_dir", "seed", "workers",
//    "camera": {...}, "light": {...},
//    "sweep": {"range", "n_samples", "additive", "ranges": {"<param>": K}},
//    "backend": {"kind": "stub" | "external", "command"}}
// Unknown keys are a kSchema error.
RunConfig config_from_json(const nlohmann::json& doc, RunConfig base = {});
nlohmann::json config_to_json(const RunConfig& config);

RunConfig resolve_config(const std::optional<nlohmann::json>& file, const ConfigOverrides& flags);

void validate(const RunConfig& config);

BackendKind parse_backend_kind(const std::string& text);
std::string to_string(BackendKind kind);

}  // namespace facesweep
