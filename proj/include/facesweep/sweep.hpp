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

#include <filesystem>
#include <string>
#include <vector>

#include "facesweep/face_model.hpp"
#include "facesweep/render.hpp"

namespace facesweep {

struct SweepTarget {
  enum class Kind { kPose, kExpression };
  Kind kind = Kind::kPose;
  int index = 0;     // flat pose index or expression index
  std::string name;  // label used in manifests and curve files
};

// Resolves a pose name (yaw, pitch, roll, jaw_open, "<joint>.<axis>",
// "translation.<axis>") or an expression name of the model.
SweepTarget resolve_target(const FaceModel& model, const std::string& name);

enum class SweepMode {
  kMultiplicative,  // v -> (1 + k) v
  kAdditive,        // v -> v + k (extension; not part of the diagnosis protocol)
};

struct SweepSpec {
  SweepTarget target;
  double range = 0.5;  // K: k spans [-K, K]
  int n_samples = 21;  // odd, so the grid contains k = 0
  SweepMode mode = SweepMode::kMultiplicative;
};

void validate(const SweepSpec& spec);

// n evenly spaced values over [-K, K]; the middle entry is exactly 0 and the
// grid is exactly sign-symmetric.
std::vector<double> sweep_k_values(double range, int n_samples);

struct SweepFrame {
  double k = 0.0;
  ModelParams params;
  std::string frame_id;
};

double target_value(const ModelParams& params, const SweepTarget& target);
void set_target_value(ModelParams& params, const SweepTarget& target, double value);

// True when every frame of a multiplicative sweep equals the base, i.e. the
// base value of the target is 0.
bool sweep_is_degenerate(const ModelParams& base, const SweepSpec& spec);

std::vector<SweepFrame> generate_sweep(const ModelParams& base, const SweepSpec& spec);

struct SweepManifestRow {
  std::string identity;
  std::string param;
  double k = 0.0;
  double value = 0.0;
  std::string image_path;
};

struct SweepRender {
  std::vector<SweepFrame> frames;
  std::vector<Image> images;
  std::vector<SweepManifestRow> manifest;  // ascending k
};

// Renders every frame. Image paths are relative: "<identity>/<frame_id>.pgm".
SweepRender render_sweep(const FaceModel& model, const std::string& identity,
                         const ModelParams& base, const SweepSpec& spec,
                         const CameraParams& camera, const LightingParams& light);

// Writes each image under `root` at its manifest path.
void write_sweep_images(const SweepRender& sweep, const std::filesystem::path& root);

// CSV header identity,param,k,value,image_path; k with 6 decimals.
std::string format_sweep_manifest(const std::vector<SweepManifestRow>& rows);
void write_sweep_manifest(const std::vector<SweepManifestRow>& rows,
                          const std::filesystem::path& path);
std::vector<SweepManifestRow> read_sweep_manifest(const std::filesystem::path& path);

}  // namespace facesweep
