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

#include "json.hpp"

#include "facesweep/face_model.hpp"
#include "facesweep/fitting.hpp"
#include "facesweep/render.hpp"

namespace facesweep {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

// Model document: {"format_version": 1, "<array>": {"shape": [...], "data":
// [...]}, ...}. Arrays are row-major; the blendshape bases have shape
// [N, 3, n].
Json model_to_json(const FaceModel& model);
// Validates shapes and every model invariant; throws Error(kSchema).
FaceModel model_from_json(const Json& doc);

Json params_to_json(const ModelParams& params);
ModelParams params_from_json(const Json& doc);

Json camera_to_json(const CameraParams& camera);
// Missing keys keep the defaults of `base`.
CameraParams camera_from_json(const Json& doc, CameraParams base = {});

Json light_to_json(const LightingParams& light);
LightingParams light_from_json(const Json& doc, LightingParams base = {});

// 68 [x, y, confidence] triples.
Json landmarks_to_json(const LandmarkSet& landmarks);
LandmarkSet landmarks_from_json(const Json& doc);

Json fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(const Json& doc);

Json read_json_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json_file(const Json& doc, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

}  // namespace facesweep
