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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facesweep/face_model.hpp"
#include "facesweep/render.hpp"

namespace facesweep {

struct Landmark2D {
  double x = 0.0;  // pixels
  double y = 0.0;
  double confidence = 1.0;  // [0, 1]
};

struct LandmarkSet {
  std::array<Landmark2D, kNumLandmarks> points{};
};

void validate(const LandmarkSet& landmarks);

// Projects the model's landmark embedding: the built-in stand-in for a 2D
// landmark detector. All confidences are 1.
LandmarkSet oracle_landmarks(const FaceModel& model, const ModelParams& params,
                             const CameraParams& camera);

// Groups of unknowns a fitting stage may free. The camera group is the scale
// only; the principal point stays fixed. Translation frees x and y under weak
// perspective and all three axes under a pinhole camera.
enum ParamGroup : std::uint32_t {
  kCameraGroup = 1u << 0,
  kTranslationGroup = 1u << 1,
  kGlobalPoseGroup = 1u << 2,
  kExpressionGroup = 1u << 3,
  kJawPoseGroup = 1u << 4,
  kNeckPoseGroup = 1u << 5,
  kShapeGroup = 1u << 6,
};

struct PriorWeights {
  double shape = 0.1;
  double expression = 0.1;
};

struct FitConfig {
  int max_iterations = 100;  // per stage
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double tolerance = 1e-10;  // on relative cost decrease of an accepted step
  PriorWeights priors;
  double jacobian_step = 1e-5;  // relative central-difference step
  // Rigid first, then expression and jaw, then identity shape. The neck is
  // left out: on a face-only landmark set its rotation is indistinguishable
  // from a global rotation plus translation.
  std::vector<std::uint32_t> stages = {
      kCameraGroup | kTranslationGroup | kGlobalPoseGroup,
      kCameraGroup | kTranslationGroup | kGlobalPoseGroup | kExpressionGroup | kJawPoseGroup,
      kCameraGroup | kTranslationGroup | kGlobalPoseGroup | kExpressionGroup | kJawPoseGroup |
          kShapeGroup,
  };
  CameraParams initial_camera;  // used when no initial estimate is supplied
};

void validate(const FitConfig& config);

struct FitInit {
  ModelParams params;
  CameraParams camera;
};

struct FitResult {
  ModelParams params;
  CameraParams camera;
  double rms_error = 0.0;  // pixels, over landmarks with non-zero confidence
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step
  bool converged = false;
  int iterations = 0;
};

// Confidence-weighted reprojection residuals (x0, y0, x1, y1, ...) followed
// by sqrt(w_s) * s and sqrt(w_e) * e.
Eigen::VectorXd residuals(const FaceModel& model, const ModelParams& params,
                          const CameraParams& camera, const LandmarkSet& landmarks,
                          const PriorWeights& priors);

double cost(const Eigen::VectorXd& residual);

double rms_landmark_error(const FaceModel& model, const ModelParams& params,
                          const CameraParams& camera, const LandmarkSet& landmarks);

// Central differences with per-coordinate step rel_step * max(1, |x_j|).
Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step);

// The least-squares problem restricted to a set of free parameter groups.
// Packs the free unknowns into a flat vector; everything else is held at the
// values of the reference estimate.
class LandmarkProblem {
 public:
  LandmarkProblem(const FaceModel& model, const LandmarkSet& landmarks, PriorWeights priors,
                  std::uint32_t groups, FitInit reference);

  Eigen::Index num_unknowns() const { return static_cast<Eigen::Index>(slots_.size()); }
  std::string unknown_name(Eigen::Index i) const;

  Eigen::VectorXd pack(const FitInit& estimate) const;
  FitInit unpack(const Eigen::VectorXd& x) const;

  Eigen::VectorXd residuals(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double rel_step) const;

 private:
  enum class SlotKind { kScale, kTranslation, kRotation, kExpression, kShape };
  struct Slot {
    SlotKind kind;
    int index;  // axis, flat rotation index, or coefficient index
  };

  const FaceModel& model_;
  const LandmarkSet& landmarks_;
  PriorWeights priors_;
  FitInit reference_;
  std::vector<Slot> slots_;
  std::vector<int> vertex_ids_;
  std::vector<std::array<int, 3>> landmark_rows_;  // rows into the posed subset
};

// Staged Levenberg-Marquardt on the reprojection objective. Each step solves
// (J^T J + lambda diag(J^T J)) delta = -J^T r and is accepted only when it
// lowers the cost. Throws kSingularSystem when a free unknown has no effect on
// the residuals.
FitResult fit_landmarks(const FaceModel& model, const LandmarkSet& landmarks,
                        const FitConfig& config = {},
                        const std::optional<FitInit>& init = std::nullopt);

}  // namespace facesweep
