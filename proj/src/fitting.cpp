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

#include "facesweep/fitting.hpp"

#include <cmath>
#include <unordered_map>

#include <Eigen/Cholesky>

#include "facesweep/error.hpp"

namespace facesweep {

void validate(const LandmarkSet& landmarks) {
  for (int i = 0; i < kNumLandmarks; ++i) {
    const Landmark2D& p = landmarks.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::kNonFinite, "landmark " + std::to_string(i) + " is not finite");
    }
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "landmark " + std::to_string(i) + " confidence outside [0,1]");
    }
  }
}

void validate(const FitConfig& config) {
  if (config.max_iterations <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "max_iterations must be positive");
  }
  if (!(config.tolerance > 0.0)) throw Error(ErrorKind::kInvalidArgument, "tolerance must be > 0");
  if (!(config.priors.shape >= 0.0) || !(config.priors.expression >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "prior weights must be >= 0");
  }
  if (!(config.initial_damping > 0.0) || !(config.damping_up > 1.0) ||
      !(config.damping_down > 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "damping must be positive with up/down factors above 1");
  }
  if (!(config.jacobian_step > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "jacobian_step must be > 0");
  }
  if (config.stages.empty()) throw Error(ErrorKind::kInvalidArgument, "no fitting stages");
}

LandmarkSet oracle_landmarks(const FaceModel& model, const ModelParams& params,
                             const CameraParams& camera) {
  const PixelMatrix px = project(landmarks3d(instantiate(model, params), model), camera);
  LandmarkSet out;
  for (int i = 0; i < kNumLandmarks; ++i) out.points[i] = {px(i, 0), px(i, 1), 1.0};
  return out;
}

double cost(const Eigen::VectorXd& residual) { return 0.5 * residual.squaredNorm(); }

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step) {
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd plus = x, minus = x;
    plus[j] += h;
    minus[j] -= h;
    const Eigen::VectorXd column = (f(plus) - f(minus)) / (plus[j] - minus[j]);
    if (j == 0) jac.resize(column.size(), x.size());
    jac.col(j) = column;
  }
  return jac;
}

LandmarkProblem::LandmarkProblem(const FaceModel& model, const LandmarkSet& landmarks,
                                 PriorWeights priors, std::uint32_t groups, FitInit reference)
    : model_(model), landmarks_(landmarks), priors_(priors), reference_(std::move(reference)) {
  check_params(model_, reference_.params);
  validate(reference_.camera);
  validate(landmarks_);

  if (groups & kCameraGroup) slots_.push_back({SlotKind::kScale, 0});
  if (groups & kTranslationGroup) {
    const int axes = reference_.camera.mode == Projection::kPinhole ? 3 : 2;
    for (int a = 0; a < axes; ++a) slots_.push_back({SlotKind::kTranslation, a});
  }
  const auto add_joint = [&](std::optional<int> joint) {
    if (!joint) return;
    for (int a = 0; a < 3; ++a) slots_.push_back({SlotKind::kRotation, 3 * *joint + a});
  };
  if (groups & kGlobalPoseGroup) add_joint(0);
  if (groups & kNeckPoseGroup) add_joint(model_.joint_index("neck"));
  if (groups & kJawPoseGroup) add_joint(model_.joint_index("jaw"));
  if (groups & kExpressionGroup) {
    for (int j = 0; j < model_.num_expression(); ++j) slots_.push_back({SlotKind::kExpression, j});
  }
  if (groups & kShapeGroup) {
    for (int j = 0; j < model_.num_shape(); ++j) slots_.push_back({SlotKind::kShape, j});
  }

  std::unordered_map<int, int> row_of;
  for (const LandmarkBinding& b : model_.landmark_embedding) {
    std::array<int, 3> rows{};
    for (int c = 0; c < 3; ++c) {
      const int v = model_.triangles.at(b.triangle)[c];
      auto [it, inserted] = row_of.emplace(v, static_cast<int>(vertex_ids_.size()));
      if (inserted) vertex_ids_.push_back(v);
      rows[c] = it->second;
    }
    landmark_rows_.push_back(rows);
  }
}

std::string LandmarkProblem::unknown_name(Eigen::Index i) const {
  const Slot& s = slots_.at(static_cast<std::size_t>(i));
  switch (s.kind) {
    case SlotKind::kScale: return "camera.scale";
    case SlotKind::kTranslation: return pose_name(model_, 3 * model_.num_joints() + s.index);
    case SlotKind::kRotation: return pose_name(model_, s.index);
    case SlotKind::kExpression: return "expression." + model_.param_names[s.index];
    case SlotKind::kShape: return "shape." + std::to_string(s.index);
  }
  return "?";
}

Eigen::VectorXd LandmarkProblem::pack(const FitInit& estimate) const {
  Eigen::VectorXd x(num_unknowns());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    double v = 0.0;
    switch (s.kind) {
      case SlotKind::kScale: v = estimate.camera.scale; break;
      case SlotKind::kTranslation: v = estimate.params.translation[s.index]; break;
      case SlotKind::kRotation: v = estimate.params.joint_rotations[s.index]; break;
      case SlotKind::kExpression: v = estimate.params.expression[s.index]; break;
      case SlotKind::kShape: v = estimate.params.shape[s.index]; break;
    }
    x[static_cast<Eigen::Index>(i)] = v;
  }
  return x;
}

FitInit LandmarkProblem::unpack(const Eigen::VectorXd& x) const {
  FitInit out = reference_;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    const double v = x[static_cast<Eigen::Index>(i)];
    switch (s.kind) {
      case SlotKind::kScale: out.camera.scale = v; break;
      case SlotKind::kTranslation: out.params.translation[s.index] = v; break;
      case SlotKind::kRotation: out.params.joint_rotations[s.index] = v; break;
      case SlotKind::kExpression: out.params.expression[s.index] = v; break;
      case SlotKind::kShape: out.params.shape[s.index] = v; break;
    }
  }
  return out;
}

Eigen::VectorXd LandmarkProblem::residuals(const Eigen::VectorXd& x) const {
  const FitInit est = unpack(x);
  const VertexMatrix posed = instantiate_vertices(model_, est.params, vertex_ids_);
  VertexMatrix marks(kNumLandmarks, 3);
  for (int l = 0; l < kNumLandmarks; ++l) {
    const auto& w = model_.landmark_embedding[l].barycentric;
    const auto& rows = landmark_rows_[l];
    marks.row(l) = w[0] * posed.row(rows[0]) + w[1] * posed.row(rows[1]) + w[2] * posed.row(rows[2]);
  }
  const PixelMatrix px = project(marks, est.camera);

  const int ns = model_.num_shape(), ne = model_.num_expression();
  Eigen::VectorXd r(2 * kNumLandmarks + ns + ne);
  for (int l = 0; l < kNumLandmarks; ++l) {
    const Landmark2D& obs = landmarks_.points[l];
    r[2 * l] = obs.confidence * (px(l, 0) - obs.x);
    r[2 * l + 1] = obs.confidence * (px(l, 1) - obs.y);
  }
  const double ws = std::sqrt(priors_.shape), we = std::sqrt(priors_.expression);
  for (int j = 0; j < ns; ++j) r[2 * kNumLandmarks + j] = ws * est.params.shape[j];
  for (int j = 0; j < ne; ++j) r[2 * kNumLandmarks + ns + j] = we * est.params.expression[j];
  return r;
}

Eigen::MatrixXd LandmarkProblem::jacobian(const Eigen::VectorXd& x, double rel_step) const {
  return numeric_jacobian([this](const Eigen::VectorXd& v) { return residuals(v); }, x, rel_step);
}

Eigen::VectorXd residuals(const FaceModel& model, const ModelParams& params,
                          const CameraParams& camera, const LandmarkSet& landmarks,
                          const PriorWeights& priors) {
  const LandmarkProblem problem(model, landmarks, priors, 0u, FitInit{params, camera});
  return problem.residuals(Eigen::VectorXd());
}

double rms_landmark_error(const FaceModel& model, const ModelParams& params,
                          const CameraParams& camera, const LandmarkSet& landmarks) {
  const PixelMatrix px = project(landmarks3d(instantiate(model, params), model), camera);
  double sum = 0.0;
  int count = 0;
  for (int l = 0; l < kNumLandmarks; ++l) {
    const Landmark2D& obs = landmarks.points[l];
    if (obs.confidence <= 0.0) continue;
    const double dx = px(l, 0) - obs.x, dy = px(l, 1) - obs.y;
    sum += dx * dx + dy * dy;
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / count);
}

namespace {

struct StageOutcome {
  bool converged = false;
  int iterations = 0;
};

// Evaluates the cost, treating points that leave the pinhole frustum as an
// infinitely bad step rather than an error.
std::optional<std::pair<Eigen::VectorXd, double>> try_evaluate(const LandmarkProblem& problem,
                                                               const Eigen::VectorXd& x) {
  try {
    Eigen::VectorXd r = problem.residuals(x);
    const double c = cost(r);
    if (!std::isfinite(c)) return std::nullopt;
    return std::make_pair(std::move(r), c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kProjection || e.kind() == ErrorKind::kNonFinite) return std::nullopt;
    throw;
  }
}

StageOutcome run_stage(const LandmarkProblem& problem, const FitConfig& config, FitInit& estimate,
                       std::vector<double>& history) {
  StageOutcome outcome;
  if (problem.num_unknowns() == 0) {
    outcome.converged = true;
    return outcome;
  }
  Eigen::VectorXd x = problem.pack(estimate);
  Eigen::VectorXd r = problem.residuals(x);
  double current = cost(r);
  double damping = config.initial_damping;

  while (outcome.iterations < config.max_iterations) {
    ++outcome.iterations;
    if (current == 0.0) {
      outcome.converged = true;
      break;
    }
    const Eigen::MatrixXd jac = problem.jacobian(x, config.jacobian_step);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    for (Eigen::Index j = 0; j < normal.rows(); ++j) {
      if (!(normal(j, j) > 0.0)) {
        throw Error(ErrorKind::kSingularSystem,
                    "singular normal equations: " + problem.unknown_name(j) +
                        " has no effect on the residuals");
      }
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += damping * normal.diagonal();
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::kSingularSystem, "damped normal equations could not be factored");
      }
      const Eigen::VectorXd step = solver.solve(-gradient);
      if (step.allFinite()) {
        const Eigen::VectorXd candidate = x + step;
        if (auto eval = try_evaluate(problem, candidate); eval && eval->second < current) {
          const double decrease = (current - eval->second) / current;
          x = candidate;
          r = std::move(eval->first);
          current = eval->second;
          history.push_back(current);
          damping = std::max(damping / config.damping_down, 1e-15);
          accepted = true;
          if (decrease < config.tolerance) outcome.converged = true;
          continue;
        }
      }
      damping *= config.damping_up;
      if (damping > 1e16) {
        // No step lowers the cost at working precision.
        outcome.converged = true;
        break;
      }
    }
    if (outcome.converged) break;
  }
  estimate = problem.unpack(x);
  return outcome;
}

}  // namespace

FitResult fit_landmarks(const FaceModel& model, const LandmarkSet& landmarks,
                        const FitConfig& config, const std::optional<FitInit>& init) {
  validate(config);
  validate(landmarks);
  FitInit estimate = init ? *init : FitInit{ModelParams::zeros(model), config.initial_camera};
  check_params(model, estimate.params);

  FitResult result;
  result.cost_history.push_back(
      cost(residuals(model, estimate.params, estimate.camera, landmarks, config.priors)));
  StageOutcome last;
  for (const std::uint32_t groups : config.stages) {
    const LandmarkProblem problem(model, landmarks, config.priors, groups, estimate);
    last = run_stage(problem, config, estimate, result.cost_history);
    result.iterations += last.iterations;
  }
  result.params = estimate.params;
  result.camera = estimate.camera;
  result.converged = last.converged;
  result.rms_error = rms_landmark_error(model, result.params, result.camera, landmarks);
  return result;
}

}  // namespace facesweep
