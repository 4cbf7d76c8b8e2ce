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

#include "facesweep/face_model.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "facesweep/error.hpp"

namespace facesweep {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorKind::kSchema, "invalid face model: " + what);
}

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

Mat3 skew(const Vec3& w) {
  Mat3 k;
  k << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return k;
}

}  // namespace

std::optional<int> FaceModel::joint_index(std::string_view name) const {
  for (int j = 0; j < num_joints(); ++j) {
    if (joints[j].name == name) return j;
  }
  return std::nullopt;
}

std::optional<int> FaceModel::expression_index(std::string_view name) const {
  for (int i = 0; i < static_cast<int>(param_names.size()); ++i) {
    if (param_names[i] == name) return i;
  }
  return std::nullopt;
}

void validate(const FaceModel& model) {
  const int n = model.num_vertices();
  if (n == 0) schema_error("no vertices");
  if (!all_finite(model.template_vertices)) schema_error("non-finite template vertex");
  for (std::size_t t = 0; t < model.triangles.size(); ++t) {
    for (int idx : model.triangles[t]) {
      if (idx < 0 || idx >= n) {
        schema_error("triangle " + std::to_string(t) + " references vertex " +
                     std::to_string(idx) + " of " + std::to_string(n));
      }
    }
  }
  if (model.shape_basis.rows() != 3 * n) schema_error("shape basis must have 3N rows");
  if (model.expression_basis.rows() != 3 * n) {
    schema_error("expression basis must have 3N rows");
  }
  if (!all_finite(model.shape_basis) || !all_finite(model.expression_basis)) {
    schema_error("non-finite blendshape entry");
  }
  if (static_cast<int>(model.param_names.size()) != model.num_expression()) {
    schema_error("param_names must label every expression dimension");
  }

  const int k = model.num_joints();
  if (k == 0) schema_error("no joints");
  if (model.joints[0].parent.has_value()) schema_error("joint 0 must be the root");
  std::unordered_set<std::string> names;
  for (int j = 0; j < k; ++j) {
    const Joint& joint = model.joints[j];
    if (!names.insert(joint.name).second) schema_error("duplicate joint name " + joint.name);
    if (!joint.rest_position.allFinite()) schema_error("non-finite joint position");
    if (j == 0) continue;
    // Parents precede children, so the hierarchy is a single tree under the
    // root with no cycles.
    if (!joint.parent || *joint.parent < 0 || *joint.parent >= j) {
      schema_error("joint " + joint.name + " must have a parent listed before it");
    }
  }

  if (model.skin_weights.rows() != n || model.skin_weights.cols() != k) {
    schema_error("skin weights must be N x joints");
  }
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double w = model.skin_weights(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        schema_error("negative skin weight at vertex " + std::to_string(i));
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      schema_error("skin weights of vertex " + std::to_string(i) + " sum to " +
                   std::to_string(sum));
    }
  }

  if (static_cast<int>(model.landmark_embedding.size()) != kNumLandmarks) {
    schema_error("landmark embedding must have 68 entries");
  }
  for (int l = 0; l < kNumLandmarks; ++l) {
    const LandmarkBinding& b = model.landmark_embedding[l];
    if (b.triangle < 0 || b.triangle >= static_cast<int>(model.triangles.size())) {
      schema_error("landmark " + std::to_string(l) + " references a missing triangle");
    }
    double sum = 0.0;
    for (double w : b.barycentric) {
      if (!(w >= 0.0 && w <= 1.0)) {
        schema_error("landmark " + std::to_string(l) + " barycentric weight outside [0,1]");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      schema_error("landmark " + std::to_string(l) + " barycentric weights do not sum to 1");
    }
  }
}

ModelParams ModelParams::zeros(const FaceModel& model) {
  ModelParams p;
  p.shape = Eigen::VectorXd::Zero(model.num_shape());
  p.expression = Eigen::VectorXd::Zero(model.num_expression());
  p.joint_rotations = Eigen::VectorXd::Zero(3 * model.num_joints());
  p.translation = Vec3::Zero();
  return p;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.shape.size() == b.shape.size() && a.expression.size() == b.expression.size() &&
         a.joint_rotations.size() == b.joint_rotations.size() && a.shape == b.shape &&
         a.expression == b.expression && a.joint_rotations == b.joint_rotations &&
         a.translation == b.translation;
}

void check_params(const FaceModel& model, const ModelParams& params) {
  if (params.shape.size() != model.num_shape() ||
      params.expression.size() != model.num_expression() ||
      params.joint_rotations.size() != 3 * model.num_joints()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "params (" + std::to_string(params.shape.size()) + " shape, " +
                    std::to_string(params.expression.size()) + " expression, " +
                    std::to_string(params.joint_rotations.size()) +
                    " rotation) do not match model (" + std::to_string(model.num_shape()) +
                    ", " + std::to_string(model.num_expression()) + ", " +
                    std::to_string(3 * model.num_joints()) + ")");
  }
  if (!params.shape.allFinite() || !params.expression.allFinite() ||
      !params.joint_rotations.allFinite() || !params.translation.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "non-finite model parameter");
  }
}

int pose_size(const FaceModel& model) { return 3 * model.num_joints() + 3; }

double pose_value(const ModelParams& params, int index) {
  const int rot = static_cast<int>(params.joint_rotations.size());
  return index < rot ? params.joint_rotations[index] : params.translation[index - rot];
}

void set_pose_value(ModelParams& params, int index, double value) {
  const int rot = static_cast<int>(params.joint_rotations.size());
  if (index < rot) {
    params.joint_rotations[index] = value;
  } else {
    params.translation[index - rot] = value;
  }
}

std::string pose_name(const FaceModel& model, int index) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  const int rot = 3 * model.num_joints();
  if (index < rot) return model.joints[index / 3].name + "." + kAxes[index % 3];
  return std::string("translation.") + kAxes[index - rot];
}

std::optional<int> pose_index(const FaceModel& model, std::string_view name) {
  std::string resolved(name);
  if (name == "yaw") resolved = model.joints[0].name + ".y";
  if (name == "pitch") resolved = model.joints[0].name + ".x";
  if (name == "roll") resolved = model.joints[0].name + ".z";
  if (name == "jaw_open") resolved = "jaw.x";
  for (int i = 0; i < pose_size(model); ++i) {
    if (pose_name(model, i) == resolved) return i;
  }
  return std::nullopt;
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-8) return Mat3::Identity() + skew(axis_angle);
  const Mat3 k = skew(axis_angle / theta);
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
}

std::vector<RigidTransform> joint_world_transforms(const FaceModel& model,
                                                   const ModelParams& params) {
  const int k = model.num_joints();
  std::vector<RigidTransform> world(k);
  for (int j = 0; j < k; ++j) {
    const Vec3& pivot = model.joints[j].rest_position;
    RigidTransform local;
    local.rotation = rotation_from_axis_angle(params.rotation(j));
    local.translation = pivot - local.rotation * pivot;
    if (const auto parent = model.joints[j].parent) {
      const RigidTransform& up = world[*parent];
      world[j].rotation = up.rotation * local.rotation;
      world[j].translation = up.rotation * local.translation + up.translation;
    } else {
      world[j] = local;
    }
  }
  return world;
}

namespace {

Vec3 pose_vertex(const FaceModel& model, const ModelParams& params,
                 std::span<const RigidTransform> world, int i) {
  Vec3 rest = model.template_vertices.row(i).transpose();
  for (int a = 0; a < 3; ++a) {
    const int row = 3 * i + a;
    double offset = 0.0;
    for (int j = 0; j < model.num_shape(); ++j) {
      offset += model.shape_basis(row, j) * params.shape[j];
    }
    for (int j = 0; j < model.num_expression(); ++j) {
      offset += model.expression_basis(row, j) * params.expression[j];
    }
    rest[a] += offset;
  }
  // Blending displacements rather than positions keeps the rest pose exact:
  // identity transforms contribute exactly zero.
  Vec3 displacement = Vec3::Zero();
  for (int j = 0; j < model.num_joints(); ++j) {
    const double w = model.skin_weights(i, j);
    if (w == 0.0) continue;
    displacement += w * (world[j].apply(rest) - rest);
  }
  return rest + displacement + params.translation;
}

}  // namespace

VertexMatrix instantiate_vertices(const FaceModel& model, const ModelParams& params,
                                  std::span<const int> indices) {
  check_params(model, params);
  const auto world = joint_world_transforms(model, params);
  VertexMatrix out(static_cast<Eigen::Index>(indices.size()), 3);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int i = indices[r];
    if (i < 0 || i >= model.num_vertices()) {
      throw Error(ErrorKind::kInvalidArgument, "vertex index out of range");
    }
    out.row(static_cast<Eigen::Index>(r)) = pose_vertex(model, params, world, i).transpose();
  }
  return out;
}

VertexMatrix area_weighted_normals(const VertexMatrix& positions,
                                   std::span<const Triangle> triangles) {
  VertexMatrix normals = VertexMatrix::Zero(positions.rows(), 3);
  for (const Triangle& t : triangles) {
    const Vec3 a = positions.row(t[0]).transpose();
    const Vec3 b = positions.row(t[1]).transpose();
    const Vec3 c = positions.row(t[2]).transpose();
    // |cross| is twice the area, so summing raw cross products weights by area.
    const Vec3 n = (b - a).cross(c - a);
    for (int v : t) normals.row(v) += n.transpose();
  }
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const double len = normals.row(i).norm();
    if (len > 0.0 && std::isfinite(len)) {
      normals.row(i) /= len;
    } else {
      normals.row(i) << 0.0, 0.0, 1.0;
    }
  }
  return normals;
}

Mesh instantiate(const FaceModel& model, const ModelParams& params) {
  check_params(model, params);
  const auto world = joint_world_transforms(model, params);
  Mesh mesh;
  mesh.positions.resize(model.num_vertices(), 3);
  for (int i = 0; i < model.num_vertices(); ++i) {
    mesh.positions.row(i) = pose_vertex(model, params, world, i).transpose();
  }
  mesh.triangles = model.triangles;
  mesh.vertex_normals = area_weighted_normals(mesh.positions, mesh.triangles);
  return mesh;
}

VertexMatrix landmarks3d(const Mesh& mesh, const FaceModel& model) {
  VertexMatrix out(kNumLandmarks, 3);
  const auto num_tris = static_cast<int>(mesh.triangles.size());
  for (int l = 0; l < kNumLandmarks; ++l) {
    const LandmarkBinding& b = model.landmark_embedding.at(l);
    if (b.triangle < 0 || b.triangle >= num_tris) {
      throw Error(ErrorKind::kInvalidArgument,
                  "landmark " + std::to_string(l) + " references invalid triangle " +
                      std::to_string(b.triangle));
    }
    const Triangle& t = mesh.triangles[b.triangle];
    out.row(l) = b.barycentric[0] * mesh.positions.row(t[0]) +
                 b.barycentric[1] * mesh.positions.row(t[1]) +
                 b.barycentric[2] * mesh.positions.row(t[2]);
  }
  return out;
}

std::vector<int> landmark_vertex_indices(const FaceModel& model) {
  std::vector<int> out;
  std::unordered_set<int> seen;
  for (const LandmarkBinding& b : model.landmark_embedding) {
    for (int v : model.triangles.at(b.triangle)) {
      if (seen.insert(v).second) out.push_back(v);
    }
  }
  return out;
}

}  // namespace facesweep
