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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace facesweep {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// N x 3 vertex positions, one row per vertex.
using VertexMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangle = std::array<int, 3>;

inline constexpr int kNumLandmarks = 68;

struct Joint {
  std::string name;
  std::optional<int> parent;  // none only for the root
  Vec3 rest_position = Vec3::Zero();
};

// A landmark lives at fixed barycentric coordinates of one mesh triangle.
struct LandmarkBinding {
  int triangle = 0;
  std::array<double, 3> barycentric{1.0, 0.0, 0.0};
};

// Parametric head: blendshape template, a small joint hierarchy skinned with
// linear blend skinning, and a 68-point landmark embedding.
struct FaceModel {
  VertexMatrix template_vertices;
  std::vector<Triangle> triangles;
  // (3N x n_s): column j holds the flattened (x0, y0, z0, x1, ...) direction
  // of shape coefficient j. Same layout for the expression basis.
  Eigen::MatrixXd shape_basis;
  Eigen::MatrixXd expression_basis;
  std::vector<Joint> joints;
  Eigen::MatrixXd skin_weights;  // N x joints
  std::vector<LandmarkBinding> landmark_embedding;
  std::vector<std::string> param_names;  // one per expression dimension

  int num_vertices() const { return static_cast<int>(template_vertices.rows()); }
  int num_shape() const { return static_cast<int>(shape_basis.cols()); }
  int num_expression() const { return static_cast<int>(expression_basis.cols()); }
  int num_joints() const { return static_cast<int>(joints.size()); }

  std::optional<int> joint_index(std::string_view name) const;
  std::optional<int> expression_index(std::string_view name) const;
};

// Throws Error(kSchema) naming the first violated invariant.
void validate(const FaceModel& model);

// Shape s, expression e, and pose p. Pose holds one axis-angle 3-vector per
// joint (radians, joint order of the model) followed by a global translation.
struct ModelParams {
  Eigen::VectorXd shape;
  Eigen::VectorXd expression;
  Eigen::VectorXd joint_rotations;  // 3 * num_joints
  Vec3 translation = Vec3::Zero();

  static ModelParams zeros(const FaceModel& model);

  Vec3 rotation(int joint) const { return joint_rotations.segment<3>(3 * joint); }
  void set_rotation(int joint, const Vec3& axis_angle) {
    joint_rotations.segment<3>(3 * joint) = axis_angle;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

// Throws kDimensionMismatch or kNonFinite.
void check_params(const FaceModel& model, const ModelParams& params);

// Flat pose addressing used by sweeps: index 3j+a is axis a of joint j, and
// the last three indices are the translation.
int pose_size(const FaceModel& model);
double pose_value(const ModelParams& params, int index);
void set_pose_value(ModelParams& params, int index, double value);
std::string pose_name(const FaceModel& model, int index);
// Accepts "<joint>.x|y|z", "translation.x|y|z" and the aliases
// yaw/pitch/roll (global joint) and jaw_open (jaw joint x).
std::optional<int> pose_index(const FaceModel& model, std::string_view name);

struct Mesh {
  VertexMatrix positions;
  std::vector<Triangle> triangles;
  VertexMatrix vertex_normals;
};

// Rodrigues rotation of an axis-angle vector. Below 1e-8 rad the first-order
// expansion I + [w]x is used.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);

// Rigid transform of every joint in world space, composed parent to child.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};
std::vector<RigidTransform> joint_world_transforms(const FaceModel& model,
                                                   const ModelParams& params);

Mesh instantiate(const FaceModel& model, const ModelParams& params);

// Posed positions of a subset of vertices; row i corresponds to indices[i].
// instantiate() produces the same values for the full vertex set.
VertexMatrix instantiate_vertices(const FaceModel& model, const ModelParams& params,
                                  std::span<const int> indices);

VertexMatrix area_weighted_normals(const VertexMatrix& positions,
                                   std::span<const Triangle> triangles);

// 68 x 3 landmark positions on an instantiated mesh.
VertexMatrix landmarks3d(const Mesh& mesh, const FaceModel& model);

// Vertex indices referenced by the landmark embedding, in first-use order.
std::vector<int> landmark_vertex_indices(const FaceModel& model);

// Deterministic low-poly head for tests and demos. Identical seeds give
// bit-identical models.
FaceModel synth_head(std::uint64_t seed);

// Plausible random identity for a synthetic model: shape, expression and a
// small head pose. Used to populate synthetic cohorts.
ModelParams sample_identity(const FaceModel& model, std::uint64_t seed);

}  // namespace facesweep
