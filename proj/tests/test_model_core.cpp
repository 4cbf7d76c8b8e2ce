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

#include <cmath>

#include "doctest.h"

#include "facesweep/error.hpp"
#include "facesweep/face_model.hpp"
#include "facesweep/rng.hpp"
#include "facesweep/serialization.hpp"

using namespace facesweep;

namespace {

const FaceModel& head() {
  static const FaceModel model = synth_head(0);
  return model;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kInvalidArgument;
}

// Rotation about an arbitrary axis built from scratch: R = cos I + sin [k]x + (1 - cos) k k^T.
Mat3 axis_angle_oracle(const Vec3& w) {
  const double theta = w.norm();
  if (theta == 0.0) return Mat3::Identity();
  const Vec3 k = w / theta;
  Mat3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return std::cos(theta) * Mat3::Identity() + std::sin(theta) * kx +
         (1.0 - std::cos(theta)) * k * k.transpose();
}

}  // namespace

TEST_CASE("synthetic head satisfies every model invariant for many seeds") {
  for (std::uint64_t seed : {0ull, 1ull, 2ull, 17ull, 12345ull}) {
    const FaceModel m = synth_head(seed);
    CHECK_NOTHROW(validate(m));
    CHECK(m.num_joints() == 3);
    CHECK(m.landmark_embedding.size() == kNumLandmarks);
    CHECK(m.param_names.size() == static_cast<std::size_t>(m.num_expression()));
  }
}

TEST_CASE("synth_head is deterministic down to the serialized bytes") {
  CHECK(model_to_json(synth_head(3)).dump() == model_to_json(synth_head(3)).dump());
  CHECK(model_to_json(synth_head(3)).dump() != model_to_json(synth_head(4)).dump());
}

TEST_CASE("validate rejects broken models") {
  SUBCASE("triangle index out of range") {
    FaceModel m = head();
    m.triangles[5][1] = m.num_vertices();
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
  SUBCASE("skin weights not summing to one") {
    FaceModel m = head();
    m.skin_weights(10, 0) += 1e-3;
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
  SUBCASE("negative skin weight") {
    FaceModel m = head();
    m.skin_weights.row(3).setZero();
    m.skin_weights(3, 0) = 1.5;
    m.skin_weights(3, 1) = -0.5;
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
  SUBCASE("barycentric weights off the simplex") {
    FaceModel m = head();
    m.landmark_embedding[0].barycentric = {0.5, 0.5, 0.1};
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
  SUBCASE("joint cycle") {
    FaceModel m = head();
    m.joints[1].parent = 2;
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
  SUBCASE("a second root") {
    FaceModel m = head();
    m.joints[2].parent.reset();
    CHECK(kind_of([&] { validate(m); }) == ErrorKind::kSchema);
  }
}

TEST_CASE("model JSON round-trips exactly") {
  const FaceModel back = model_from_json(model_to_json(head()));
  CHECK(back.template_vertices == head().template_vertices);
  CHECK(back.shape_basis == head().shape_basis);
  CHECK(back.expression_basis == head().expression_basis);
  CHECK(back.skin_weights == head().skin_weights);
  CHECK(back.triangles == head().triangles);
  CHECK(back.param_names == head().param_names);
  CHECK(model_to_json(back).dump() == model_to_json(head()).dump());
}

TEST_CASE("zero parameters reproduce the template exactly") {
  const Mesh mesh = instantiate(head(), ModelParams::zeros(head()));
  CHECK(mesh.positions == head().template_vertices);
}

TEST_CASE("a unit shape coefficient adds its basis column") {
  ModelParams p = ModelParams::zeros(head());
  p.shape[0] = 1.0;
  const Mesh mesh = instantiate(head(), p);
  for (int i = 0; i < head().num_vertices(); ++i) {
    for (int a = 0; a < 3; ++a) {
      CHECK(mesh.positions(i, a) == doctest::Approx(head().template_vertices(i, a) +
                                                    head().shape_basis(3 * i + a, 0))
                                        .epsilon(1e-15));
    }
  }
}

TEST_CASE("blendshape displacement is linear in the coefficients") {
  Rng rng(5);
  ModelParams p = ModelParams::zeros(head());
  for (int j = 0; j < head().num_shape(); ++j) p.shape[j] = rng.uniform(-1, 1);
  for (int j = 0; j < head().num_expression(); ++j) p.expression[j] = rng.uniform(-1, 1);
  const VertexMatrix base = head().template_vertices;
  const VertexMatrix d1 = instantiate(head(), p).positions - base;
  for (double a : {-2.0, 0.5, 3.0}) {
    ModelParams q = p;
    q.shape *= a;
    q.expression *= a;
    const VertexMatrix da = instantiate(head(), q).positions - base;
    CHECK((da - a * d1).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Rodrigues matches an independent axis-angle oracle") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const Vec3 w{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK((rotation_from_axis_angle(w) - axis_angle_oracle(w)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(rotation_from_axis_angle(Vec3::Zero()) == Mat3::Identity());
  const Vec3 tiny(1e-10, -2e-10, 3e-10);
  CHECK((rotation_from_axis_angle(tiny) - axis_angle_oracle(tiny)).cwiseAbs().maxCoeff() < 1e-18);
}

TEST_CASE("a vertex fully bound to the jaw follows the rigid jaw transform") {
  FaceModel m = head();
  const int jaw = *m.joint_index("jaw");
  const int neck = *m.joint_index("neck");
  const int v = 123;
  m.skin_weights.row(v).setZero();
  m.skin_weights(v, jaw) = 1.0;
  ModelParams p = ModelParams::zeros(m);
  p.set_rotation(jaw, Vec3(0.3, 0.0, 0.0));
  p.set_rotation(neck, Vec3(0.0, 0.1, 0.05));
  p.set_rotation(0, Vec3(0.02, -0.2, 0.0));
  p.translation = Vec3(0.1, -0.2, 0.3);

  // Chain global -> neck -> jaw by hand: each joint rotates about its rest position.
  const auto about = [&](int j, const Vec3& x) {
    const Vec3 c = m.joints[j].rest_position;
    return Vec3(axis_angle_oracle(p.rotation(j)) * (x - c) + c);
  };
  const Vec3 rest = m.template_vertices.row(v).transpose();
  const Vec3 expected = about(0, about(neck, about(jaw, rest))) + p.translation;
  const Vec3 got = instantiate(m, p).positions.row(v).transpose();
  CHECK((got - expected).norm() < 1e-12);
}

TEST_CASE("pose-only instantiation preserves edges inside rigid groups") {
  const FaceModel& m = head();
  ModelParams p = ModelParams::zeros(m);
  p.set_rotation(0, Vec3(0.1, 0.5, -0.2));
  p.set_rotation(*m.joint_index("jaw"), Vec3(0.25, 0.0, 0.0));
  p.translation = Vec3(0.3, 0.0, -0.1);
  const Mesh posed = instantiate(m, p);
  int checked = 0;
  for (const Triangle& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      Eigen::Index ja, jb;
      if (m.skin_weights.row(a).maxCoeff(&ja) != 1.0 || m.skin_weights.row(b).maxCoeff(&jb) != 1.0) continue;
      if (ja != jb) continue;
      const double before = (m.template_vertices.row(a) - m.template_vertices.row(b)).norm();
      const double after = (posed.positions.row(a) - posed.positions.row(b)).norm();
      CHECK(std::abs(before - after) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("instantiate is pure and the subset path agrees") {
  const ModelParams p = sample_identity(head(), 9);
  const Mesh a = instantiate(head(), p);
  const Mesh b = instantiate(head(), p);
  CHECK(a.positions == b.positions);
  CHECK(a.vertex_normals == b.vertex_normals);
  const std::vector<int> ids = {0, 17, 400, 2497};
  const VertexMatrix sub = instantiate_vertices(head(), p, ids);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(sub.row(i) == a.positions.row(ids[i]));
}

TEST_CASE("vertex normals are unit length and point outward") {
  const Mesh mesh = instantiate(head(), sample_identity(head(), 2));
  const Vec3 centroid = mesh.positions.colwise().mean().transpose();
  int outward = 0;
  for (int i = 0; i < mesh.positions.rows(); ++i) {
    CHECK(std::abs(mesh.vertex_normals.row(i).norm() - 1.0) < 1e-5);
    const Vec3 r = mesh.positions.row(i).transpose() - centroid;
    outward += r.dot(mesh.vertex_normals.row(i).transpose()) > 0 ? 1 : 0;
  }
  CHECK(outward > 0.95 * mesh.positions.rows());
}

TEST_CASE("instantiate rejects bad parameters") {
  ModelParams p = ModelParams::zeros(head());
  p.shape.resize(2);
  CHECK(kind_of([&] { instantiate(head(), p); }) == ErrorKind::kDimensionMismatch);
  p = ModelParams::zeros(head());
  p.expression[1] = std::nan("");
  CHECK(kind_of([&] { instantiate(head(), p); }) == ErrorKind::kNonFinite);
}

TEST_CASE("landmarks follow their barycentric bindings") {
  FaceModel m = head();
  const Mesh mesh = instantiate(m, sample_identity(m, 4));
  const auto corner_of = [&](int t, int c) { return Vec3(mesh.positions.row(m.triangles[t][c]).transpose()); };

  m.landmark_embedding[0] = {42, {1.0, 0.0, 0.0}};
  m.landmark_embedding[1] = {43, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const VertexMatrix lm = landmarks3d(mesh, m);
  CHECK((lm.row(0).transpose() - corner_of(42, 0)).norm() == 0.0);
  const Vec3 centroid = (corner_of(43, 0) + corner_of(43, 1) + corner_of(43, 2)) / 3.0;
  CHECK((lm.row(1).transpose() - centroid).norm() < 1e-15);

  const VertexMatrix orig = landmarks3d(mesh, head());
  for (int k = 0; k < kNumLandmarks; ++k) {
    const auto& b = head().landmark_embedding[k];
    Vec3 expect = Vec3::Zero();
    for (int c = 0; c < 3; ++c) expect += b.barycentric[c] * corner_of(b.triangle, c);
    CHECK((orig.row(k).transpose() - expect).norm() < 1e-14);
  }

  m.landmark_embedding[2].triangle = static_cast<int>(m.triangles.size());
  CHECK(kind_of([&] { landmarks3d(mesh, m); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("the jaw expression moves the jaw region more than the forehead") {
  const FaceModel& m = head();
  ModelParams p = ModelParams::zeros(m);
  p.expression[*m.expression_index("jaw")] = 1.0;
  const Mesh mesh = instantiate(m, p);
  double jaw_dy = 0.0, brow_dy = 0.0;
  int jaw_n = 0, brow_n = 0;
  for (int i = 0; i < m.num_vertices(); ++i) {
    const double y = m.template_vertices(i, 1), z = m.template_vertices(i, 2);
    const double dy = std::abs(mesh.positions(i, 1) - y);
    if (z > 0.3 && y < -0.45) {
      jaw_dy += dy;
      ++jaw_n;
    } else if (z > 0.3 && y > 0.5) {
      brow_dy += dy;
      ++brow_n;
    }
  }
  REQUIRE(jaw_n > 0);
  REQUIRE(brow_n > 0);
  CHECK(jaw_dy / jaw_n > 10.0 * (brow_dy / brow_n + 1e-12));
}

TEST_CASE("pose names and aliases resolve to flat indices") {
  const FaceModel& m = head();
  CHECK(pose_size(m) == 3 * m.num_joints() + 3);
  CHECK(pose_index(m, "yaw") == pose_index(m, "global.y"));
  CHECK(pose_index(m, "pitch") == 0);
  CHECK(pose_index(m, "roll") == 2);
  CHECK(pose_index(m, "jaw_open") == 3 * *m.joint_index("jaw"));
  CHECK(pose_index(m, "translation.z") == pose_size(m) - 1);
  CHECK_FALSE(pose_index(m, "elbow.x").has_value());
  for (int i = 0; i < pose_size(m); ++i) CHECK(pose_index(m, pose_name(m, i)) == i);
}

TEST_CASE("params JSON round-trips") {
  const ModelParams p = sample_identity(head(), 21);
  CHECK(params_from_json(params_to_json(p)) == p);
}
