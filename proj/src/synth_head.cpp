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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facesweep/error.hpp"
#include "facesweep/face_model.hpp"
#include "facesweep/rng.hpp"

namespace facesweep {

namespace {

constexpr int kLatitudeBands = 40;
constexpr int kLongitudeSteps = 64;

double smoothstep(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double gauss2(double dx, double dy, double sx, double sy) {
  return std::exp(-0.5 * (dx * dx / (sx * sx) + dy * dy / (sy * sy)));
}

// Front-facing weight: 1 on the face, fading out toward the sides.
double front(const Vec3& p) { return smoothstep(0.0, 0.3, p.z()); }

struct HeadShape {
  Vec3 radii;
  double nose;
  double brow;
  double chin;
};

Vec3 head_point(const HeadShape& h, const Vec3& dir) {
  Vec3 p(h.radii.x() * dir.x(), h.radii.y() * dir.y(), h.radii.z() * dir.z());
  if (p.z() > 0.0) {
    const double f = front(p);
    p.z() += f * h.nose * gauss2(p.x(), p.y() + 0.08, 0.07, 0.14);
    p.z() += f * h.brow * gauss2(0.0, p.y() - 0.3, 1.0, 0.05) * smoothstep(0.55, 0.3, std::abs(p.x()));
    p.z() += f * h.chin * gauss2(p.x(), p.y() + 0.8, 0.2, 0.08);
  }
  return p;
}

// Canonical 68-point layout (image-left to image-right order of the common
// 68-point annotation scheme) as frontal (x, y) in model units.
std::vector<Eigen::Vector2d> canonical_landmarks_2d(Rng& rng) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(kNumLandmarks);
  const double pi = std::numbers::pi;
  // 0-16 jaw contour
  for (int i = 0; i <= 16; ++i) {
    const double a = -pi / 2 + pi * i / 16.0;
    pts.emplace_back(0.68 * std::sin(a), 0.02 - 0.86 * std::cos(a));
  }
  // 17-21 and 22-26 brows
  for (int side : {-1, 1}) {
    for (int i = 0; i < 5; ++i) {
      const int ii = side < 0 ? i : 4 - i;
      const double x = side * (0.55 - 0.1 * ii);
      const double y = 0.33 + 0.05 * std::sin(pi * (ii + 0.5) / 5.0);
      pts.emplace_back(x, y);
    }
  }
  // 27-30 nose bridge, 31-35 nostrils
  for (int i = 0; i < 4; ++i) pts.emplace_back(0.0, 0.22 - 0.11 * i);
  for (int i = 0; i < 5; ++i) pts.emplace_back(-0.13 + 0.065 * i, -0.2 - 0.02 * (i == 2));
  // 36-41 and 42-47 eyes
  for (int side : {-1, 1}) {
    const Eigen::Vector2d c(0.29 * side, 0.17);
    const double angles[] = {pi, 2 * pi / 3, pi / 3, 0.0, -pi / 3, -2 * pi / 3};
    for (double a : angles) pts.push_back(c + Eigen::Vector2d(0.11 * std::cos(a), 0.045 * std::sin(a)));
  }
  // 48-59 outer lip, 60-67 inner lip
  const Eigen::Vector2d mouth(0.0, -0.47);
  for (int i = 0; i < 12; ++i) {
    const double a = pi - 2 * pi * i / 12.0;
    pts.push_back(mouth + Eigen::Vector2d(0.22 * std::cos(a), 0.09 * std::sin(a)));
  }
  for (int i = 0; i < 8; ++i) {
    const double a = pi - 2 * pi * i / 8.0;
    pts.push_back(mouth + Eigen::Vector2d(0.16 * std::cos(a), 0.035 * std::sin(a)));
  }
  // Draws are named so their order does not depend on argument evaluation.
  for (auto& p : pts) {
    const double dx = rng.uniform(-0.01, 0.01);
    const double dy = rng.uniform(-0.01, 0.01);
    p += Eigen::Vector2d(dx, dy);
  }
  return pts;
}

// Embeds each 2D point on the front-most triangle it falls in when the
// template is viewed along -z.
std::vector<LandmarkBinding> embed_landmarks(const VertexMatrix& v,
                                             const std::vector<Triangle>& tris,
                                             const std::vector<Eigen::Vector2d>& pts) {
  std::vector<LandmarkBinding> out;
  for (const auto& q : pts) {
    double best_z = -1e300;
    LandmarkBinding best{-1, {1.0, 0.0, 0.0}};
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      const auto& tri = tris[t];
      const Eigen::Vector2d a = v.row(tri[0]).head<2>().transpose();
      const Eigen::Vector2d b = v.row(tri[1]).head<2>().transpose();
      const Eigen::Vector2d c = v.row(tri[2]).head<2>().transpose();
      const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      if (std::abs(area) < 1e-14) continue;
      const double w1 = ((b - q).x() * (c - q).y() - (b - q).y() * (c - q).x()) / area;
      const double w2 = ((c - q).x() * (a - q).y() - (c - q).y() * (a - q).x()) / area;
      const double w3 = 1.0 - w1 - w2;
      if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0) continue;
      const double z = w1 * v(tri[0], 2) + w2 * v(tri[1], 2) + w3 * v(tri[2], 2);
      if (z > best_z) {
        best_z = z;
        best = {t, {w1, w2, w3}};
      }
    }
    if (best.triangle < 0) {
      throw Error(ErrorKind::kInvalidArgument, "landmark outside the synthetic head silhouette");
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

FaceModel synth_head(std::uint64_t seed) {
  Rng rng(seed);
  const auto jitter = [&rng](double value, double rel) {
    return value * (1.0 + rel * rng.uniform(-1.0, 1.0));
  };

  HeadShape head;
  const double rx = jitter(0.78, 0.03);
  const double ry = jitter(1.0, 0.02);
  const double rz = jitter(0.88, 0.03);
  head.radii = Vec3(rx, ry, rz);
  head.nose = jitter(0.16, 0.1);
  head.brow = jitter(0.04, 0.1);
  head.chin = jitter(0.05, 0.1);

  FaceModel model;
  const int rings = kLatitudeBands - 1;
  const int n = 2 + rings * kLongitudeSteps;
  model.template_vertices.resize(n, 3);
  const double pi = std::numbers::pi;
  model.template_vertices.row(0) = head_point(head, Vec3(0, 1, 0)).transpose();
  for (int r = 0; r < rings; ++r) {
    const double phi = pi * (r + 1) / kLatitudeBands;
    for (int j = 0; j < kLongitudeSteps; ++j) {
      const double theta = 2.0 * pi * j / kLongitudeSteps;
      const Vec3 dir(std::sin(phi) * std::sin(theta), std::cos(phi),
                     std::sin(phi) * std::cos(theta));
      model.template_vertices.row(1 + r * kLongitudeSteps + j) = head_point(head, dir).transpose();
    }
  }
  model.template_vertices.row(n - 1) = head_point(head, Vec3(0, -1, 0)).transpose();

  const auto ring_vertex = [](int r, int j) {
    return 1 + r * kLongitudeSteps + (j % kLongitudeSteps);
  };
  for (int j = 0; j < kLongitudeSteps; ++j) {
    model.triangles.push_back({0, ring_vertex(0, j), ring_vertex(0, j + 1)});
  }
  for (int r = 0; r + 1 < rings; ++r) {
    for (int j = 0; j < kLongitudeSteps; ++j) {
      const int a = ring_vertex(r, j), b = ring_vertex(r, j + 1);
      const int c = ring_vertex(r + 1, j), d = ring_vertex(r + 1, j + 1);
      model.triangles.push_back({a, c, b});
      model.triangles.push_back({b, c, d});
    }
  }
  for (int j = 0; j < kLongitudeSteps; ++j) {
    model.triangles.push_back({n - 1, ring_vertex(rings - 1, j + 1), ring_vertex(rings - 1, j)});
  }
  // Wind every triangle outward; the head is star-shaped about the origin.
  for (Triangle& t : model.triangles) {
    const Vec3 a = model.template_vertices.row(t[0]).transpose();
    const Vec3 b = model.template_vertices.row(t[1]).transpose();
    const Vec3 c = model.template_vertices.row(t[2]).transpose();
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(t[1], t[2]);
  }

  // Blendshape fields, evaluated on the template.
  const double jaw_amp = jitter(0.12, 0.1), smile_amp = jitter(0.05, 0.1);
  const double pucker_amp = jitter(0.3, 0.1), brow_amp = jitter(0.06, 0.1);
  const double frown_amp = jitter(0.04, 0.1);
  const double width_amp = jitter(0.1, 0.1), length_amp = jitter(0.06, 0.1);
  const double nose_amp = jitter(0.08, 0.1), eyes_amp = jitter(0.04, 0.1);

  model.param_names = {"jaw", "smile", "pucker", "eyebrow", "frown"};
  model.expression_basis = Eigen::MatrixXd::Zero(3 * n, 5);
  model.shape_basis = Eigen::MatrixXd::Zero(3 * n, 4);
  model.skin_weights = Eigen::MatrixXd::Zero(n, 3);

  for (int i = 0; i < n; ++i) {
    const Vec3 p = model.template_vertices.row(i).transpose();
    const double f = front(p);
    const double side = p.x() >= 0.0 ? 1.0 : -1.0;
    auto expr = model.expression_basis.middleRows(3 * i, 3);
    auto shape = model.shape_basis.middleRows(3 * i, 3);

    const double lower_jaw = smoothstep(-0.42, -0.55, p.y()) * f;
    expr(1, 0) = -jaw_amp * lower_jaw;
    expr(2, 0) = -0.02 * lower_jaw;

    const double corner = gauss2(std::abs(p.x()) - 0.22, p.y() + 0.47, 0.09, 0.09) * f;
    expr(0, 1) = side * smile_amp * corner;
    expr(1, 1) = smile_amp * corner;

    const double lips = gauss2(p.x(), p.y() + 0.47, 0.2, 0.12) * f;
    expr(0, 2) = -pucker_amp * p.x() * lips;
    expr(2, 2) = 0.06 * lips;

    const double brows = gauss2(std::abs(p.x()) - 0.33, p.y() - 0.35, 0.2, 0.1) * f;
    expr(1, 3) = brow_amp * brows;

    const double inner_brows = gauss2(std::abs(p.x()) - 0.15, p.y() - 0.32, 0.09, 0.08) * f;
    expr(0, 4) = -side * 0.75 * frown_amp * inner_brows;
    expr(1, 4) = -frown_amp * inner_brows;

    // Shape: lower-face width, face length, nose, eye spacing.
    shape(0, 0) = width_amp * p.x() * smoothstep(0.1, -0.4, p.y());
    shape(1, 1) = length_amp * p.y();
    const double nose = gauss2(p.x(), p.y() + 0.05, 0.12, 0.2) * f;
    shape(1, 2) = -0.3 * nose_amp * nose;
    shape(2, 2) = nose_amp * nose;
    const double eyes = gauss2(std::abs(p.x()) - 0.29, p.y() - 0.17, 0.12, 0.08) * f;
    shape(0, 3) = side * eyes_amp * eyes;

    // Skinning: jaw on the lower front face, global on the neck stub,
    // neck everywhere else.
    const double w_jaw = smoothstep(-0.35, -0.55, p.y()) * smoothstep(0.0, 0.25, p.z());
    const double neck_stub = smoothstep(-0.75, -0.95, p.y());
    model.skin_weights(i, 2) = w_jaw;
    model.skin_weights(i, 0) = (1.0 - w_jaw) * neck_stub;
    model.skin_weights(i, 1) = 1.0 - model.skin_weights(i, 2) - model.skin_weights(i, 0);
  }

  model.joints = {
      {"global", std::nullopt, Vec3(0.0, 0.0, 0.0)},
      {"neck", 0, Vec3(0.0, -0.55, -0.15)},
      {"jaw", 1, Vec3(0.0, -0.2, -0.35)},
  };

  model.landmark_embedding =
      embed_landmarks(model.template_vertices, model.triangles, canonical_landmarks_2d(rng));
  validate(model);
  return model;
}

ModelParams sample_identity(const FaceModel& model, std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto signed_magnitude = [&rng](double lo, double hi) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return sign * rng.uniform(lo, hi);
  };
  ModelParams p = ModelParams::zeros(model);
  for (int j = 0; j < model.num_shape(); ++j) p.shape[j] = signed_magnitude(0.3, 1.2);
  for (int j = 0; j < model.num_expression(); ++j) p.expression[j] = signed_magnitude(0.2, 0.8);
  const double pitch = rng.uniform(-0.15, 0.15);
  const double yaw = signed_magnitude(0.15, 0.6);
  const double roll = rng.uniform(-0.1, 0.1);
  p.set_rotation(0, Vec3(pitch, yaw, roll));
  if (const auto jaw = model.joint_index("jaw")) {
    p.set_rotation(*jaw, Vec3(rng.uniform(0.02, 0.15), 0.0, 0.0));
  }
  return p;
}

}  // namespace facesweep
