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

#include "facesweep/serialization.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "facesweep/error.hpp"

namespace facesweep {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::kSchema, what); }

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object()) schema("expected a JSON object");
  const auto it = doc.find(key);
  if (it == doc.end()) schema(std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const Json& v, const std::string& what) {
  if (!v.is_number()) schema(what + " must be a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) schema(what + " must be an integer");
  return v.get<int>();
}

Json array_doc(std::vector<long> shape, Json data) {
  return Json{{"shape", std::move(shape)}, {"data", std::move(data)}};
}

// Returns the flat payload after checking the declared shape against
// `expected` (use -1 for "any").
std::vector<double> read_array(const Json& doc, const char* key, std::vector<long> expected,
                               std::vector<long>* actual = nullptr) {
  const Json& arr = field(doc, key);
  const Json& shape = field(arr, "shape");
  const Json& data = field(arr, "data");
  if (!shape.is_array() || shape.size() != expected.size()) {
    schema(std::string(key) + ": expected " + std::to_string(expected.size()) + "-d shape");
  }
  long total = 1;
  std::vector<long> dims;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const long d = integer(shape[i], std::string(key) + " shape");
    if (d < 0 || (expected[i] >= 0 && d != expected[i])) {
      schema(std::string(key) + ": dimension " + std::to_string(i) + " is " + std::to_string(d) +
             ", expected " + std::to_string(expected[i]));
    }
    dims.push_back(d);
    total *= d;
  }
  if (!data.is_array() || static_cast<long>(data.size()) != total) {
    schema(std::string(key) + ": data length does not match shape");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total));
  for (const Json& v : data) out.push_back(number(v, key));
  if (actual) *actual = dims;
  return out;
}

Json basis_to_json(const Eigen::MatrixXd& basis, int n) {
  Json data = Json::array();
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      for (Eigen::Index j = 0; j < basis.cols(); ++j) data.push_back(basis(3 * i + a, j));
    }
  }
  return array_doc({n, 3, static_cast<long>(basis.cols())}, std::move(data));
}

Eigen::MatrixXd basis_from_json(const Json& doc, const char* key, int n) {
  std::vector<long> dims;
  const auto flat = read_array(doc, key, {n, 3, -1}, &dims);
  const long k = dims[2];
  Eigen::MatrixXd basis(3 * n, k);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      for (long j = 0; j < k; ++j) basis(3 * i + a, j) = flat[static_cast<std::size_t>((3 * i + a) * k + j)];
    }
  }
  return basis;
}

Eigen::VectorXd vector_from_json(const Json& v, const std::string& what) {
  if (!v.is_array()) schema(what + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], what);
  return out;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec3 vec3_from_json(const Json& v, const std::string& what) {
  const Eigen::VectorXd out = vector_from_json(v, what);
  if (out.size() != 3) schema(what + " must have 3 entries");
  return out;
}

}  // namespace

Json model_to_json(const FaceModel& model) {
  const int n = model.num_vertices();
  Json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["template_vertices"] = array_doc(
      {n, 3}, Json(std::vector<double>(model.template_vertices.data(),
                                       model.template_vertices.data() + 3 * n)));
  Json tris = Json::array();
  for (const Triangle& t : model.triangles) {
    for (int v : t) tris.push_back(v);
  }
  doc["triangles"] = array_doc({static_cast<long>(model.triangles.size()), 3}, std::move(tris));
  doc["shape_basis"] = basis_to_json(model.shape_basis, n);
  doc["expression_basis"] = basis_to_json(model.expression_basis, n);
  Json joints = Json::array();
  for (const Joint& j : model.joints) {
    joints.push_back({{"name", j.name},
                      {"parent", j.parent ? Json(*j.parent) : Json(nullptr)},
                      {"rest_position", {j.rest_position.x(), j.rest_position.y(), j.rest_position.z()}}});
  }
  doc["joints"] = std::move(joints);
  Json weights = Json::array();
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < model.skin_weights.cols(); ++k) weights.push_back(model.skin_weights(i, k));
  }
  doc["skin_weights"] = array_doc({n, static_cast<long>(model.skin_weights.cols())}, std::move(weights));
  Json marks = Json::array();
  for (const LandmarkBinding& b : model.landmark_embedding) {
    marks.push_back({{"triangle", b.triangle}, {"barycentric", b.barycentric}});
  }
  doc["landmark_embedding"] = std::move(marks);
  doc["param_names"] = model.param_names;
  return doc;
}

FaceModel model_from_json(const Json& doc) {
  const Json& version = field(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
    schema("unsupported model format_version (expected 1)");
  }
  FaceModel model;
  std::vector<long> dims;
  const auto verts = read_array(doc, "template_vertices", {-1, 3}, &dims);
  const int n = static_cast<int>(dims[0]);
  model.template_vertices = Eigen::Map<const VertexMatrix>(verts.data(), n, 3);

  const auto tris = read_array(doc, "triangles", {-1, 3}, &dims);
  model.triangles.resize(static_cast<std::size_t>(dims[0]));
  for (std::size_t t = 0; t < model.triangles.size(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const double v = tris[3 * t + c];
      if (v != static_cast<int>(v)) schema("triangle indices must be integers");
      model.triangles[t][c] = static_cast<int>(v);
    }
  }
  model.shape_basis = basis_from_json(doc, "shape_basis", n);
  model.expression_basis = basis_from_json(doc, "expression_basis", n);

  const Json& joints = field(doc, "joints");
  if (!joints.is_array()) schema("joints must be an array");
  for (const Json& j : joints) {
    Joint joint;
    const Json& name = field(j, "name");
    if (!name.is_string()) schema("joint name must be a string");
    joint.name = name.get<std::string>();
    const Json& parent = field(j, "parent");
    if (!parent.is_null()) joint.parent = integer(parent, "joint parent");
    joint.rest_position = vec3_from_json(field(j, "rest_position"), "joint rest_position");
    model.joints.push_back(std::move(joint));
  }
  const auto weights = read_array(doc, "skin_weights", {n, static_cast<long>(model.joints.size())});
  model.skin_weights.resize(n, static_cast<Eigen::Index>(model.joints.size()));
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < model.skin_weights.cols(); ++k) {
      model.skin_weights(i, k) = weights[static_cast<std::size_t>(i * model.skin_weights.cols() + k)];
    }
  }

  const Json& marks = field(doc, "landmark_embedding");
  if (!marks.is_array()) schema("landmark_embedding must be an array");
  for (const Json& m : marks) {
    LandmarkBinding b;
    b.triangle = integer(field(m, "triangle"), "landmark triangle");
    const Eigen::VectorXd w = vector_from_json(field(m, "barycentric"), "landmark barycentric");
    if (w.size() != 3) schema("landmark barycentric must have 3 entries");
    b.barycentric = {w[0], w[1], w[2]};
    model.landmark_embedding.push_back(b);
  }
  const Json& names = field(doc, "param_names");
  if (!names.is_array()) schema("param_names must be an array");
  for (const Json& v : names) {
    if (!v.is_string()) schema("param_names entries must be strings");
    model.param_names.push_back(v.get<std::string>());
  }
  validate(model);
  return model;
}

Json params_to_json(const ModelParams& params) {
  return Json{{"shape", vector_to_json(params.shape)},
              {"expression", vector_to_json(params.expression)},
              {"joint_rotations", vector_to_json(params.joint_rotations)},
              {"translation", {params.translation.x(), params.translation.y(), params.translation.z()}}};
}

ModelParams params_from_json(const Json& doc) {
  ModelParams p;
  p.shape = vector_from_json(field(doc, "shape"), "shape");
  p.expression = vector_from_json(field(doc, "expression"), "expression");
  p.joint_rotations = vector_from_json(field(doc, "joint_rotations"), "joint_rotations");
  p.translation = vec3_from_json(field(doc, "translation"), "translation");
  return p;
}

Json camera_to_json(const CameraParams& c) {
  return Json{{"mode", c.mode == Projection::kPinhole ? "pinhole" : "weak_perspective"},
              {"scale", c.scale}, {"cx", c.cx}, {"cy", c.cy},
              {"width", c.width}, {"height", c.height}};
}

CameraParams camera_from_json(const Json& doc, CameraParams c) {
  if (!doc.is_object()) schema("camera must be an object");
  if (doc.contains("mode")) {
    const Json& mode = doc["mode"];
    if (mode == "pinhole") {
      c.mode = Projection::kPinhole;
    } else if (mode == "weak_perspective") {
      c.mode = Projection::kWeakPerspective;
    } else {
      schema("camera mode must be weak_perspective or pinhole");
    }
  }
  if (doc.contains("scale")) c.scale = number(doc["scale"], "camera scale");
  if (doc.contains("cx")) c.cx = number(doc["cx"], "camera cx");
  if (doc.contains("cy")) c.cy = number(doc["cy"], "camera cy");
  if (doc.contains("width")) c.width = integer(doc["width"], "camera width");
  if (doc.contains("height")) c.height = integer(doc["height"], "camera height");
  validate(c);
  return c;
}

Json light_to_json(const LightingParams& l) {
  return Json{{"direction", {l.direction.x(), l.direction.y(), l.direction.z()}},
              {"ambient", l.ambient}, {"diffuse", l.diffuse}};
}

LightingParams light_from_json(const Json& doc, LightingParams l) {
  if (!doc.is_object()) schema("light must be an object");
  if (doc.contains("direction")) l.direction = vec3_from_json(doc["direction"], "light direction");
  if (doc.contains("ambient")) l.ambient = number(doc["ambient"], "light ambient");
  if (doc.contains("diffuse")) l.diffuse = number(doc["diffuse"], "light diffuse");
  validate(l);
  return l;
}

Json landmarks_to_json(const LandmarkSet& landmarks) {
  Json out = Json::array();
  for (const Landmark2D& p : landmarks.points) out.push_back({p.x, p.y, p.confidence});
  return out;
}

LandmarkSet landmarks_from_json(const Json& doc) {
  if (!doc.is_array() || doc.size() != kNumLandmarks) {
    schema("landmark file must be an array of 68 [x, y, confidence] triples");
  }
  LandmarkSet out;
  for (int i = 0; i < kNumLandmarks; ++i) {
    const Json& t = doc[static_cast<std::size_t>(i)];
    if (!t.is_array() || t.size() != 3) schema("landmark " + std::to_string(i) + " must be a triple");
    out.points[i] = {number(t[0], "landmark x"), number(t[1], "landmark y"),
                     number(t[2], "landmark confidence")};
  }
  validate(out);
  return out;
}

Json fit_result_to_json(const FitResult& r) {
  return Json{{"params", params_to_json(r.params)},
              {"camera", camera_to_json(r.camera)},
              {"rms_error", r.rms_error},
              {"cost_history", r.cost_history},
              {"converged", r.converged},
              {"iterations", r.iterations}};
}

FitResult fit_result_from_json(const Json& doc) {
  FitResult r;
  r.params = params_from_json(field(doc, "params"));
  r.camera = camera_from_json(field(doc, "camera"));
  if (doc.contains("rms_error")) r.rms_error = number(doc["rms_error"], "rms_error");
  if (doc.contains("cost_history")) {
    const Eigen::VectorXd h = vector_from_json(doc["cost_history"], "cost_history");
    r.cost_history.assign(h.data(), h.data() + h.size());
  }
  if (doc.contains("converged")) r.converged = doc["converged"].get<bool>();
  if (doc.contains("iterations")) r.iterations = integer(doc["iterations"], "iterations");
  return r;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

void write_json_file(const Json& doc, const std::filesystem::path& path) {
  write_text_file(doc.dump(2) + "\n", path);
}

}  // namespace facesweep
