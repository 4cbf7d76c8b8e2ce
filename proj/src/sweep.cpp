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

#include "facesweep/sweep.hpp"

#include <cmath>
#include <cstdio>

#include "facesweep/error.hpp"
#include "facesweep/parallel.hpp"
#include "facesweep/serialization.hpp"
#include "facesweep/text_format.hpp"

namespace facesweep {

SweepTarget resolve_target(const FaceModel& model, const std::string& name) {
  if (const auto e = model.expression_index(name)) {
    return {SweepTarget::Kind::kExpression, *e, name};
  }
  if (const auto p = pose_index(model, name)) return {SweepTarget::Kind::kPose, *p, name};
  throw Error(ErrorKind::kInvalidArgument, "unknown sweep parameter \"" + name + "\"");
}

void validate(const SweepSpec& spec) {
  if (spec.n_samples < 3 || spec.n_samples % 2 == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "n_samples must be an odd integer >= 3, got " + std::to_string(spec.n_samples));
  }
  if (!(spec.range > 0.0) || !std::isfinite(spec.range)) {
    throw Error(ErrorKind::kInvalidArgument, "sweep range K must be positive");
  }
  if (spec.target.index < 0) throw Error(ErrorKind::kInvalidArgument, "negative sweep dimension");
}

std::vector<double> sweep_k_values(double range, int n_samples) {
  std::vector<double> k(static_cast<std::size_t>(n_samples), 0.0);
  const int mid = n_samples / 2;
  for (int i = 0; i < mid; ++i) {
    const double v = -range + 2.0 * range * i / (n_samples - 1);
    k[static_cast<std::size_t>(i)] = v;
    k[static_cast<std::size_t>(n_samples - 1 - i)] = -v;
  }
  return k;
}

double target_value(const ModelParams& params, const SweepTarget& target) {
  if (target.kind == SweepTarget::Kind::kExpression) {
    if (target.index >= params.expression.size()) {
      throw Error(ErrorKind::kInvalidArgument, "expression dimension " +
                                                   std::to_string(target.index) + " does not exist");
    }
    return params.expression[target.index];
  }
  if (target.index >= params.joint_rotations.size() + 3) {
    throw Error(ErrorKind::kInvalidArgument,
                "pose dimension " + std::to_string(target.index) + " does not exist");
  }
  return pose_value(params, target.index);
}

void set_target_value(ModelParams& params, const SweepTarget& target, double value) {
  (void)target_value(params, target);
  if (target.kind == SweepTarget::Kind::kExpression) {
    params.expression[target.index] = value;
  } else {
    set_pose_value(params, target.index, value);
  }
}

bool sweep_is_degenerate(const ModelParams& base, const SweepSpec& spec) {
  return spec.mode == SweepMode::kMultiplicative && target_value(base, spec.target) == 0.0;
}

std::vector<SweepFrame> generate_sweep(const ModelParams& base, const SweepSpec& spec) {
  validate(spec);
  const double v = target_value(base, spec.target);
  const auto ks = sweep_k_values(spec.range, spec.n_samples);
  std::vector<SweepFrame> frames;
  frames.reserve(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    SweepFrame f;
    f.k = ks[i];
    f.params = base;
    if (f.k != 0.0) {
      set_target_value(f.params, spec.target,
                       spec.mode == SweepMode::kMultiplicative ? (1.0 + f.k) * v : v + f.k);
    }
    char id[32];
    std::snprintf(id, sizeof(id), "_%02zu", i);
    f.frame_id = spec.target.name + id;
    frames.push_back(std::move(f));
  }
  return frames;
}

SweepRender render_sweep(const FaceModel& model, const std::string& identity,
                         const ModelParams& base, const SweepSpec& spec,
                         const CameraParams& camera, const LightingParams& light) {
  SweepRender out;
  out.frames = generate_sweep(base, spec);
  out.images.resize(out.frames.size());
  parallel_for(out.frames.size(), [&](std::size_t i) {
    out.images[i] = render_mesh(instantiate(model, out.frames[i].params), camera, light);
  });
  for (const SweepFrame& f : out.frames) {
    out.manifest.push_back({identity, spec.target.name, f.k, target_value(f.params, spec.target),
                            identity + "/" + f.frame_id + ".pgm"});
  }
  return out;
}

void write_sweep_images(const SweepRender& sweep, const std::filesystem::path& root) {
  for (std::size_t i = 0; i < sweep.images.size(); ++i) {
    const auto path = root / sweep.manifest[i].image_path;
    std::filesystem::create_directories(path.parent_path());
    write_pnm(sweep.images[i], path);
  }
}

std::string format_sweep_manifest(const std::vector<SweepManifestRow>& rows) {
  std::string out = csv_line({"identity", "param", "k", "value", "image_path"});
  for (const auto& r : rows) {
    out += csv_line({r.identity, r.param, format_fixed(r.k, 6), format_shortest(r.value), r.image_path});
  }
  return out;
}

void write_sweep_manifest(const std::vector<SweepManifestRow>& rows,
                          const std::filesystem::path& path) {
  write_text_file(format_sweep_manifest(rows), path);
}

std::vector<SweepManifestRow> read_sweep_manifest(const std::filesystem::path& path) {
  const auto rows = read_csv_file(path);
  expect_csv_header(rows, {"identity", "param", "k", "value", "image_path"}, path.string());
  std::vector<SweepManifestRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out.push_back({r[0], r[1], parse_double(r[2]), parse_double(r[3]), r[4]});
  }
  return out;
}

}  // namespace facesweep
