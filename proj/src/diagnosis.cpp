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

#include "facesweep/diagnosis.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>

#include "facesweep/parallel.hpp"
#include "facesweep/serialization.hpp"
#include "facesweep/text_format.hpp"

namespace facesweep {

std::string Accuracy::formatted() const { return format_fixed(value(), 6); }

Accuracy accuracy(std::span<const std::pair<std::string, std::string>> predictions) {
  if (predictions.empty()) throw Error(ErrorKind::kEmptyInput, "accuracy of an empty prediction list");
  Accuracy a;
  a.total = static_cast<long>(predictions.size());
  for (const auto& [truth, predicted] : predictions) a.correct += truth == predicted ? 1 : 0;
  return a;
}

void validate(const ResponseCurve& curve) {
  if (curve.k.empty()) throw Error(ErrorKind::kEmptyInput, "response curve has no k values");
  if (curve.accuracy.size() != curve.k.size() || curve.samples.size() != curve.k.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "response curve arrays are not aligned");
  }
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    if (curve.samples[i] <= 0) throw Error(ErrorKind::kInvalidArgument, "response curve count must be > 0");
    if (!(curve.accuracy[i] >= 0.0 && curve.accuracy[i] <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "accuracy outside [0,1]");
    }
  }
}

CurveSummary summarize(const ResponseCurve& curve) {
  validate(curve);
  CurveSummary s;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < curve.k.size(); ++i) {
    const double a = curve.accuracy[i], best = curve.accuracy[peak];
    const double ak = std::abs(curve.k[i]), bk = std::abs(curve.k[peak]);
    if (a > best || (a == best && (ak < bk || (ak == bk && curve.k[i] < curve.k[peak])))) peak = i;
  }
  s.peak_k = curve.k[peak];
  s.peak_accuracy = curve.accuracy[peak];
  s.min_accuracy = *std::min_element(curve.accuracy.begin(), curve.accuracy.end());
  // Grids are sign-symmetric, so entry i mirrors entry n-1-i.
  const std::size_t n = curve.k.size();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    sum += std::abs(curve.accuracy[i] - curve.accuracy[n - 1 - i]);
    ++pairs;
  }
  s.symmetry_score = pairs ? sum / static_cast<double>(pairs) : 0.0;
  return s;
}

nlohmann::json summary_to_json(const ResponseCurve& curve) {
  const CurveSummary s = summarize(curve);
  return nlohmann::json{{"param", curve.param},
                        {"peak_k", s.peak_k},
                        {"peak_acc", s.peak_accuracy},
                        {"min_acc", s.min_accuracy},
                        {"symmetry_score", s.symmetry_score}};
}

std::string format_curve(const ResponseCurve& curve) {
  validate(curve);
  std::string out = csv_line({"param", "k", "accuracy", "n_identities"});
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    out += csv_line({curve.param, format_fixed(curve.k[i], 6), format_fixed(curve.accuracy[i], 6),
                     std::to_string(curve.samples[i])});
  }
  return out;
}

void write_curve(const ResponseCurve& curve, const std::filesystem::path& path) {
  write_text_file(format_curve(curve), path);
}

ResponseCurve read_curve(const std::filesystem::path& path) {
  const auto rows = read_csv_file(path);
  expect_csv_header(rows, {"param", "k", "accuracy", "n_identities"}, path.string());
  ResponseCurve curve;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i == 1) curve.param = r[0];
    if (r[0] != curve.param) throw Error(ErrorKind::kSchema, path.string() + ": mixed parameters");
    curve.k.push_back(parse_double(r[1]));
    curve.accuracy.push_back(parse_double(r[2]));
    curve.samples.push_back(static_cast<int>(parse_integer(r[3])));
  }
  if (!curve.samples.empty()) {
    curve.identity_count = *std::max_element(curve.samples.begin(), curve.samples.end());
  }
  validate(curve);
  return curve;
}

bool curves_equal(const ResponseCurve& a, const ResponseCurve& b, double tolerance) {
  if (a.param != b.param || a.k.size() != b.k.size() || a.samples != b.samples ||
      a.identity_count != b.identity_count) {
    return false;
  }
  for (std::size_t i = 0; i < a.k.size(); ++i) {
    if (std::abs(a.k[i] - b.k[i]) > tolerance) return false;
    if (std::abs(a.accuracy[i] - b.accuracy[i]) > tolerance) return false;
  }
  return true;
}

namespace {

std::filesystem::path frame_path(const DiagnosisOptions& options, const std::string& relative) {
  return options.frame_dir.empty() ? std::filesystem::path() : options.frame_dir / relative;
}

Embedding embed_frame(RecognitionBackend& backend, const Image& image,
                      const std::filesystem::path& path) {
  if (!path.empty()) {
    std::filesystem::create_directories(path.parent_path());
    write_pnm(image, path);
  }
  return backend.embed(image, path);
}

ResponseCurve aggregate(const SweepSpec& spec, const std::vector<double>& ks,
                        const std::map<std::string, std::vector<bool>>& per_identity) {
  ResponseCurve curve;
  curve.param = spec.target.name;
  curve.k = ks;
  curve.identity_count = static_cast<int>(per_identity.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    long correct = 0;
    for (const auto& [id, hits] : per_identity) correct += hits[i] ? 1 : 0;
    curve.samples.push_back(curve.identity_count);
    curve.accuracy.push_back(curve.identity_count == 0
                                 ? 0.0
                                 : Accuracy{correct, curve.identity_count}.value());
  }
  return curve;
}

}  // namespace

Gallery enroll_base_renders(const FaceModel& model, const FitMap& fits,
                            RecognitionBackend& backend, const DiagnosisOptions& options) {
  Gallery gallery;
  for (const auto& [id, fit] : fits) {
    const Image image = render_mesh(instantiate(model, fit.params), fit.camera, options.light);
    const Embedding e = embed_frame(backend, image, frame_path(options, "gallery/" + id + ".pgm"));
    gallery.enroll(id, std::span<const Embedding>(&e, 1));
  }
  return gallery;
}

DiagnosisResult run_diagnosis(const FaceModel& model, const FitMap& fits, const SweepSpec& spec,
                              RecognitionBackend& backend, const Gallery& gallery,
                              const DiagnosisOptions& options) {
  validate(spec);
  if (fits.empty()) throw Error(ErrorKind::kEmptyInput, "no identities to diagnose");
  for (const auto& [id, fit] : fits) {
    if (!gallery.contains(id)) {
      throw Error(ErrorKind::kMissingIdentity, "identity " + id + " is not enrolled in the gallery");
    }
  }
  const auto ks = sweep_k_values(spec.range, spec.n_samples);

  std::vector<const std::pair<const std::string, IdentityFit>*> order;
  for (const auto& entry : fits) order.push_back(&entry);

  struct Outcome {
    std::vector<bool> hits;
    std::vector<SweepManifestRow> manifest;
    std::optional<Error> failure;
  };
  std::vector<Outcome> outcomes(order.size());

  const auto run_identity = [&](std::size_t i) {
    const auto& [id, fit] = *order[i];
    Outcome& out = outcomes[i];
    try {
      const SweepRender sweep = render_sweep(model, id, fit.params, spec, fit.camera, options.light);
      for (std::size_t f = 0; f < sweep.frames.size(); ++f) {
        const Embedding e =
            embed_frame(backend, sweep.images[f], frame_path(options, sweep.manifest[f].image_path));
        out.hits.push_back(gallery.classify(e).id == id);
      }
      out.manifest = sweep.manifest;
    } catch (const Error& e) {
      out.failure = e;
    }
  };

  if (backend.thread_safe()) {
    parallel_for(order.size(), run_identity, options.workers);
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) {
      run_identity(i);
      if (outcomes[i].failure) break;
    }
  }

  DiagnosisResult result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (outcomes[i].failure) {
      result.curve = aggregate(spec, ks, result.per_identity);
      throw DiagnosisError(*outcomes[i].failure, std::move(result), order[i]->first);
    }
    result.per_identity[order[i]->first] = std::move(outcomes[i].hits);
    result.manifest.insert(result.manifest.end(), outcomes[i].manifest.begin(),
                           outcomes[i].manifest.end());
  }
  result.curve = aggregate(spec, ks, result.per_identity);
  return result;
}

FitMap synthetic_cohort(const FaceModel& model, int count, std::uint64_t seed,
                        const CameraParams& camera) {
  FitMap fits;
  for (int i = 0; i < count; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "id%02d", i);
    fits[id] = IdentityFit{sample_identity(model, seed + static_cast<std::uint64_t>(i)), camera};
  }
  return fits;
}

}  // namespace facesweep
