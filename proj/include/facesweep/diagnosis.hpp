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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "facesweep/error.hpp"
#include "facesweep/recognizer.hpp"
#include "facesweep/sweep.hpp"

namespace facesweep {

struct IdentityFit {
  ModelParams params;
  CameraParams camera;
};
using FitMap = std::map<std::string, IdentityFit>;

// Accuracy as an exact ratio of counts.
struct Accuracy {
  long correct = 0;
  long total = 0;

  double value() const { return static_cast<double>(correct) / static_cast<double>(total); }
  std::string formatted() const;  // 6 decimals
};

// Pairs of (true id, predicted id). Throws kEmptyInput.
Accuracy accuracy(std::span<const std::pair<std::string, std::string>> predictions);

struct ResponseCurve {
  std::string param;
  std::vector<double> k;
  std::vector<double> accuracy;
  std::vector<int> samples;  // identities contributing at each k
  int identity_count = 0;
};

void validate(const ResponseCurve& curve);

struct CurveSummary {
  double peak_k = 0.0;
  double peak_accuracy = 0.0;
  double min_accuracy = 0.0;
  // Mean |acc(k) - acc(-k)| over the positive half of the grid.
  double symmetry_score = 0.0;
};

// Ties for the peak go to the smallest |k|, then to the smaller k.
CurveSummary summarize(const ResponseCurve& curve);
nlohmann::json summary_to_json(const ResponseCurve& curve);

// CSV header param,k,accuracy,n_identities; k and accuracy with 6 decimals.
std::string format_curve(const ResponseCurve& curve);
void write_curve(const ResponseCurve& curve, const std::filesystem::path& path);
ResponseCurve read_curve(const std::filesystem::path& path);
// Equal up to the 6-decimal rounding of the file format.
bool curves_equal(const ResponseCurve& a, const ResponseCurve& b, double tolerance = 1e-6);

struct DiagnosisOptions {
  LightingParams light;
  // When set, every frame is written here as "<identity>/<frame_id>.pgm" and
  // the backend receives that path.
  std::filesystem::path frame_dir;
  unsigned workers = 0;  // 0 = hardware concurrency; ignored for serial backends
};

struct DiagnosisResult {
  ResponseCurve curve;
  // Per-identity correctness in grid order.
  std::map<std::string, std::vector<bool>> per_identity;
  std::vector<SweepManifestRow> manifest;
};

// Raised when the backend fails mid-run. `partial` aggregates the identities
// that finished before the failing one.
class DiagnosisError : public Error {
 public:
  DiagnosisError(const Error& cause, DiagnosisResult partial, std::string failed_identity)
      : Error(cause.kind(), "diagnosis aborted at identity " + failed_identity + ": " + cause.what()),
        partial_(std::move(partial)), failed_identity_(std::move(failed_identity)) {}

  const DiagnosisResult& partial() const { return partial_; }
  const std::string& failed_identity() const { return failed_identity_; }

 private:
  DiagnosisResult partial_;
  std::string failed_identity_;
};

// Enrolls every identity from a single render at its fitted parameters (the
// k = 0 frame of any sweep).
Gallery enroll_base_renders(const FaceModel& model, const FitMap& fits,
                            RecognitionBackend& backend, const DiagnosisOptions& options = {});

// Sweeps the target for each identity, classifies every frame, and reports
// the fraction of identities classified correctly at each k.
DiagnosisResult run_diagnosis(const FaceModel& model, const FitMap& fits, const SweepSpec& spec,
                              RecognitionBackend& backend, const Gallery& gallery,
                              const DiagnosisOptions& options = {});

// Cohort of synthetic identities "id00".."id<n-1>" drawn with sample_identity.
FitMap synthetic_cohort(const FaceModel& model, int count, std::uint64_t seed,
                        const CameraParams& camera = {});

}  // namespace facesweep
