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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facesweep/sweep.hpp"
#include "facesweep/text_format.hpp"

namespace facesweep {

struct TraceFrame {
  std::string frame_id;
  double value = 0.0;
};

// One fitted parameter over the frames of one identity, in frame order.
struct ParamTrace {
  std::string identity;
  std::string param;
  std::vector<TraceFrame> frames;
};

void validate(const ParamTrace& trace);

// The n frames closest to the trace mean. Ties go to the earlier frame; the
// result is in frame order.
std::vector<std::string> select_train_frames(const ParamTrace& trace, std::size_t n);

// n targets evenly spaced over [min, max]; each target, in ascending order,
// takes the nearest frame not yet taken (ties to the earlier frame). The
// result is in target order.
std::vector<std::string> select_test_frames(const ParamTrace& trace, std::size_t n = 10);

// CSV header identity,frame,param,value. Traces are grouped by
// (identity, param) and keep file order within a group.
std::vector<ParamTrace> parse_traces(const std::vector<CsvRow>& rows, const std::string& what);
std::vector<ParamTrace> read_traces(const std::filesystem::path& path);

enum class FrameSource { kReal, kSynthetic };
std::string to_string(FrameSource source);

struct RealFrame {
  std::string identity;
  std::string frame_id;  // also used as the image path
  std::string param;
  double value = 0.0;
};

struct TrainingRow {
  std::string identity;
  std::string param;
  std::optional<double> k;  // synthetic rows only
  double value = 0.0;
  std::string image_path;
  FrameSource source = FrameSource::kReal;
};

struct SourceCounts {
  std::size_t real = 0;
  std::size_t synthetic = 0;
  std::size_t total() const { return real + synthetic; }
};

struct AugmentedManifest {
  std::vector<TrainingRow> rows;  // real rows first, then sweeps in the given order
  std::map<std::string, SourceCounts> per_identity;
  std::map<std::string, SourceCounts> per_param;
};

// Every synthetic identity must have at least one real frame. Two rows with
// the same image path are a kCollision.
AugmentedManifest build_augmented_manifest(std::span<const RealFrame> real,
                                           std::span<const std::vector<SweepManifestRow>> sweeps);

// CSV header identity,param,k,value,image_path,source; k is empty for real rows.
std::string format_training_manifest(const AugmentedManifest& manifest);
void write_training_manifest(const AugmentedManifest& manifest, const std::filesystem::path& path);

// Pose-difference bins in degrees: [-180,-30) [-30,-15) [-15,-5) [-5,5) [5,30) [30,180].
inline constexpr int kNumPoseBins = 6;
inline constexpr std::array<double, kNumPoseBins + 1> kPoseBinEdges = {-180.0, -30.0, -15.0, -5.0,
                                                                       5.0,    30.0,  180.0};

// Throws kInvalidArgument outside [-180, 180] and for non-finite input.
int pose_bin(double delta_degrees);
std::string pose_bin_label(int bin);

struct PosePair {
  std::string id;
  double delta_degrees = 0.0;
};

// Batch entries are indices into the input pairs.
using Batch = std::vector<std::size_t>;

// Each batch holds batch_size / 6 pairs from every bin. A bin with at least
// that many pairs is drawn without repeats inside a batch from a reshuffled
// cycle; a smaller bin is sampled with replacement. The default batch count
// is ceil(pairs / batch_size).
std::vector<Batch> balance_batches(std::span<const PosePair> pairs, std::size_t batch_size,
                                   std::optional<std::size_t> n_batches = std::nullopt,
                                   std::uint64_t seed = 0);

// CSV header pair_id,delta_degrees.
std::vector<PosePair> read_pose_pairs(const std::filesystem::path& path);
// CSV header batch,pair_id,bin.
std::string format_batches(std::span<const PosePair> pairs, const std::vector<Batch>& batches);

}  // namespace facesweep
