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

#include "facesweep/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "facesweep/error.hpp"
#include "facesweep/rng.hpp"
#include "facesweep/serialization.hpp"

namespace facesweep {

void validate(const ParamTrace& trace) {
  if (trace.frames.empty()) {
    throw Error(ErrorKind::kEmptyInput, "trace for " + trace.identity + " has no frames");
  }
  for (const auto& f : trace.frames) {
    if (!std::isfinite(f.value)) {
      throw Error(ErrorKind::kNonFinite, "trace value for frame " + f.frame_id + " is not finite");
    }
  }
}

std::vector<std::string> select_train_frames(const ParamTrace& trace, std::size_t n) {
  validate(trace);
  const auto& frames = trace.frames;
  if (n > frames.size()) {
    throw Error(ErrorKind::kInvalidArgument, "asked for " + std::to_string(n) + " frames from a trace of " +
                                                 std::to_string(frames.size()));
  }
  double mean = 0.0;
  for (const auto& f : frames) mean += f.value;
  mean /= static_cast<double>(frames.size());

  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(frames[a].value - mean) < std::abs(frames[b].value - mean);
  });
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<std::string> out;
  for (std::size_t i : order) out.push_back(frames[i].frame_id);
  return out;
}

std::vector<std::string> select_test_frames(const ParamTrace& trace, std::size_t n) {
  validate(trace);
  const auto& frames = trace.frames;
  if (n == 0 || n > frames.size()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot sample " + std::to_string(n) +
                                                 " test frames from a trace of " +
                                                 std::to_string(frames.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(
      frames.begin(), frames.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  const double lo = lo_it->value, hi = hi_it->value;
  std::vector<bool> used(frames.size(), false);
  std::vector<std::string> out;
  for (std::size_t t = 0; t < n; ++t) {
    const double target =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(n - 1);
    std::size_t best = frames.size();
    double best_distance = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(frames[i].value - target);
      if (best == frames.size() || d < best_distance) {
        best = i;
        best_distance = d;
      }
    }
    used[best] = true;
    out.push_back(frames[best].frame_id);
  }
  return out;
}

std::vector<ParamTrace> parse_traces(const std::vector<CsvRow>& rows, const std::string& what) {
  expect_csv_header(rows, {"identity", "frame", "param", "value"}, what);
  std::map<std::pair<std::string, std::string>, ParamTrace> grouped;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ParamTrace& trace = grouped[{r[0], r[2]}];
    trace.identity = r[0];
    trace.param = r[2];
    trace.frames.push_back({r[1], parse_double(r[3])});
  }
  std::vector<ParamTrace> out;
  for (auto& [key, trace] : grouped) {
    validate(trace);
    out.push_back(std::move(trace));
  }
  if (out.empty()) throw Error(ErrorKind::kEmptyInput, what + ": no trace rows");
  return out;
}

std::vector<ParamTrace> read_traces(const std::filesystem::path& path) {
  return parse_traces(read_csv_file(path), path.string());
}

std::string to_string(FrameSource source) {
  return source == FrameSource::kReal ? "real" : "synthetic";
}

AugmentedManifest build_augmented_manifest(std::span<const RealFrame> real,
                                           std::span<const std::vector<SweepManifestRow>> sweeps) {
  AugmentedManifest m;
  std::set<std::string> paths;
  const auto add = [&](TrainingRow row) {
    if (!paths.insert(row.image_path).second) {
      throw Error(ErrorKind::kCollision, "image " + row.image_path + " appears in more than one row");
    }
    auto& by_id = m.per_identity[row.identity];
    auto& by_param = m.per_param[row.param];
    if (row.source == FrameSource::kReal) {
      ++by_id.real;
      ++by_param.real;
    } else {
      ++by_id.synthetic;
      ++by_param.synthetic;
    }
    m.rows.push_back(std::move(row));
  };
  for (const auto& f : real) {
    add({f.identity, f.param, std::nullopt, f.value, f.frame_id, FrameSource::kReal});
  }
  for (const auto& sweep : sweeps) {
    for (const auto& r : sweep) {
      const auto it = m.per_identity.find(r.identity);
      if (it == m.per_identity.end() || it->second.real == 0) {
        throw Error(ErrorKind::kMissingIdentity,
                    "synthetic frames for " + r.identity + " have no real counterpart");
      }
      add({r.identity, r.param, r.k, r.value, r.image_path, FrameSource::kSynthetic});
    }
  }
  return m;
}

std::string format_training_manifest(const AugmentedManifest& manifest) {
  std::string out = csv_line({"identity", "param", "k", "value", "image_path", "source"});
  for (const auto& r : manifest.rows) {
    out += csv_line({r.identity, r.param, r.k ? format_fixed(*r.k, 6) : std::string(),
                     format_shortest(r.value), r.image_path, to_string(r.source)});
  }
  return out;
}

void write_training_manifest(const AugmentedManifest& manifest, const std::filesystem::path& path) {
  write_text_file(format_training_manifest(manifest), path);
}

int pose_bin(double delta_degrees) {
  if (!std::isfinite(delta_degrees) || delta_degrees < kPoseBinEdges.front() ||
      delta_degrees > kPoseBinEdges.back()) {
    throw Error(ErrorKind::kInvalidArgument,
                "pose difference " + format_shortest(delta_degrees) + " is outside [-180, 180]");
  }
  for (int b = 0; b < kNumPoseBins - 1; ++b) {
    if (delta_degrees < kPoseBinEdges[b + 1]) return b;
  }
  return kNumPoseBins - 1;
}

std::string pose_bin_label(int bin) {
  if (bin < 0 || bin >= kNumPoseBins) throw Error(ErrorKind::kInvalidArgument, "no such pose bin");
  return "[" + format_shortest(kPoseBinEdges[bin]) + ", " + format_shortest(kPoseBinEdges[bin + 1]) +
         (bin == kNumPoseBins - 1 ? "]" : ")");
}

namespace {

// Endless draws from one bin. Each pass over the bin is a fresh permutation;
// items already taken for the current batch are pushed to the back of the
// next pass so a batch never repeats a pair while the bin is large enough.
class BinCycle {
 public:
  BinCycle(std::vector<std::size_t> members, Rng& rng) : members_(std::move(members)), rng_(rng) {
    order_ = members_;
    rng_.shuffle(std::span<std::size_t>(order_));
  }

  void take(std::size_t count, Batch& batch) {
    if (members_.size() < count) {
      for (std::size_t i = 0; i < count; ++i) batch.push_back(members_[rng_.index(members_.size())]);
      return;
    }
    std::vector<std::size_t> taken;
    while (taken.size() < count) {
      if (cursor_ == order_.size()) restart(taken);
      taken.push_back(order_[cursor_++]);
    }
    batch.insert(batch.end(), taken.begin(), taken.end());
  }

 private:
  void restart(const std::vector<std::size_t>& taken) {
    order_ = members_;
    rng_.shuffle(std::span<std::size_t>(order_));
    std::stable_partition(order_.begin(), order_.end(), [&](std::size_t v) {
      return std::find(taken.begin(), taken.end(), v) == taken.end();
    });
    cursor_ = 0;
  }

  std::vector<std::size_t> members_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng& rng_;
};

}  // namespace

std::vector<Batch> balance_batches(std::span<const PosePair> pairs, std::size_t batch_size,
                                   std::optional<std::size_t> n_batches, std::uint64_t seed) {
  if (batch_size == 0 || batch_size % kNumPoseBins != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "batch size " + std::to_string(batch_size) + " is not a positive multiple of 6");
  }
  if (pairs.empty()) throw Error(ErrorKind::kEmptyInput, "no pairs to balance");
  std::array<std::vector<std::size_t>, kNumPoseBins> members;
  for (std::size_t i = 0; i < pairs.size(); ++i) members[pose_bin(pairs[i].delta_degrees)].push_back(i);
  for (int b = 0; b < kNumPoseBins; ++b) {
    if (members[b].empty()) {
      throw Error(ErrorKind::kEmptyInput,
                  "pose bin " + std::to_string(b) + " " + pose_bin_label(b) + " has no pairs");
    }
  }
  const std::size_t count = n_batches.value_or((pairs.size() + batch_size - 1) / batch_size);
  const std::size_t per_bin = batch_size / kNumPoseBins;

  Rng rng(seed);
  std::vector<BinCycle> cycles;
  for (auto& m : members) cycles.emplace_back(std::move(m), rng);
  std::vector<Batch> batches(count);
  for (auto& batch : batches) {
    batch.reserve(batch_size);
    for (auto& cycle : cycles) cycle.take(per_bin, batch);
  }
  return batches;
}

std::vector<PosePair> read_pose_pairs(const std::filesystem::path& path) {
  const auto rows = read_csv_file(path);
  expect_csv_header(rows, {"pair_id", "delta_degrees"}, path.string());
  std::vector<PosePair> pairs;
  for (std::size_t i = 1; i < rows.size(); ++i) pairs.push_back({rows[i][0], parse_double(rows[i][1])});
  return pairs;
}

std::string format_batches(std::span<const PosePair> pairs, const std::vector<Batch>& batches) {
  std::string out = csv_line({"batch", "pair_id", "bin"});
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (std::size_t i : batches[b]) {
      out += csv_line({std::to_string(b), pairs[i].id, std::to_string(pose_bin(pairs[i].delta_degrees))});
    }
  }
  return out;
}

}  // namespace facesweep
