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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facesweep/render.hpp"

namespace facesweep {

// Unit-norm feature vector produced by a recognition backend.
class Embedding {
 public:
  Embedding() = default;
  // Normalizes `raw`; throws kInvalidArgument for zero or non-finite input.
  static Embedding from_raw(const Eigen::VectorXd& raw);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index dimension() const { return values_.size(); }
  double dot(const Embedding& other) const;

  friend bool operator==(const Embedding& a, const Embedding& b) { return a.values_ == b.values_; }

 private:
  Eigen::VectorXd values_;
};

inline constexpr int kStubGrid = 16;
inline constexpr int kStubDimension = kStubGrid * kStubGrid;

// The stub recognizer's features before normalization: the image box-filtered
// to 16x16 (channels averaged) with its mean subtracted. A constant image maps
// to the first basis vector.
Eigen::VectorXd stub_features(const Image& image);
Eigen::VectorXd stub_features(std::span<const double> gray, int width, int height);
Embedding embed_stub(const Image& image);

struct Classification {
  std::string id;
  double similarity = 0.0;
};

// Per-identity centroids: renormalized mean of the enrolled embeddings.
class Gallery {
 public:
  struct Entry {
    Eigen::VectorXd sum;
    Embedding centroid;
    int count = 0;
  };

  // Adds embeddings to `id`, creating it if needed.
  void enroll(const std::string& id, std::span<const Embedding> embeddings);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const Entry& entry(const std::string& id) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

  // Maximum cosine similarity; ties go to the lexicographically smallest id.
  Classification classify(const Embedding& query) const;

 private:
  std::map<std::string, Entry> entries_;
};

class RecognitionBackend {
 public:
  virtual ~RecognitionBackend() = default;

  // `path` names a file holding `image` when one already exists on disk, or
  // is empty.
  virtual Embedding embed(const Image& image, const std::filesystem::path& path) = 0;
  virtual bool thread_safe() const { return false; }
};

class StubBackend final : public RecognitionBackend {
 public:
  Embedding embed(const Image& image, const std::filesystem::path&) override {
    return embed_stub(image);
  }
  bool thread_safe() const override { return true; }
};

// Embeds each image with `backend` and enrolls the results under `id`.
void enroll_images(Gallery& gallery, const std::string& id, RecognitionBackend& backend,
                   std::span<const Image> images);

class ChildProcess;

// Client for a recognizer running as a child process. One JSON object per
// line over the child's stdin/stdout:
//   request  {"op":"embed","image":"<path>"}
//   response {"embedding":[...]} or {"error":"<message>"}
// Requests are answered in order. The child runs under /bin/sh -c.
class ExternalBackend final : public RecognitionBackend {
 public:
  // Images without a path are written to `scratch_dir` (a fresh temporary
  // directory when empty) before being sent.
  explicit ExternalBackend(const std::string& command, std::filesystem::path scratch_dir = {});
  ~ExternalBackend() override;

  ExternalBackend(const ExternalBackend&) = delete;
  ExternalBackend& operator=(const ExternalBackend&) = delete;

  Embedding embed_path(const std::filesystem::path& image_path);
  Embedding embed(const Image& image, const std::filesystem::path& path) override;

  // 0 until the first response arrives.
  Eigen::Index dimension() const { return dimension_; }

 private:
  std::unique_ptr<ChildProcess> child_;
  std::filesystem::path scratch_dir_;
  bool owns_scratch_ = false;
  Eigen::Index dimension_ = 0;
  std::size_t scratch_counter_ = 0;
};

// Parses one response line; throws kBackendMalformed or kBackendReported.
Eigen::VectorXd parse_embedding_response(const std::string& line);

}  // namespace facesweep
