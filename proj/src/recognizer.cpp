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

#include "facesweep/recognizer.hpp"

#include <atomic>
#include <cmath>

#include <unistd.h>

#include "json.hpp"

#include "facesweep/error.hpp"
#include "facesweep/subprocess.hpp"

namespace facesweep {

Embedding Embedding::from_raw(const Eigen::VectorXd& raw) {
  if (raw.size() == 0 || !raw.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "embedding must be a non-empty finite vector");
  }
  const double norm = raw.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::kInvalidArgument, "embedding has zero norm");
  Embedding e;
  e.values_ = raw / norm;
  return e;
}

double Embedding::dot(const Embedding& other) const {
  if (other.dimension() != dimension()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding dimensions differ: " + std::to_string(dimension()) + " vs " +
                    std::to_string(other.dimension()));
  }
  return values_.dot(other.values_);
}

Eigen::VectorXd stub_features(std::span<const double> gray, int width, int height) {
  if (width <= 0 || height <= 0 || gray.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::kInvalidArgument, "stub recognizer needs a non-empty image");
  }
  Eigen::VectorXd cells = Eigen::VectorXd::Zero(kStubDimension);
  for (int gy = 0; gy < kStubGrid; ++gy) {
    const int y0 = gy * height / kStubGrid;
    const int y1 = std::max(y0 + 1, (gy + 1) * height / kStubGrid);
    for (int gx = 0; gx < kStubGrid; ++gx) {
      const int x0 = gx * width / kStubGrid;
      const int x1 = std::max(x0 + 1, (gx + 1) * width / kStubGrid);
      double sum = 0.0;
      int count = 0;
      for (int y = y0; y < std::min(y1, height); ++y) {
        for (int x = x0; x < std::min(x1, width); ++x) {
          sum += gray[static_cast<std::size_t>(y) * width + x];
          ++count;
        }
      }
      cells[gy * kStubGrid + gx] = sum / count;
    }
  }
  const double mean = cells.mean();
  cells.array() -= mean;
  if (cells.squaredNorm() == 0.0) {
    cells.setZero();
    cells[0] = 1.0;
  }
  return cells;
}

Eigen::VectorXd stub_features(const Image& image) {
  if (image.empty()) throw Error(ErrorKind::kInvalidArgument, "stub recognizer needs a non-empty image");
  std::vector<double> gray(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < image.channels; ++c) sum += image.samples[i * image.channels + c];
    gray[i] = sum / image.channels;
  }
  return stub_features(gray, image.width, image.height);
}

Embedding embed_stub(const Image& image) { return Embedding::from_raw(stub_features(image)); }

void Gallery::enroll(const std::string& id, std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw Error(ErrorKind::kEmptyInput, "no embeddings to enroll for " + id);
  auto [it, inserted] = entries_.try_emplace(id);
  Entry& entry = it->second;
  for (const Embedding& e : embeddings) {
    if (entry.count == 0 && entry.sum.size() == 0) entry.sum = Eigen::VectorXd::Zero(e.dimension());
    if (e.dimension() != entry.sum.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "embedding dimension changed while enrolling " + id);
    }
    entry.sum += e.values();
    ++entry.count;
  }
  entry.centroid = Embedding::from_raw(entry.sum);
}

const Gallery::Entry& Gallery::entry(const std::string& id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorKind::kMissingIdentity, "identity " + id + " not enrolled");
  return it->second;
}

Classification Gallery::classify(const Embedding& query) const {
  if (entries_.empty()) throw Error(ErrorKind::kEmptyInput, "cannot classify against an empty gallery");
  Classification best;
  bool first = true;
  // Map iteration is in ascending id order, so a strict comparison keeps the
  // smallest id among ties.
  for (const auto& [id, entry] : entries_) {
    const double s = entry.centroid.dot(query);
    if (first || s > best.similarity) {
      best = {id, s};
      first = false;
    }
  }
  return best;
}

void enroll_images(Gallery& gallery, const std::string& id, RecognitionBackend& backend,
                   std::span<const Image> images) {
  std::vector<Embedding> embeddings;
  embeddings.reserve(images.size());
  for (const Image& image : images) embeddings.push_back(backend.embed(image, {}));
  gallery.enroll(id, embeddings);
}

Eigen::VectorXd parse_embedding_response(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorKind::kBackendMalformed, "recognizer response is not JSON: " + line);
  }
  if (!doc.is_object()) throw Error(ErrorKind::kBackendMalformed, "recognizer response is not an object");
  if (const auto err = doc.find("error"); err != doc.end()) {
    throw Error(ErrorKind::kBackendReported,
                "recognizer reported: " + (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  const auto emb = doc.find("embedding");
  if (emb == doc.end() || !emb->is_array() || emb->empty()) {
    throw Error(ErrorKind::kBackendMalformed, "recognizer response lacks an embedding array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(emb->size()));
  for (std::size_t i = 0; i < emb->size(); ++i) {
    const auto& x = (*emb)[i];
    if (!x.is_number()) throw Error(ErrorKind::kBackendMalformed, "embedding entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = x.get<double>();
  }
  if (!v.allFinite() || v.norm() == 0.0) {
    throw Error(ErrorKind::kBackendMalformed, "embedding must be finite and non-zero");
  }
  return v;
}

ExternalBackend::ExternalBackend(const std::string& command, std::filesystem::path scratch_dir)
    : child_(std::make_unique<ChildProcess>(command)), scratch_dir_(std::move(scratch_dir)) {
  if (scratch_dir_.empty()) {
    static std::atomic<int> instance{0};
    scratch_dir_ = std::filesystem::temp_directory_path() /
                   ("facesweep-backend-" + std::to_string(::getpid()) + "-" +
                    std::to_string(instance++));
    owns_scratch_ = true;
  }
}

ExternalBackend::~ExternalBackend() {
  child_.reset();
  if (owns_scratch_) {
    std::error_code ec;
    std::filesystem::remove_all(scratch_dir_, ec);
  }
}

Embedding ExternalBackend::embed_path(const std::filesystem::path& image_path) {
  const nlohmann::json request = {{"op", "embed"},
                                  {"image", std::filesystem::absolute(image_path).string()}};
  child_->write_line(request.dump());
  const auto line = child_->read_line();
  if (!line) {
    const int status = child_->wait();
    throw Error(ErrorKind::kBackendExited,
                "recognizer process exited with status " + std::to_string(status) +
                    " before answering");
  }
  const Eigen::VectorXd raw = parse_embedding_response(*line);
  if (dimension_ == 0) {
    dimension_ = raw.size();
  } else if (raw.size() != dimension_) {
    throw Error(ErrorKind::kBackendDimensionDrift,
                "recognizer dimension drift: expected " + std::to_string(dimension_) + ", got " +
                    std::to_string(raw.size()));
  }
  return Embedding::from_raw(raw);
}

Embedding ExternalBackend::embed(const Image& image, const std::filesystem::path& path) {
  if (!path.empty()) return embed_path(path);
  std::filesystem::create_directories(scratch_dir_);
  const auto file = scratch_dir_ / ("frame_" + std::to_string(scratch_counter_++ % 2) + ".pgm");
  write_pnm(image, file);
  return embed_path(file);
}

}  // namespace facesweep
