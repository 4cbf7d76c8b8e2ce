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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facesweep/face_model.hpp"

namespace facesweep {

enum class Projection { kWeakPerspective, kPinhole };

// Pixel coordinates put (0, 0) at the top-left corner of the image with rows
// increasing downward; pixel (i, j) has its center at (i + 0.5, j + 0.5).
//
// Weak perspective views the model from +z: nearer points have larger z.
// Pinhole places the optical center at the origin looking along +z, so
// points must have z > 0 and nearer points have smaller z.
struct CameraParams {
  Projection mode = Projection::kWeakPerspective;
  double scale = 100.0;  // pixels per model unit, or focal length in pixels
  double cx = 128.0;
  double cy = 128.0;
  int width = 256;
  int height = 256;

  friend bool operator==(const CameraParams&, const CameraParams&) = default;
};

void validate(const CameraParams& camera);

struct LightingParams {
  Vec3 direction = Vec3(0.0, 0.0, 1.0);  // unit vector toward the light
  double ambient = 0.2;
  double diffuse = 0.8;
};

void validate(const LightingParams& light);

struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;  // row-major, interleaved channels

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        samples(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return samples.empty(); }

  friend bool operator==(const Image&, const Image&) = default;
};

using PixelMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// Throws kProjection for pinhole points with z <= 0.
PixelMatrix project(const VertexMatrix& points, const CameraParams& camera);

// Z-buffered gray Lambertian render with the top-left fill rule. Edge
// functions run on 24.8 fixed-point vertex coordinates. Background is 0.
// Triangles with zero area, non-finite vertices or coordinates beyond
// +-2^20 pixels are skipped.
Image render_mesh(const Mesh& mesh, const CameraParams& camera, const LightingParams& light);

Image to_rgb(const Image& gray);

// Binary PGM (P5) for one channel, PPM (P6) for three; maxval 255.
std::vector<std::uint8_t> encode_pnm(const Image& image);
Image decode_pnm(const std::vector<std::uint8_t>& bytes);
void write_pnm(const Image& image, const std::filesystem::path& path);
Image read_pnm(const std::filesystem::path& path);

}  // namespace facesweep
