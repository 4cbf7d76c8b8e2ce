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

#include "facesweep/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "facesweep/error.hpp"

namespace facesweep {

void validate(const CameraParams& camera) {
  if (!(camera.scale > 0.0) || !std::isfinite(camera.scale)) {
    throw Error(ErrorKind::kInvalidArgument, "camera scale must be positive");
  }
  if (!std::isfinite(camera.cx) || !std::isfinite(camera.cy)) {
    throw Error(ErrorKind::kNonFinite, "camera principal point must be finite");
  }
  if (camera.width < 8 || camera.height < 8) {
    throw Error(ErrorKind::kInvalidArgument, "image must be at least 8x8");
  }
}

void validate(const LightingParams& light) {
  if (std::abs(light.direction.norm() - 1.0) > 1e-6) {
    throw Error(ErrorKind::kInvalidArgument, "light direction must be unit length");
  }
  if (!(light.ambient >= 0.0 && light.ambient <= 1.0) ||
      !(light.diffuse >= 0.0 && light.diffuse <= 1.0) ||
      light.ambient + light.diffuse > 1.0 + 1e-12) {
    throw Error(ErrorKind::kInvalidArgument,
                "ambient and diffuse must lie in [0,1] with ambient + diffuse <= 1");
  }
}

PixelMatrix project(const VertexMatrix& points, const CameraParams& camera) {
  PixelMatrix out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double x = points(i, 0);
    double y = points(i, 1);
    if (camera.mode == Projection::kPinhole) {
      const double z = points(i, 2);
      if (!(z > 0.0)) {
        throw Error(ErrorKind::kProjection,
                    "point " + std::to_string(i) + " lies at or behind the pinhole camera plane");
      }
      x /= z;
      y /= z;
    }
    out(i, 0) = camera.scale * x + camera.cx;
    out(i, 1) = -camera.scale * y + camera.cy;
  }
  return out;
}

namespace {

constexpr double kSubpixel = 256.0;  // 24.8 fixed point
constexpr double kCoordinateLimit = 1 << 20;

struct RasterVertex {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double depth = 0.0;  // smaller is nearer
  Vec3 normal = Vec3::Zero();
};

std::int64_t edge(const RasterVertex& a, const RasterVertex& b, std::int64_t px, std::int64_t py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// For the positive orientation used below, an edge is a top edge when it is
// horizontal and runs toward +x, and a left edge when it runs upward.
bool is_top_left(const RasterVertex& a, const RasterVertex& b) {
  const std::int64_t dx = b.x - a.x;
  const std::int64_t dy = b.y - a.y;
  return dy < 0 || (dy == 0 && dx > 0);
}

void rasterize(std::array<RasterVertex, 3> v, const LightingParams& light, Image& image,
               std::vector<double>& depth) {
  std::int64_t area = edge(v[0], v[1], v[2].x, v[2].y);
  if (area == 0) return;
  if (area < 0) {
    std::swap(v[1], v[2]);
    area = -area;
  }
  const std::int64_t bias0 = is_top_left(v[1], v[2]) ? 0 : -1;
  const std::int64_t bias1 = is_top_left(v[2], v[0]) ? 0 : -1;
  const std::int64_t bias2 = is_top_left(v[0], v[1]) ? 0 : -1;

  const auto lo = [](std::int64_t a, std::int64_t b, std::int64_t c) { return std::min({a, b, c}); };
  const auto hi = [](std::int64_t a, std::int64_t b, std::int64_t c) { return std::max({a, b, c}); };
  const std::int64_t sub = static_cast<std::int64_t>(kSubpixel);
  const std::int64_t x0 = std::max<std::int64_t>(0, lo(v[0].x, v[1].x, v[2].x) / sub - 1);
  const std::int64_t x1 = std::min<std::int64_t>(image.width - 1, hi(v[0].x, v[1].x, v[2].x) / sub + 1);
  const std::int64_t y0 = std::max<std::int64_t>(0, lo(v[0].y, v[1].y, v[2].y) / sub - 1);
  const std::int64_t y1 = std::min<std::int64_t>(image.height - 1, hi(v[0].y, v[1].y, v[2].y) / sub + 1);
  const double inv_area = 1.0 / static_cast<double>(area);

  for (std::int64_t py = y0; py <= y1; ++py) {
    const std::int64_t sy = py * sub + sub / 2;
    for (std::int64_t px = x0; px <= x1; ++px) {
      const std::int64_t sx = px * sub + sub / 2;
      const std::int64_t e0 = edge(v[1], v[2], sx, sy);
      const std::int64_t e1 = edge(v[2], v[0], sx, sy);
      const std::int64_t e2 = edge(v[0], v[1], sx, sy);
      if (e0 + bias0 < 0 || e1 + bias1 < 0 || e2 + bias2 < 0) continue;

      const double l0 = static_cast<double>(e0) * inv_area;
      const double l1 = static_cast<double>(e1) * inv_area;
      const double l2 = static_cast<double>(e2) * inv_area;
      const double d = l0 * v[0].depth + l1 * v[1].depth + l2 * v[2].depth;
      const std::size_t slot = static_cast<std::size_t>(py) * image.width + static_cast<std::size_t>(px);
      if (!(d < depth[slot])) continue;
      depth[slot] = d;

      const Vec3 n = l0 * v[0].normal + l1 * v[1].normal + l2 * v[2].normal;
      const double len = n.norm();
      const double lambert = len > 0.0 ? std::max(0.0, n.dot(light.direction) / len) : 0.0;
      const double value = std::clamp(light.ambient + light.diffuse * lambert, 0.0, 1.0);
      image.at(static_cast<int>(px), static_cast<int>(py)) =
          static_cast<std::uint8_t>(std::lround(255.0 * value));
    }
  }
}

}  // namespace

Image render_mesh(const Mesh& mesh, const CameraParams& camera, const LightingParams& light) {
  validate(camera);
  validate(light);
  Image image(camera.width, camera.height, 1, 0);
  if (mesh.triangles.empty() || mesh.positions.rows() == 0) return image;

  std::vector<double> depth(static_cast<std::size_t>(camera.width) * camera.height,
                            std::numeric_limits<double>::infinity());
  const auto count = mesh.positions.rows();
  std::vector<RasterVertex> verts(static_cast<std::size_t>(count));
  std::vector<bool> usable(static_cast<std::size_t>(count), false);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double x = mesh.positions(i, 0), y = mesh.positions(i, 1), z = mesh.positions(i, 2);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) continue;
    double px, py, key;
    if (camera.mode == Projection::kPinhole) {
      if (!(z > 0.0)) continue;
      px = camera.scale * (x / z) + camera.cx;
      py = -camera.scale * (y / z) + camera.cy;
      key = -1.0 / z;  // affine in screen space, increasing with distance
    } else {
      px = camera.scale * x + camera.cx;
      py = -camera.scale * y + camera.cy;
      key = -z;
    }
    if (std::abs(px) > kCoordinateLimit || std::abs(py) > kCoordinateLimit) continue;
    RasterVertex& rv = verts[static_cast<std::size_t>(i)];
    rv.x = std::llround(px * kSubpixel);
    rv.y = std::llround(py * kSubpixel);
    rv.depth = key;
    if (mesh.vertex_normals.rows() == count) rv.normal = mesh.vertex_normals.row(i).transpose();
    usable[static_cast<std::size_t>(i)] = true;
  }

  for (const Triangle& t : mesh.triangles) {
    if (t[0] < 0 || t[1] < 0 || t[2] < 0 || t[0] >= count || t[1] >= count || t[2] >= count) {
      continue;
    }
    if (!usable[t[0]] || !usable[t[1]] || !usable[t[2]]) continue;
    rasterize({verts[t[0]], verts[t[1]], verts[t[2]]}, light, image, depth);
  }
  return image;
}

Image to_rgb(const Image& gray) {
  if (gray.channels == 3) return gray;
  Image rgb(gray.width, gray.height, 3);
  for (std::size_t i = 0; i < gray.samples.size(); ++i) {
    for (int c = 0; c < 3; ++c) rgb.samples[3 * i + c] = gray.samples[i];
  }
  return rgb;
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorKind::kInvalidArgument, "PNM output needs 1 or 3 channels");
  }
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.samples.begin(), image.samples.end());
  return out;
}

Image decode_pnm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const auto fail = [](const std::string& what) -> Image {
    throw Error(ErrorKind::kSchema, "malformed PNM: " + what);
  };
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_int = [&]() -> long {
    skip_space();
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && pos - start < 9) {
      value = value * 10 + (bytes[pos++] - '0');
    }
    if (pos == start) fail("expected integer");
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    return fail("expected P5 or P6 magic");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (maxval != 255) return fail("only maxval 255 is supported");
  if (width <= 0 || height <= 0) return fail("non-positive dimensions");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) return fail("missing header terminator");
  ++pos;
  const std::size_t payload = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos != payload) return fail("payload size does not match header");
  Image image(static_cast<int>(width), static_cast<int>(height), channels);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), image.samples.begin());
  return image;
}

void write_pnm(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_pnm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

}  // namespace facesweep
