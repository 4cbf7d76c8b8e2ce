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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace facesweep {

// Dense C x H x W values, channel-major.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  static Tensor zeros(int channels, int height, int width);
  std::size_t size() const { return values.size(); }
  double& at(int c, int y, int x) { return values[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// Throws kInvalidArgument for non-positive dimensions or a size mismatch,
// kNonFinite for non-finite values.
void validate(const Tensor& tensor, const std::string& what);

struct FeatureMap {
  int layer = 0;
  Tensor tensor;
};
using FeatureMaps = std::vector<FeatureMap>;
using LayerWeights = std::map<int, double>;

// Image -> feature maps at fixed layer indices. Must be deterministic.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMaps extract(const Tensor& image) const = 0;
};

// Layer l is the input average-pooled by factor[l]. Mean-preserving and
// linear, so it maps a constant image offset to the same offset everywhere.
class PoolingExtractor final : public FeatureExtractor {
 public:
  explicit PoolingExtractor(std::map<int, int> factors);
  FeatureMaps extract(const Tensor& image) const override;

 private:
  std::map<int, int> factors_;
};

// Layer l is a fixed Gaussian linear map of the flattened input, scaled by
// 1/sqrt(input size).
class RandomLinearExtractor final : public FeatureExtractor {
 public:
  struct Shape {
    int channels = 1;
    int height = 1;
    int width = 1;
  };
  RandomLinearExtractor(int in_channels, int in_height, int in_width, std::map<int, Shape> layers,
                        std::uint64_t seed);
  FeatureMaps extract(const Tensor& image) const override;

 private:
  int in_channels_, in_height_, in_width_;
  std::map<int, Shape> layers_;
  std::map<int, std::vector<double>> matrices_;  // out x in, row-major
};

// sum_l w_l * sum |a_l - b_l|. With `normalize`, each layer's sum is divided
// by its element count. The layers of a and b must match in order and shape,
// and the weight keys must be exactly those layers.
double weighted_feature_l1(const FeatureMaps& a, const FeatureMaps& b, const LayerWeights& weights,
                           bool normalize = false);
// Gradient with respect to a; sign(0) is taken as 0.
FeatureMaps weighted_feature_l1_gradient(const FeatureMaps& a, const FeatureMaps& b,
                                         const LayerWeights& weights, bool normalize = false);

// Discriminator scores are clamped to [kGanEpsilon, 1 - kGanEpsilon] before the log.
inline constexpr double kGanEpsilon = 1e-7;

// log D(real) + log(1 - D(fake)). Scores outside [0, 1] are rejected.
double gan_loss_global(double d_real, double d_fake);
// Batch mean over paired scores.
double gan_loss_global(std::span<const double> d_real, std::span<const double> d_fake);

struct GanGradient {
  double d_real = 0.0;
  double d_fake = 0.0;
};
// Zero in the clamped region.
GanGradient gan_loss_global_gradient(double d_real, double d_fake);

struct ScoreGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major
};

// Mean over patches of log real + log(1 - fake). Grids must have equal shape.
double gan_loss_patch(const ScoreGrid& real, const ScoreGrid& fake);

inline const LayerWeights kVggLayerWeights = {{4, 0.5}, {9, 1.0}};
inline const LayerWeights kVggFaceLayerWeights = {{10, 0.5}, {13, 1.0}};

// weighted_feature_l1 over the extractor's maps of two equally sized images.
double perceptual_loss(const FeatureExtractor& extractor, const Tensor& target, const Tensor& generated,
                       const LayerWeights& weights, bool normalize = false);

struct CycleLosses {
  double vggface = 0.0;
  double vgg = 0.0;
};
// The caller supplies the reconstruction; this only evaluates the two losses.
CycleLosses cycle_losses(const FeatureExtractor& vggface, const LayerWeights& vggface_weights,
                         const FeatureExtractor& vgg, const LayerWeights& vgg_weights,
                         const Tensor& original, const Tensor& reconstructed, bool normalize = false);

struct StyleLosses {
  double ref = 0.0;
  double tgt = 0.0;
};
// (|z' - z_ref|_1, |z' - z_tgt|_1)
StyleLosses style_losses(std::span<const double> z_prime, std::span<const double> z_ref,
                         std::span<const double> z_tgt);
struct StyleGradient {
  std::vector<double> ref;  // d ref / d z'
  std::vector<double> tgt;  // d tgt / d z'
};
StyleGradient style_losses_gradient(std::span<const double> z_prime, std::span<const double> z_ref,
                                    std::span<const double> z_tgt);

struct LossWeights {
  double vgg = 10.0;
  double vggface = 10.0;
  double cyc_vggface = 1.0;
  double cyc_vgg = 1.0;
  double sty_ref = 1.0;
  double sty_tgt = 1.0;
  LayerWeights vgg_layers = kVggLayerWeights;
  LayerWeights vggface_layers = kVggFaceLayerWeights;
};

void validate(const LossWeights& weights);

struct LossComponents {
  std::optional<double> gan_global;
  std::optional<double> gan_patch;
  std::optional<double> vgg;
  std::optional<double> vggface;
  std::optional<double> cyc_vggface;
  std::optional<double> cyc_vgg;
  std::optional<double> sty_ref;
  std::optional<double> sty_tgt;
};

// Throws kSchema naming the first missing component.
double total_objective(const LossComponents& components, const LossWeights& weights = {});

// {"gan_global", "gan_patch", "vgg", "vggface", "cyc_vggface", "cyc_vgg", "sty_ref", "sty_tgt"}
LossComponents components_from_json(const nlohmann::json& doc);
nlohmann::json components_to_json(const LossComponents& components);
// Keys as in LossWeights; layer maps as {"4": 0.5, ...}. Missing keys keep `base`.
LossWeights weights_from_json(const nlohmann::json& doc, const LossWeights& base = {});
nlohmann::json weights_to_json(const LossWeights& weights);

}  // namespace facesweep
