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

#include "facesweep/losses.hpp"

#include <algorithm>
#include <cmath>

#include "facesweep/error.hpp"
#include "facesweep/rng.hpp"
#include "facesweep/text_format.hpp"

namespace facesweep {

namespace {

std::string dims(const Tensor& t) {
  return std::to_string(t.channels) + "x" + std::to_string(t.height) + "x" + std::to_string(t.width);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Checks layer order, shapes, and that the weights cover exactly these layers.
void check_pairing(const FeatureMaps& a, const FeatureMaps& b, const LayerWeights& weights) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature map lists differ in length: " +
                                                   std::to_string(a.size()) + " vs " +
                                                   std::to_string(b.size()));
  }
  if (a.size() != weights.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "layer weights cover " + std::to_string(weights.size()) +
                                                   " layers, feature maps have " +
                                                   std::to_string(a.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ta = a[i].tensor;
    const auto& tb = b[i].tensor;
    const std::string name = "layer " + std::to_string(a[i].layer);
    if (a[i].layer != b[i].layer) {
      throw Error(ErrorKind::kDimensionMismatch, name + " is paired with layer " + std::to_string(b[i].layer));
    }
    if (!weights.contains(a[i].layer)) throw Error(ErrorKind::kDimensionMismatch, name + " has no weight");
    validate(ta, name);
    validate(tb, name);
    if (ta.channels != tb.channels || ta.height != tb.height || ta.width != tb.width) {
      throw Error(ErrorKind::kDimensionMismatch, name + " shapes differ: " + dims(ta) + " vs " + dims(tb));
    }
  }
}

double clamp_score(double d, const char* what) {
  if (std::isnan(d)) throw Error(ErrorKind::kNonFinite, std::string(what) + " score is NaN");
  if (d < 0.0 || d > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " score must lie in [0, 1]");
  }
  return std::clamp(d, kGanEpsilon, 1.0 - kGanEpsilon);
}

void check_styles(std::span<const double> z_prime, std::span<const double> z_ref,
                  std::span<const double> z_tgt) {
  for (auto z : {z_ref, z_tgt}) {
    if (z.size() != z_prime.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "style vector lengths differ: " +
                                                     std::to_string(z_prime.size()) + " vs " +
                                                     std::to_string(z.size()));
    }
  }
  for (auto z : {z_prime, z_ref, z_tgt}) {
    for (double v : z) {
      if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "style vector has a non-finite entry");
    }
  }
}

}  // namespace

Tensor Tensor::zeros(int channels, int height, int width) {
  Tensor t{channels, height, width, {}};
  t.values.assign(static_cast<std::size_t>(std::max(0, channels)) * std::max(0, height) *
                      std::max(0, width),
                  0.0);
  return t;
}

void validate(const Tensor& tensor, const std::string& what) {
  if (tensor.channels <= 0 || tensor.height <= 0 || tensor.width <= 0) {
    throw Error(ErrorKind::kInvalidArgument, what + " has non-positive dimensions " + dims(tensor));
  }
  if (tensor.values.size() != static_cast<std::size_t>(tensor.channels) * tensor.height * tensor.width) {
    throw Error(ErrorKind::kInvalidArgument, what + " has " + std::to_string(tensor.values.size()) +
                                                 " values for shape " + dims(tensor));
  }
  for (double v : tensor.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, what + " has a non-finite value");
  }
}

PoolingExtractor::PoolingExtractor(std::map<int, int> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw Error(ErrorKind::kInvalidArgument, "extractor needs at least one layer");
  for (const auto& [layer, f] : factors_) {
    if (f <= 0) throw Error(ErrorKind::kInvalidArgument, "pooling factor must be positive");
  }
}

FeatureMaps PoolingExtractor::extract(const Tensor& image) const {
  validate(image, "image");
  FeatureMaps maps;
  for (const auto& [layer, f] : factors_) {
    if (image.height % f != 0 || image.width % f != 0) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "image " + dims(image) + " is not divisible by pooling factor " + std::to_string(f));
    }
    Tensor out = Tensor::zeros(image.channels, image.height / f, image.width / f);
    const double inv = 1.0 / (static_cast<double>(f) * f);
    for (int c = 0; c < image.channels; ++c) {
      for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
          double sum = 0.0;
          for (int dy = 0; dy < f; ++dy) {
            for (int dx = 0; dx < f; ++dx) sum += image.at(c, y * f + dy, x * f + dx);
          }
          out.at(c, y, x) = sum * inv;
        }
      }
    }
    maps.push_back({layer, std::move(out)});
  }
  return maps;
}

RandomLinearExtractor::RandomLinearExtractor(int in_channels, int in_height, int in_width,
                                             std::map<int, Shape> layers, std::uint64_t seed)
    : in_channels_(in_channels), in_height_(in_height), in_width_(in_width), layers_(std::move(layers)) {
  if (in_channels <= 0 || in_height <= 0 || in_width <= 0 || layers_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "random extractor needs positive shapes and a layer");
  }
  const std::size_t in = static_cast<std::size_t>(in_channels) * in_height * in_width;
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  Rng rng(seed);
  for (const auto& [layer, s] : layers_) {
    if (s.channels <= 0 || s.height <= 0 || s.width <= 0) {
      throw Error(ErrorKind::kInvalidArgument, "random extractor layer shapes must be positive");
    }
    std::vector<double> m(static_cast<std::size_t>(s.channels) * s.height * s.width * in);
    for (double& v : m) v = scale * rng.normal();
    matrices_[layer] = std::move(m);
  }
}

FeatureMaps RandomLinearExtractor::extract(const Tensor& image) const {
  validate(image, "image");
  if (image.channels != in_channels_ || image.height != in_height_ || image.width != in_width_) {
    throw Error(ErrorKind::kDimensionMismatch, "extractor expects " + std::to_string(in_channels_) + "x" +
                                                   std::to_string(in_height_) + "x" +
                                                   std::to_string(in_width_) + ", got " + dims(image));
  }
  FeatureMaps maps;
  const std::size_t in = image.size();
  for (const auto& [layer, s] : layers_) {
    Tensor out = Tensor::zeros(s.channels, s.height, s.width);
    const auto& m = matrices_.at(layer);
    for (std::size_t o = 0; o < out.size(); ++o) {
      double sum = 0.0;
      for (std::size_t i = 0; i < in; ++i) sum += m[o * in + i] * image.values[i];
      out.values[o] = sum;
    }
    maps.push_back({layer, std::move(out)});
  }
  return maps;
}

double weighted_feature_l1(const FeatureMaps& a, const FeatureMaps& b, const LayerWeights& weights,
                           bool normalize) {
  check_pairing(a, b, weights);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& va = a[i].tensor.values;
    const auto& vb = b[i].tensor.values;
    double sum = 0.0;
    for (std::size_t j = 0; j < va.size(); ++j) sum += std::abs(va[j] - vb[j]);
    if (normalize) sum /= static_cast<double>(va.size());
    total += weights.at(a[i].layer) * sum;
  }
  return total;
}

FeatureMaps weighted_feature_l1_gradient(const FeatureMaps& a, const FeatureMaps& b,
                                         const LayerWeights& weights, bool normalize) {
  check_pairing(a, b, weights);
  FeatureMaps grad = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& g = grad[i].tensor.values;
    const auto& vb = b[i].tensor.values;
    double w = weights.at(a[i].layer);
    if (normalize) w /= static_cast<double>(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = w * sign(a[i].tensor.values[j] - vb[j]);
  }
  return grad;
}

double gan_loss_global(double d_real, double d_fake) {
  return std::log(clamp_score(d_real, "real")) + std::log(1.0 - clamp_score(d_fake, "fake"));
}

double gan_loss_global(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty()) throw Error(ErrorKind::kEmptyInput, "empty discriminator batch");
  if (d_real.size() != d_fake.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "real and fake batches differ in size: " +
                                                   std::to_string(d_real.size()) + " vs " +
                                                   std::to_string(d_fake.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) sum += gan_loss_global(d_real[i], d_fake[i]);
  return sum / static_cast<double>(d_real.size());
}

GanGradient gan_loss_global_gradient(double d_real, double d_fake) {
  const double r = clamp_score(d_real, "real");
  const double f = clamp_score(d_fake, "fake");
  GanGradient g;
  g.d_real = r == d_real ? 1.0 / r : 0.0;
  g.d_fake = f == d_fake ? -1.0 / (1.0 - f) : 0.0;
  return g;
}

double gan_loss_patch(const ScoreGrid& real, const ScoreGrid& fake) {
  for (const ScoreGrid* g : {&real, &fake}) {
    if (g->rows <= 0 || g->cols <= 0 || g->values.empty()) {
      throw Error(ErrorKind::kEmptyInput, "patch score grid is empty");
    }
    if (g->values.size() != static_cast<std::size_t>(g->rows) * g->cols) {
      throw Error(ErrorKind::kInvalidArgument, "patch grid value count does not match its shape");
    }
  }
  if (real.rows != fake.rows || real.cols != fake.cols) {
    throw Error(ErrorKind::kDimensionMismatch, "real and fake patch grids differ in shape");
  }
  return gan_loss_global(std::span<const double>(real.values), std::span<const double>(fake.values));
}

double perceptual_loss(const FeatureExtractor& extractor, const Tensor& target, const Tensor& generated,
                       const LayerWeights& weights, bool normalize) {
  if (target.channels != generated.channels || target.height != generated.height ||
      target.width != generated.width) {
    throw Error(ErrorKind::kDimensionMismatch,
                "images differ in shape: " + dims(target) + " vs " + dims(generated));
  }
  return weighted_feature_l1(extractor.extract(target), extractor.extract(generated), weights, normalize);
}

CycleLosses cycle_losses(const FeatureExtractor& vggface, const LayerWeights& vggface_weights,
                         const FeatureExtractor& vgg, const LayerWeights& vgg_weights,
                         const Tensor& original, const Tensor& reconstructed, bool normalize) {
  return {perceptual_loss(vggface, original, reconstructed, vggface_weights, normalize),
          perceptual_loss(vgg, original, reconstructed, vgg_weights, normalize)};
}

StyleLosses style_losses(std::span<const double> z_prime, std::span<const double> z_ref,
                         std::span<const double> z_tgt) {
  check_styles(z_prime, z_ref, z_tgt);
  StyleLosses s;
  for (std::size_t i = 0; i < z_prime.size(); ++i) {
    s.ref += std::abs(z_prime[i] - z_ref[i]);
    s.tgt += std::abs(z_prime[i] - z_tgt[i]);
  }
  return s;
}

StyleGradient style_losses_gradient(std::span<const double> z_prime, std::span<const double> z_ref,
                                    std::span<const double> z_tgt) {
  check_styles(z_prime, z_ref, z_tgt);
  StyleGradient g;
  for (std::size_t i = 0; i < z_prime.size(); ++i) {
    g.ref.push_back(sign(z_prime[i] - z_ref[i]));
    g.tgt.push_back(sign(z_prime[i] - z_tgt[i]));
  }
  return g;
}

void validate(const LossWeights& w) {
  for (double v : {w.vgg, w.vggface, w.cyc_vggface, w.cyc_vgg, w.sty_ref, w.sty_tgt}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument, "loss weights must be finite and non-negative");
    }
  }
  for (const auto* layers : {&w.vgg_layers, &w.vggface_layers}) {
    for (const auto& [layer, v] : *layers) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "weight of layer " + std::to_string(layer) + " must be finite and non-negative");
      }
    }
  }
}

namespace {

struct ComponentField {
  const char* key;
  std::optional<double> LossComponents::*member;
};

constexpr ComponentField kComponentFields[] = {
    {"gan_global", &LossComponents::gan_global}, {"gan_patch", &LossComponents::gan_patch},
    {"vgg", &LossComponents::vgg},               {"vggface", &LossComponents::vggface},
    {"cyc_vggface", &LossComponents::cyc_vggface}, {"cyc_vgg", &LossComponents::cyc_vgg},
    {"sty_ref", &LossComponents::sty_ref},       {"sty_tgt", &LossComponents::sty_tgt},
};

struct WeightField {
  const char* key;
  double LossWeights::*member;
};

constexpr WeightField kWeightFields[] = {
    {"vgg", &LossWeights::vgg},         {"vggface", &LossWeights::vggface},
    {"cyc_vggface", &LossWeights::cyc_vggface}, {"cyc_vgg", &LossWeights::cyc_vgg},
    {"sty_ref", &LossWeights::sty_ref}, {"sty_tgt", &LossWeights::sty_tgt},
};

double finite_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorKind::kSchema, key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorKind::kNonFinite, key + " is not finite");
  return d;
}

}  // namespace

double total_objective(const LossComponents& c, const LossWeights& w) {
  validate(w);
  for (const auto& field : kComponentFields) {
    if (!(c.*field.member)) {
      throw Error(ErrorKind::kSchema, std::string("loss component ") + field.key + " is missing");
    }
  }
  return *c.gan_global + *c.gan_patch + w.vgg * *c.vgg + w.vggface * *c.vggface +
         w.cyc_vggface * *c.cyc_vggface + w.cyc_vgg * *c.cyc_vgg + w.sty_ref * *c.sty_ref +
         w.sty_tgt * *c.sty_tgt;
}

LossComponents components_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "loss components must be a JSON object");
  LossComponents c;
  for (const auto& field : kComponentFields) {
    if (const auto it = doc.find(field.key); it != doc.end()) {
      c.*field.member = finite_number(*it, field.key);
    }
  }
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    const bool known = std::any_of(std::begin(kComponentFields), std::end(kComponentFields),
                                   [&](const auto& f) { return key == f.key; });
    if (!known) throw Error(ErrorKind::kSchema, "unknown loss component " + key);
  }
  return c;
}

nlohmann::json components_to_json(const LossComponents& c) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& field : kComponentFields) {
    if (c.*field.member) doc[field.key] = *(c.*field.member);
  }
  return doc;
}

LossWeights weights_from_json(const nlohmann::json& doc, const LossWeights& base) {
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "loss weights must be a JSON object");
  LossWeights w = base;
  for (const auto& field : kWeightFields) {
    if (const auto it = doc.find(field.key); it != doc.end()) w.*field.member = finite_number(*it, field.key);
  }
  const auto layers = [&](const char* key, LayerWeights& out) {
    const auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_object()) throw Error(ErrorKind::kSchema, std::string(key) + " must be an object");
    out.clear();
    for (const auto& [layer, value] : it->items()) {
      out[static_cast<int>(parse_integer(layer))] = finite_number(value, std::string(key) + "." + layer);
    }
  };
  layers("vgg_layers", w.vgg_layers);
  layers("vggface_layers", w.vggface_layers);
  validate(w);
  return w;
}

nlohmann::json weights_to_json(const LossWeights& w) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& field : kWeightFields) doc[field.key] = w.*field.member;
  for (const auto& [key, layers] : {std::pair{"vgg_layers", &w.vgg_layers},
                                    std::pair{"vggface_layers", &w.vggface_layers}}) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [layer, v] : *layers) m[std::to_string(layer)] = v;
    doc[key] = m;
  }
  return doc;
}

}  // namespace facesweep
