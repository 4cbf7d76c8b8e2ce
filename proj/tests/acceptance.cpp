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

// Acceptance gate: one PASS/FAIL line per headline criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "facesweep/augmentation.hpp"
#include "facesweep/diagnosis.hpp"
#include "facesweep/fitting.hpp"
#include "facesweep/losses.hpp"
#include "facesweep/rng.hpp"
#include "facesweep/sweep.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace facesweep;

namespace {

// Tolerances, fixed here rather than passed in.
constexpr double kMaxFitRmsPx = 0.5;
constexpr double kMaxFitRelativeError = 0.05;
constexpr double kMaxSecondsPerFit = 5.0;
constexpr int kCohortSize = 20;
constexpr double kSweepRange = 0.5;
constexpr int kSweepSamples = 21;
constexpr double kOuterFraction = 0.8;
constexpr double kMaxDiagnosisSeconds = 120.0;
constexpr double kMaxGradientRelativeError = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr int kGradientPoints = 100;
constexpr double kGanTolerance = 1e-9;
constexpr int kSelectionTraces = 1000;
constexpr double kGridTolerance = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(bool pass, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-12); }

void fit_recovery() {
  const FaceModel model = synth_head(0);
  const CameraParams cam;  // 256 x 256
  double worst_rms = 0.0, worst_rel = 0.0, worst_seconds = 0.0;
  bool all_converged = true;
  for (std::uint64_t seed = 0; seed < kCohortSize; ++seed) {
    const ModelParams truth = sample_identity(model, seed);
    FitConfig config;
    config.initial_camera = cam;
    const auto t0 = Clock::now();
    const FitResult fit = fit_landmarks(model, oracle_landmarks(model, truth, cam), config);
    worst_seconds = std::max(worst_seconds, seconds_since(t0));
    all_converged = all_converged && fit.converged;
    worst_rms = std::max(worst_rms, fit.rms_error);
    const auto track = [&](const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
      for (Eigen::Index i = 0; i < want.size(); ++i)
        if (want[i] != 0.0) worst_rel = std::max(worst_rel, rel_err(got[i], want[i]));
    };
    track(fit.params.shape, truth.shape);
    track(fit.params.expression, truth.expression);
    track(fit.params.joint_rotations, truth.joint_rotations);
    track(fit.params.translation, truth.translation);
    worst_rel = std::max(worst_rel, rel_err(fit.camera.scale, cam.scale));
  }
  report(worst_rms < kMaxFitRmsPx && worst_rel < kMaxFitRelativeError && worst_seconds < kMaxSecondsPerFit &&
             all_converged,
         "fit_recovery",
         fmt("20 identities: worst rms %.3g px (< 0.5), worst rel err %.3g (< 0.05), slowest %.3g s (< 5)", worst_rms,
             worst_rel, worst_seconds));
}

void diagnosis_shape() {
  const auto t0 = Clock::now();
  const FaceModel model = synth_head(0);
  const FitMap cohort = synthetic_cohort(model, kCohortSize, 0);
  StubBackend stub;
  const Gallery gallery = enroll_base_renders(model, cohort, stub);
  SweepSpec spec;
  spec.target = resolve_target(model, "yaw");
  spec.range = kSweepRange;
  spec.n_samples = kSweepSamples;
  const ResponseCurve curve = run_diagnosis(model, cohort, spec, stub, gallery).curve;
  const double elapsed = seconds_since(t0);

  const std::size_t centre = curve.k.size() / 2;
  const double at_zero = curve.accuracy[centre];
  bool max_at_zero = curve.k[centre] == 0.0 && summarize(curve).peak_k == 0.0;
  double outer = 0.0;
  int n_outer = 0;
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    max_at_zero = max_at_zero && curve.accuracy[i] <= at_zero;
    if (std::abs(curve.k[i]) >= kOuterFraction * kSweepRange - 1e-12) {
      outer += curve.accuracy[i];
      ++n_outer;
    }
  }
  outer /= n_outer;
  report(max_at_zero && outer < at_zero && elapsed < kMaxDiagnosisSeconds, "diagnosis_shape",
         fmt("acc(k=0) %.4f is the maximum; outer-20%% mean %.4f; run %.3g s (< 120)", at_zero, outer, elapsed));
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

void loss_kernels() {
  Rng rng(2024);
  double worst_l1 = 0.0, worst_gan = 0.0, worst_style = 0.0;
  for (int point = 0; point < kGradientPoints; ++point) {
    FeatureMaps a = {{4, Tensor::zeros(2, 3, 3)}, {9, Tensor::zeros(4, 1, 1)}};
    FeatureMaps b = a;
    for (std::size_t m = 0; m < a.size(); ++m) {
      for (std::size_t i = 0; i < a[m].tensor.size(); ++i) {
        b[m].tensor.values[i] = rng.normal();
        do a[m].tensor.values[i] = rng.normal();
        while (std::abs(a[m].tensor.values[i] - b[m].tensor.values[i]) < 1e-3);
      }
    }
    const FeatureMaps g = weighted_feature_l1_gradient(a, b, kVggLayerWeights);
    for (std::size_t m = 0; m < a.size(); ++m) {
      for (std::size_t i = 0; i < a[m].tensor.size(); ++i) {
        FeatureMaps p = a, q = a;
        p[m].tensor.values[i] += kFdStep;
        q[m].tensor.values[i] -= kFdStep;
        const double fd =
            (weighted_feature_l1(p, b, kVggLayerWeights) - weighted_feature_l1(q, b, kVggLayerWeights)) / (2 * kFdStep);
        worst_l1 = std::max(worst_l1, rel_err(g[m].tensor.values[i], fd));
      }
    }

    const double r = rng.uniform(0.02, 0.98), f = rng.uniform(0.02, 0.98);
    const GanGradient gg = gan_loss_global_gradient(r, f);
    worst_gan = std::max(worst_gan, rel_err(gg.d_real, (gan_loss_global(r + kFdStep, f) -
                                                        gan_loss_global(r - kFdStep, f)) / (2 * kFdStep)));
    worst_gan = std::max(worst_gan, rel_err(gg.d_fake, (gan_loss_global(r, f + kFdStep) -
                                                        gan_loss_global(r, f - kFdStep)) / (2 * kFdStep)));

    std::vector<double> z = random_vector(rng, 8);
    const std::vector<double> zr = random_vector(rng, 8), zt = random_vector(rng, 8);
    for (int i = 0; i < 8; ++i)
      while (std::abs(z[i] - zr[i]) < 1e-3 || std::abs(z[i] - zt[i]) < 1e-3) z[i] += 0.01;
    const StyleGradient sg = style_losses_gradient(z, zr, zt);
    for (int i = 0; i < 8; ++i) {
      auto p = z, q = z;
      p[i] += kFdStep;
      q[i] -= kFdStep;
      const StyleLosses sp = style_losses(p, zr, zt), sq = style_losses(q, zr, zt);
      worst_style = std::max(worst_style, rel_err(sg.ref[i], (sp.ref - sq.ref) / (2 * kFdStep)));
      worst_style = std::max(worst_style, rel_err(sg.tgt[i], (sp.tgt - sq.tgt) / (2 * kFdStep)));
    }
  }
  const double total = total_objective({1, 1, 1, 1, 1, 1, 1, 1});
  const double gan_half = gan_loss_global(0.5, 0.5);
  const ScoreGrid half{4, 4, std::vector<double>(16, 0.5)};
  const double gan_err = std::max(std::abs(gan_half + 2.0 * std::log(2.0)),
                                  std::abs(gan_loss_patch(half, half) + 2.0 * std::log(2.0)));
  const double worst = std::max({worst_l1, worst_gan, worst_style});
  report(worst < kMaxGradientRelativeError && total == 26.0 && gan_err < kGanTolerance, "loss_kernels",
         fmt("worst gradient rel err %.3g (< 1e-4, 100 points x 3 kernels); total %.17g (== 26); gan err %.3g", worst,
             total, gan_err));
}

void batch_balancer() {
  bool edges_ok = pose_bin(-30.0) == 1 && pose_bin(-15.0) == 2 && pose_bin(-5.0) == 3 && pose_bin(5.0) == 4 &&
                  pose_bin(30.0) == 5 && pose_bin(-180.0) == 0 && pose_bin(180.0) == 5 && pose_bin(0.0) == 3;
  Rng rng(6);
  std::size_t batches_checked = 0;
  bool uniform = true;
  for (int trial = 0; trial < 30; ++trial) {
    // 95% of the pairs in one bin, the rest scattered, a few exactly on edges.
    const int heavy = static_cast<int>(rng.index(kNumPoseBins));
    std::vector<PosePair> pairs;
    for (int i = 0; i < 1900; ++i)
      pairs.push_back({"h" + std::to_string(i), rng.uniform(kPoseBinEdges[heavy], kPoseBinEdges[heavy + 1])});
    for (int b = 0; b < kNumPoseBins; ++b) {
      pairs.push_back({"e" + std::to_string(b), kPoseBinEdges[b]});
      for (int i = 0; i < trial % 4; ++i)
        pairs.push_back({"s" + std::to_string(b) + "_" + std::to_string(i),
                         rng.uniform(kPoseBinEdges[b], kPoseBinEdges[b + 1])});
    }
    const std::size_t batch_size = 6 * (1 + rng.index(20));
    for (const Batch& batch : balance_batches(pairs, batch_size, std::nullopt, trial)) {
      std::array<std::size_t, kNumPoseBins> hist{};
      for (auto i : batch) ++hist[pose_bin(pairs[i].delta_degrees)];
      for (auto h : hist) uniform = uniform && h == batch_size / kNumPoseBins;
      uniform = uniform && batch.size() == batch_size;
      ++batches_checked;
    }
  }
  report(uniform && edges_ok, "batch_balancer",
         fmt("%.0f skewed batches with equal per-bin counts; edges -30 -15 -5 5 30 ", double(batches_checked)) +
             (edges_ok ? "ok" : "WRONG"));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void renderer_determinism() {
  int matched = 0, total = 0;
  for (const auto& scene : testing::golden_scenes()) {
    ++total;
    const auto a = encode_pnm(to_rgb(render_mesh(scene.mesh, scene.camera, scene.light)));
    const auto b = encode_pnm(to_rgb(render_mesh(scene.mesh, scene.camera, scene.light)));
    const std::string golden = slurp(std::string(FACESWEEP_GOLDEN_DIR) + "/" + scene.name + ".ppm");
    if (a == b && std::string(a.begin(), a.end()) == golden) ++matched;
  }
  report(matched == total && total == 3, "renderer_determinism",
         fmt("%.0f/%.0f scenes byte-identical across two runs and to the stored golden PPMs", matched, total));
}

void selection_oracles() {
  Rng rng(1000);
  int mismatches = 0;
  for (int trial = 0; trial < kSelectionTraces; ++trial) {
    ParamTrace t{"id", "p", {}};
    const std::size_t n = 5 + rng.index(80);
    const bool coarse = trial % 2 == 0;  // coarse values force ties
    for (std::size_t i = 0; i < n; ++i)
      t.frames.push_back({"f" + std::to_string(i), coarse ? static_cast<double>(rng.index(9)) / 8.0 : rng.normal()});
    const std::size_t n_train = 1 + rng.index(n);
    const std::size_t n_test = 1 + rng.index(std::min<std::size_t>(n, 10));
    if (select_train_frames(t, n_train) != testing::train_oracle(t, n_train)) ++mismatches;
    if (select_test_frames(t, n_test) != testing::test_oracle(t, n_test)) ++mismatches;
  }
  double worst_grid = 0.0;
  bool centred = true;
  for (double range : {0.1, 0.5, 1.0, 2.5}) {
    for (int n : {3, 5, 21, 51}) {
      const auto k = sweep_k_values(range, n);
      for (int i = 0; i < n; ++i) worst_grid = std::max(worst_grid, std::abs(k[i] - (-range + 2 * range * i / (n - 1))));
      centred = centred && k[n / 2] == 0.0;
    }
  }
  report(mismatches == 0 && worst_grid <= kGridTolerance && centred, "selection_oracles",
         fmt("%.0f oracle mismatches over 1000 traces; worst grid deviation %.3g (<= 1e-12)", mismatches, worst_grid));
}

void process_boundary() {
  const FaceModel model = synth_head(0);
  const FitMap cohort = synthetic_cohort(model, kCohortSize, 0);
  int identical = 0, total = 0;
  for (const std::string param : {"yaw", "jaw"}) {
    SweepSpec spec;
    spec.target = resolve_target(model, param);
    spec.range = kSweepRange;
    spec.n_samples = kSweepSamples;
    StubBackend local;
    const Gallery g_local = enroll_base_renders(model, cohort, local);
    const std::string in_process = format_curve(run_diagnosis(model, cohort, spec, local, g_local).curve);
    ExternalBackend remote(FACESWEEP_STUB_BACKEND);
    const Gallery g_remote = enroll_base_renders(model, cohort, remote);
    const std::string wired = format_curve(run_diagnosis(model, cohort, spec, remote, g_remote).curve);
    ++total;
    identical += in_process == wired;
  }
  report(identical == total, "process_boundary_equivalence",
         fmt("%.0f/%.0f curves byte-identical between in-process and external stub", identical, total));
}

}  // namespace

int main() {
  const std::vector<void (*)()> checks = {fit_recovery,         diagnosis_shape,   loss_kernels,    batch_balancer,
                                          renderer_determinism, selection_oracles, process_boundary};
  for (auto check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(false, "exception", e.what());
    }
  }
  std::printf("%s: %d failing\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
