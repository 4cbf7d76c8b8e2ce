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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "facesweep/augmentation.hpp"
#include "facesweep/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace facesweep;
using testing::kind_of;
using testing::test_oracle;
using testing::train_oracle;

namespace {

ParamTrace trace_of(const std::vector<double>& values) {
  ParamTrace t{"id", "jaw", {}};
  char buf[16];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "f%04zu", i);
    t.frames.push_back({buf, values[i]});
  }
  return t;
}

ParamTrace random_trace(Rng& rng) {
  const std::size_t n = 10 + rng.index(60);
  std::vector<double> v(n);
  const bool coarse = rng.uniform() < 0.5;  // coarse values create ties
  for (auto& x : v) x = coarse ? static_cast<double>(rng.index(7)) / 4.0 : rng.normal(0.0, 1.0);
  return trace_of(v);
}

double variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / v.size();
}

std::vector<PosePair> pairs_from(const std::vector<double>& deltas) {
  std::vector<PosePair> out;
  for (std::size_t i = 0; i < deltas.size(); ++i) out.push_back({"p" + std::to_string(i), deltas[i]});
  return out;
}

}  // namespace

TEST_CASE("training selection examples") {
  CHECK(select_train_frames(trace_of({0.1, 0.5, 0.9}), 1) == std::vector<std::string>{"f0001"});
  CHECK(select_train_frames(trace_of({0.0, 1.0}), 1) == std::vector<std::string>{"f0000"});
  CHECK(select_train_frames(trace_of({0.3, 5.0, 0.2, -4.0, 0.25}), 3) ==
        std::vector<std::string>{"f0000", "f0002", "f0004"});
  CHECK(kind_of([] { select_train_frames(trace_of({1.0}), 2); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { select_train_frames(trace_of({}), 0); }) == ErrorKind::kEmptyInput);
  CHECK(kind_of([] { select_train_frames(trace_of({std::nan("")}), 1); }) == ErrorKind::kNonFinite);
}

TEST_CASE("training selection matches the rank oracle on 200 values") {
  Rng rng(200);
  std::vector<double> v(200);
  for (auto& x : v) x = rng.uniform(-2, 3);
  const ParamTrace t = trace_of(v);
  CHECK(select_train_frames(t, 3) == train_oracle(t, 3));
}

TEST_CASE("test selection examples") {
  std::vector<double> lin;
  for (int i = 0; i < 10; ++i) lin.push_back(i / 9.0);
  const auto all = select_test_frames(trace_of(lin));
  REQUIRE(all.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(all[i] == trace_of(lin).frames[i].frame_id);
  CHECK(select_test_frames(trace_of({2, 2, 2, 2}), 2) == std::vector<std::string>{"f0000", "f0001"});
  CHECK(select_test_frames(trace_of({3, 1, 2}), 1) == std::vector<std::string>{"f0001"});
  CHECK(kind_of([] { select_test_frames(trace_of({1, 2}), 3); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { select_test_frames(trace_of({}), 1); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("selections match brute-force oracles and satisfy their invariants") {
  Rng rng(1000);
  for (int trial = 0; trial < 300; ++trial) {
    const ParamTrace t = random_trace(rng);
    const std::size_t n_train = 1 + rng.index(t.frames.size());
    const std::size_t n_test = 1 + rng.index(std::min<std::size_t>(t.frames.size(), 12));
    const auto train = select_train_frames(t, n_train);
    const auto test = select_test_frames(t, n_test);
    CHECK(train == train_oracle(t, n_train));
    CHECK(test == test_oracle(t, n_test));
    CHECK(std::set<std::string>(test.begin(), test.end()).size() == test.size());

    double mean = 0.0;
    for (const auto& f : t.frames) mean += f.value;
    mean /= t.frames.size();
    double worst_selected = 0.0, best_unselected = std::numeric_limits<double>::infinity();
    std::vector<double> selected;
    std::vector<double> all;
    for (const auto& f : t.frames) {
      all.push_back(f.value);
      const bool in = std::find(train.begin(), train.end(), f.frame_id) != train.end();
      const double d = std::abs(f.value - mean);
      if (in) {
        worst_selected = std::max(worst_selected, d);
        selected.push_back(f.value);
      } else {
        best_unselected = std::min(best_unselected, d);
      }
    }
    CHECK(worst_selected <= best_unselected);
    if (std::set<double>(all.begin(), all.end()).size() >= 3) CHECK(variance(selected) <= variance(all) + 1e-12);
  }
}

TEST_CASE("trace CSV parsing groups by identity and parameter") {
  const auto rows = parse_csv(
      "identity,frame,param,value\n"
      "a,f1,jaw,0.1\n"
      "b,f1,jaw,0.2\n"
      "a,f2,jaw,0.3\n"
      "a,f1,smile,1.5\n");
  const auto traces = parse_traces(rows, "traces.csv");
  REQUIRE(traces.size() == 3);
  CHECK(traces[0].identity == "a");
  CHECK(traces[0].param == "jaw");
  REQUIRE(traces[0].frames.size() == 2);
  CHECK(traces[0].frames[1].frame_id == "f2");
  CHECK(kind_of([] { parse_traces(parse_csv("identity,frame,param\n"), "x"); }) == ErrorKind::kSchema);
}

TEST_CASE("augmented manifest counts") {
  std::vector<RealFrame> real;
  std::vector<std::vector<SweepManifestRow>> sweeps;
  const auto k = sweep_k_values(0.5, 21);
  for (const std::string id : {"a", "b", "c"}) {
    real.push_back({id, id + "/real.png", "jaw", 0.3});
    std::vector<SweepManifestRow> rows;
    for (std::size_t i = 0; i < k.size(); ++i) {
      rows.push_back({id, "jaw", k[i], (1 + k[i]) * 0.3, id + "/syn_" + std::to_string(i) + ".pgm"});
    }
    sweeps.push_back(rows);
  }
  const AugmentedManifest m = build_augmented_manifest(real, sweeps);
  CHECK(m.rows.size() == 66);
  for (const std::string id : {"a", "b", "c"}) {
    CHECK(m.per_identity.at(id).total() == 22);
    CHECK(m.per_identity.at(id).real == 1);
  }
  // recount
  std::size_t syn = 0, with_k = 0;
  for (const auto& r : m.rows) {
    syn += r.source == FrameSource::kSynthetic;
    with_k += r.k.has_value();
  }
  CHECK(syn == 63);
  CHECK(with_k == 63);
  CHECK(m.per_param.at("jaw").synthetic == 63);
  CHECK(m.rows.front().source == FrameSource::kReal);

  const std::string text = format_training_manifest(m);
  CHECK(text.rfind("identity,param,k,value,image_path,source\n", 0) == 0);
  CHECK(text.find("a,jaw,,0.3,a/real.png,real\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 67);

  const AugmentedManifest plain = build_augmented_manifest(real, {});
  CHECK(plain.rows.size() == real.size());
  for (std::size_t i = 0; i < real.size(); ++i) CHECK(plain.rows[i].image_path == real[i].frame_id);
}

TEST_CASE("augmented manifest errors") {
  std::vector<RealFrame> real = {{"a", "a/x.png", "jaw", 0.1}};
  std::vector<std::vector<SweepManifestRow>> clash = {{{"a", "jaw", 0.0, 0.1, "a/x.png"}}};
  CHECK(kind_of([&] { build_augmented_manifest(real, clash); }) == ErrorKind::kCollision);
  std::vector<std::vector<SweepManifestRow>> stranger = {{{"z", "jaw", 0.0, 0.1, "z/0.pgm"}}};
  CHECK(kind_of([&] { build_augmented_manifest(real, stranger); }) == ErrorKind::kMissingIdentity);
}

TEST_CASE("pose bins at their exact edges") {
  CHECK(pose_bin(-180.0) == 0);
  CHECK(pose_bin(-30.0001) == 0);
  CHECK(pose_bin(-30.0) == 1);
  CHECK(pose_bin(-15.0) == 2);
  CHECK(pose_bin(-5.0) == 3);
  CHECK(pose_bin(0.0) == 3);
  CHECK(pose_bin(std::nextafter(5.0, 0.0)) == 3);
  CHECK(pose_bin(5.0) == 4);
  CHECK(pose_bin(30.0) == 5);
  CHECK(pose_bin(180.0) == 5);
  CHECK(kind_of([] { pose_bin(180.5); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { pose_bin(-181.0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { pose_bin(std::nan("")); }) == ErrorKind::kInvalidArgument);
  CHECK(pose_bin_label(3) == "[-5, 5)");
  CHECK(pose_bin_label(5) == "[30, 180]");
}

TEST_CASE("populous bins give exact counts and no repeats") {
  Rng rng(4);
  std::vector<double> deltas;
  for (int b = 0; b < kNumPoseBins; ++b) {
    for (int i = 0; i < 30; ++i) deltas.push_back(rng.uniform(kPoseBinEdges[b], kPoseBinEdges[b + 1]));
  }
  const auto pairs = pairs_from(deltas);
  const auto batches = balance_batches(pairs, 12, 40, 7);
  CHECK(batches.size() == 40);
  for (const Batch& b : batches) {
    REQUIRE(b.size() == 12);
    std::array<int, kNumPoseBins> hist{};
    for (auto i : b) ++hist[pose_bin(pairs[i].delta_degrees)];
    for (int h : hist) CHECK(h == 2);
    CHECK(std::set<std::size_t>(b.begin(), b.end()).size() == b.size());
  }
  CHECK(balance_batches(pairs, 12).size() == (pairs.size() + 11) / 12);
  CHECK(balance_batches(pairs, 12, 5, 7) == balance_batches(pairs, 12, 5, 7));
}

TEST_CASE("skewed deltas still balance every batch") {
  Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> deltas;
    const int heavy = static_cast<int>(rng.index(kNumPoseBins));
    for (int i = 0; i < 900; ++i) deltas.push_back(rng.uniform(kPoseBinEdges[heavy], kPoseBinEdges[heavy + 1]));
    for (int i = 0; i < 100; ++i) {
      int b = static_cast<int>(rng.index(kNumPoseBins - 1));
      if (b >= heavy) ++b;
      deltas.push_back(i < 5 ? kPoseBinEdges[b] : rng.uniform(kPoseBinEdges[b], kPoseBinEdges[b + 1]));
    }
    // make sure every bin has a member, including one exactly at each edge
    for (int b = 0; b < kNumPoseBins; ++b) deltas.push_back(kPoseBinEdges[b]);
    const auto pairs = pairs_from(deltas);
    const std::size_t batch_size = 6 * (1 + rng.index(8));
    for (const Batch& b : balance_batches(pairs, batch_size, std::nullopt, trial)) {
      REQUIRE(b.size() == batch_size);
      std::array<std::size_t, kNumPoseBins> hist{};
      for (auto i : b) ++hist[pose_bin(pairs[i].delta_degrees)];
      for (auto h : hist) CHECK(h == batch_size / 6);
    }
  }
}

TEST_CASE("balancer errors") {
  const auto pairs = pairs_from({-90, -20, -10, 0, 10, 90});
  CHECK(kind_of([&] { balance_batches(pairs, 0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { balance_batches(pairs, 8); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { balance_batches(std::vector<PosePair>{}, 6); }) == ErrorKind::kEmptyInput);
  const auto missing = pairs_from({-90, -20, 0, 10, 90});
  try {
    balance_batches(missing, 6);
    FAIL("expected an empty-bin error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyInput);
    CHECK(std::string(e.what()).find("bin 2") != std::string::npos);
  }
  const std::string csv = format_batches(pairs, balance_batches(pairs, 6));
  CHECK(csv.rfind("batch,pair_id,bin\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
