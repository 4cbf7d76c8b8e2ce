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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "facesweep/diagnosis.hpp"
#include "facesweep/rng.hpp"
#include "test_util.hpp"

using namespace facesweep;
using testing::head;
using testing::kind_of;

namespace {

SweepSpec yaw_spec(int n = 21) {
  SweepSpec s;
  s.target = resolve_target(head(), "yaw");
  s.range = 0.5;
  s.n_samples = n;
  return s;
}

Embedding basis(int i, int dim) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[i] = 1.0;
  return Embedding::from_raw(v);
}

// Gallery of one basis vector per identity, plus extra decoys.
Gallery basis_gallery(const FitMap& fits, int dim, const std::vector<std::string>& decoys = {}) {
  Gallery g;
  int i = 0;
  for (const auto& [id, fit] : fits) {
    const std::vector<Embedding> e = {basis(i++, dim)};
    g.enroll(id, e);
  }
  for (const auto& id : decoys) {
    const std::vector<Embedding> e = {basis(i++, dim)};
    g.enroll(id, e);
  }
  return g;
}

// Knows which identity each request belongs to from the call order of a
// serial run: identities ascend and each contributes one request per frame.
class OracleBackend final : public RecognitionBackend {
 public:
  OracleBackend(int frames, int dim) : frames_(frames), dim_(dim) {}
  Embedding embed(const Image&, const std::filesystem::path&) override {
    return basis(calls_++ / frames_, dim_);
  }

 private:
  int frames_, dim_, calls_ = 0;
};

class ConstantBackend final : public RecognitionBackend {
 public:
  explicit ConstantBackend(Embedding e) : e_(std::move(e)) {}
  Embedding embed(const Image&, const std::filesystem::path&) override { return e_; }

 private:
  Embedding e_;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("accuracy counts") {
  using P = std::pair<std::string, std::string>;
  const std::vector<P> all = {{"a", "a"}, {"b", "b"}};
  CHECK(accuracy(all).value() == 1.0);
  const std::vector<P> three = {{"a", "a"}, {"b", "b"}, {"c", "c"}, {"d", "a"}};
  CHECK(accuracy(three).value() == 0.75);
  CHECK(accuracy(three).formatted() == "0.750000");
  CHECK(kind_of([] { accuracy(std::vector<P>{}); }) == ErrorKind::kEmptyInput);

  Rng rng(13);
  std::vector<P> random;
  long oracle = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string t = std::to_string(rng.index(5)), p = std::to_string(rng.index(5));
    oracle += t == p;
    random.emplace_back(t, p);
  }
  const Accuracy acc = accuracy(random);
  CHECK(acc.correct == oracle);
  CHECK(acc.total == 1000);
}

TEST_CASE("perfect and adversarial recognizers bound the curve") {
  const FitMap fits = synthetic_cohort(head(), 4, 0);
  const SweepSpec spec = yaw_spec(5);
  const int dim = 8;
  {
    OracleBackend oracle(spec.n_samples, dim);
    const DiagnosisResult r = run_diagnosis(head(), fits, spec, oracle, basis_gallery(fits, dim));
    for (double a : r.curve.accuracy) CHECK(a == 1.0);
    CHECK(r.curve.identity_count == 4);
    for (int s : r.curve.samples) CHECK(s == 4);
  }
  {
    const Gallery g = basis_gallery(fits, dim, {"zz_decoy"});
    ConstantBackend wrong(basis(4, dim));
    const DiagnosisResult r = run_diagnosis(head(), fits, spec, wrong, g);
    for (double a : r.curve.accuracy) CHECK(a == 0.0);
    for (const auto& [id, hits] : r.per_identity) CHECK(std::count(hits.begin(), hits.end(), true) == 0);
  }
}

TEST_CASE("summary tie rules and symmetry score") {
  ResponseCurve c{"yaw", {-0.5, -0.25, 0, 0.25, 0.5}, {0.2, 0.9, 0.9, 0.9, 0.6}, {5, 5, 5, 5, 5}, 5};
  CurveSummary s = summarize(c);
  CHECK(s.peak_k == 0.0);
  CHECK(s.peak_accuracy == 0.9);
  CHECK(s.min_accuracy == 0.2);
  // k = 0.25 pairs (0.9, 0.9); k = 0.5 pairs (0.6, 0.2)
  CHECK(s.symmetry_score == doctest::Approx((0.0 + 0.4) / 2.0));
  c.accuracy = {0.2, 1.0, 0.5, 1.0, 0.6};
  CHECK(summarize(c).peak_k == -0.25);
  const auto j = summary_to_json(c);
  CHECK(j.at("param") == "yaw");
  CHECK(j.at("peak_acc") == 1.0);
  for (const char* key : {"peak_k", "min_acc", "symmetry_score"}) CHECK(j.contains(key));
}

TEST_CASE("curve validation") {
  ResponseCurve c{"yaw", {0}, {1.2}, {1}, 1};
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::kInvalidArgument);
  c.accuracy = {0.5, 0.5};
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::kDimensionMismatch);
  c = {"yaw", {0}, {0.5}, {0}, 1};
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::kInvalidArgument);
  c = {"yaw", {}, {}, {}, 0};
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("curve CSV format and round trip") {
  ResponseCurve c{"jaw", {-0.5, 0.0, 0.5}, {0.25, 1.0, 2.0 / 3.0}, {3, 3, 3}, 3};
  CHECK(format_curve(c) ==
        "param,k,accuracy,n_identities\n"
        "jaw,-0.500000,0.250000,3\n"
        "jaw,0.000000,1.000000,3\n"
        "jaw,0.500000,0.666667,3\n");
  const auto path = std::filesystem::temp_directory_path() / "facesweep_test_curve.csv";
  write_curve(c, path);
  const ResponseCurve back = read_curve(path);
  CHECK(back.param == "jaw");
  CHECK(curves_equal(c, back));
  ResponseCurve off = back;
  off.accuracy[1] = 0.99;
  CHECK_FALSE(curves_equal(c, off));
  std::filesystem::remove(path);
}

TEST_CASE("stub diagnosis peaks at the ground truth and is reproducible") {
  const FitMap fits = synthetic_cohort(head(), 20, 0);
  StubBackend stub;
  const Gallery g = enroll_base_renders(head(), fits, stub);
  const DiagnosisResult a = run_diagnosis(head(), fits, yaw_spec(), stub, g);
  const DiagnosisResult b = run_diagnosis(head(), fits, yaw_spec(), stub, g);
  CHECK(format_curve(a.curve) == format_curve(b.curve));
  REQUIRE(a.curve.k.size() == 21);
  CHECK(format_curve(a.curve).size() > 0);
  const double centre = a.curve.accuracy[10];
  double outer = 0.0;
  int n_outer = 0;
  for (std::size_t i = 0; i < a.curve.k.size(); ++i) {
    CHECK(a.curve.accuracy[i] <= centre);
    if (std::abs(a.curve.k[i]) > 0.8 * 0.5 - 1e-12) {
      outer += a.curve.accuracy[i];
      ++n_outer;
    }
  }
  CHECK(n_outer == 6);
  CHECK(outer / n_outer < centre);
  CHECK(summarize(a.curve).peak_k == 0.0);
}

TEST_CASE("parallel and serial runs agree") {
  const FitMap fits = synthetic_cohort(head(), 6, 9);
  StubBackend stub;
  const Gallery g = enroll_base_renders(head(), fits, stub);
  DiagnosisOptions serial;
  serial.workers = 1;
  DiagnosisOptions wide;
  wide.workers = 4;
  CHECK(format_curve(run_diagnosis(head(), fits, yaw_spec(7), stub, g, serial).curve) ==
        format_curve(run_diagnosis(head(), fits, yaw_spec(7), stub, g, wide).curve));
}

TEST_CASE("frames written to disk are what the backend sees") {
  const auto dir = std::filesystem::temp_directory_path() / "facesweep_test_frames";
  std::filesystem::remove_all(dir);
  const FitMap fits = synthetic_cohort(head(), 2, 4);
  StubBackend stub;
  DiagnosisOptions opts;
  opts.frame_dir = dir;
  const Gallery g = enroll_base_renders(head(), fits, stub, opts);
  const DiagnosisResult r = run_diagnosis(head(), fits, yaw_spec(3), stub, g, opts);
  CHECK(std::filesystem::exists(dir / "gallery" / "id00.pgm"));
  for (const auto& row : r.manifest) CHECK(std::filesystem::exists(dir / row.image_path));
  CHECK(r.manifest.size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a missing gallery identity is rejected") {
  const FitMap fits = synthetic_cohort(head(), 3, 0);
  FitMap fewer = fits;
  fewer.erase("id01");
  StubBackend stub;
  const Gallery g = enroll_base_renders(head(), fewer, stub);
  CHECK(kind_of([&] { run_diagnosis(head(), fits, yaw_spec(3), stub, g); }) == ErrorKind::kMissingIdentity);
  CHECK(kind_of([&] { run_diagnosis(head(), FitMap{}, yaw_spec(3), stub, g); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("a backend dying mid-run reports the partial curve") {
  const FitMap fits = synthetic_cohort(head(), 4, 0);
  const SweepSpec spec = yaw_spec(5);
  const Gallery g = basis_gallery(fits, 4);
  ExternalBackend dying(std::string(FACESWEEP_FAKE_RECOGNIZER) + " exit " + std::to_string(2 * spec.n_samples));
  try {
    run_diagnosis(head(), fits, spec, dying, g);
    FAIL("expected the run to abort");
  } catch (const DiagnosisError& e) {
    CHECK(e.kind() == ErrorKind::kBackendExited);
    CHECK(e.failed_identity() == "id02");
    CHECK(e.partial().curve.identity_count == 2);
    CHECK(e.partial().per_identity.size() == 2);
    for (int s : e.partial().curve.samples) CHECK(s == 2);
  }
}
