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

// Command-line front end: synth-model, render, fit, sweep, diagnose, select,
// balance, eval-loss. Errors go to stderr as {"error": kind, "message": text}.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "facesweep/augmentation.hpp"
#include "facesweep/diagnosis.hpp"
#include "facesweep/error.hpp"
#include "facesweep/face_model.hpp"
#include "facesweep/fitting.hpp"
#include "facesweep/losses.hpp"
#include "facesweep/recognizer.hpp"
#include "facesweep/render.hpp"
#include "facesweep/run_config.hpp"
#include "facesweep/serialization.hpp"
#include "facesweep/sweep.hpp"

namespace fs = std::filesystem;
using namespace facesweep;

namespace {

template <typename T>
CLI::Option* add_optional(CLI::App* app, const std::string& name, std::optional<T>& target,
                  const std::string& help) {
  return app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

// Flags shared by every subcommand that reads a RunConfig.
struct ConfigFlags {
  std::optional<std::string> config_path;
  ConfigOverrides overrides;

  void add_config(CLI::App* app) {
    add_optional(app, "--config", config_path, "JSON config file; command-line flags take precedence");
  }
  void add_model(CLI::App* app) { add_optional(app, "--model", overrides.model_path, "model JSON"); }
  void add_camera(CLI::App* app) {
    add_optional(app, "--projection", overrides.projection, "weak_perspective or pinhole");
    add_optional(app, "--scale", overrides.scale, "camera scale or focal length in pixels");
    add_optional(app, "--cx", overrides.cx, "principal point x");
    add_optional(app, "--cy", overrides.cy, "principal point y");
    add_optional(app, "--width", overrides.width, "image width");
    add_optional(app, "--height", overrides.height, "image height");
  }
  void add_light(CLI::App* app) {
    add_optional(app, "--ambient", overrides.ambient, "ambient light term");
    add_optional(app, "--diffuse", overrides.diffuse, "diffuse light term");
  }
  void add_sweep(CLI::App* app) {
    add_optional(app, "--K", overrides.sweep_range, "sweep range K; k spans [-K, K]");
    add_optional(app, "--n-samples", overrides.sweep_samples, "odd number of grid points");
    app->add_flag_function("--additive", [this](std::int64_t) { overrides.sweep_additive = true; },
                           "add k to the value instead of scaling it by 1 + k");
  }
  void add_output_dir(CLI::App* app) { add_optional(app, "--out-dir", overrides.output_dir, "output directory"); }
  void add_workers(CLI::App* app) { add_optional(app, "--workers", overrides.workers, "worker threads (0 = all)"); }

  RunConfig resolve() const {
    std::optional<Json> file;
    if (config_path) file = read_json_file(*config_path);
    return resolve_config(file, overrides);
  }
};

FaceModel load_model(const RunConfig& config) {
  if (config.model_path.empty()) throw Error(ErrorKind::kInvalidArgument, "no model given (--model)");
  return model_from_json(read_json_file(config.model_path));
}

bool is_single_fit(const Json& doc) {
  return doc.is_object() && doc.contains("params") && doc.contains("camera");
}

// A fit file is either one FitResult or an object mapping ids to FitResults.
FitMap load_fits(const fs::path& path, const std::string& single_id) {
  const Json doc = read_json_file(path);
  FitMap fits;
  if (is_single_fit(doc)) {
    const FitResult r = fit_result_from_json(doc);
    fits[single_id.empty() ? path.stem().string() : single_id] = {r.params, r.camera};
    return fits;
  }
  if (!doc.is_object() || doc.empty()) {
    throw Error(ErrorKind::kSchema, path.string() + ": expected a fit result or an id -> fit result map");
  }
  for (const auto& [id, entry] : doc.items()) {
    const FitResult r = fit_result_from_json(entry);
    fits[id] = {r.params, r.camera};
  }
  if (!single_id.empty()) {
    const auto it = fits.find(single_id);
    if (it == fits.end()) throw Error(ErrorKind::kMissingIdentity, "no fit for identity " + single_id);
    return FitMap{{it->first, it->second}};
  }
  return fits;
}

SweepSpec make_spec(const FaceModel& model, const RunConfig& config, const std::string& param) {
  SweepSpec spec;
  spec.target = resolve_target(model, param);
  spec.range = config.range_for(param);
  spec.n_samples = config.sweep_samples;
  spec.mode = config.sweep_additive ? SweepMode::kAdditive : SweepMode::kMultiplicative;
  validate(spec);
  return spec;
}

void warn(const std::string& message) {
  std::cerr << Json{{"warning", message}}.dump() << "\n";
}

// ---------------------------------------------------------------------------

int run_synth_model(const ConfigFlags& flags, const std::string& out) {
  const RunConfig config = flags.resolve();
  write_json_file(model_to_json(synth_head(config.seed)), out);
  return 0;
}

struct RenderArgs {
  std::optional<std::string> params_path;
  std::optional<std::uint64_t> identity_seed;
  std::optional<std::string> params_out;
  std::optional<std::string> landmarks_out;
  std::string out;
};

int run_render(const ConfigFlags& flags, const RenderArgs& args) {
  const RunConfig config = flags.resolve();
  const FaceModel model = load_model(config);
  ModelParams params;
  if (args.params_path && args.identity_seed) {
    throw Error(ErrorKind::kInvalidArgument, "give either --params or --identity-seed, not both");
  }
  if (args.params_path) {
    params = params_from_json(read_json_file(*args.params_path));
  } else if (args.identity_seed) {
    params = sample_identity(model, *args.identity_seed);
  } else {
    params = ModelParams::zeros(model);
  }
  const Image gray = render_mesh(instantiate(model, params), config.camera, config.light);
  const bool rgb = fs::path(args.out).extension() == ".ppm";
  write_pnm(rgb ? to_rgb(gray) : gray, args.out);
  if (args.params_out) write_json_file(params_to_json(params), *args.params_out);
  if (args.landmarks_out) {
    write_json_file(landmarks_to_json(oracle_landmarks(model, params, config.camera)), *args.landmarks_out);
  }
  return 0;
}

int run_fit(const ConfigFlags& flags, const std::string& out) {
  const RunConfig config = flags.resolve();
  const FaceModel model = load_model(config);
  if (config.landmarks_path.empty()) throw Error(ErrorKind::kInvalidArgument, "no landmarks given (--landmarks)");
  FitConfig fit_config;
  fit_config.initial_camera = config.camera;
  const fs::path path = config.landmarks_path;
  const Json doc = read_json_file(path);
  if (doc.is_array()) {
    write_json_file(fit_result_to_json(fit_landmarks(model, landmarks_from_json(doc), fit_config)), out);
    return 0;
  }
  if (!doc.is_object() || doc.empty()) {
    throw Error(ErrorKind::kSchema, path.string() + ": expected landmarks or an id -> landmark file map");
  }
  Json results = Json::object();
  for (const auto& [id, file] : doc.items()) {
    if (!file.is_string()) throw Error(ErrorKind::kSchema, path.string() + ": entry " + id + " is not a path");
    fs::path lm = file.get<std::string>();
    if (lm.is_relative()) lm = path.parent_path() / lm;
    results[id] = fit_result_to_json(fit_landmarks(model, landmarks_from_json(read_json_file(lm)), fit_config));
  }
  write_json_file(results, out);
  return 0;
}

struct SweepArgs {
  std::optional<std::string> fit_path;
  std::optional<std::string> params_path;
  std::string identity;
  std::string param;
};

int run_sweep(const ConfigFlags& flags, const SweepArgs& args) {
  const RunConfig config = flags.resolve();
  const FaceModel model = load_model(config);
  FitMap fits;
  if (args.fit_path && args.params_path) {
    throw Error(ErrorKind::kInvalidArgument, "give either --fit or --params, not both");
  }
  if (args.fit_path) {
    fits = load_fits(*args.fit_path, args.identity);
  } else if (args.params_path) {
    const std::string id = args.identity.empty() ? fs::path(*args.params_path).stem().string() : args.identity;
    fits[id] = {params_from_json(read_json_file(*args.params_path)), config.camera};
  } else {
    throw Error(ErrorKind::kInvalidArgument, "sweep needs --fit or --params");
  }
  const SweepSpec spec = make_spec(model, config, args.param);
  const fs::path root = config.output_dir;
  std::vector<SweepManifestRow> manifest;
  for (const auto& [id, fit] : fits) {
    if (sweep_is_degenerate(fit.params, spec)) {
      warn(id + ": " + spec.target.name + " is zero, so a multiplicative sweep leaves every frame unchanged");
    }
    const SweepRender sweep = render_sweep(model, id, fit.params, spec, fit.camera, config.light);
    write_sweep_images(sweep, root);
    manifest.insert(manifest.end(), sweep.manifest.begin(), sweep.manifest.end());
  }
  write_sweep_manifest(manifest, root / "manifest.csv");
  return 0;
}

struct DiagnoseArgs {
  std::optional<std::string> fits_path;
  std::optional<int> cohort;
  std::vector<std::string> params;
  std::optional<std::string> frame_dir;
};

int run_diagnose(const ConfigFlags& flags, const DiagnoseArgs& args) {
  const RunConfig config = flags.resolve();
  const FaceModel model = load_model(config);
  FitMap fits;
  if (args.fits_path && args.cohort) {
    throw Error(ErrorKind::kInvalidArgument, "give either --fits or --synthetic-cohort, not both");
  }
  if (args.fits_path) {
    fits = load_fits(*args.fits_path, "");
  } else if (args.cohort) {
    if (*args.cohort <= 0) throw Error(ErrorKind::kInvalidArgument, "cohort size must be positive");
    fits = synthetic_cohort(model, *args.cohort, config.seed, config.camera);
  } else {
    throw Error(ErrorKind::kInvalidArgument, "diagnose needs --fits or --synthetic-cohort");
  }
  std::unique_ptr<RecognitionBackend> backend;
  if (config.backend == BackendKind::kStub) {
    backend = std::make_unique<StubBackend>();
  } else {
    backend = std::make_unique<ExternalBackend>(config.backend_command);
  }
  DiagnosisOptions options;
  options.light = config.light;
  options.workers = config.workers;
  if (args.frame_dir) options.frame_dir = *args.frame_dir;

  const fs::path root = config.output_dir;
  fs::create_directories(root);
  const Gallery gallery = enroll_base_renders(model, fits, *backend, options);
  Json summary = Json::array();
  for (const std::string& param : args.params.empty() ? std::vector<std::string>{"yaw"} : args.params) {
    const SweepSpec spec = make_spec(model, config, param);
    for (const auto& [id, fit] : fits) {
      if (sweep_is_degenerate(fit.params, spec)) warn(id + ": " + spec.target.name + " is zero; its sweep is flat");
    }
    const DiagnosisResult result = run_diagnosis(model, fits, spec, *backend, gallery, options);
    write_curve(result.curve, root / (spec.target.name + ".csv"));
    summary.push_back(summary_to_json(result.curve));
  }
  write_json_file(summary, root / "summary.json");
  return 0;
}

struct SelectArgs {
  std::string traces;
  std::optional<std::string> param;
  std::size_t n_train = 1;
  std::size_t n_test = 10;
  std::vector<std::string> augment_with;
};

int run_select(const ConfigFlags& flags, const SelectArgs& args) {
  const RunConfig config = flags.resolve();
  std::vector<ParamTrace> traces = read_traces(args.traces);
  if (args.param) {
    std::erase_if(traces, [&](const ParamTrace& t) { return t.param != *args.param; });
    if (traces.empty()) throw Error(ErrorKind::kEmptyInput, "no traces for parameter " + *args.param);
  } else {
    for (const auto& t : traces) {
      if (t.param != traces.front().param) {
        throw Error(ErrorKind::kInvalidArgument, "traces hold several parameters; choose one with --param");
      }
    }
  }
  std::vector<RealFrame> train, test;
  for (const ParamTrace& t : traces) {
    std::map<std::string, double> value;
    for (const auto& f : t.frames) value[f.frame_id] = f.value;
    for (const auto& id : select_train_frames(t, args.n_train)) train.push_back({t.identity, id, t.param, value[id]});
    for (const auto& id : select_test_frames(t, args.n_test)) test.push_back({t.identity, id, t.param, value[id]});
  }
  std::vector<std::vector<SweepManifestRow>> sweeps;
  for (const auto& path : args.augment_with) sweeps.push_back(read_sweep_manifest(path));

  const fs::path root = config.output_dir;
  const AugmentedManifest train_manifest = build_augmented_manifest(train, sweeps);
  write_training_manifest(train_manifest, root / "train.csv");
  write_training_manifest(build_augmented_manifest(test, {}), root / "test.csv");
  Json counts = Json::object();
  for (const auto& [id, c] : train_manifest.per_identity) {
    counts[id] = {{"real", c.real}, {"synthetic", c.synthetic}, {"total", c.total()}};
  }
  write_json_file(counts, root / "train_counts.json");
  return 0;
}

struct BalanceArgs {
  std::string pairs;
  std::size_t batch_size = 0;
  std::optional<std::size_t> n_batches;
  std::string out;
};

int run_balance(const ConfigFlags& flags, const BalanceArgs& args) {
  const RunConfig config = flags.resolve();
  const std::vector<PosePair> pairs = read_pose_pairs(args.pairs);
  const auto batches = balance_batches(pairs, args.batch_size, args.n_batches, config.seed);
  write_text_file(format_batches(pairs, batches), args.out);
  return 0;
}

int run_eval_loss(const std::string& input, const std::optional<std::string>& out) {
  const Json doc = read_json_file(input);
  LossComponents components;
  LossWeights weights;
  if (doc.is_object() && doc.contains("components")) {
    for (const auto& [key, value] : doc.items()) {
      if (key != "components" && key != "weights") throw Error(ErrorKind::kSchema, "unknown key " + key);
    }
    components = components_from_json(doc["components"]);
    if (doc.contains("weights")) weights = weights_from_json(doc["weights"]);
  } else {
    components = components_from_json(doc);
  }
  const Json report = {{"total", total_objective(components, weights)},
                       {"components", components_to_json(components)},
                       {"weights", weights_to_json(weights)}};
  if (out) {
    write_json_file(report, *out);
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit, render, sweep and diagnose a parametric face model"};
  app.require_subcommand(1);

  ConfigFlags synth_flags;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-model", "write the built-in synthetic head model");
  synth_flags.add_config(synth);
  add_optional(synth, "--seed", synth_flags.overrides.seed, "generator seed (default 0)");
  synth->add_option("--out", synth_out, "model JSON to write")->required();

  ConfigFlags render_flags;
  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "render model parameters to a PGM or PPM image");
  render_flags.add_config(render);
  render_flags.add_model(render);
  render_flags.add_camera(render);
  render_flags.add_light(render);
  add_optional(render, "--params", render_args.params_path, "parameter JSON (default: all zero)");
  add_optional(render, "--identity-seed", render_args.identity_seed, "draw a random identity with this seed");
  add_optional(render, "--params-out", render_args.params_out, "write the rendered parameters here");
  add_optional(render, "--landmarks-out", render_args.landmarks_out, "write the projected model landmarks here");
  render->add_option("--out", render_args.out, "image to write (.ppm for RGB, else grayscale)")->required();

  ConfigFlags fit_flags;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "fit the model to 68 landmarks");
  fit_flags.add_config(fit);
  fit_flags.add_model(fit);
  fit_flags.add_camera(fit);
  add_optional(fit, "--landmarks", fit_flags.overrides.landmarks_path, "landmark JSON, or an id -> landmark file map");
  fit->add_option("--out", fit_out, "fit result JSON to write")->required();

  ConfigFlags sweep_flags;
  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "render a single-parameter sweep");
  sweep_flags.add_config(sweep);
  sweep_flags.add_model(sweep);
  sweep_flags.add_camera(sweep);
  sweep_flags.add_light(sweep);
  sweep_flags.add_sweep(sweep);
  sweep_flags.add_output_dir(sweep);
  add_optional(sweep, "--fit", sweep_args.fit_path, "fit result JSON (single or id map)");
  add_optional(sweep, "--params", sweep_args.params_path, "parameter JSON, rendered with the configured camera");
  sweep->add_option("--identity", sweep_args.identity, "identity label, or the one to pick from a fit map");
  sweep->add_option("--param", sweep_args.param, "parameter to sweep, e.g. yaw or jaw")->required();

  ConfigFlags diag_flags;
  DiagnoseArgs diag_args;
  auto* diagnose = app.add_subcommand("diagnose", "recognition accuracy along parameter sweeps");
  diag_flags.add_config(diagnose);
  diag_flags.add_model(diagnose);
  diag_flags.add_camera(diagnose);
  diag_flags.add_light(diagnose);
  diag_flags.add_sweep(diagnose);
  diag_flags.add_output_dir(diagnose);
  diag_flags.add_workers(diagnose);
  add_optional(diagnose, "--fits", diag_args.fits_path, "fit results, one per identity");
  add_optional(diagnose, "--synthetic-cohort", diag_args.cohort, "use this many random identities instead");
  add_optional(diagnose, "--seed", diag_flags.overrides.seed, "seed for --synthetic-cohort");
  diagnose->add_option("--param", diag_args.params, "parameter to sweep; repeatable (default yaw)");
  add_optional(diagnose, "--backend", diag_flags.overrides.backend, "stub or external");
  add_optional(diagnose, "--backend-command", diag_flags.overrides.backend_command, "shell command of the external backend");
  add_optional(diagnose, "--frame-dir", diag_args.frame_dir, "also write every frame here");

  ConfigFlags select_flags;
  SelectArgs select_args;
  auto* select = app.add_subcommand("select", "biased train / uniform test frame selection");
  select_flags.add_config(select);
  select_flags.add_output_dir(select);
  select->add_option("--traces", select_args.traces, "CSV identity,frame,param,value")->required();
  add_optional(select, "--param", select_args.param, "parameter to select on");
  select->add_option("--n-train", select_args.n_train, "training frames per identity")->capture_default_str();
  select->add_option("--n-test", select_args.n_test, "test frames per identity")->capture_default_str();
  select->add_option("--augment-with", select_args.augment_with, "sweep manifest to add; repeatable");

  ConfigFlags balance_flags;
  BalanceArgs balance_args;
  auto* balance = app.add_subcommand("balance", "pose-difference balanced batches");
  balance_flags.add_config(balance);
  add_optional(balance, "--seed", balance_flags.overrides.seed, "resampling seed (default 0)");
  balance->add_option("--pairs", balance_args.pairs, "CSV pair_id,delta_degrees")->required();
  balance->add_option("--batch-size", balance_args.batch_size, "multiple of 6")->required();
  add_optional(balance, "--n-batches", balance_args.n_batches, "default ceil(pairs / batch size)");
  balance->add_option("--out", balance_args.out, "CSV batch,pair_id,bin")->required();

  std::string loss_in;
  std::optional<std::string> loss_out;
  auto* eval_loss = app.add_subcommand("eval-loss", "evaluate the total training objective");
  eval_loss->add_option("--input", loss_in, "JSON with components and optional weights")->required();
  add_optional(eval_loss, "--out", loss_out, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (*synth) return run_synth_model(synth_flags, synth_out);
    if (*render) return run_render(render_flags, render_args);
    if (*fit) return run_fit(fit_flags, fit_out);
    if (*sweep) return run_sweep(sweep_flags, sweep_args);
    if (*diagnose) return run_diagnose(diag_flags, diag_args);
    if (*select) return run_select(select_flags, select_args);
    if (*balance) return run_balance(balance_flags, balance_args);
    if (*eval_loss) return run_eval_loss(loss_in, loss_out);
  } catch (const DiagnosisError& e) {
    std::cerr << Json{{"error", std::string(to_string(e.kind()))},
                      {"message", e.what()},
                      {"identity", e.failed_identity()}}
                     .dump()
              << "\n";
    return 1;
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error("io_error", e.what());
  } catch (const nlohmann::json::exception& e) {
    return report_error("schema_violation", e.what());
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what());
  }
  return 2;
}
