// tcd: detects topological changes between image pairs by variational
// registration and score decomposition. Subcommands generate synthetic
// benchmark data, register pairs, emit change/outlier/atlas score maps,
// compute reference baselines and run ROC evaluation; every run writes a
// manifest sufficient to replay it.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tcd/baselines.hpp"
#include "tcd/detection.hpp"
#include "tcd/errors.hpp"
#include "tcd/eval.hpp"
#include "tcd/io/config.hpp"
#include "tcd/io/heatmap.hpp"
#include "tcd/io/image_codecs.hpp"
#include "tcd/io/keyvalue.hpp"
#include "tcd/io/manifest.hpp"
#include "tcd/io/tensor_file.hpp"
#include "tcd/registration.hpp"
#include "tcd/synth.hpp"
#include "tcd/warp.hpp"

namespace fs = std::filesystem;
using namespace tcd;

namespace {

int run_command(const std::string& command, const std::vector<std::string>& args);

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir.string());
}

// Parses `args` against `app`; CLI11's own errors are reported as usage
// errors so they share the exit-code mapping.
void parse_args(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image gray(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < img.channels; ++c) acc += img.at(c, y, x);
      gray.at(0, y, x) = acc / img.channels;
    }
  return gray;
}

RegistrationConfig load_config_opt(const std::string& path, std::uint64_t seed_override,
                                   bool has_seed) {
  RegistrationConfig cfg =
      path.empty() ? RegistrationConfig{} : load_registration_config(path);
  if (has_seed) cfg.seed = seed_override;
  return cfg;
}

void write_config_snapshot(RunManifest& manifest, const RegistrationConfig& cfg) {
  for (const auto& [k, v] : registration_config_to_doc(cfg).entries)
    manifest.extra.set("config." + k, v);
}

FeatureMap load_features_or_identity(const Image& img, const std::string& path) {
  if (path.empty()) return extract_features(img, FeatureMode::kIdentity);
  const FeatureMap external = image_from_tensor(read_tensor(path));
  return extract_features(img, FeatureMode::kExternal, &external);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".tcd" || ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

ControlSet load_control_set(const fs::path& dir) {
  ControlSet controls;
  for (const fs::path& file : list_images(dir)) {
    // Mask files produced by synth populations are not controls.
    if (file.stem().string().ends_with("_mask")) continue;
    ControlSet::Member member;
    member.image = read_image_any(file);
    member.features = extract_features(member.image, FeatureMode::kIdentity);
    member.id = file.stem().string();
    controls.members.push_back(std::move(member));
  }
  if (controls.members.empty()) throw UsageError("no control images found in " + dir.string());
  return controls;
}

void write_roc_csv(const fs::path& path, const RocCurve& roc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "fpr,tpr\n";
  char line[80];
  for (const auto& [fpr, tpr] : roc.points) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f\n", fpr, tpr);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ScoreMap clamped_nonnegative(const ScoreMap& map) {
  ScoreMap out = map;
  for (double& v : out.data) v = std::max(v, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// synth

int run_synth(const std::vector<std::string>& args) {
  CLI::App app{"generate synthetic benchmark data"};
  std::string spec_path, out_dir;
  int count = 0, changed = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
  app.add_option("--spec", spec_path, "synthesis spec file")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--count", count, "number of control images (0 emits a single pair)");
  app.add_option("--changed", changed, "number of changed images in population mode");
  app.add_option("--seed", seed, "override the spec seed")->each([&](const std::string&) {
    has_seed = true;
  });
  parse_args(app, args);

  SynthSpec spec = load_synth_spec(spec_path);
  if (has_seed) spec.seed = seed;
  ensure_dir(out_dir);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.argv = args;
  for (const auto& [k, v] : synth_spec_to_doc(spec).entries)
    manifest.extra.set("spec." + k, v);

  const fs::path out(out_dir);
  auto emit_image = [&](const fs::path& base, const Image& img) {
    write_tensor(fs::path(base).replace_extension(".tcd"), tensor_from_image(img));
    manifest.add_output(fs::path(base).replace_extension(".tcd"));
    write_pgm(fs::path(base).replace_extension(".pgm"), to_gray(img));
    manifest.add_output(fs::path(base).replace_extension(".pgm"));
  };

  if (count == 0) {
    const SynthPair pair = generate_pair(spec);
    emit_image(out / "pair_moving", pair.image_a);
    emit_image(out / "pair_fixed", pair.image_b);
    write_tensor(out / "pair_mask.tcd", tensor_from_scoremap(pair.mask));
    manifest.add_output(out / "pair_mask.tcd");
    write_tensor(out / "pair_field.tcd", tensor_from_field(pair.true_field));
    manifest.add_output(out / "pair_field.tcd");
  } else {
    const SynthPopulation pop = generate_population(spec, count, changed);
    ensure_dir(out / "controls");
    ensure_dir(out / "changed");
    for (const auto& member : pop.controls.members)
      emit_image(out / "controls" / member.id, member.image);
    for (const auto& item : pop.changed) {
      emit_image(out / "changed" / item.id, item.image);
      const fs::path mask = out / "changed" / (item.id + "_mask.tcd");
      write_tensor(mask, tensor_from_scoremap(item.mask));
      manifest.add_output(mask);
    }
  }
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// register

int run_register(const std::vector<std::string>& args) {
  CLI::App app{"variational registration of an image pair"};
  std::string moving_path, fixed_path, fmov_path, ffix_path, config_path, out_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  app.add_option("--moving", moving_path, "image sampled from")->required();
  app.add_option("--fixed", fixed_path, "image whose grid carries the field")->required();
  app.add_option("--features-moving", fmov_path, "feature tensor for the moving image");
  app.add_option("--features-fixed", ffix_path, "feature tensor for the fixed image");
  app.add_option("--config", config_path, "registration config file");
  app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    has_seed = true;
  });
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);

  const Image moving = read_image_any(moving_path);
  const Image fixed = read_image_any(fixed_path);
  const FeatureMap f_moving = load_features_or_identity(moving, fmov_path);
  const FeatureMap f_fixed = load_features_or_identity(fixed, ffix_path);
  const RegistrationConfig cfg = load_config_opt(config_path, seed, has_seed);

  PriorParams prior;
  prior.decay = cfg.decay;
  NoiseParams noise;
  const RegistrationResult result =
      register_pair(moving, fixed, f_moving, f_fixed, cfg, prior, noise);

  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "register";
  manifest.argv = args;
  write_config_snapshot(manifest, cfg);

  write_tensor(out / "field.tcd", tensor_from_field(result.q.mean_field()));
  manifest.add_output(out / "field.tcd");
  write_tensor(out / "variational.tcd", tensor_from_variational(result.q));
  manifest.add_output(out / "variational.tcd");

  {
    std::ofstream trace(out / "elbo_trace.csv", std::ios::trunc);
    if (!trace) throw IoError("cannot open for writing: " + (out / "elbo_trace.csv").string());
    trace << "level,iteration,elbo\n";
    std::size_t level = 0;
    char line[96];
    for (std::size_t i = 0; i < result.elbo_trace.size(); ++i) {
      while (level + 1 < result.level_offsets.size() && i >= result.level_offsets[level + 1])
        ++level;
      std::snprintf(line, sizeof(line), "%zu,%zu,%.17g\n", level,
                    i - result.level_offsets[level], result.elbo_trace[i]);
      trace << line;
    }
  }
  manifest.add_output(out / "elbo_trace.csv");
  manifest.add_prior(result.prior);
  manifest.add_noise(result.noise);
  manifest.extra.set_double("elbo.final", result.elbo_trace.back());
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect

int run_detect(const std::vector<std::string>& args) {
  CLI::App app{"bidirectional change score for image pairs"};
  std::vector<std::vector<std::string>> pairs;
  std::string fmov_path, ffix_path, config_path, out_dir;
  app.add_option("--pair", pairs, "moving and fixed image")->expected(2)->required();
  app.add_option("--features-moving", fmov_path,
                 "feature tensor for the moving image (single pair only)");
  app.add_option("--features-fixed", ffix_path,
                 "feature tensor for the fixed image (single pair only)");
  app.add_option("--config", config_path, "registration config file");
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);
  if (pairs.size() > 1 && (!fmov_path.empty() || !ffix_path.empty()))
    throw UsageError("feature files require a single --pair");

  const RegistrationConfig base_cfg = load_config_opt(config_path, 0, false);
  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "detect";
  manifest.argv = args;
  write_config_snapshot(manifest, base_cfg);

  PriorParams prior;
  prior.decay = base_cfg.decay;
  NoiseParams noise;
  char name[64];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Image moving = read_image_any(pairs[i][0]);
    const Image fixed = read_image_any(pairs[i][1]);
    const FeatureMap f_moving = load_features_or_identity(moving, fmov_path);
    const FeatureMap f_fixed = load_features_or_identity(fixed, ffix_path);
    RegistrationConfig cfg = base_cfg;
    cfg.seed = base_cfg.seed + 7919ull * i;
    const LsymResult r = score_L_sym(moving, fixed, f_moving, f_fixed, cfg, prior, noise);

    std::snprintf(name, sizeof(name), "pair_%03zu_lsym.tcd", i);
    write_tensor(out / name, tensor_from_scoremap(r.lsym));
    manifest.add_output(out / name);
    std::snprintf(name, sizeof(name), "pair_%03zu_heatmap.png", i);
    write_png_rgb(out / name, render_heatmap(r.lsym, to_gray(fixed)));
    manifest.add_output(out / name);
    std::snprintf(name, sizeof(name), "pair_%03zu_field.tcd", i);
    write_tensor(out / name, tensor_from_field(r.forward.q.mean_field()));
    manifest.add_output(out / name);
  }
  manifest.add_prior(prior);
  manifest.add_noise(noise);
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// outlier

std::string cache_fingerprint(const ControlSet& controls, const RegistrationConfig& cfg) {
  std::string fp = serialize_keyvalue(registration_config_to_doc(cfg));
  for (const auto& member : controls.members)
    fp += member.id + ":" + std::to_string(member.image.height) + "x" +
          std::to_string(member.image.width) + ";";
  return std::to_string(std::hash<std::string>{}(fp));
}

int run_outlier(const std::vector<std::string>& args) {
  CLI::App app{"outlier score of a target against a control set"};
  std::string target_path, ftarget_path, controls_dir, cache_path, config_path, out_dir;
  app.add_option("--target", target_path, "target image")->required();
  app.add_option("--features-target", ftarget_path, "feature tensor for the target");
  app.add_option("--controls", controls_dir, "directory of control images")->required();
  app.add_option("--cache", cache_path, "inner-expectation cache index")->required();
  app.add_option("--config", config_path, "registration config file");
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);

  const RegistrationConfig cfg = load_config_opt(config_path, 0, false);
  const Image target = read_image_any(target_path);
  const FeatureMap f_target = load_features_or_identity(target, ftarget_path);
  ControlSet controls = load_control_set(controls_dir);
  if (controls.size() < 2) throw UsageError("outlier scoring needs at least 2 controls");

  const std::string fingerprint = cache_fingerprint(controls, cfg);
  const fs::path cache(cache_path);

  bool warm = false;
  if (fs::exists(cache)) {
    const KeyValueDoc index = load_keyvalue(cache);
    warm = index.get_or("fingerprint", "") == fingerprint;
  }
  if (!warm) {
    // Fill the cache: one tensor per control plus an index carrying the
    // model state reached while computing the population means.
    PriorParams prior;
    prior.decay = cfg.decay;
    NoiseParams noise;
    const std::vector<ScoreMap> means = control_inner_means(controls, cfg, prior, noise);
    if (!cache.parent_path().empty()) ensure_dir(cache.parent_path());
    KeyValueDoc index;
    index.set("fingerprint", fingerprint);
    index.set_int("controls", controls.size());
    for (int i = 0; i < controls.size(); ++i) {
      const fs::path tensor_path =
          cache.parent_path() /
          (cache.filename().string() + "." + controls.members[i].id + ".tcd");
      write_tensor(tensor_path, tensor_from_scoremap(means[i]));
      index.set("mean." + std::to_string(i), tensor_path.string());
      index.set("id." + std::to_string(i), controls.members[i].id);
    }
    index.set_double("prior.alpha", prior.alpha);
    index.set_double("prior.beta", prior.beta);
    index.set_double("prior.running_alpha", prior.eval_alpha());
    index.set_double("prior.running_beta", prior.eval_beta());
    for (std::size_t c = 0; c < noise.log_var.size(); ++c)
      index.set_double("noise.log_var." + std::to_string(c), noise.log_var[c]);
    save_keyvalue(cache, index);
  }

  // Both warm and cold runs consume the persisted float32 maps and the
  // persisted model state, so their outputs agree bitwise.
  const KeyValueDoc index = load_keyvalue(cache);
  if (static_cast<int>(index.get_int("controls")) != controls.size())
    throw IoError("cache does not match the control set: " + cache.string());
  std::vector<ScoreMap> inner_means;
  for (int i = 0; i < controls.size(); ++i) {
    if (index.get("id." + std::to_string(i)) != controls.members[i].id)
      throw IoError("cache control order mismatch: " + cache.string());
    inner_means.push_back(
        scoremap_from_tensor(read_tensor(index.get("mean." + std::to_string(i)))));
  }
  PriorParams run_prior;
  run_prior.decay = cfg.decay;
  run_prior.alpha = index.get_double("prior.alpha");
  run_prior.beta = index.get_double("prior.beta");
  update_running(run_prior, index.get_double("prior.running_alpha"),
                 index.get_double("prior.running_beta"));
  NoiseParams run_noise;
  for (std::size_t c = 0;; ++c) {
    const auto v = index.find("noise.log_var." + std::to_string(c));
    if (!v) break;
    run_noise.log_var.push_back(index.get_double("noise.log_var." + std::to_string(c)));
  }

  const OutlierResult result =
      score_q_detail(target, f_target, controls, inner_means, cfg, run_prior, run_noise);

  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "outlier";
  manifest.argv = args;
  write_config_snapshot(manifest, cfg);
  manifest.extra.set("cache.fingerprint", fingerprint);
  manifest.extra.set("cache.warm", warm ? "1" : "0");

  write_tensor(out / "q.tcd", tensor_from_scoremap(result.q));
  manifest.add_output(out / "q.tcd");
  write_tensor(out / "mean_lsym.tcd", tensor_from_scoremap(result.mean_lsym));
  manifest.add_output(out / "mean_lsym.tcd");
  write_png_rgb(out / "q_heatmap.png",
                render_heatmap(clamped_nonnegative(result.q), to_gray(target)));
  manifest.add_output(out / "q_heatmap.png");
  manifest.add_prior(run_prior);
  manifest.add_noise(run_noise);
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// atlas

int run_atlas(const std::vector<std::string>& args) {
  CLI::App app{"population mean of pairwise change scores on an atlas grid"};
  std::string controls_dir, atlas_path, config_path, out_dir;
  app.add_option("--controls", controls_dir, "directory of control images")->required();
  app.add_option("--atlas", atlas_path, "atlas image")->required();
  app.add_option("--config", config_path, "registration config file");
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);

  const RegistrationConfig cfg = load_config_opt(config_path, 0, false);
  const Image atlas = read_image_any(atlas_path);
  const FeatureMap f_atlas = extract_features(atlas, FeatureMode::kIdentity);
  const ControlSet controls = load_control_set(controls_dir);

  PriorParams prior;
  prior.decay = cfg.decay;
  NoiseParams noise;
  const ScoreMap mean = atlas_mean(controls, atlas, f_atlas, cfg, prior, noise);

  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "atlas";
  manifest.argv = args;
  write_config_snapshot(manifest, cfg);
  write_tensor(out / "atlas_mean.tcd", tensor_from_scoremap(mean));
  manifest.add_output(out / "atlas_mean.tcd");
  write_png_rgb(out / "atlas_heatmap.png", render_heatmap(mean, to_gray(atlas)));
  manifest.add_output(out / "atlas_heatmap.png");
  manifest.add_prior(prior);
  manifest.add_noise(noise);
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// baseline

int run_baseline(const std::vector<std::string>& args) {
  CLI::App app{"reference scores from a registered pair"};
  std::string method, field_path, config_path, out_dir;
  std::vector<std::string> pair;
  double sigma = 6.0, K = 2.0;
  app.add_option("--method", method, "li-wyatt or jacdet")->required();
  app.add_option("--pair", pair, "moving and fixed image")->expected(2)->required();
  app.add_option("--field", field_path, "precomputed displacement field tensor");
  app.add_option("--sigma", sigma, "gradient scale for li-wyatt");
  app.add_option("--K", K, "gradient weight for li-wyatt");
  app.add_option("--config", config_path, "registration config file");
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);
  if (method != "li-wyatt" && method != "jacdet")
    throw UsageError("unknown baseline method: " + method);

  const Image moving = read_image_any(pair[0]);
  const Image fixed = read_image_any(pair[1]);
  DisplacementField field;
  if (!field_path.empty()) {
    field = field_from_tensor(read_tensor(field_path));
  } else {
    const RegistrationConfig cfg = load_config_opt(config_path, 0, false);
    PriorParams prior;
    prior.decay = cfg.decay;
    NoiseParams noise;
    const RegistrationResult r = register_pair(
        moving, fixed, extract_features(moving, FeatureMode::kIdentity),
        extract_features(fixed, FeatureMode::kIdentity), cfg, prior, noise);
    field = r.q.mean_field();
  }

  const ScoreMap score = method == "li-wyatt"
                             ? score_li_wyatt(to_gray(moving), to_gray(fixed), field, sigma, K)
                             : score_jacdet(field);

  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "baseline";
  manifest.argv = args;
  manifest.extra.set("method", method);
  if (method == "li-wyatt") {
    manifest.extra.set_double("sigma", sigma);
    manifest.extra.set_double("K", K);
  }
  const std::string name =
      "baseline_" + std::string(method == "li-wyatt" ? "li_wyatt" : "jacdet");
  write_tensor(out / (name + ".tcd"), tensor_from_scoremap(score));
  manifest.add_output(out / (name + ".tcd"));
  write_png_rgb(out / (name + "_heatmap.png"), render_heatmap(score, to_gray(fixed)));
  manifest.add_output(out / (name + "_heatmap.png"));
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const std::vector<std::string>& args) {
  CLI::App app{"ROC/AUC evaluation of score maps against binary masks"};
  std::string scores_dir, masks_dir, subject_index, out_dir;
  std::string warped_seg, target_seg, field_path;
  int bootstrap = 0;
  std::uint64_t seed = 17;
  app.add_option("--scores", scores_dir, "directory of score tensors")->required();
  app.add_option("--masks", masks_dir, "directory of mask tensors")->required();
  app.add_option("--per-subject", subject_index, "file mapping score stems to subject ids");
  app.add_option("--bootstrap", bootstrap, "number of subject-level bootstrap resamples");
  app.add_option("--seed", seed, "bootstrap seed");
  app.add_option("--warped-seg", warped_seg, "warped label map for registration metrics");
  app.add_option("--target-seg", target_seg, "target label map for registration metrics");
  app.add_option("--field", field_path, "displacement field for registration metrics");
  app.add_option("--out", out_dir, "output directory")->required();
  parse_args(app, args);

  const std::vector<fs::path> score_files = list_images(scores_dir);
  const std::vector<fs::path> mask_files = list_images(masks_dir);
  if (score_files.empty()) throw UsageError("no score tensors in " + scores_dir);
  if (score_files.size() != mask_files.size())
    throw UsageError("score and mask counts differ");

  std::map<std::string, std::string> subject_of;
  if (!subject_index.empty())
    for (const auto& [k, v] : load_keyvalue(subject_index).entries) subject_of[k] = v;

  std::vector<ScoreMap> scores, masks;
  std::map<std::string, SubjectScores> by_subject;
  for (std::size_t i = 0; i < score_files.size(); ++i) {
    scores.push_back(scoremap_from_tensor(read_tensor(score_files[i])));
    masks.push_back(scoremap_from_tensor(read_tensor(mask_files[i])));
    const std::string stem = score_files[i].stem().string();
    const std::string subject = subject_of.count(stem) ? subject_of[stem] : stem;
    const SubjectScores pooled = pool_subject(scores.back(), masks.back());
    SubjectScores& dest = by_subject[subject];
    dest.scores.insert(dest.scores.end(), pooled.scores.begin(), pooled.scores.end());
    dest.labels.insert(dest.labels.end(), pooled.labels.begin(), pooled.labels.end());
  }

  const RocCurve roc = compute_roc(scores, masks);
  ensure_dir(out_dir);
  const fs::path out(out_dir);
  RunManifest manifest;
  manifest.command = "eval";
  manifest.argv = args;

  write_roc_csv(out / "roc.csv", roc);
  manifest.add_output(out / "roc.csv");

  KeyValueDoc auc_doc;
  auc_doc.set_double("auc", roc.auc);
  if (bootstrap > 0) {
    std::vector<SubjectScores> subjects;
    subjects.reserve(by_subject.size());
    for (auto& [id, subject] : by_subject) subjects.push_back(std::move(subject));
    const BootstrapEstimate est = bootstrap_auc(subjects, bootstrap, seed);
    auc_doc.set_double("auc_bootstrap_mean", est.mean);
    auc_doc.set_double("auc_stderr", est.stderr_);
    auc_doc.set_int("resamples", est.resamples);
  }
  save_keyvalue(out / "auc.txt", auc_doc);
  manifest.add_output(out / "auc.txt");

  if (!warped_seg.empty() || !target_seg.empty() || !field_path.empty()) {
    if (warped_seg.empty() || target_seg.empty() || field_path.empty())
      throw UsageError("registration metrics need --warped-seg, --target-seg and --field");
    const RegistrationMetrics metrics =
        registration_metrics(read_image_any(warped_seg), read_image_any(target_seg),
                             field_from_tensor(read_tensor(field_path)));
    KeyValueDoc mdoc;
    mdoc.set_double("mean_dice", metrics.mean_dice);
    mdoc.set_double("accuracy", metrics.accuracy);
    mdoc.set_double("var_log_jac", metrics.var_log_jac);
    mdoc.set_double("fold_pct", metrics.fold_pct);
    for (const auto& [cls, dice] : metrics.dice_per_class)
      mdoc.set_double("dice.class_" + std::to_string(cls), dice);
    save_keyvalue(out / "metrics.txt", mdoc);
    manifest.add_output(out / "metrics.txt");
  }
  save_manifest(out / "manifest.txt", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// replay

int run_replay(const std::vector<std::string>& args) {
  CLI::App app{"re-run a command from its manifest"};
  std::string manifest_path, out_dir;
  app.add_option("--manifest", manifest_path, "manifest of the run to repeat")->required();
  app.add_option("--out", out_dir, "output directory for the replayed run")->required();
  parse_args(app, args);

  const RunManifest manifest = load_manifest(manifest_path);
  std::vector<std::string> argv = manifest.argv;
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "--out") {
      argv[i + 1] = out_dir;
      replaced = true;
    }
  }
  if (!replaced) throw UsageError("manifest has no --out argument to redirect");
  return run_command(manifest.command, argv);
}

int run_command(const std::string& command, const std::vector<std::string>& args) {
  if (command == "synth") return run_synth(args);
  if (command == "register") return run_register(args);
  if (command == "detect") return run_detect(args);
  if (command == "outlier") return run_outlier(args);
  if (command == "atlas") return run_atlas(args);
  if (command == "baseline") return run_baseline(args);
  if (command == "eval") return run_eval(args);
  if (command == "replay") return run_replay(args);
  throw UsageError("unknown command: " + command +
                   " (expected synth, register, detect, outlier, atlas, baseline, eval or replay)");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "tcd " << kToolVersion
              << " - topological change detection via variational registration\n"
                 "usage: tcd <command> [options]\n\n"
                 "commands:\n"
                 "  synth     generate synthetic pairs or populations with masks\n"
                 "  register  register an image pair (field, variational params, trace)\n"
                 "  detect    bidirectional change score and heatmap for pairs\n"
                 "  outlier   control-set outlier score with a persistent cache\n"
                 "  atlas     population mean score on an atlas grid\n"
                 "  baseline  li-wyatt or jacobian-determinant reference scores\n"
                 "  eval      ROC/AUC with optional subject-level bootstrap\n"
                 "  replay    re-run a command from its manifest\n"
                 "run 'tcd <command> --help' for options\n";
    return kExitOk;
  }
  const std::string command = args[0];
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  try {
    return run_command(command, rest);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
