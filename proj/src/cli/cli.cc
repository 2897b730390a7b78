// Copyright (c) 2026 The pdnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pdnet/cli/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <glog/logging.h>

#include "pdnet/common/errors.h"
#include "pdnet/common/util.h"
#include "pdnet/data/feature_io.h"
#include "pdnet/data/stft.h"
#include "pdnet/data/synth.h"
#include "pdnet/evaluation/cv.h"
#include "pdnet/evaluation/report.h"
#include "pdnet/training/trainer.h"

namespace pdnet {
namespace {

constexpr const char* kIncompleteMarker = "INCOMPLETE";
constexpr const char* kConfigFile = "config.txt";

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Options shared by `cv` and `train`, bound to a RunConfig.
struct RunOptions {
  RunConfig config;
  std::string model = "proposed";
  std::string init = "random";
  std::string features = "ap";
  std::string distance;
  std::string config_file;

  void Register(CLI::App* cmd, bool multi_seed) {
    cmd->add_option("--config", config_file, "key = value file; flags override it");
    cmd->add_option("--manifest", config.manifest, "corpus manifest CSV")->required();
    cmd->add_option("--out", config.out, "output directory")->required();
    cmd->add_option("--model", model, "proposed | bcnn1 | bcnn2");
    cmd->add_option("--S", config.s, "frames after resizing");
    cmd->add_option("--init", init, "random | transfer");
    cmd->add_option("--features", features, "ap | stft");
    cmd->add_option("--distance", distance, "euclidean | kl (must match the model)");
    cmd->add_option("--folds", config.folds, "cross-validation folds");
    if (multi_seed) {
      cmd->add_option("--seeds,--seed", config.seeds, "comma-separated seeds")->delimiter(',');
      cmd->add_option("--jobs", config.jobs, "parallel fold x seed jobs");
    } else {
      cmd->add_option("--seed", config.train.seed, "seed");
      cmd->add_option("--fold", config.fold, "fold to train on");
    }
    cmd->add_option("--batch-size", config.train.batch_size);
    cmd->add_option("--lr", config.train.lr0, "initial learning rate");
    cmd->add_option("--lr-factor", config.train.lr_factor);
    cmd->add_option("--patience", config.train.patience);
    cmd->add_option("--max-epochs", config.train.max_epochs);
    cmd->add_option("--lr-min", config.train.lr_min);
    cmd->add_option("--min-improvement", config.train.min_improvement);
  }

  // Applies config-file values to options not given on the command line.
  void ApplyConfigFile(CLI::App* cmd) const {
    if (config_file.empty()) return;
    std::ifstream in(config_file);
    if (!in) throw ConfigError("cannot read config file " + config_file);
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
      std::string key = item.name;
      std::replace(key.begin(), key.end(), '_', '-');
      CLI::Option* opt = cmd->get_option_no_throw("--" + key);
      if (opt == nullptr || key == "config") {
        throw ConfigError(config_file + ": unknown key '" + item.name + "'");
      }
      if (opt->count() > 0) continue;
      opt->add_result(item.inputs);
      opt->run_callback();
    }
  }

  RunConfig Resolve() const {
    RunConfig c = config;
    c.model = ParseModelKind(model);
    c.features = ParseFeatureKind(features);
    if (init != "random" && init != "transfer") {
      throw ConfigError("unknown init '" + init + "' (expected random or transfer)");
    }
    c.transfer = init == "transfer";
    c.distance = DefaultDistance(c.model);
    if (!distance.empty() && ParseDistanceKind(distance) != c.distance) {
      throw ConfigError("distance " + distance + " does not apply to model " + model);
    }
    c.train.Validate();
    return c;
  }
};

CvConfig ToCvConfig(const RunConfig& rc, const std::string& hash) {
  CvConfig c;
  c.model = rc.model;
  c.s = rc.s;
  c.transfer = rc.transfer;
  c.folds = rc.folds;
  c.seeds = rc.seeds;
  c.train = rc.train;
  c.jobs = rc.jobs;
  c.config_hash = hash;
  return c;
}

void WriteConfigRecord(const RunConfig& rc, const std::string& manifest_bytes,
                       const std::filesystem::path& dir) {
  WriteFileBytes(dir / kConfigFile, "config_hash=" + ConfigHash(rc, manifest_bytes) + "\n" +
                                        rc.Canonical(manifest_bytes));
}

int CmdSynth(const SynthConfig& cfg, const std::string& out_dir, std::ostream& out) {
  cfg.Validate();
  const auto manifest = SynthCorpus(cfg);
  WriteCorpus(manifest, out_dir);
  int min_n = 1 << 30, max_n = 0;
  for (const auto& e : manifest.entries()) {
    min_n = std::min(min_n, e.features.dim(1));
    max_n = std::max(max_n, e.features.dim(1));
  }
  out << "speakers " << manifest.speakers().size() << " (" << cfg.healthy << " healthy, "
      << cfg.dysarthric << " dysarthric), items " << cfg.items << ", utterances "
      << manifest.size() << ", frames " << min_n << ".." << max_n << ", F " << kApDim << "\n";
  return kExitOk;
}

int CmdFeatures(const std::string& manifest_path, const std::string& out_dir, std::ostream& out) {
  const auto input = LoadManifest(manifest_path, FeatureKind::kLogStft, false);
  const auto base = std::filesystem::path(manifest_path).parent_path();
  std::vector<UtteranceRecord> entries;
  for (const auto& e : input.entries()) {
    std::filesystem::path wav(e.path);
    if (wav.is_relative()) wav = base / wav;
    Audio audio;
    try {
      audio = ReadWav(wav);
    } catch (const Error& err) {
      throw InputError(wav.string() + ": " + err.what());
    }
    UtteranceRecord r = e;
    r.features = StftLogMagnitude(audio.samples);
    r.path = "features/" + e.speaker_id + "_" + e.item_id + ".pdn";
    entries.push_back(std::move(r));
  }
  Manifest::Metadata meta;
  meta.kind = FeatureKind::kLogStft;
  meta.database = std::filesystem::path(out_dir).filename().string();
  Manifest result(meta, std::move(entries));
  std::filesystem::create_directories(std::filesystem::path(out_dir) / "features");
  for (const auto& e : result.entries()) {
    WriteFeatureFile(std::filesystem::path(out_dir) / e.path, e.features);
  }
  WriteManifestCsv(result, std::filesystem::path(out_dir) / "manifest.csv");
  out << "utterances " << result.size() << ", F " << kStftBins << "\n";
  return kExitOk;
}

int CmdCv(const RunConfig& rc, std::ostream& out) {
  const std::string manifest_bytes = ReadFileBytes(rc.manifest);
  const auto manifest = LoadManifest(rc.manifest, rc.features);
  const std::string hash = ConfigHash(rc, manifest_bytes);
  const std::filesystem::path dir(rc.out);
  std::filesystem::create_directories(dir);
  WriteConfigRecord(rc, manifest_bytes, dir);
  WriteFileBytes(dir / kIncompleteMarker, "running\n");
  const CvConfig cv = ToCvConfig(rc, hash);
  ArtifactStore store(dir);
  RunReport report;
  try {
    report = RunCv(manifest, cv, NetworkFoldModel(cv, &store));
  } catch (const std::exception& e) {
    WriteFileBytes(dir / kIncompleteMarker, std::string("failed: ") + e.what() + "\n");
    throw;
  }
  ExportReport(report, dir);
  if (!report.audit.empty()) {
    std::string text;
    for (const auto& issue : report.audit) text += issue + "\n";
    WriteFileBytes(dir / kIncompleteMarker, "audit violations:\n" + text);
    throw EvaluationError("speaker-disjointness audit failed:\n" + text);
  }
  std::filesystem::remove(dir / kIncompleteMarker);
  out << "config " << hash << "\n";
  for (const auto& s : report.seeds) {
    out << "seed " << s.seed << ": AUC " << s.auc << ", accuracy " << s.accuracy << "%\n";
  }
  out << ComparisonTable({report});
  return kExitOk;
}

int CmdTrain(const RunConfig& rc, std::ostream& out) {
  const std::string manifest_bytes = ReadFileBytes(rc.manifest);
  const auto manifest = LoadManifest(rc.manifest, rc.features);
  const std::string hash = ConfigHash(rc, manifest_bytes);
  const std::filesystem::path dir(rc.out);
  std::filesystem::create_directories(dir);
  WriteConfigRecord(rc, manifest_bytes, dir);
  RunConfig single = rc;
  single.seeds = {rc.train.seed};
  const CvConfig cv = ToCvConfig(single, hash);
  const auto plan = MakeFolds(manifest, rc.folds, rc.train.seed);
  if (rc.fold < 0 || rc.fold >= plan.k) throw ConfigError("fold out of range");
  const auto split = plan.Split(rc.fold);
  ArtifactStore store(dir);
  NetworkFoldModel trainer(cv, &store);
  std::vector<std::string> audit;
  const auto bundle = trainer.TrainModel(manifest, split, rc.model, rc.train.seed, rc.fold, &audit);
  if (!audit.empty()) throw EvaluationError("speaker-disjointness audit failed: " + audit[0]);
  SaveBundle(bundle, dir / "model.pdnb");
  out << "config " << hash << "\n";
  out << "bundle " << (dir / "model.pdnb").string() << "\n";
  return kExitOk;
}

struct PredictOptions {
  std::string bundle;
  std::string manifest;
  std::string test_manifest;
  std::string speaker;
  std::string features = "ap";
  bool per_pair = false;
};

int CmdPredict(const PredictOptions& o, std::ostream& out) {
  const auto kind = ParseFeatureKind(o.features);
  const auto bundle = LoadBundle(o.bundle);
  const auto refs = LoadManifest(o.manifest, kind);
  const Manifest tests = o.test_manifest.empty() ? refs : LoadManifest(o.test_manifest, kind);
  if (!tests.HasSpeaker(o.speaker)) {
    throw InputError("speaker " + o.speaker + " not in " +
                     (o.test_manifest.empty() ? o.manifest : o.test_manifest));
  }
  // One manifest holding the test speaker and every other healthy speaker.
  std::vector<UtteranceRecord> entries;
  for (size_t i : tests.UtterancesOf(o.speaker)) entries.push_back(tests.entry(i));
  std::vector<std::string> references;
  for (const auto& s : refs.SpeakersWithLabel(kHealthy)) {
    if (s == o.speaker) continue;
    references.push_back(s);
    for (size_t i : refs.UtterancesOf(s)) entries.push_back(refs.entry(i));
  }
  Manifest merged(refs.metadata(), std::move(entries));
  if (bundle.kind != ModelKind::kBcnn1) {
    if (references.empty()) throw InputError("no healthy reference speakers");
    if (EnumeratePairs(merged, {o.speaker}, references).empty()) {
      throw InputError("no items of " + o.speaker + " match any reference item");
    }
  }
  auto set = PrepareScoring(merged, bundle.kind, bundle.s, bundle.zscore, {o.speaker}, references);
  if (set->size() == 0) throw InputError("no scorable input for speaker " + o.speaker);
  const auto probs = PredictAll(bundle.params, *set);
  if (o.per_pair) {
    out << "item,reference,probability\n";
    for (size_t i = 0; i < set->size(); ++i) {
      const auto sources = set->SourceSpeakers(i);
      out << set->item(i) << "," << (sources.size() > 1 ? sources[1] : "-") << ","
          << Num(probs[i]) << "\n";
    }
  }
  const double score = SoftVote(probs, o.speaker);
  out << "speaker=" << o.speaker << " score=" << Num(score)
      << " decision=" << (score > kDecisionThreshold ? "dysarthric" : "healthy")
      << " votes=" << probs.size() << "\n";
  return kExitOk;
}

int CmdReport(const std::vector<std::string>& paths, const std::string& csv, std::ostream& out) {
  std::vector<RunReport> reports;
  for (const auto& p : paths) reports.push_back(LoadReport(p));
  out << ComparisonTable(reports);
  if (!csv.empty()) WriteFileBytes(csv, ComparisonCsv(reports));
  return kExitOk;
}

}  // namespace

std::string RunConfig::Canonical(const std::string& manifest_bytes) const {
  std::vector<std::string> lines = {
      "batch_size=" + std::to_string(train.batch_size),
      "distance=" + std::string(DistanceKindName(distance)),
      "features=" + std::string(FeatureKindName(features)),
      "fold=" + std::to_string(fold),
      "folds=" + std::to_string(folds),
      "init=" + std::string(transfer ? "transfer" : "random"),
      "lr0=" + Num(train.lr0),
      "lr_factor=" + Num(train.lr_factor),
      "lr_min=" + Num(train.lr_min),
      "manifest_fnv=" + HashToHex(Fnv1a64(manifest_bytes)),
      "max_epochs=" + std::to_string(train.max_epochs),
      "min_improvement=" + Num(train.min_improvement),
      "model=" + std::string(ModelKindName(model)),
      "patience=" + std::to_string(train.patience),
      "s=" + std::to_string(s),
      "train_seed=" + std::to_string(train.seed),
  };
  std::string seed_list;
  for (uint64_t v : seeds) seed_list += (seed_list.empty() ? "" : ",") + std::to_string(v);
  lines.push_back("seeds=" + seed_list);
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string ConfigHash(const RunConfig& config, const std::string& manifest_bytes) {
  return HashToHex(Fnv1a64(config.Canonical(manifest_bytes)));
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Dysarthric speech detection with pairwise distance networks", "pdnet");
  app.require_subcommand(1);

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic articulatory corpus");
  synth_cmd->add_option("--healthy", synth.healthy);
  synth_cmd->add_option("--dysarthric", synth.dysarthric);
  synth_cmd->add_option("--items", synth.items);
  synth_cmd->add_option("--min-frames", synth.min_frames);
  synth_cmd->add_option("--max-frames", synth.max_frames);
  synth_cmd->add_option("--severity", synth.severity);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out)->required();

  std::string features_manifest, features_out;
  auto* features_cmd = app.add_subcommand("features", "log-STFT features from 16 kHz WAV files");
  features_cmd->add_option("--manifest", features_manifest, "manifest whose paths are WAVs")
      ->required();
  features_cmd->add_option("--out", features_out)->required();

  RunOptions cv_opts, train_opts;
  auto* cv_cmd = app.add_subcommand("cv", "stratified speaker-independent cross-validation");
  cv_opts.Register(cv_cmd, true);
  auto* train_cmd = app.add_subcommand("train", "train one model on one fold");
  train_opts.Register(train_cmd, false);

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "score one speaker with a trained bundle");
  predict_cmd->add_option("--bundle", predict.bundle)->required();
  predict_cmd->add_option("--manifest", predict.manifest, "reference manifest")->required();
  predict_cmd->add_option("--test-manifest", predict.test_manifest,
                          "manifest holding the test speaker (default: --manifest)");
  predict_cmd->add_option("--speaker", predict.speaker)->required();
  predict_cmd->add_option("--features", predict.features, "ap | stft");
  predict_cmd->add_flag("--per-pair", predict.per_pair, "print every pair's probability");

  std::vector<std::string> report_paths;
  std::string report_csv;
  auto* report_cmd = app.add_subcommand("report", "comparison table from metrics JSON files");
  report_cmd->add_option("metrics", report_paths, "metrics.json files")->required();
  report_cmd->add_option("--csv", report_csv, "also write the table as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth_cmd) return CmdSynth(synth, synth_out, out);
    if (*features_cmd) return CmdFeatures(features_manifest, features_out, out);
    if (*cv_cmd) {
      cv_opts.ApplyConfigFile(cv_cmd);
      return CmdCv(cv_opts.Resolve(), out);
    }
    if (*train_cmd) {
      train_opts.ApplyConfigFile(train_cmd);
      return CmdTrain(train_opts.Resolve(), out);
    }
    if (*predict_cmd) return CmdPredict(predict, out);
    if (*report_cmd) return CmdReport(report_paths, report_csv, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingError& e) {
    err << "training failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace pdnet
