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

#include "pdnet/evaluation/cv.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include <glog/logging.h>

#include "pdnet/common/errors.h"
#include "pdnet/common/util.h"
#include "pdnet/training/trainer.h"

namespace pdnet {
namespace {

constexpr uint64_t kInitTag = 0x494e4954;   // "INIT"
constexpr uint64_t kTrainTag = 0x5452414e;  // "TRAN"

uint64_t JobSeed(uint64_t seed, int fold, ModelKind kind, uint64_t tag) {
  return MixSeed(MixSeed(MixSeed(seed, tag), static_cast<uint64_t>(fold)),
                 static_cast<uint64_t>(kind));
}

std::string JobName(uint64_t seed, int fold, ModelKind kind) {
  return "seed" + std::to_string(seed) + "_fold" + std::to_string(fold) + "_" +
         ModelKindName(kind);
}

// Rethrows the active exception with a prefix, keeping its type.
[[noreturn]] void RethrowWithContext(const std::string& context) {
  try {
    throw;
  } catch (const TrainingError& e) {
    throw TrainingError(context + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(context + ": " + e.what());
  } catch (const EvaluationError& e) {
    throw EvaluationError(context + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(context + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(context + ": " + e.what());
  } catch (const UsageError& e) {
    throw UsageError(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

std::vector<std::string> HealthyOf(const Manifest& manifest,
                                   const std::vector<std::string>& speakers) {
  std::vector<std::string> out;
  for (const auto& s : speakers) {
    if (manifest.SpeakerLabel(s) == kHealthy) out.push_back(s);
  }
  return out;
}

}  // namespace

void CvConfig::Validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  for (size_t i = 0; i < seeds.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (seeds[i] == seeds[j]) throw ConfigError("duplicate seed " + std::to_string(seeds[i]));
    }
  }
  if (folds < 3) throw ConfigError("need at least 3 folds");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (transfer && model != ModelKind::kProposed) {
    throw ConfigError("transfer initialization applies to the proposed model only");
  }
  if (model != ModelKind::kBcnn1 && s < kMinS) {
    throw ConfigError("S must be >= " + std::to_string(kMinS));
  }
  train.Validate();
}

ArtifactStore::ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {
  for (const char* sub : {"bundles", "logs", "cache"}) {
    std::filesystem::create_directories(root_ / sub);
  }
}

std::filesystem::path ArtifactStore::BundlePath(uint64_t seed, int fold, ModelKind kind) const {
  return root_ / "bundles" / (JobName(seed, fold, kind) + ".pdnb");
}

std::filesystem::path ArtifactStore::LogPath(uint64_t seed, int fold, ModelKind kind) const {
  return root_ / "logs" / (JobName(seed, fold, kind) + ".csv");
}

std::filesystem::path ArtifactStore::CachePath(const std::string& hash, uint64_t seed, int fold,
                                               ModelKind kind) const {
  return root_ / "cache" / hash / (JobName(seed, fold, kind) + ".pdnb");
}

std::optional<ModelBundle> ArtifactStore::LoadCached(const std::string& hash, uint64_t seed,
                                                     int fold, ModelKind kind) const {
  const auto path = CachePath(hash, seed, fold, kind);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto bundle = LoadBundle(path);
    if (bundle.kind == kind && bundle.provenance.config_hash == hash &&
        bundle.provenance.fold == fold && bundle.provenance.seed == seed) {
      return bundle;
    }
    LOG(WARNING) << path << ": cache entry does not match its key; retraining";
  } catch (const Error& e) {
    LOG(WARNING) << path << ": unreadable cache entry (" << e.what() << "); retraining";
  }
  return std::nullopt;
}

void ArtifactStore::Write(const std::filesystem::path& path, const std::string& bytes) const {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  WriteFileBytes(tmp, bytes);
  std::filesystem::rename(tmp, path);
}

NetworkFoldModel::NetworkFoldModel(CvConfig config, const ArtifactStore* store)
    : config_(std::move(config)), store_(store) {
  config_.Validate();
}

ModelBundle NetworkFoldModel::TrainModel(const Manifest& manifest, const SpeakerSplit& split,
                                         ModelKind kind, uint64_t seed, int fold,
                                         std::vector<std::string>* audit) const {
  const auto start = std::chrono::steady_clock::now();
  const std::string name = JobName(seed, fold, kind);
  auto data = PrepareFold(manifest, kind, config_.s, split);
  if (audit != nullptr) {
    for (auto& issue : AuditFold(split, data, name)) audit->push_back(std::move(issue));
  }
  ModelBundle bundle = NewBundle(kind, config_.s, manifest.feature_dim(),
                                 JobSeed(seed, fold, kind, kInitTag));
  if (kind == ModelKind::kProposed && config_.transfer) {
    const auto bcnn1 =
        TrainOrLoadBaseline(manifest, split, ModelKind::kBcnn1, seed, fold, audit);
    const auto bcnn2 =
        TrainOrLoadBaseline(manifest, split, ModelKind::kBcnn2, seed, fold, audit);
    InitTransfer(bundle, bcnn1, bcnn2);
  }
  TrainConfig tc = config_.train;
  tc.seed = JobSeed(seed, fold, kind, kTrainTag);
  auto result = Train(bundle.params, *data.train, *data.dev, tc);
  bundle.params = std::move(result.best);
  bundle.zscore = data.zscore;
  bundle.provenance.seed = seed;
  bundle.provenance.fold = fold;
  bundle.provenance.config_hash = config_.config_hash;
  bundle.Validate();
  if (store_ != nullptr) {
    const std::string bytes = EncodeBundle(bundle);
    store_->Write(store_->BundlePath(seed, fold, kind), bytes);
    store_->Write(store_->LogPath(seed, fold, kind), EpochLogCsv(result.log));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  LOG(INFO) << name << ": " << result.log.size() << " epochs, best " << result.best_epoch
            << " (dev loss " << result.best_dev_loss << "), " << secs << " s";
  return bundle;
}

ModelBundle NetworkFoldModel::TrainOrLoadBaseline(const Manifest& manifest,
                                                  const SpeakerSplit& split, ModelKind kind,
                                                  uint64_t seed, int fold,
                                                  std::vector<std::string>* audit) const {
  const std::string& hash = config_.config_hash;
  if (store_ != nullptr && !hash.empty()) {
    if (auto cached = store_->LoadCached(hash, seed, fold, kind)) {
      LOG(INFO) << JobName(seed, fold, kind) << ": reusing cached baseline";
      return *cached;
    }
  }
  CvConfig baseline = config_;
  baseline.model = kind;
  baseline.transfer = false;
  NetworkFoldModel trainer(baseline, store_);
  auto bundle = trainer.TrainModel(manifest, split, kind, seed, fold, audit);
  if (store_ != nullptr && !hash.empty()) {
    store_->Write(store_->CachePath(hash, seed, fold, kind), EncodeBundle(bundle));
  }
  return bundle;
}

FoldOutcome NetworkFoldModel::Run(const Manifest& manifest, const SpeakerSplit& split,
                                  uint64_t seed, int fold) const {
  FoldOutcome out;
  const auto bundle = TrainModel(manifest, split, config_.model, seed, fold, &out.audit);
  out.scores = ScoreSpeakers(bundle, manifest, split.test, HealthyOf(manifest, split.train));
  return out;
}

std::vector<SpeakerScore> ScoreSpeakers(const ModelBundle& bundle, const Manifest& manifest,
                                        const std::vector<std::string>& test_speakers,
                                        const std::vector<std::string>& references) {
  auto set =
      PrepareScoring(manifest, bundle.kind, bundle.s, bundle.zscore, test_speakers, references);
  const auto probs = PredictAll(bundle.params, *set);
  std::vector<std::string> speakers(set->size());
  std::vector<int> labels(set->size());
  for (size_t i = 0; i < set->size(); ++i) {
    speakers[i] = set->speaker(i);
    labels[i] = set->label(i);
  }
  auto scores = VoteBySpeaker(probs, speakers, labels);
  for (const auto& s : test_speakers) {
    const bool voted = std::any_of(scores.begin(), scores.end(),
                                   [&](const SpeakerScore& x) { return x.speaker_id == s; });
    if (!voted) throw EvaluationError("no predictions to vote for speaker " + s);
  }
  return scores;
}

Aggregate AggregateSeeds(const std::vector<SeedResult>& seeds) {
  if (seeds.empty()) throw EvaluationError("no seeds to aggregate");
  const double n = static_cast<double>(seeds.size());
  Aggregate a;
  for (const auto& s : seeds) {
    a.auc_mean += s.auc;
    a.acc_mean += s.accuracy;
  }
  a.auc_mean /= n;
  a.acc_mean /= n;
  for (const auto& s : seeds) {
    a.auc_std += (s.auc - a.auc_mean) * (s.auc - a.auc_mean);
    a.acc_std += (s.accuracy - a.acc_mean) * (s.accuracy - a.acc_mean);
  }
  a.auc_std = std::sqrt(a.auc_std / n);
  a.acc_std = std::sqrt(a.acc_std / n);
  return a;
}

RunReport RunCv(const Manifest& manifest, const CvConfig& config, const FoldModel& model) {
  config.Validate();
  RunReport report;
  report.config_hash = config.config_hash;
  report.model = ModelKindName(config.model);
  report.database = manifest.metadata().database;

  struct Job {
    uint64_t seed;
    int fold;
    SpeakerSplit split;
    FoldOutcome outcome;
    double seconds = 0.0;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (uint64_t seed : config.seeds) {
    const auto plan = MakeFolds(manifest, config.folds, seed);
    for (auto& issue : AuditPlan(manifest, plan)) {
      report.audit.push_back("seed " + std::to_string(seed) + ": " + issue);
    }
    for (int f = 0; f < plan.k; ++f) jobs.push_back({seed, f, plan.Split(f), {}, 0.0, nullptr});
  }

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size() && !failed; i = next++) {
      Job& job = jobs[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        try {
          job.outcome = model.Run(manifest, job.split, job.seed, job.fold);
        } catch (...) {
          RethrowWithContext("seed " + std::to_string(job.seed) + " fold " +
                             std::to_string(job.fold));
        }
      } catch (const std::exception& e) {
        LOG(ERROR) << e.what() << "; no further jobs are started";
        job.error = std::current_exception();
        failed = true;
      } catch (...) {
        job.error = std::current_exception();
        failed = true;
      }
      job.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
  }

  for (uint64_t seed : config.seeds) {
    SeedResult result;
    result.seed = seed;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& job : jobs) {
      if (job.seed != seed) continue;
      report.timings.push_back({seed, job.fold, job.seconds});
      for (const auto& issue : job.outcome.audit) report.audit.push_back(issue);
      for (const auto& s : job.outcome.scores) {
        result.scores.push_back({job.fold, s});
        scores.push_back(s.score);
        labels.push_back(s.label);
      }
    }
    result.auc = RocAuc(scores, labels);
    result.accuracy = Accuracy(scores, labels);
    report.seeds.push_back(std::move(result));
  }
  report.aggregate = AggregateSeeds(report.seeds);
  return report;
}

}  // namespace pdnet
