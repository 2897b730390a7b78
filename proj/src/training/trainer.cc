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

#include "pdnet/training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <glog/logging.h>

#include "pdnet/autodiff/ops.h"
#include "pdnet/common/util.h"

namespace pdnet {
namespace {

constexpr uint64_t kShuffleTag = 0x5348;
constexpr uint64_t kDropoutTag = 0x4452;

}  // namespace

double EvaluateDevLoss(const ParameterSet& params, const ExampleSet& set) {
  if (set.size() == 0) throw ConfigError("development set is empty");
  TuneAllocator();
  ParameterSet p = params;
  Tape tape(false);
  double total = 0.0;
  for (size_t i = 0; i < set.size(); ++i) {
    tape.Clear();
    BoundParams<float> bound(tape, p);
    auto ce = SoftmaxCrossEntropy(set.Logits(bound, tape, i, ForwardMode{}), set.label(i));
    total += ce.loss.value()[0];
  }
  return total / static_cast<double>(set.size());
}

std::vector<double> PredictAll(const ParameterSet& params, const ExampleSet& set) {
  TuneAllocator();
  ParameterSet p = params;
  Tape tape(false);
  std::vector<double> out(set.size());
  for (size_t i = 0; i < set.size(); ++i) {
    tape.Clear();
    BoundParams<float> bound(tape, p);
    const auto probs = Softmax<float>(set.Logits(bound, tape, i, ForwardMode{}).value().data());
    out[i] = probs[1];
    if (!std::isfinite(out[i])) {
      throw TrainingError("non-finite prediction for example " + std::to_string(i) +
                          " of speaker " + set.speaker(i));
    }
  }
  return out;
}

TrainResult Train(ParameterSet params, const ExampleSet& train, const ExampleSet& dev,
                  const TrainConfig& config) {
  config.Validate();
  TuneAllocator();
  if (train.size() == 0) throw ConfigError("training set is empty");
  if (dev.size() == 0) throw ConfigError("development set is empty");
  PlateauSchedule schedule(config);
  TrainResult result;
  result.best = params;
  params.EnsureGrads();
  params.ZeroGrads();

  std::vector<size_t> order(train.size());
  Tape tape;
  while (!schedule.done()) {
    const int epoch = schedule.epochs() + 1;
    const double lr = schedule.lr();
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 shuffle_rng(MixSeed(MixSeed(config.seed, kShuffleTag), epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 dropout_rng(MixSeed(MixSeed(config.seed, kDropoutTag), epoch));
    ForwardMode mode{true, &dropout_rng};

    double epoch_loss = 0.0;
    int batch = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size, ++batch) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const float scale = 1.f / static_cast<float>(end - start);
      for (size_t k = start; k < end; ++k) {
        tape.Clear();
        BoundParams<float> bound(tape, params);
        const size_t i = order[k];
        auto ce = SoftmaxCrossEntropy(train.Logits(bound, tape, i, mode), train.label(i));
        const double loss = ce.loss.value()[0];
        if (!std::isfinite(loss)) {
          throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch) + ", lr " + std::to_string(lr));
        }
        epoch_loss += loss;
        tape.Backward(ce.loss, scale);
      }
      tape.Clear();
      SgdStep(params, lr);
    }

    EpochReport report;
    report.epoch = epoch;
    report.lr = lr;
    report.train_loss = epoch_loss / static_cast<double>(order.size());
    report.dev_loss = EvaluateDevLoss(params, dev);
    if (!std::isfinite(report.dev_loss)) {
      throw TrainingError("non-finite dev loss at epoch " + std::to_string(epoch) + ", lr " +
                          std::to_string(lr));
    }
    const auto step = schedule.Observe(report.dev_loss);
    report.improved = step.improved;
    if (step.improved) {
      result.best = params;
      result.best.DropGrads();
      result.best_epoch = epoch;
      result.best_dev_loss = report.dev_loss;
    }
    VLOG(1) << "epoch " << epoch << " lr " << lr << " train " << report.train_loss << " dev "
            << report.dev_loss << (step.improved ? " *" : "");
    result.log.push_back(report);
  }
  return result;
}

std::string EpochLogCsv(const std::vector<EpochReport>& log) {
  std::string out = "epoch,lr,train_loss,dev_loss,improved\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%d\n", r.epoch, r.lr, r.train_loss,
                  r.dev_loss, r.improved ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace pdnet
