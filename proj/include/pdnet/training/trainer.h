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

#ifndef PDNET_TRAINING_TRAINER_H_
#define PDNET_TRAINING_TRAINER_H_

#include <string>
#include <vector>

#include "pdnet/training/examples.h"
#include "pdnet/training/schedule.h"

namespace pdnet {

struct EpochReport {
  int epoch = 0;
  double lr = 0.0;  // rate used during this epoch
  double train_loss = 0.0;
  double dev_loss = 0.0;
  bool improved = false;
};

struct TrainResult {
  ParameterSet best;  // parameters after the best-dev-loss epoch
  std::vector<EpochReport> log;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
};

// Mean cross-entropy over `set` in inference mode.
double EvaluateDevLoss(const ParameterSet& params, const ExampleSet& set);

// Class-1 probability of every example, inference mode.
std::vector<double> PredictAll(const ParameterSet& params, const ExampleSet& set);

// Seeded SGD with the plateau schedule. Throws ConfigError on empty sets and
// TrainingError on a non-finite loss.
TrainResult Train(ParameterSet params, const ExampleSet& train, const ExampleSet& dev,
                  const TrainConfig& config);

// `epoch,lr,train_loss,dev_loss,improved` with a header row.
std::string EpochLogCsv(const std::vector<EpochReport>& log);

}  // namespace pdnet

#endif  // PDNET_TRAINING_TRAINER_H_
