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

#ifndef PDNET_TRAINING_SCHEDULE_H_
#define PDNET_TRAINING_SCHEDULE_H_

#include <cstdint>
#include <limits>

namespace pdnet {

struct TrainConfig {
  int batch_size = 256;
  double lr0 = 0.05;
  double lr_factor = 5.0;
  int patience = 5;
  int max_epochs = 100;
  double lr_min = 1e-6;
  double min_improvement = 1e-6;
  uint64_t seed = 1;

  void Validate() const;  // ConfigError
};

// Learning-rate plateau schedule with early stopping. Observe() is called
// once per finished epoch with that epoch's dev loss.
class PlateauSchedule {
 public:
  struct Step {
    bool improved = false;
    bool lr_dropped = false;
    bool stop = false;
  };

  explicit PlateauSchedule(const TrainConfig& config);

  Step Observe(double dev_loss);

  double lr() const { return lr_; }
  int epochs() const { return epochs_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }
  int since_improvement() const { return since_; }
  bool done() const { return done_; }

 private:
  TrainConfig config_;
  double lr_;
  int epochs_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  int since_ = 0;
  bool done_ = false;
};

}  // namespace pdnet

#endif  // PDNET_TRAINING_SCHEDULE_H_
