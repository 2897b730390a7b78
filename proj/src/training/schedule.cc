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

#include "pdnet/training/schedule.h"

#include <cmath>
#include <string>

#include "pdnet/common/errors.h"

namespace pdnet {

void TrainConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (!(lr_factor > 1.0)) throw ConfigError("lr_factor must exceed 1");
  if (patience < 1) throw ConfigError("patience must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (!(lr_min > 0.0) || !(lr_min < lr0)) throw ConfigError("need 0 < lr_min < lr0");
  if (!(min_improvement >= 0.0)) throw ConfigError("min_improvement must be non-negative");
}

PlateauSchedule::PlateauSchedule(const TrainConfig& config) : config_(config), lr_(config.lr0) {
  config_.Validate();
}

PlateauSchedule::Step PlateauSchedule::Observe(double dev_loss) {
  if (done_) throw UsageError("schedule already finished");
  Step step;
  ++epochs_;
  if (dev_loss < best_ - config_.min_improvement) {
    best_ = dev_loss;
    best_epoch_ = epochs_;
    since_ = 0;
    step.improved = true;
  } else if (++since_ >= config_.patience) {
    lr_ /= config_.lr_factor;
    since_ = 0;
    step.lr_dropped = true;
  }
  if (epochs_ >= config_.max_epochs || lr_ < config_.lr_min) {
    step.stop = true;
    done_ = true;
  }
  return step;
}

}  // namespace pdnet
