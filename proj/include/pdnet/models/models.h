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

#ifndef PDNET_MODELS_MODELS_H_
#define PDNET_MODELS_MODELS_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "pdnet/autodiff/ops.h"
#include "pdnet/autodiff/tape.h"

namespace pdnet {

enum class ModelKind { kProposed, kBcnn1, kBcnn2 };
enum class DistanceKind { kNone, kEuclidean, kKl };

const char* ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);  // proposed | bcnn1 | bcnn2
const char* DistanceKindName(DistanceKind kind);
DistanceKind ParseDistanceKind(const std::string& name);  // none | euclidean | kl
DistanceKind DefaultDistance(ModelKind kind);

inline constexpr int kDefaultS = 56;
inline constexpr int kMinS = 31;
inline constexpr int kFrontEndChannels = 32;
inline constexpr int kClassifierChannels = 16;
inline constexpr int kClassifierKernel = 10;
inline constexpr int kBcnn1Channels = 16;
inline constexpr int kBcnn1Kernel = 4;
inline constexpr int kHiddenUnits = 128;
inline constexpr int kClasses = 2;
inline constexpr double kDropout = 0.5;

// Spatial extent of the classifier after conv10-pool2-conv10-pool2 on an
// S x S image. ConfigError if S < 31.
int ClassifierSpatial(int s);
// 16 * a * a.
int ClassifierFlatten(int s);
// True when S reproduces the reference 784-wide fc1.
bool IsReferenceS(int s);
// 16 * (16 - 4 + 1) = 208 for 16-frame segments.
int Bcnn1Flatten();

// Expected parameter names and shapes for a model; f is the input feature
// dimension (ignored for bcnn2).
std::map<std::string, Shape> ExpectedShapes(ModelKind kind, int s, int f);

// Uniform(-b, b), b = sqrt(1 / fan_in), biases zero. Deterministic per seed.
ParameterSet InitRandom(ModelKind kind, int s, int f, uint64_t seed);

// Names bound to one tape. Parameters must outlive the tape.
template <typename T>
class BoundParams {
 public:
  BoundParams(BasicTape<T>& tape, BasicParameterSet<T>& params);
  BasicVar<T> operator[](const std::string& name) const;

 private:
  std::map<std::string, BasicVar<T>> vars_;
};

struct ForwardMode {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // required when training
};

// Front end: F x S -> 32 x S (conv F x 1, ReLU).
template <typename T>
BasicVar<T> FrontEnd(const BoundParams<T>& p, BasicVar<T> input);

// 1 x S x S distance image -> 2 logits.
template <typename T>
BasicVar<T> ClassifierLogits(const BoundParams<T>& p, BasicVar<T> image,
                             const ForwardMode& mode);

// Test and reference (F x S each) through the shared front end, Euclidean
// distance image, classifier.
template <typename T>
BasicVar<T> ProposedLogits(const BoundParams<T>& p, BasicVar<T> test, BasicVar<T> reference,
                           const ForwardMode& mode);

// Distance image (S x S, precomputed KL) through the classifier.
template <typename T>
BasicVar<T> Bcnn2Logits(const BoundParams<T>& p, BasicVar<T> distance, const ForwardMode& mode);

// F x 16 segment -> 2 logits.
template <typename T>
BasicVar<T> Bcnn1Logits(const BoundParams<T>& p, BasicVar<T> segment, const ForwardMode& mode);

}  // namespace pdnet

#endif  // PDNET_MODELS_MODELS_H_
