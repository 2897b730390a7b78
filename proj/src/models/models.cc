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

#include "pdnet/models/models.h"

#include <cmath>

#include <glog/logging.h>

#include "pdnet/common/util.h"

namespace pdnet {

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kProposed:
      return "proposed";
    case ModelKind::kBcnn1:
      return "bcnn1";
    case ModelKind::kBcnn2:
      return "bcnn2";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "proposed") return ModelKind::kProposed;
  if (name == "bcnn1") return ModelKind::kBcnn1;
  if (name == "bcnn2") return ModelKind::kBcnn2;
  throw ConfigError("unknown model '" + name + "' (expected proposed, bcnn1 or bcnn2)");
}

const char* DistanceKindName(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kNone:
      return "none";
    case DistanceKind::kEuclidean:
      return "euclidean";
    case DistanceKind::kKl:
      return "kl";
  }
  return "?";
}

DistanceKind ParseDistanceKind(const std::string& name) {
  if (name == "none") return DistanceKind::kNone;
  if (name == "euclidean") return DistanceKind::kEuclidean;
  if (name == "kl") return DistanceKind::kKl;
  throw ConfigError("unknown distance '" + name + "' (expected none, euclidean or kl)");
}

DistanceKind DefaultDistance(ModelKind kind) {
  switch (kind) {
    case ModelKind::kProposed:
      return DistanceKind::kEuclidean;
    case ModelKind::kBcnn2:
      return DistanceKind::kKl;
    case ModelKind::kBcnn1:
      return DistanceKind::kNone;
  }
  return DistanceKind::kNone;
}

int ClassifierSpatial(int s) {
  if (s < kMinS) {
    throw ConfigError("S = " + std::to_string(s) + " is too small for the classifier (need S >= " +
                      std::to_string(kMinS) + ")");
  }
  int a = s - kClassifierKernel + 1;
  a /= 2;
  a = a - kClassifierKernel + 1;
  return a / 2;
}

int ClassifierFlatten(int s) {
  const int a = ClassifierSpatial(s);
  return kClassifierChannels * a * a;
}

bool IsReferenceS(int s) { return s >= kMinS && ClassifierFlatten(s) == 784; }

int Bcnn1Flatten() { return kBcnn1Channels * (16 - kBcnn1Kernel + 1); }

namespace {

void AddClassifierShapes(std::map<std::string, Shape>& out, int s) {
  const int k = kClassifierKernel;
  out["classifier.conv1.weight"] = {kClassifierChannels, 1, k, k};
  out["classifier.conv1.bias"] = {kClassifierChannels};
  out["classifier.conv2.weight"] = {kClassifierChannels, kClassifierChannels, k, k};
  out["classifier.conv2.bias"] = {kClassifierChannels};
  out["classifier.fc1.weight"] = {kHiddenUnits, ClassifierFlatten(s)};
  out["classifier.fc1.bias"] = {kHiddenUnits};
  out["classifier.fc2.weight"] = {kClasses, kHiddenUnits};
  out["classifier.fc2.bias"] = {kClasses};
}

// Creation order, which fixes serialization and RNG consumption order.
std::vector<std::string> ParamOrder(ModelKind kind) {
  const std::vector<std::string> classifier = {
      "classifier.conv1.weight", "classifier.conv1.bias", "classifier.conv2.weight",
      "classifier.conv2.bias",   "classifier.fc1.weight", "classifier.fc1.bias",
      "classifier.fc2.weight",   "classifier.fc2.bias"};
  switch (kind) {
    case ModelKind::kProposed: {
      std::vector<std::string> out = {"frontend.weight", "frontend.bias"};
      out.insert(out.end(), classifier.begin(), classifier.end());
      return out;
    }
    case ModelKind::kBcnn2:
      return classifier;
    case ModelKind::kBcnn1:
      return {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias",
              "fc1.weight",   "fc1.bias",   "fc2.weight",   "fc2.bias"};
  }
  return {};
}

}  // namespace

std::map<std::string, Shape> ExpectedShapes(ModelKind kind, int s, int f) {
  std::map<std::string, Shape> out;
  if (kind != ModelKind::kBcnn2 && f < 1) throw ConfigError("feature dimension must be positive");
  switch (kind) {
    case ModelKind::kProposed:
      out["frontend.weight"] = {kFrontEndChannels, 1, f, 1};
      out["frontend.bias"] = {kFrontEndChannels};
      AddClassifierShapes(out, s);
      break;
    case ModelKind::kBcnn2:
      AddClassifierShapes(out, s);
      break;
    case ModelKind::kBcnn1:
      out["conv1.weight"] = {kFrontEndChannels, 1, f, 1};
      out["conv1.bias"] = {kFrontEndChannels};
      out["conv2.weight"] = {kBcnn1Channels, kFrontEndChannels, 1, kBcnn1Kernel};
      out["conv2.bias"] = {kBcnn1Channels};
      out["fc1.weight"] = {kHiddenUnits, Bcnn1Flatten()};
      out["fc1.bias"] = {kHiddenUnits};
      out["fc2.weight"] = {kClasses, kHiddenUnits};
      out["fc2.bias"] = {kClasses};
      break;
  }
  return out;
}

ParameterSet InitRandom(ModelKind kind, int s, int f, uint64_t seed) {
  if (kind != ModelKind::kBcnn1 && !IsReferenceS(s)) {
    LOG(WARNING) << "S = " << s << " gives a classifier flatten of " << ClassifierFlatten(s)
                 << " instead of 784; fc1 is resized accordingly";
  }
  const auto shapes = ExpectedShapes(kind, s, f);
  std::mt19937_64 rng(seed);
  ParameterSet params;
  for (const auto& name : ParamOrder(kind)) {
    const Shape& shape = shapes.at(name);
    Tensor t(shape, 0.f);
    if (shape.size() > 1) {
      int fan_in = 1;
      for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
      const float b = static_cast<float>(std::sqrt(1.0 / fan_in));
      std::uniform_real_distribution<float> u(-b, b);
      for (float& v : t.data()) v = u(rng);
    }
    params.Add(name, std::move(t));
  }
  return params;
}

template <typename T>
BoundParams<T>::BoundParams(BasicTape<T>& tape, BasicParameterSet<T>& params) {
  for (auto& p : params) vars_.emplace(p.name, tape.Param(p));
}

template <typename T>
BasicVar<T> BoundParams<T>::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigError("model has no parameter " + name);
  return it->second;
}

template <typename T>
BasicVar<T> FrontEnd(const BoundParams<T>& p, BasicVar<T> input) {
  if (input.value().rank() != 2) {
    throw DimensionError("front end expects F x S input, got " + ShapeToString(input.shape()));
  }
  const int f = input.shape()[0];
  const int s = input.shape()[1];
  auto x = Reshape(input, {1, f, s});
  auto h = Relu(Conv2dValid(x, p["frontend.weight"], p["frontend.bias"]));
  return Reshape(h, {kFrontEndChannels, s});
}

template <typename T>
BasicVar<T> ClassifierLogits(const BoundParams<T>& p, BasicVar<T> image, const ForwardMode& mode) {
  auto h = Relu(Conv2dValid(image, p["classifier.conv1.weight"], p["classifier.conv1.bias"]));
  h = MaxPool2d(h);
  h = Relu(Conv2dValid(h, p["classifier.conv2.weight"], p["classifier.conv2.bias"]));
  h = MaxPool2d(h);
  if (mode.training && mode.rng == nullptr) throw UsageError("training forward needs an rng");
  std::mt19937_64 unused;
  h = Dropout(h, kDropout, mode.training, mode.rng != nullptr ? *mode.rng : unused);
  const auto fc1 = p["classifier.fc1.weight"];
  if (static_cast<int>(h.size()) != fc1.shape()[1]) {
    throw DimensionError("classifier flatten is " + std::to_string(h.size()) +
                         " but fc1 expects " + std::to_string(fc1.shape()[1]));
  }
  h = Relu(Affine(h, fc1, p["classifier.fc1.bias"]));
  return Affine(h, p["classifier.fc2.weight"], p["classifier.fc2.bias"]);
}

template <typename T>
BasicVar<T> ProposedLogits(const BoundParams<T>& p, BasicVar<T> test, BasicVar<T> reference,
                           const ForwardMode& mode) {
  if (test.shape() != reference.shape()) {
    throw DimensionError("test " + ShapeToString(test.shape()) + " and reference " +
                         ShapeToString(reference.shape()) + " differ");
  }
  const int s = test.shape()[1];
  auto d = PairwiseEuclidean(FrontEnd(p, test), FrontEnd(p, reference));
  return ClassifierLogits(p, Reshape(d, {1, s, s}), mode);
}

template <typename T>
BasicVar<T> Bcnn2Logits(const BoundParams<T>& p, BasicVar<T> distance, const ForwardMode& mode) {
  const Shape& sh = distance.shape();
  if (sh.size() == 2) return ClassifierLogits(p, Reshape(distance, {1, sh[0], sh[1]}), mode);
  return ClassifierLogits(p, distance, mode);
}

template <typename T>
BasicVar<T> Bcnn1Logits(const BoundParams<T>& p, BasicVar<T> segment, const ForwardMode& mode) {
  if (segment.value().rank() != 2) {
    throw DimensionError("segment must be F x 16, got " + ShapeToString(segment.shape()));
  }
  const auto w1 = p["conv1.weight"];
  const int f = segment.shape()[0];
  if (w1.shape()[2] != f) {
    throw DimensionError("segment has F = " + std::to_string(f) + " but the model expects F = " +
                         std::to_string(w1.shape()[2]));
  }
  auto x = Reshape(segment, {1, f, segment.shape()[1]});
  auto h = Relu(Conv2dValid(x, w1, p["conv1.bias"]));  // 32 x 1 x 16
  h = Relu(Conv2dValid(h, p["conv2.weight"], p["conv2.bias"]));  // 16 x 1 x 13
  if (mode.training && mode.rng == nullptr) throw UsageError("training forward needs an rng");
  std::mt19937_64 unused;
  h = Dropout(h, kDropout, mode.training, mode.rng != nullptr ? *mode.rng : unused);
  const auto fc1 = p["fc1.weight"];
  if (static_cast<int>(h.size()) != fc1.shape()[1]) {
    throw DimensionError("flatten is " + std::to_string(h.size()) + " but fc1 expects " +
                         std::to_string(fc1.shape()[1]));
  }
  h = Relu(Affine(h, fc1, p["fc1.bias"]));
  return Affine(h, p["fc2.weight"], p["fc2.bias"]);
}

#define PDNET_INSTANTIATE_MODELS(T)                                                          \
  template class BoundParams<T>;                                                             \
  template BasicVar<T> FrontEnd<T>(const BoundParams<T>&, BasicVar<T>);                      \
  template BasicVar<T> ClassifierLogits<T>(const BoundParams<T>&, BasicVar<T>,               \
                                           const ForwardMode&);                              \
  template BasicVar<T> ProposedLogits<T>(const BoundParams<T>&, BasicVar<T>, BasicVar<T>,    \
                                         const ForwardMode&);                                \
  template BasicVar<T> Bcnn2Logits<T>(const BoundParams<T>&, BasicVar<T>, const ForwardMode&); \
  template BasicVar<T> Bcnn1Logits<T>(const BoundParams<T>&, BasicVar<T>, const ForwardMode&);

PDNET_INSTANTIATE_MODELS(float)
PDNET_INSTANTIATE_MODELS(double)

}  // namespace pdnet
