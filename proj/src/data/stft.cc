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

#include "pdnet/data/stft.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "pdnet/common/util.h"

namespace pdnet {
namespace {

// FFTW's planner is not thread-safe; execution with new-array functions is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftwf_free(p); }
};

}  // namespace

Audio ReadWav(const std::filesystem::path& path) {
  const std::string bytes = ReadFileBytes(path);
  BinaryReader r(bytes);
  const std::string where = path.string() + ": ";
  try {
    if (r.ReadBytes(4) != "RIFF") throw InputError(where + "not a RIFF file");
    r.ReadU32();
    if (r.ReadBytes(4) != "WAVE") throw InputError(where + "not a WAVE file");
    bool have_fmt = false;
    Audio audio;
    while (r.remaining() >= 8) {
      const std::string id(r.ReadBytes(4));
      const uint32_t size = r.ReadU32();
      if (id == "fmt ") {
        BinaryReader fmt(r.ReadBytes(size));
        const uint16_t format = fmt.ReadU16();
        const uint16_t channels = fmt.ReadU16();
        const uint32_t rate = fmt.ReadU32();
        fmt.ReadU32();
        fmt.ReadU16();
        const uint16_t bits = fmt.ReadU16();
        if (format != 1 || bits != 16) throw InputError(where + "expected 16-bit PCM");
        if (channels != 1) throw InputError(where + "expected mono audio");
        if (rate != kSampleRate) {
          throw InputError(where + "sample rate " + std::to_string(rate) +
                           " Hz, expected 16000 Hz");
        }
        audio.sample_rate = static_cast<int>(rate);
        have_fmt = true;
        if ((size & 1) && r.remaining() > 0) r.ReadU8();
      } else if (id == "data") {
        if (!have_fmt) throw InputError(where + "data chunk before fmt chunk");
        BinaryReader data(r.ReadBytes(size));
        audio.samples.resize(size / 2);
        for (auto& s : audio.samples) {
          s = static_cast<float>(static_cast<int16_t>(data.ReadU16())) / 32768.f;
        }
        return audio;
      } else {
        r.ReadBytes(size + (size & 1));
      }
    }
  } catch (const FormatError& e) {
    throw InputError(where + "truncated WAV (" + e.what() + ")");
  }
  throw InputError(where + "no data chunk");
}

void WriteWav(const std::filesystem::path& path, const Audio& audio) {
  BinaryWriter w;
  const uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  w.WriteBytes("RIFF");
  w.WriteU32(36 + data_bytes);
  w.WriteBytes("WAVE");
  w.WriteBytes("fmt ");
  w.WriteU32(16);
  w.WriteU16(1);
  w.WriteU16(1);
  w.WriteU32(static_cast<uint32_t>(audio.sample_rate));
  w.WriteU32(static_cast<uint32_t>(audio.sample_rate) * 2);
  w.WriteU16(2);
  w.WriteU16(16);
  w.WriteBytes("data");
  w.WriteU32(data_bytes);
  for (float s : audio.samples) {
    const float c = std::clamp(s, -1.f, 32767.f / 32768.f);
    w.WriteU16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32768.f))));
  }
  WriteFileBytes(path, w.buffer());
}

FeatureMatrix StftLogMagnitude(const std::vector<float>& samples) {
  if (samples.size() < static_cast<size_t>(kStftWindow)) {
    throw InputError("STFT needs at least " + std::to_string(kStftWindow) + " samples, got " +
                     std::to_string(samples.size()));
  }
  const int n = static_cast<int>(samples.size() / kStftWindow);
  std::unique_ptr<float, FftwFree> in(
      static_cast<float*>(fftwf_malloc(sizeof(float) * kStftSize)));
  std::unique_ptr<fftwf_complex, FftwFree> out(
      static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * kStftBins)));
  fftwf_plan plan;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftwf_plan_dft_r2c_1d(kStftSize, in.get(), out.get(), FFTW_ESTIMATE);
  }
  // Periodic Hann.
  std::vector<float> window(kStftWindow);
  for (int i = 0; i < kStftWindow; ++i) {
    window[static_cast<size_t>(i)] = static_cast<float>(
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kStftWindow));
  }
  FeatureMatrix spec({kStftBins, n}, 0.f);
  for (int t = 0; t < n; ++t) {
    std::fill(in.get(), in.get() + kStftSize, 0.f);
    for (int i = 0; i < kStftWindow; ++i) {
      in.get()[i] = samples[static_cast<size_t>(t * kStftWindow + i)] * window[static_cast<size_t>(i)];
    }
    fftwf_execute(plan);
    for (int k = 0; k < kStftBins; ++k) {
      const double re = out.get()[k][0];
      const double im = out.get()[k][1];
      spec.at(k, t) = static_cast<float>(std::log(std::hypot(re, im) + kStftFloor));
    }
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftwf_destroy_plan(plan);
  }
  return spec;
}

}  // namespace pdnet
