// Copyright 2026 The sdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDIAR_AUDIO_H_
#define SDIAR_AUDIO_H_

#include <cstdint>
#include <string>
#include <vector>

namespace sdiar {

// Synchronous multichannel recording captured by one device.
struct DeviceRecording {
  int device_id = 0;
  int sample_rate_hz = 0;
  // channels[m][t], samples nominally in [-1, 1].
  std::vector<std::vector<double>> channels;
  // Index in the original recording of the first retained sample. Set by
  // alignment when the recording is trimmed to a common span.
  int64_t start_offset_samples = 0;

  size_t num_channels() const { return channels.size(); }
  size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(num_samples()) / sample_rate_hz
               : 0.0;
  }
};

// Throws InputError unless the recording has at least two channels of equal,
// nonzero length and a positive sample rate.
void ValidateRecording(const DeviceRecording& rec);

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// Reads a RIFF/WAVE file with 16-bit, 24-bit or 32-bit integer PCM, or 32/64
// bit IEEE float samples (plain or WAVE_FORMAT_EXTENSIBLE). Integer samples
// are scaled by 2^-(bits-1). Throws InputError for fewer than min_channels.
DeviceRecording LoadWav(const std::string& path, int device_id = 0,
                        size_t min_channels = 2);

void WriteWav(const std::string& path, const DeviceRecording& rec,
              WavEncoding encoding = WavEncoding::kFloat32);

// Rational polyphase resampler with a Kaiser-windowed sinc low-pass
// (64 taps per phase). Only downsampling or identity is supported; the
// output length is round(n * target / source).
DeviceRecording Resample(const DeviceRecording& rec, int target_hz);

// Single-channel form of Resample.
std::vector<double> ResampleChannel(const std::vector<double>& x,
                                    int source_hz, int target_hz);

}  // namespace sdiar

#endif  // SDIAR_AUDIO_H_
