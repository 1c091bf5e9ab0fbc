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

#ifndef SDIAR_STFT_H_
#define SDIAR_STFT_H_

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "sdiar/audio.h"

namespace sdiar {

enum class WindowType { kHann, kRectangular };

struct StftConfig {
  size_t frame_len_samples = 1024;
  size_t hop_samples = 512;
  size_t fft_size = 1024;
  WindowType window = WindowType::kHann;

  // 64 ms frames, 50% overlap, FFT size rounded up to a power of two.
  static StftConfig ForRate(int sample_rate_hz, double frame_ms = 64.0,
                            double hop_fraction = 0.5);
  void Validate() const;
};

// Periodic window so that 50%-overlapped Hann frames sum to a constant.
std::vector<double> MakeWindow(WindowType type, size_t length);

// Smallest power of two >= n.
size_t NextPowerOfTwo(size_t n);

// One-sided spectra of every full frame of every microphone of one device.
// Layout is [frame][mic][bin].
class MultiChannelFrameSpectra {
 public:
  MultiChannelFrameSpectra() = default;
  MultiChannelFrameSpectra(int device_id, size_t frames, size_t mics,
                           size_t bins)
      : device_id_(device_id),
        frames_(frames),
        mics_(mics),
        bins_(bins),
        data_(frames * mics * bins) {}

  int device_id() const { return device_id_; }
  size_t frames() const { return frames_; }
  size_t mics() const { return mics_; }
  size_t bins() const { return bins_; }

  std::span<std::complex<double>> spectrum(size_t frame, size_t mic) {
    return {data_.data() + (frame * mics_ + mic) * bins_, bins_};
  }
  std::span<const std::complex<double>> spectrum(size_t frame,
                                                 size_t mic) const {
    return {data_.data() + (frame * mics_ + mic) * bins_, bins_};
  }

  // Center time of each frame in seconds, relative to the first sample.
  std::vector<double> frame_times_s;
  size_t fft_size = 0;
  int sample_rate_hz = 0;

 private:
  int device_id_ = 0;
  size_t frames_ = 0;
  size_t mics_ = 0;
  size_t bins_ = 0;
  std::vector<std::complex<double>> data_;
};

// Real-to-complex FFT of a fixed size backed by FFTW. Plans are created once;
// Forward() is safe to call concurrently on distinct objects.
class RealFft {
 public:
  explicit RealFft(size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  size_t size() const { return size_; }
  // input.size() <= size(); zero-padded. output receives size()/2 + 1 bins.
  void Forward(std::span<const double> input,
               std::span<std::complex<double>> output);

 private:
  struct Impl;
  size_t size_;
  std::unique_ptr<Impl> impl_;
};

// Number of full frames; trailing partial frames are dropped.
size_t NumFrames(size_t num_samples, const StftConfig& cfg);

MultiChannelFrameSpectra Stft(const DeviceRecording& rec,
                              const StftConfig& cfg);

}  // namespace sdiar

#endif  // SDIAR_STFT_H_
