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

#include "sdiar/stft.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "sdiar/common.h"

namespace sdiar {
namespace {

// The FFTW planner is not reentrant.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

RealFft::RealFft(size_t size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size == 0) throw InputError("FFT size must be positive");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  impl_->in = fftw_alloc_real(size);
  impl_->out = fftw_alloc_complex(size / 2 + 1);
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), impl_->in,
                                     impl_->out, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(impl_->plan);
  fftw_free(impl_->in);
  fftw_free(impl_->out);
}

void RealFft::Forward(std::span<const double> input,
                      std::span<std::complex<double>> output) {
  std::fill(impl_->in, impl_->in + size_, 0.0);
  std::copy(input.begin(), input.begin() + std::min(input.size(), size_),
            impl_->in);
  fftw_execute(impl_->plan);
  const size_t bins = size_ / 2 + 1;
  for (size_t k = 0; k < bins && k < output.size(); ++k) {
    output[k] = {impl_->out[k][0], impl_->out[k][1]};
  }
}

StftConfig StftConfig::ForRate(int sample_rate_hz, double frame_ms,
                               double hop_fraction) {
  if (sample_rate_hz <= 0 || frame_ms <= 0.0 || hop_fraction <= 0.0 ||
      hop_fraction > 1.0) {
    throw InputError("invalid STFT parameters");
  }
  StftConfig cfg;
  cfg.frame_len_samples = static_cast<size_t>(
      std::llround(frame_ms * 1e-3 * sample_rate_hz));
  cfg.hop_samples = std::max<size_t>(
      1, static_cast<size_t>(std::llround(cfg.frame_len_samples * hop_fraction)));
  cfg.fft_size = NextPowerOfTwo(cfg.frame_len_samples);
  cfg.Validate();
  return cfg;
}

void StftConfig::Validate() const {
  if (frame_len_samples == 0 || hop_samples == 0 || fft_size == 0) {
    throw InputError("STFT sizes must be positive");
  }
  if (hop_samples > frame_len_samples) {
    throw InputError("hop must not exceed frame length");
  }
  if (fft_size < frame_len_samples) {
    throw InputError("FFT size must be at least the frame length");
  }
}

std::vector<double> MakeWindow(WindowType type, size_t length) {
  std::vector<double> w(length, 1.0);
  if (type == WindowType::kHann) {
    for (size_t i = 0; i < length; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                  static_cast<double>(length));
    }
  }
  return w;
}

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

size_t NumFrames(size_t num_samples, const StftConfig& cfg) {
  if (num_samples < cfg.frame_len_samples) return 0;
  return (num_samples - cfg.frame_len_samples) / cfg.hop_samples + 1;
}

MultiChannelFrameSpectra Stft(const DeviceRecording& rec,
                              const StftConfig& cfg) {
  cfg.Validate();
  if (rec.channels.empty() || rec.sample_rate_hz <= 0) {
    throw InputError("empty recording");
  }
  const size_t frames = NumFrames(rec.num_samples(), cfg);
  if (frames == 0) throw InputError("signal shorter than one frame");

  const size_t bins = cfg.fft_size / 2 + 1;
  MultiChannelFrameSpectra out(rec.device_id, frames, rec.num_channels(), bins);
  out.fft_size = cfg.fft_size;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.frame_times_s.resize(frames);

  const std::vector<double> window = MakeWindow(cfg.window, cfg.frame_len_samples);
  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.frame_len_samples);
  for (size_t n = 0; n < frames; ++n) {
    const size_t begin = n * cfg.hop_samples;
    out.frame_times_s[n] =
        (static_cast<double>(begin) + 0.5 * static_cast<double>(cfg.frame_len_samples)) /
        rec.sample_rate_hz;
    for (size_t m = 0; m < rec.num_channels(); ++m) {
      const auto& ch = rec.channels[m];
      for (size_t i = 0; i < cfg.frame_len_samples; ++i) {
        buf[i] = ch[begin + i] * window[i];
      }
      fft.Forward(buf, out.spectrum(n, m));
    }
  }
  return out;
}

}  // namespace sdiar
