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

#include "sdiar/directional.h"

#include <algorithm>
#include <cmath>

namespace sdiar {
namespace {

constexpr double kPhatGuard = 1e-12;

double DegToRad(double deg) { return deg * M_PI / 180.0; }

}  // namespace

ArrayGeometry ArrayGeometry::TwoMic(double spacing_m, double speed_of_sound) {
  ArrayGeometry g;
  g.mic_positions_m = {0.5 * spacing_m, -0.5 * spacing_m};
  g.speed_of_sound_mps = speed_of_sound;
  g.Validate();
  return g;
}

double ArrayGeometry::MaxSpacing() const {
  double best = 0.0;
  for (size_t i = 0; i < mic_positions_m.size(); ++i) {
    for (size_t j = i + 1; j < mic_positions_m.size(); ++j) {
      best = std::max(best, std::abs(mic_positions_m[i] - mic_positions_m[j]));
    }
  }
  return best;
}

void ArrayGeometry::Validate() const {
  if (mic_positions_m.size() < 2) {
    throw InputError("array geometry needs at least 2 microphones");
  }
  if (!(speed_of_sound_mps > 0.0)) {
    throw InputError("speed of sound must be positive");
  }
  for (size_t i = 0; i < mic_positions_m.size(); ++i) {
    for (size_t j = i + 1; j < mic_positions_m.size(); ++j) {
      if (!(std::abs(mic_positions_m[i] - mic_positions_m[j]) > 0.0)) {
        throw InputError("microphone positions must be distinct");
      }
    }
  }
}

double ArrayGeometry::TdoaSamples(size_t mic, double theta_deg,
                                  int sample_rate_hz) const {
  const double d = mic_positions_m.front() - mic_positions_m[mic];
  return d * std::cos(DegToRad(theta_deg)) * sample_rate_hz /
         speed_of_sound_mps;
}

AngularGrid AngularGrid::Uniform(double step_deg) {
  if (!(step_deg > 0.0) || step_deg > 180.0) {
    throw InputError("grid step must be in (0, 180] degrees");
  }
  AngularGrid grid;
  const auto count = static_cast<size_t>(std::floor(180.0 / step_deg + 1e-9)) + 1;
  for (size_t l = 0; l < count; ++l) {
    grid.angles_deg.push_back(step_deg * static_cast<double>(l));
  }
  return grid;
}

void AngularGrid::Validate() const {
  if (angles_deg.empty()) throw InputError("angular grid is empty");
  for (size_t l = 1; l < angles_deg.size(); ++l) {
    if (!(angles_deg[l] > angles_deg[l - 1])) {
      throw InputError("angular grid must be strictly increasing");
    }
  }
}

std::vector<std::complex<double>> SteeringVector(const ArrayGeometry& geom,
                                                 double theta_deg, size_t bin,
                                                 size_t fft_size,
                                                 int sample_rate_hz) {
  std::vector<std::complex<double>> a(geom.num_mics());
  for (size_t m = 0; m < a.size(); ++m) {
    const double tau = m == 0 ? 0.0 : geom.TdoaSamples(m, theta_deg, sample_rate_hz);
    const double phase = -2.0 * M_PI * static_cast<double>(bin) * tau /
                         static_cast<double>(fft_size);
    a[m] = std::polar(1.0, phase);
  }
  return a;
}

std::complex<double> PhatWeight(std::complex<double> x) {
  const double mag = std::abs(x);
  return mag < kPhatGuard ? std::complex<double>{} : x / mag;
}

std::vector<std::complex<double>> PhatFilter(
    std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), PhatWeight);
  return out;
}

SrpPhat::SrpPhat(ArrayGeometry geom, AngularGrid grid, size_t fft_size,
                 int sample_rate_hz, SrpBand band)
    : geom_(std::move(geom)),
      grid_(std::move(grid)),
      fft_size_(fft_size),
      sample_rate_hz_(sample_rate_hz) {
  geom_.Validate();
  grid_.Validate();
  if (fft_size_ < 2 || sample_rate_hz_ <= 0) {
    throw InputError("invalid FFT size or sample rate for SRP");
  }
  const size_t nyquist_bin = fft_size_ / 2;
  if (band.full_band) {
    first_bin_ = 0;
    last_bin_ = nyquist_bin;
  } else {
    if (!(band.low_hz >= 0.0) || !(band.high_hz > band.low_hz)) {
      throw InputError("invalid SRP frequency band");
    }
    const double bin_hz = static_cast<double>(sample_rate_hz_) / fft_size_;
    first_bin_ = static_cast<size_t>(std::ceil(band.low_hz / bin_hz - 1e-9));
    last_bin_ = std::min(
        nyquist_bin, static_cast<size_t>(std::floor(band.high_hz / bin_hz + 1e-9)));
    if (first_bin_ > last_bin_) throw InputError("SRP band contains no bins");
  }

  const size_t mics = geom_.num_mics();
  const size_t width = last_bin_ - first_bin_ + 1;
  conj_steering_.resize(grid_.size() * mics * width);
  for (size_t l = 0; l < grid_.size(); ++l) {
    for (size_t k = first_bin_; k <= last_bin_; ++k) {
      const auto a = SteeringVector(geom_, grid_.angles_deg[l], k, fft_size_,
                                    sample_rate_hz_);
      for (size_t m = 0; m < mics; ++m) {
        conj_steering_[(l * mics + m) * width + (k - first_bin_)] =
            std::conj(a[m]);
      }
    }
  }
}

void SrpPhat::Compute(
    std::span<const std::span<const std::complex<double>>> mic_spectra,
    std::span<double> response) const {
  const size_t mics = geom_.num_mics();
  if (mic_spectra.size() != mics) {
    throw InputError("spectra/microphone count mismatch");
  }
  const size_t width = last_bin_ - first_bin_ + 1;
  std::vector<std::complex<double>> phat(mics * width);
  for (size_t m = 0; m < mics; ++m) {
    if (mic_spectra[m].size() <= last_bin_) {
      throw InputError("spectrum has fewer bins than the SRP band");
    }
    for (size_t k = first_bin_; k <= last_bin_; ++k) {
      phat[m * width + (k - first_bin_)] = PhatWeight(mic_spectra[m][k]);
    }
  }
  for (size_t l = 0; l < grid_.size(); ++l) {
    double power = 0.0;
    const std::complex<double>* steer = &conj_steering_[l * mics * width];
    for (size_t k = 0; k < width; ++k) {
      std::complex<double> beam{};
      for (size_t m = 0; m < mics; ++m) {
        beam += steer[m * width + k] * phat[m * width + k];
      }
      power += std::norm(beam);
    }
    response[l] = power;
  }
}

Matrix SrpPhat::ComputeAll(const MultiChannelFrameSpectra& spectra,
                           int threads) const {
  if (spectra.fft_size != fft_size_ || spectra.sample_rate_hz != sample_rate_hz_) {
    throw InputError("spectra layout does not match the SRP configuration");
  }
  Matrix raw(spectra.frames(), grid_.size());
  ParallelFor(spectra.frames(), threads, [&](size_t n) {
    std::vector<std::span<const std::complex<double>>> mics;
    for (size_t m = 0; m < spectra.mics(); ++m) {
      mics.push_back(spectra.spectrum(n, m));
    }
    Compute(mics, raw.row(n));
  });
  return raw;
}

void FloorAndNormalize(std::span<double> values, double floor) {
  const size_t n = values.size();
  if (n == 0) return;
  if (floor * static_cast<double>(n) >= 1.0) {
    throw InputError("probability floor too large for the grid size");
  }
  double total = 0.0;
  for (double v : values) total += std::max(v, 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(values.begin(), values.end(), 1.0 / static_cast<double>(n));
    return;
  }
  for (double& v : values) v = std::max(v, 0.0) / total;

  // Pin entries at the floor and rescale the rest until nothing new drops
  // below it.
  std::vector<bool> pinned(n, false);
  for (size_t pass = 0; pass <= n; ++pass) {
    size_t pinned_count = 0;
    double free_mass = 0.0;
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (!pinned[i] && values[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i]) {
        ++pinned_count;
      } else {
        free_mass += values[i];
      }
    }
    const double target = 1.0 - floor * static_cast<double>(pinned_count);
    for (size_t i = 0; i < n; ++i) {
      values[i] = pinned[i] ? floor : values[i] * target / free_mass;
    }
    if (!changed) break;
  }
}

Matrix SmoothAndNormalize(const Matrix& raw, const SmoothingConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0)) {
    throw InputError("smoothing alpha must lie in [0, 1)");
  }
  if (!(cfg.floor > 0.0)) throw InputError("probability floor must be positive");
  const double w_current = cfg.orientation == SmoothingOrientation::kAlphaOnCurrent
                               ? cfg.alpha
                               : 1.0 - cfg.alpha;
  const double w_previous = 1.0 - w_current;

  Matrix out(raw.rows(), raw.cols());
  std::vector<double> state(raw.cols(), 0.0);
  for (size_t n = 0; n < raw.rows(); ++n) {
    const auto in = raw.row(n);
    for (size_t l = 0; l < raw.cols(); ++l) {
      state[l] = n == 0 ? in[l] : w_current * in[l] + w_previous * state[l];
    }
    auto dst = out.row(n);
    std::copy(state.begin(), state.end(), dst.begin());
    FloorAndNormalize(dst, cfg.floor);
  }
  return out;
}

}  // namespace sdiar
