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

// Directional statistics: SRP-PHAT over an angular grid, smoothed across
// frames and normalized into a probability mass function per frame.

#ifndef SDIAR_DIRECTIONAL_H_
#define SDIAR_DIRECTIONAL_H_

#include <complex>
#include <span>
#include <vector>

#include "sdiar/common.h"
#include "sdiar/stft.h"

namespace sdiar {

// Microphone positions along the device's array axis, in meters. The angle
// theta is measured from the axis direction pointing at microphone 1, so a
// far-field source at theta reaches microphone m later than microphone 1 by
// (x_1 - x_m) cos(theta) / c seconds.
struct ArrayGeometry {
  std::vector<double> mic_positions_m;
  double speed_of_sound_mps = 343.0;

  // Two microphones at +d/2 and -d/2.
  static ArrayGeometry TwoMic(double spacing_m, double speed_of_sound = 343.0);
  size_t num_mics() const { return mic_positions_m.size(); }
  double MaxSpacing() const;
  void Validate() const;

  // Delay of microphone m relative to microphone 1, in samples.
  double TdoaSamples(size_t mic, double theta_deg, int sample_rate_hz) const;
};

struct AngularGrid {
  std::vector<double> angles_deg;

  // 0, step, 2*step, ..., 180. A 4 degree step gives 46 points.
  static AngularGrid Uniform(double step_deg);
  size_t size() const { return angles_deg.size(); }
  void Validate() const;
};

// exp(-j 2 pi k tau_m1(theta) / fft_size) for every microphone.
std::vector<std::complex<double>> SteeringVector(const ArrayGeometry& geom,
                                                 double theta_deg, size_t bin,
                                                 size_t fft_size,
                                                 int sample_rate_hz);

// Phase transform: x / |x|, and 0 where |x| < 1e-12.
std::complex<double> PhatWeight(std::complex<double> x);
std::vector<std::complex<double>> PhatFilter(
    std::span<const std::complex<double>> x);

struct SrpBand {
  double low_hz = 300.0;
  double high_hz = 8000.0;
  bool full_band = false;  // sum over every bin, including DC
};

// Steered response power with PHAT weighting. Steering phases are tabulated
// once per (angle, bin) for a fixed geometry, grid and FFT layout.
class SrpPhat {
 public:
  SrpPhat(ArrayGeometry geom, AngularGrid grid, size_t fft_size,
          int sample_rate_hz, SrpBand band = {});

  size_t num_angles() const { return grid_.size(); }
  size_t first_bin() const { return first_bin_; }
  size_t last_bin() const { return last_bin_; }

  // mic_spectra[m] is the one-sided spectrum of microphone m for one frame.
  // Input is PHAT-filtered internally. Writes num_angles() values.
  void Compute(std::span<const std::span<const std::complex<double>>> mic_spectra,
               std::span<double> response) const;

  // Raw SRP for every frame of a device: frames x angles.
  Matrix ComputeAll(const MultiChannelFrameSpectra& spectra,
                    int threads = 1) const;

 private:
  ArrayGeometry geom_;
  AngularGrid grid_;
  size_t fft_size_;
  int sample_rate_hz_;
  size_t first_bin_ = 0;
  size_t last_bin_ = 0;  // inclusive
  // conj(a_m[theta_l, k]) laid out as [l][m][k - first_bin_].
  std::vector<std::complex<double>> conj_steering_;
};

// Which term of the first-order recursive smoother carries alpha.
//   kAlphaOnPrevious: s~[n] = (1 - alpha) s[n] + alpha s~[n-1]
//   kAlphaOnCurrent:  s~[n] = alpha s[n] + (1 - alpha) s~[n-1]
enum class SmoothingOrientation { kAlphaOnPrevious, kAlphaOnCurrent };

struct SmoothingConfig {
  double alpha = 0.9;
  double floor = 1e-6;
  SmoothingOrientation orientation = SmoothingOrientation::kAlphaOnCurrent;
};

// Recursive smoothing (s~[0] = s[0]) followed by flooring at cfg.floor and
// renormalization. Each output row sums to 1. Requires 0 <= alpha < 1.
Matrix SmoothAndNormalize(const Matrix& raw, const SmoothingConfig& cfg);

// Rescales a nonnegative vector to sum 1 after flooring every entry at
// `floor`; an all-zero vector becomes uniform.
void FloorAndNormalize(std::span<double> values, double floor);

}  // namespace sdiar

#endif  // SDIAR_DIRECTIONAL_H_
