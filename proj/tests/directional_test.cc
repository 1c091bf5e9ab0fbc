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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sdiar/stft.h"

namespace sdiar {
namespace {

constexpr int kRate = 16000;

std::vector<double> WhiteNoise(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

// y(t) = x(t - delay) using a long Hann-windowed sinc.
std::vector<double> Delay(const std::vector<double>& x, double delay) {
  constexpr int kHalf = 128;
  std::vector<double> y(x.size(), 0.0);
  for (size_t t = 0; t < x.size(); ++t) {
    const double center = static_cast<double>(t) - delay;
    const auto base = static_cast<long>(std::floor(center));
    double acc = 0.0;
    for (long i = base - kHalf + 1; i <= base + kHalf; ++i) {
      if (i < 0 || i >= static_cast<long>(x.size())) continue;
      const double u = center - static_cast<double>(i);
      const double sinc = std::abs(u) < 1e-12 ? 1.0 : std::sin(M_PI * u) / (M_PI * u);
      const double win = 0.5 + 0.5 * std::cos(M_PI * u / kHalf);
      acc += x[i] * sinc * win;
    }
    y[t] = acc;
  }
  return y;
}

DeviceRecording TwoChannel(const std::vector<double>& x, double delay) {
  DeviceRecording rec;
  rec.sample_rate_hz = kRate;
  rec.channels = {x, Delay(x, delay)};
  return rec;
}

SrpPhat DefaultSrp(SrpBand band = {}) {
  return SrpPhat(ArrayGeometry::TwoMic(0.16), AngularGrid::Uniform(4.0), 1024, kRate, band);
}

TEST(GeometryTest, TwoMicDelays) {
  const auto g = ArrayGeometry::TwoMic(0.16);
  EXPECT_NEAR(g.TdoaSamples(1, 0.0, kRate), 7.463556851311953, 1e-12);
  EXPECT_NEAR(g.TdoaSamples(1, 180.0, kRate), -7.463556851311953, 1e-12);
  EXPECT_NEAR(g.TdoaSamples(1, 90.0, kRate), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.MaxSpacing(), 0.16);
  EXPECT_THROW(ArrayGeometry::TwoMic(0.0), InputError);
}

TEST(GeometryTest, UniformGridHasFortySixPoints) {
  const auto grid = AngularGrid::Uniform(4.0);
  ASSERT_EQ(grid.size(), 46u);
  EXPECT_DOUBLE_EQ(grid.angles_deg.front(), 0.0);
  EXPECT_DOUBLE_EQ(grid.angles_deg.back(), 180.0);
  EXPECT_EQ(AngularGrid::Uniform(1.0).size(), 181u);
  EXPECT_THROW(AngularGrid::Uniform(0.0), InputError);
}

TEST(SteeringTest, BroadsideAndDcAreAllOnes) {
  const auto g = ArrayGeometry::TwoMic(0.16);
  for (size_t k : {0u, 1u, 100u, 512u}) {
    for (const auto& v : SteeringVector(g, 90.0, k, 1024, kRate)) {
      EXPECT_NEAR(std::abs(v - std::complex<double>(1.0, 0.0)), 0.0, 1e-12);
    }
  }
  for (double theta : {0.0, 33.0, 180.0}) {
    for (const auto& v : SteeringVector(g, theta, 0, 1024, kRate)) {
      EXPECT_EQ(v, std::complex<double>(1.0, 0.0));
    }
  }
}

TEST(SteeringTest, EndfirePhase) {
  const auto a = SteeringVector(ArrayGeometry::TwoMic(0.16), 0.0, 100, 1024, kRate);
  EXPECT_EQ(a[0], std::complex<double>(1.0, 0.0));
  const double want = -2.0 * M_PI * 100.0 * (0.16 * kRate / 343.0) / 1024.0;
  EXPECT_NEAR(want, -4.579581127681914, 1e-12);
  EXPECT_NEAR(std::arg(a[1] * std::polar(1.0, -want)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(a[1]), 1.0, 1e-15);
}

TEST(PhatTest, NormalizesAndGuards) {
  const auto v = PhatWeight({3.0, 4.0});
  EXPECT_NEAR(v.real(), 0.6, 1e-15);
  EXPECT_NEAR(v.imag(), 0.8, 1e-15);
  EXPECT_EQ(PhatWeight({0.0, 0.0}), std::complex<double>(0.0, 0.0));
  EXPECT_EQ(PhatWeight({1e-13, 0.0}), std::complex<double>(0.0, 0.0));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<std::complex<double>> x(200);
  for (auto& c : x) c = {g(rng), g(rng)};
  x[17] = 0.0;
  for (const auto& c : PhatFilter(x)) {
    const double m = std::abs(c);
    EXPECT_TRUE(std::abs(m) < 1e-12 || std::abs(m - 1.0) < 1e-12);
  }
}

TEST(SrpTest, SilentFrameIsFlat) {
  const auto srp = DefaultSrp();
  std::vector<std::complex<double>> zeros(513);
  std::vector<std::span<const std::complex<double>>> mics = {zeros, zeros};
  std::vector<double> out(srp.num_angles(), -1.0);
  srp.Compute(mics, out);
  for (double v : out) EXPECT_EQ(v, out.front());
}

TEST(SrpTest, BandLimits) {
  const auto srp = DefaultSrp();
  EXPECT_EQ(srp.first_bin(), 20u);  // 300 Hz at 15.625 Hz per bin
  EXPECT_EQ(srp.last_bin(), 512u);
  SrpBand full;
  full.full_band = true;
  EXPECT_EQ(DefaultSrp(full).first_bin(), 0u);
}

TEST(SrpTest, BroadsideSourcePeaksAtNinety) {
  const auto rec = TwoChannel(WhiteNoise(8192, 1), 0.0);
  // A 4 degree grid has no point at 90, so use 2 degrees.
  const SrpPhat srp(ArrayGeometry::TwoMic(0.16), AngularGrid::Uniform(2.0), 1024, kRate);
  const auto raw = srp.ComputeAll(Stft(rec, StftConfig::ForRate(kRate)));
  for (size_t n = 0; n < raw.rows(); ++n) EXPECT_EQ(ArgMax(raw.row(n)), 45u);
}

TEST(SrpTest, ResponseIsNonNegativeAndBoundedByCoherentSum) {
  const auto rec = TwoChannel(WhiteNoise(8192, 2), 3.3);
  const auto srp = DefaultSrp();
  const auto raw = srp.ComputeAll(Stft(rec, StftConfig::ForRate(kRate)));
  const double bins = static_cast<double>(srp.last_bin() - srp.first_bin() + 1);
  for (double v : raw.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 4.0 * bins + 1e-9);
  }
}

TEST(SrpTest, ShiftCovariance) {
  const auto x = WhiteNoise(16384, 3);
  const auto geom = ArrayGeometry::TwoMic(0.16);
  const auto srp = DefaultSrp();
  for (double theta : {12.0, 48.0, 90.0, 124.0, 168.0}) {
    const auto rec = TwoChannel(x, geom.TdoaSamples(1, theta, kRate));
    const auto raw = srp.ComputeAll(Stft(rec, StftConfig::ForRate(kRate)));
    for (size_t n = 1; n + 1 < raw.rows(); ++n) {
      EXPECT_NEAR(4.0 * static_cast<double>(ArgMax(raw.row(n))), theta, 4.0 + 1e-9)
          << "theta " << theta << " frame " << n;
    }
  }
}

TEST(SrpTest, InvariantToSignalScaling) {
  auto rec = TwoChannel(WhiteNoise(8192, 4), 2.0);
  const auto srp = DefaultSrp();
  const auto cfg = StftConfig::ForRate(kRate);
  const auto a = srp.ComputeAll(Stft(rec, cfg));
  for (auto& ch : rec.channels) {
    for (double& v : ch) v *= 10.0;
  }
  const auto b = srp.ComputeAll(Stft(rec, cfg));
  for (size_t i = 0; i < a.data().size(); ++i) {
    EXPECT_NEAR(b.data()[i], a.data()[i], 1e-6 * a.data()[i]);
  }
}

TEST(SrpTest, ThreadCountDoesNotChangeOutput) {
  const auto rec = TwoChannel(WhiteNoise(16384, 5), -4.0);
  const auto spectra = Stft(rec, StftConfig::ForRate(kRate));
  const auto srp = DefaultSrp();
  EXPECT_EQ(srp.ComputeAll(spectra, 1), srp.ComputeAll(spectra, 3));
}

std::vector<double> Normalized(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

TEST(SmoothingTest, DefaultWeightsTheCurrentFrame) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> w = {4.0, 1.0, 1.0, 2.0};
  Matrix raw(2, 4);
  std::copy(v.begin(), v.end(), raw.row(0).begin());
  std::copy(w.begin(), w.end(), raw.row(1).begin());
  const auto out = SmoothAndNormalize(raw, SmoothingConfig{});
  std::vector<double> mix(4);
  for (size_t l = 0; l < 4; ++l) mix[l] = 0.9 * w[l] + 0.1 * v[l];
  const auto want1 = Normalized(mix);
  const auto want0 = Normalized(v);
  for (size_t l = 0; l < 4; ++l) {
    EXPECT_NEAR(out(0, l), want0[l], 1e-15);
    EXPECT_NEAR(out(1, l), want1[l], 1e-15);
  }
}

TEST(SmoothingTest, AlphaOnPreviousTwoFrames) {
  Matrix raw(2, 3);
  raw(0, 0) = 1.0, raw(0, 1) = 1.0, raw(0, 2) = 2.0;
  raw(1, 0) = 3.0, raw(1, 1) = 0.0, raw(1, 2) = 1.0;
  SmoothingConfig cfg;
  cfg.orientation = SmoothingOrientation::kAlphaOnPrevious;
  const auto out = SmoothAndNormalize(raw, cfg);
  const auto want = Normalized({0.1 * 3.0 + 0.9 * 1.0, 0.1 * 0.0 + 0.9 * 1.0, 0.1 + 0.9 * 2.0});
  for (size_t l = 0; l < 3; ++l) EXPECT_NEAR(out(1, l), want[l], 1e-15);
}

TEST(SmoothingTest, ConstantInputIsAFixedPoint) {
  Matrix raw(20, 5);
  for (size_t n = 0; n < 20; ++n) {
    for (size_t l = 0; l < 5; ++l) raw(n, l) = 1.0 + static_cast<double>(l);
  }
  for (auto orient : {SmoothingOrientation::kAlphaOnCurrent, SmoothingOrientation::kAlphaOnPrevious}) {
    SmoothingConfig cfg;
    cfg.orientation = orient;
    const auto out = SmoothAndNormalize(raw, cfg);
    for (size_t n = 0; n < 20; ++n) {
      for (size_t l = 0; l < 5; ++l) EXPECT_NEAR(out(n, l), (1.0 + l) / 15.0, 1e-14);
    }
  }
}

TEST(SmoothingTest, AlphaNearOneOnCurrentApproachesNoSmoothing) {
  Matrix raw(3, 2);
  raw(0, 0) = 1.0, raw(0, 1) = 0.0;
  raw(1, 0) = 0.0, raw(1, 1) = 1.0;
  raw(2, 0) = 1.0, raw(2, 1) = 3.0;
  SmoothingConfig cfg;
  cfg.orientation = SmoothingOrientation::kAlphaOnCurrent;
  cfg.alpha = 1.0 - 1e-9;
  const auto out = SmoothAndNormalize(raw, cfg);
  EXPECT_NEAR(out(1, 1), 1.0 - 1e-6, 1e-8);
  EXPECT_NEAR(out(2, 1), 0.75, 1e-8);
}

TEST(SmoothingTest, RejectsAlphaOutsideRange) {
  Matrix raw(2, 2, 1.0);
  SmoothingConfig cfg;
  cfg.alpha = 1.0;
  EXPECT_THROW(SmoothAndNormalize(raw, cfg), InputError);
  cfg.alpha = -0.1;
  EXPECT_THROW(SmoothAndNormalize(raw, cfg), InputError);
}

TEST(SmoothingTest, OutputsArePmfsAboveFloor) {
  std::mt19937_64 rng(6);
  std::exponential_distribution<double> e(1.0);
  Matrix raw(200, 46);
  for (double& v : raw.data()) v = std::pow(e(rng), 8.0);
  for (size_t l = 0; l < 46; ++l) raw(7, l) = 0.0;
  raw(9, 3) = 1e9;
  const double floor = 1e-6;
  const auto out = SmoothAndNormalize(raw, {0.9, floor, SmoothingOrientation::kAlphaOnCurrent});
  for (size_t n = 0; n < out.rows(); ++n) {
    double sum = 0.0;
    for (double v : out.row(n)) {
      EXPECT_GE(v, floor);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(SmoothingTest, FloorAndNormalizeEdgeCases) {
  std::vector<double> zeros(4, 0.0);
  FloorAndNormalize(zeros, 1e-6);
  for (double v : zeros) EXPECT_DOUBLE_EQ(v, 0.25);

  std::vector<double> spike = {1.0, 0.0, 0.0, 0.0};
  FloorAndNormalize(spike, 1e-3);
  EXPECT_DOUBLE_EQ(spike[1], 1e-3);
  EXPECT_NEAR(spike[0], 1.0 - 3e-3, 1e-15);

  std::vector<double> tiny(10, 1.0);
  EXPECT_THROW(FloorAndNormalize(tiny, 0.2), InputError);
}

}  // namespace
}  // namespace sdiar
