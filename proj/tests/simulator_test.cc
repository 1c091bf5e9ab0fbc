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

#include "sdiar/simulator.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sdiar/common.h"
#include "sdiar/directional.h"
#include "sdiar/stft.h"

namespace sdiar {
namespace {

double Distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

SceneSpec SingleSource(Point2 source, const SceneDevice& device, double duration = 3.0) {
  SceneSpec spec;
  spec.duration_s = duration;
  spec.snr_db = 40.0;
  spec.sources.push_back({source, SourceSignal::kNoise, ""});
  spec.devices.push_back(device);
  spec.turns.push_back({0.0, duration, 0});
  return spec;
}

// Delay of mic 2 behind mic 1 from the frame-averaged PHAT cross-spectrum,
// found by a 0.01-sample search over +-12 samples.
double MeasuredTdoa(const DeviceRecording& rec) {
  const auto cfg = StftConfig::ForRate(rec.sample_rate_hz);
  const auto spectra = Stft(rec, cfg);
  std::vector<std::complex<double>> cross(spectra.bins());
  for (size_t f = 0; f < spectra.frames(); ++f) {
    const auto x1 = spectra.spectrum(f, 0);
    const auto x2 = spectra.spectrum(f, 1);
    for (size_t k = 1; k < spectra.bins(); ++k) {
      const auto c = x2[k] * std::conj(x1[k]);
      if (std::abs(c) > 0.0) cross[k] += c / std::abs(c);
    }
  }
  const double n = static_cast<double>(cfg.fft_size);
  double best = 0.0, best_score = -1e300;
  for (int i = -1200; i <= 1200; ++i) {
    const double tau = i * 0.01;
    double score = 0.0;
    for (size_t k = 1; k < spectra.bins(); ++k) {
      score += std::real(cross[k] * std::polar(1.0, 2.0 * std::numbers::pi * k * tau / n));
    }
    if (score > best_score) {
      best_score = score;
      best = tau;
    }
  }
  return best;
}

TEST(GeometryTest, MicPositionsFollowOrientation) {
  SceneDevice d;
  d.position = {1.0, 2.0};
  d.orientation_deg = 90.0;
  d.mic_spacing_m = 0.2;
  const auto [m1, m2] = MicPositions(d);
  EXPECT_NEAR(m1.x, 1.0, 1e-12);
  EXPECT_NEAR(m1.y, 2.1, 1e-12);
  EXPECT_NEAR(m2.y, 1.9, 1e-12);
  EXPECT_NEAR(DeviceRelativeAngleDeg(d, {1.0, 5.0}), 0.0, 1e-9);
  EXPECT_NEAR(DeviceRelativeAngleDeg(d, {1.0, -5.0}), 180.0, 1e-9);
  EXPECT_NEAR(DeviceRelativeAngleDeg(d, {4.0, 2.0}), 90.0, 1e-9);
}

TEST(GeometryTest, FarFieldDelayMatchesArrayConvention) {
  SceneDevice d;
  d.orientation_deg = 30.0;
  const Point2 src = {2.0 * std::cos(1.2), 2.0 * std::sin(1.2)};
  const double theta = DeviceRelativeAngleDeg(d, src);
  const auto geom = ArrayGeometry::TwoMic(d.mic_spacing_m);
  EXPECT_NEAR(FarFieldTdoaSamples(d, src, 343.0, 16000),
              geom.TdoaSamples(1, theta, 16000) - geom.TdoaSamples(0, theta, 16000), 1e-9);
}

TEST(RenderTest, EquidistantSourceHasNoDelayAndPeaksBroadside) {
  SceneDevice d;
  const auto scene = Render(SingleSource({0.0, 1.5}, d), 1);
  ASSERT_EQ(scene.recordings.size(), 1u);
  EXPECT_NEAR(MeasuredTdoa(scene.recordings[0]), 0.0, 0.1);

  const auto cfg = StftConfig::ForRate(16000);
  const auto spectra = Stft(scene.recordings[0], cfg);
  SrpPhat srp(ArrayGeometry::TwoMic(0.16), AngularGrid::Uniform(2.0), cfg.fft_size, 16000);
  const Matrix raw = srp.ComputeAll(spectra);
  size_t hits = 0;
  for (size_t f = 0; f < raw.rows(); ++f) {
    const auto row = raw.row(f);
    if (std::max_element(row.begin(), row.end()) - row.begin() == 45) ++hits;
  }
  EXPECT_GE(hits, raw.rows() * 95 / 100);
}

TEST(RenderTest, RenderedDelayMatchesGeometry) {
  for (int i = 0; i < 10; ++i) {
    SceneDevice d;
    d.orientation_deg = 17.0 * i;
    const double phi = 0.3 + 0.6 * i;
    const Point2 src = {1.5 * std::cos(phi), 1.5 * std::sin(phi)};
    const auto scene = Render(SingleSource(src, d), 100 + i);
    const auto [m1, m2] = MicPositions(d);
    const double exact = (Distance(src, m2) - Distance(src, m1)) / 343.0 * 16000.0;
    EXPECT_NEAR(MeasuredTdoa(scene.recordings[0]), exact, 0.25) << "scene " << i;
  }
}

TEST(RenderTest, SameSeedIsBitIdentical) {
  const SceneSpec spec = MakeMeetingScene({.duration_s = 6.0}, 5);
  const auto a = Render(spec, 5);
  const auto b = Render(spec, 5);
  const auto c = Render(spec, 6);
  ASSERT_EQ(a.recordings.size(), b.recordings.size());
  for (size_t p = 0; p < a.recordings.size(); ++p) {
    EXPECT_EQ(a.recordings[p].channels, b.recordings[p].channels);
  }
  EXPECT_NE(a.recordings[0].channels, c.recordings[0].channels);
}

TEST(RenderTest, OutputShapeAndReference) {
  const SceneSpec spec = MakeMeetingScene({.duration_s = 8.0}, 3);
  const auto scene = Render(spec, 3);
  ASSERT_EQ(scene.recordings.size(), 3u);
  for (size_t p = 0; p < 3; ++p) {
    const auto& r = scene.recordings[p];
    EXPECT_EQ(r.device_id, static_cast<int>(p + 1));
    EXPECT_EQ(r.num_channels(), 2u);
    EXPECT_EQ(r.num_samples(), 8u * 16000u);
  }
  ASSERT_EQ(scene.reference.size(), spec.turns.size());
  for (size_t i = 0; i < spec.turns.size(); ++i) {
    EXPECT_EQ(scene.reference[i].label, "S" + std::to_string(spec.turns[i].source + 1));
    EXPECT_EQ(scene.reference[i].start_s, spec.turns[i].start_s);
  }
}

TEST(RenderTest, ClapLandsAtTheDeviceClockTime) {
  SceneDevice d;
  d.clock_offset_s = 0.25;
  SceneSpec spec = SingleSource({0.0, 1.5}, d, 3.0);
  spec.turns.clear();
  spec.clap_time_s = 1.0;
  const auto scene = Render(spec, 2);
  const auto& x = scene.recordings[0].channels[0];
  const size_t peak = std::max_element(x.begin(), x.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); }) -
                      x.begin();
  EXPECT_GE(peak, 1.25 * 16000);
  EXPECT_LT(peak, 1.25 * 16000 + 0.005 * 16000);
}

TEST(RenderTest, SnrIsHonored) {
  SceneDevice d;
  SceneSpec spec = SingleSource({0.0, 1.5}, d, 4.0);
  spec.snr_db = 10.0;
  const auto noisy = Render(spec, 8);
  spec.snr_db = 200.0;
  const auto clean = Render(spec, 8);
  double ps = 0.0, pn = 0.0;
  const auto& y = noisy.recordings[0].channels[0];
  const auto& s = clean.recordings[0].channels[0];
  for (size_t t = 0; t < y.size(); ++t) {
    ps += s[t] * s[t];
    pn += (y[t] - s[t]) * (y[t] - s[t]);
  }
  EXPECT_NEAR(10.0 * std::log10(ps / pn), 10.0, 0.2);
}

TEST(SceneSpecTest, ValidationRejectsBadScenes) {
  SceneDevice d;
  const SceneSpec good = SingleSource({0.0, 1.5}, d);
  EXPECT_NO_THROW(good.Validate());
  auto bad = good;
  bad.turns.push_back({1.0, 5.0, 0});
  EXPECT_THROW(bad.Validate(), InputError);
  bad = good;
  bad.turns[0].source = 3;
  EXPECT_THROW(bad.Validate(), InputError);
  bad = good;
  bad.devices.push_back(d);
  EXPECT_THROW(bad.Validate(), InputError);
  bad = good;
  bad.sources[0].position = {0.0, 0.02};
  EXPECT_THROW(bad.Validate(), InputError);
  bad = good;
  bad.clap_time_s = 10.0;
  EXPECT_THROW(bad.Validate(), InputError);
  bad = good;
  bad.sources.clear();
  EXPECT_THROW(bad.Validate(), InputError);
}

TEST(SceneSpecTest, JsonRoundTrip) {
  const SceneSpec spec = MakeMeetingScene({.duration_s = 20.0}, 9);
  const std::string text = SceneToJson(spec);
  const SceneSpec back = SceneFromJson(text);
  EXPECT_EQ(SceneToJson(back), text);
  ASSERT_EQ(back.devices.size(), spec.devices.size());
  EXPECT_EQ(back.devices[1].clock_offset_s, spec.devices[1].clock_offset_s);
  EXPECT_EQ(back.turns.size(), spec.turns.size());
  EXPECT_THROW(SceneFromJson("{\"sources\": 3}"), InputError);
  EXPECT_THROW(SceneFromJson("not json"), InputError);
}

TEST(MeetingSceneTest, LayoutAndTurnsAreWellFormed) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec spec = MakeMeetingScene({}, seed);
    EXPECT_NO_THROW(spec.Validate());
    ASSERT_EQ(spec.sources.size(), 3u);
    ASSERT_EQ(spec.devices.size(), 3u);
    EXPECT_EQ(spec.devices[0].clock_offset_s, 0.0);
    for (const auto& d : spec.devices) {
      EXPECT_LE(std::abs(d.clock_offset_s), 0.15);
      EXPECT_EQ(d.mic_spacing_m, 0.16);
    }
    for (const auto& s : spec.sources) {
      EXPECT_NEAR(std::hypot(s.position.x, s.position.y), 1.4, 0.1 + 1e-12);
    }
    ASSERT_FALSE(spec.turns.empty());
    EXPECT_EQ(spec.turns.front().start_s, 2.0);
    EXPECT_EQ(spec.turns.back().end_s, 120.0);
    for (size_t i = 1; i < spec.turns.size(); ++i) {
      EXPECT_EQ(spec.turns[i].start_s, spec.turns[i - 1].end_s);
      EXPECT_NE(spec.turns[i].source, spec.turns[i - 1].source);
      if (i + 1 < spec.turns.size()) {
        EXPECT_GE(spec.turns[i].end_s - spec.turns[i].start_s, 3.0 - 1e-12);
        EXPECT_LE(spec.turns[i].end_s - spec.turns[i].start_s, 8.0 + 1e-12);
      }
    }
    EXPECT_EQ(SceneToJson(spec), SceneToJson(MakeMeetingScene({}, seed)));
  }
}

}  // namespace
}  // namespace sdiar
