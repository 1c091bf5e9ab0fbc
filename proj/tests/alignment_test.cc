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

#include "sdiar/alignment.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdiar/common.h"
#include "sdiar/simulator.h"

namespace sdiar {
namespace {

constexpr int kFs = 16000;

DeviceRecording Silence(size_t n, int id = 1) {
  DeviceRecording r;
  r.device_id = id;
  r.sample_rate_hz = kFs;
  r.channels.assign(2, std::vector<double>(n, 0.0));
  return r;
}

DeviceRecording NoiseWithClick(size_t n, size_t click_at, double noise_amp, uint64_t seed,
                               int id = 1) {
  DeviceRecording r = Silence(n, id);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise_amp);
  for (auto& ch : r.channels) {
    for (double& v : ch) v = g(rng);
  }
  // 2 ms decaying burst.
  for (size_t k = 0; k < 32 && click_at + k < n; ++k) {
    const double v = 0.5 * std::exp(-static_cast<double>(k) / 8.0) * ((k % 2) ? -1.0 : 1.0);
    r.channels[0][click_at + k] += v;
    r.channels[1][click_at + k] += v;
  }
  return r;
}

TEST(DetectEventTest, ImpulseInSilenceFloor) {
  auto r = NoiseWithClick(4 * kFs, 12345, 1e-6, 1);
  const int64_t at = DetectEvent(r);
  EXPECT_NEAR(static_cast<double>(at), 12345.0, 16.0);
}

TEST(DetectEventTest, ClickFortyDbAboveNoise) {
  const size_t click = 2 * kFs;
  auto r = NoiseWithClick(4 * kFs, click, 0.005, 2);
  const int64_t at = DetectEvent(r);
  EXPECT_LE(std::abs(static_cast<double>(at) - click), 0.010 * kFs);
}

TEST(DetectEventTest, SilenceHasNoEvent) {
  auto r = Silence(2 * kFs);
  try {
    DetectEvent(r);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("no event detected"), std::string::npos);
  }
}

TEST(DetectEventTest, StationaryNoiseHasNoEvent) {
  DeviceRecording r = Silence(3 * kFs);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.01);
  for (auto& ch : r.channels) {
    for (double& v : ch) v = g(rng);
  }
  EXPECT_THROW(DetectEvent(r), InputError);
}

TEST(DetectEventTest, EventOutsideSearchWindowIsIgnored) {
  auto r = NoiseWithClick(4 * kFs, 3 * kFs, 0.005, 3);
  EventDetectorConfig cfg;
  cfg.search_end_s = 2.0;
  EXPECT_THROW(DetectEvent(r, cfg), InputError);
}

TEST(AlignTest, RecoversKnownDelay) {
  std::vector<DeviceRecording> recs = {NoiseWithClick(5 * kFs, kFs, 0.002, 4, 1),
                                       NoiseWithClick(5 * kFs, kFs + 800, 0.002, 5, 2)};
  const auto a = Align(recs, AlignMode::kAcousticEvent);
  ASSERT_EQ(a.offsets_samples.size(), 2u);
  EXPECT_EQ(a.offsets_samples[0], 0);
  EXPECT_NEAR(static_cast<double>(a.offsets_samples[1]), 800.0, 2.0);
  EXPECT_EQ(a.common_length, static_cast<int64_t>(5 * kFs) - a.offsets_samples[1]);
}

TEST(AlignTest, NoneModeKeepsRecordingsAsIs) {
  std::vector<DeviceRecording> recs = {Silence(2 * kFs, 1), Silence(3 * kFs, 2)};
  const auto a = Align(recs, AlignMode::kNone);
  EXPECT_EQ(a.offsets_samples, (std::vector<int64_t>{0, 0}));
  EXPECT_EQ(a.common_start, 0);
  EXPECT_EQ(a.common_length, 2 * kFs);
}

TEST(AlignTest, FixedOffsetsAreRelativeToFirstDevice) {
  std::vector<DeviceRecording> recs = {Silence(3 * kFs, 1), Silence(3 * kFs, 2),
                                       Silence(3 * kFs, 3)};
  const auto a = Align(recs, AlignMode::kFixedOffsets, {}, {0.010, 0.060, -0.015});
  EXPECT_EQ(a.offsets_samples, (std::vector<int64_t>{0, 800, -400}));
  EXPECT_EQ(a.common_start, 400);
  EXPECT_EQ(a.common_length, 3 * kFs - 1200);
  EXPECT_THROW(Align(recs, AlignMode::kFixedOffsets, {}, {0.0, 0.1}), InputError);
}

TEST(AlignTest, ShortOverlapIsRejected) {
  std::vector<DeviceRecording> recs = {Silence(2 * kFs, 1), Silence(2 * kFs, 2)};
  EXPECT_THROW(Align(recs, AlignMode::kFixedOffsets, {}, {0.0, 1.5}), InputError);
}

TEST(AlignTest, MismatchedRatesAreRejected) {
  std::vector<DeviceRecording> recs = {Silence(2 * kFs, 1), Silence(2 * kFs, 2)};
  recs[1].sample_rate_hz = 8000;
  EXPECT_THROW(Align(recs, AlignMode::kNone), InputError);
}

TEST(ApplyAlignmentTest, TrimsToCommonSpanAndIsIdempotent) {
  std::vector<DeviceRecording> recs = {NoiseWithClick(5 * kFs, kFs, 0.002, 6, 1),
                                       NoiseWithClick(5 * kFs, kFs + 480, 0.002, 7, 2)};
  const auto a = Align(recs, AlignMode::kAcousticEvent);
  const auto trimmed = ApplyAlignment(recs, a);
  ASSERT_EQ(trimmed.size(), 2u);
  EXPECT_EQ(trimmed[0].num_samples(), trimmed[1].num_samples());
  EXPECT_EQ(static_cast<int64_t>(trimmed[0].num_samples()), a.common_length);
  EXPECT_EQ(trimmed[1].start_offset_samples - trimmed[0].start_offset_samples,
            a.offsets_samples[1]);
  EXPECT_EQ(trimmed[1].channels[0][0],
            recs[1].channels[0][trimmed[1].start_offset_samples]);

  // The clicks now share an index, so aligning again finds zero lag.
  const auto again = Align(trimmed, AlignMode::kAcousticEvent);
  EXPECT_NEAR(static_cast<double>(again.offsets_samples[1]), 0.0, 1.0);
}

TEST(AlignTest, SimulatedClockOffsetsWithinTenMilliseconds) {
  MeetingOptions opts;
  opts.duration_s = 12.0;
  opts.max_clock_offset_s = 0.0;
  SceneSpec spec = MakeMeetingScene(opts, 11);
  const double offsets[] = {0.0, 0.130, -0.075};
  for (size_t p = 0; p < spec.devices.size(); ++p) spec.devices[p].clock_offset_s = offsets[p];
  const auto scene = Render(spec, 11);
  const auto a = Align(scene.recordings, AlignMode::kAcousticEvent);
  for (size_t p = 1; p < spec.devices.size(); ++p) {
    const double truth = (offsets[p] - offsets[0]) * kFs;
    EXPECT_LE(std::abs(a.offsets_samples[p] - truth), 0.010 * kFs) << "device " << p;
  }
}

}  // namespace
}  // namespace sdiar
