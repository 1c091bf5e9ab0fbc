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

// Coarse cross-device synchronization on a shared impulsive event (a tap or
// clap). Sample-rate drift is not compensated.

#ifndef SDIAR_ALIGNMENT_H_
#define SDIAR_ALIGNMENT_H_

#include <cstdint>
#include <vector>

#include "sdiar/audio.h"

namespace sdiar {

enum class AlignMode { kAcousticEvent, kFixedOffsets, kNone };

struct EventDetectorConfig {
  double short_window_s = 0.005;
  double history_s = 0.100;
  double threshold_db = 20.0;
  double search_start_s = 0.0;
  double search_end_s = 10.0;
};

// Sample index of the first impulsive onset in the search window. The
// detection statistic is the mean power of the channel-averaged signal over
// the next short window divided by the mean power over the preceding history.
// The first crossing of the threshold opens a candidate; within one short
// window the maximal ratio wins (earliest on ties) and the onset is the first
// sample after it whose power reaches 10% of the local peak. Throws
// InputError("no event detected") if the ratio never crosses the threshold.
int64_t DetectEvent(const DeviceRecording& rec, const EventDetectorConfig& cfg = {});

struct AlignmentResult {
  AlignMode method = AlignMode::kNone;
  // Sample lag of each device relative to device 0: an event at sample i of
  // device 0 appears at sample i + offsets_samples[p] of device p.
  std::vector<int64_t> offsets_samples;
  std::vector<int64_t> event_samples;  // detected indices (event mode only)
  // Common span in device-0 sample indices.
  int64_t common_start = 0;
  int64_t common_length = 0;
  int sample_rate_hz = 0;

  double origin_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(common_start) / sample_rate_hz : 0.0;
  }
};

// All recordings must share one sample rate. For kFixedOffsets, each entry of
// fixed_offsets_s is a device clock offset (an event at time T on device 0
// appears at T + o_p - o_0 on device p). Throws InputError when detection
// fails or the common span is shorter than min_overlap_s.
AlignmentResult Align(const std::vector<DeviceRecording>& recs, AlignMode mode,
                      const EventDetectorConfig& detector = {},
                      const std::vector<double>& fixed_offsets_s = {},
                      double min_overlap_s = 1.0);

// Trims every recording to the common span. start_offset_samples of each
// output records where the span begins in that device's input.
std::vector<DeviceRecording> ApplyAlignment(const std::vector<DeviceRecording>& recs,
                                            const AlignmentResult& alignment);

}  // namespace sdiar

#endif  // SDIAR_ALIGNMENT_H_
