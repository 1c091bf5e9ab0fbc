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

// Anechoic multi-device meeting simulator used as ground truth.
//
// Sources and two-microphone devices sit on a plane. Every active source
// reaches every microphone with its free-field delay (windowed-sinc
// fractional delay) and 1/r attenuation. Each device adds independent white
// noise at the requested SNR and sees the scene through its own clock: an
// event at scene time T lands at T + clock_offset_s in that device's file.

#ifndef SDIAR_SIMULATOR_H_
#define SDIAR_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdiar/audio.h"
#include "sdiar/diarization.h"

namespace sdiar {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class SourceSignal {
  kModulatedNoise,  // band-limited noise with a syllable-rate envelope
  kNoise,           // stationary band-limited noise
  kWav,             // first channel of a WAV file, looped
};

struct SceneSource {
  Point2 position;
  SourceSignal signal = SourceSignal::kModulatedNoise;
  std::string wav_path;
};

struct SceneDevice {
  Point2 position;
  double orientation_deg = 0.0;  // direction from microphone 2 to microphone 1
  double mic_spacing_m = 0.16;
  double clock_offset_s = 0.0;
};

struct Turn {
  double start_s = 0.0;
  double end_s = 0.0;
  size_t source = 0;  // index into sources
};

struct SceneSpec {
  int sample_rate_hz = 16000;
  double duration_s = 10.0;
  double speed_of_sound_mps = 343.0;
  double snr_db = 20.0;
  std::vector<SceneSource> sources;
  std::vector<SceneDevice> devices;
  std::vector<Turn> turns;
  std::optional<double> clap_time_s;
  double clap_level_db = 30.0;  // burst power above the noise floor

  void Validate() const;
};

struct RenderedScene {
  std::vector<DeviceRecording> recordings;
  std::vector<LabeledSegment> reference;  // labels "S1", "S2", ...
};

RenderedScene Render(const SceneSpec& spec, uint64_t seed);

// Positions of microphone 1 and 2 of a device.
std::pair<Point2, Point2> MicPositions(const SceneDevice& device);

// Angle in [0, 180] between the device axis and the direction to `target`,
// in the convention used by ArrayGeometry::TwoMic.
double DeviceRelativeAngleDeg(const SceneDevice& device, Point2 target);

// Far-field delay of microphone 2 relative to microphone 1, in samples.
double FarFieldTdoaSamples(const SceneDevice& device, Point2 source,
                           double speed_of_sound, int sample_rate_hz);

struct MeetingOptions {
  size_t num_sources = 3;
  size_t num_devices = 3;
  double duration_s = 120.0;
  double snr_db = 20.0;
  double max_clock_offset_s = 0.15;
  double clap_time_s = 1.0;
  double clap_level_db = 30.0;
  double speech_start_s = 2.0;
  double min_turn_s = 3.0;
  double max_turn_s = 8.0;
  double source_radius_m = 1.4;
  double device_spread_m = 0.4;
  double mic_spacing_m = 0.16;
  int sample_rate_hz = 16000;
};

// Table-top meeting: sources evenly spaced on a circle (jittered), devices
// scattered near the center with random orientations, device 1 on the
// reference clock, back-to-back non-overlapping turns with speaker changes.
SceneSpec MakeMeetingScene(const MeetingOptions& opts, uint64_t seed);

// JSON scene file.
std::string SceneToJson(const SceneSpec& spec);
SceneSpec SceneFromJson(const std::string& text);

}  // namespace sdiar

#endif  // SDIAR_SIMULATOR_H_
