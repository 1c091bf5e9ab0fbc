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

// End-to-end diarization: align, directional features, mixture fit, labels.

#ifndef SDIAR_PIPELINE_H_
#define SDIAR_PIPELINE_H_

#include <string>
#include <vector>

#include "sdiar/alignment.h"
#include "sdiar/audio.h"
#include "sdiar/diarization.h"
#include "sdiar/directional.h"
#include "sdiar/dmm.h"
#include "sdiar/scoring.h"

namespace sdiar {

struct PipelineConfig {
  int sample_rate_hz = 16000;
  double frame_ms = 64.0;
  double hop_fraction = 0.5;
  double grid_step_deg = 4.0;
  double mic_spacing_m = 0.16;
  double speed_of_sound_mps = 343.0;
  SrpBand band;
  SmoothingConfig smoothing;  // alpha 0.9 on the current frame, floor 1e-6

  size_t num_sources = 0;  // required
  FitOptions fit;          // 100 iterations, tol 1e-6, seed 0, peak k-means

  double min_duration_s = 0.0;
  // Frames whose energy is more than silence_gate_db below the loudest 5% are
  // left unlabeled. Off by default.
  bool silence_gate = false;
  double silence_gate_db = 30.0;

  double collar_s = 0.25;
  AlignMode align = AlignMode::kAcousticEvent;
  EventDetectorConfig detector;
  std::vector<double> fixed_offsets_s;

  int threads = 1;

  void Validate() const;
  std::string ToJson() const;
  // Applies the keys present in `text` on top of `base`.
  static PipelineConfig FromJson(const std::string& text,
                                 const PipelineConfig& base);
  static PipelineConfig FromJson(const std::string& text);
};

struct PipelineResult {
  AlignmentResult alignment;
  std::vector<Matrix> raw_srp;  // per device, frames x angles
  FeatureSet features;          // smoothed, normalized
  std::vector<double> frame_times_s;  // on the device-1 timeline
  double frame_len_s = 0.0;
  std::vector<double> grid_deg;
  FitReport fit;
  Diarization diarization;
  std::vector<LabeledSegment> hypothesis;  // labels "spk<k>"
};

// Recordings at a rate above the configured one are resampled; lower rates
// are rejected.
PipelineResult RunPipeline(const std::vector<DeviceRecording>& recordings,
                           const PipelineConfig& config);

// Feature extraction only (align, resample, STFT, SRP, smoothing).
PipelineResult ExtractFeatures(const std::vector<DeviceRecording>& recordings,
                               const PipelineConfig& config);

// Artifact writers.
std::string PosteriorCsv(const PipelineResult& result);
std::string FeatureCsv(const PipelineResult& result, size_t device, bool raw = false);
std::string FitReportJson(const PipelineResult& result);
std::string DerJson(const DerResult& der, double collar_s);
// 8-bit binary PGM with time on the horizontal axis and 0 degrees at the top.
std::string FeaturePgm(const Matrix& features);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string Fnv1aHex(const std::string& bytes);

}  // namespace sdiar

#endif  // SDIAR_PIPELINE_H_
