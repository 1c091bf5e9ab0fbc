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

// Diarization error rate with md-eval semantics: a no-score collar around
// every reference boundary, a one-to-one speaker mapping that maximizes
// matched time, and overlapped reference speech scored per speaker.

#ifndef SDIAR_SCORING_H_
#define SDIAR_SCORING_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdiar/diarization.h"

namespace sdiar {

enum class MappingSolver { kAuto, kExhaustive, kHungarian };

struct ScoreOptions {
  double collar_s = 0.25;
  // Scored span; defaults to [earliest reference start, latest reference end].
  std::optional<std::pair<double, double>> uem;
  MappingSolver solver = MappingSolver::kAuto;  // exhaustive up to 6 speakers
};

struct DerResult {
  double der = 0.0;
  double miss = 0.0;
  double false_alarm = 0.0;
  double speaker_error = 0.0;
  double miss_s = 0.0;
  double false_alarm_s = 0.0;
  double speaker_error_s = 0.0;
  double scored_speech_s = 0.0;  // reference speaker time inside scored region
  double scored_time_s = 0.0;    // wall-clock time inside scored region
  std::map<std::string, std::string> mapping;  // hypothesis -> reference

  double error_s() const { return miss_s + false_alarm_s + speaker_error_s; }
};

DerResult ScoreDer(const std::vector<LabeledSegment>& reference,
                   const std::vector<LabeledSegment>& hypothesis,
                   const ScoreOptions& opts = {});

// Assignment of rows to columns maximizing the summed weight. Returns, for
// each row, the matched column or -1. Exposed for testing.
std::vector<int> MaxWeightAssignment(const std::vector<std::vector<double>>& weight,
                                     MappingSolver solver = MappingSolver::kAuto);

struct OracleLabeling {
  std::vector<int> labels;            // 1-based indices into speakers
  std::vector<std::string> speakers;  // by first appearance in the reference
};

// Single-speaker-per-frame labels from the reference: the speaker active at
// the frame center, or the previous frame's label when zero or several
// speakers are active. Frames before any label exists take the speaker of the
// earliest reference segment.
OracleLabeling OracleLabels(const std::vector<LabeledSegment>& reference,
                            const std::vector<double>& frame_times_s);

}  // namespace sdiar

#endif  // SDIAR_SCORING_H_
