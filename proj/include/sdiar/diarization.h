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

#ifndef SDIAR_DIARIZATION_H_
#define SDIAR_DIARIZATION_H_

#include <string>
#include <vector>

#include "sdiar/common.h"

namespace sdiar {

// A labeled time interval [start_s, end_s).
struct LabeledSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string label;

  bool operator==(const LabeledSegment&) const = default;
};

struct SpeakerSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  int speaker = 0;  // 1-based

  bool operator==(const SpeakerSegment&) const = default;
};

struct Diarization {
  std::vector<int> frame_labels;  // 1..S; 0 marks a gated (unlabeled) frame
  std::vector<SpeakerSegment> segments;
};

// Max rule over each row of gamma; ties go to the lower index. 1-based.
std::vector<int> LabelFrames(const Matrix& gamma);

// Frame n owns [b_n, b_n+1) where b_0 = t_0 - frame_len/2, interior edges are
// midpoints between consecutive centers and the last edge is
// t_N-1 + frame_len/2. Maximal runs of equal labels become segments; runs
// shorter than min_dur_s are absorbed by their longer neighbor (ties: the
// earlier one) until none remain. Label 0 produces no segment.
std::vector<SpeakerSegment> SegmentsFromLabels(const std::vector<int>& labels,
                                               const std::vector<double>& frame_times_s,
                                               double frame_len_s,
                                               double min_dur_s = 0.0);

// RTTM text, one SPEAKER line per segment with times at 3 decimals.
std::string WriteRttm(const std::vector<SpeakerSegment>& segments,
                      const std::string& recording_id);

// Parses SPEAKER lines of an RTTM file; other record types are skipped.
std::vector<LabeledSegment> ParseRttm(const std::string& text);

// Parses "start,end,label" lines; a non-numeric first line is a header.
std::vector<LabeledSegment> ParseSegmentCsv(const std::string& text);

// Reads a reference file, choosing RTTM or CSV by content.
std::vector<LabeledSegment> ReadSegmentsFile(const std::string& path);

// Hypothesis segments as labeled segments named "spk<k>".
std::vector<LabeledSegment> ToLabeled(const std::vector<SpeakerSegment>& segments);

// Inverse of ToLabeled; throws InputError for labels not of the form spk<k>.
std::vector<SpeakerSegment> FromLabeled(const std::vector<LabeledSegment>& segments);

}  // namespace sdiar

#endif  // SDIAR_DIARIZATION_H_
