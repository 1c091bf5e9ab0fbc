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

#include "sdiar/diarization.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdiar {
namespace {

struct Run {
  int label;
  size_t first;  // frame indices, inclusive
  size_t last;
};

std::vector<Run> RunsOf(const std::vector<int>& labels) {
  std::vector<Run> runs;
  for (size_t n = 0; n < labels.size(); ++n) {
    if (!runs.empty() && runs.back().label == labels[n]) {
      runs.back().last = n;
    } else {
      runs.push_back({labels[n], n, n});
    }
  }
  return runs;
}

bool ParseDouble(const std::string& s, double* out) {
  try {
    size_t used = 0;
    *out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<int> LabelFrames(const Matrix& gamma) {
  std::vector<int> labels(gamma.rows());
  for (size_t n = 0; n < gamma.rows(); ++n) {
    labels[n] = static_cast<int>(ArgMax(gamma.row(n))) + 1;
  }
  return labels;
}

std::vector<SpeakerSegment> SegmentsFromLabels(const std::vector<int>& labels,
                                               const std::vector<double>& frame_times_s,
                                               double frame_len_s,
                                               double min_dur_s) {
  if (labels.size() != frame_times_s.size()) {
    throw InputError("labels and frame times differ in length");
  }
  if (labels.empty()) return {};
  for (size_t n = 1; n < frame_times_s.size(); ++n) {
    if (!(frame_times_s[n] > frame_times_s[n - 1])) {
      throw InputError("frame times must be strictly increasing");
    }
  }
  const size_t frames = labels.size();
  std::vector<double> edges(frames + 1);
  edges[0] = frame_times_s.front() - 0.5 * frame_len_s;
  for (size_t n = 1; n < frames; ++n) {
    edges[n] = 0.5 * (frame_times_s[n - 1] + frame_times_s[n]);
  }
  edges[frames] = frame_times_s.back() + 0.5 * frame_len_s;

  std::vector<int> work = labels;
  if (min_dur_s > 0.0) {
    for (;;) {
      const auto runs = RunsOf(work);
      if (runs.size() < 2) break;
      size_t shortest = runs.size();
      double shortest_dur = min_dur_s;
      for (size_t r = 0; r < runs.size(); ++r) {
        const double dur = edges[runs[r].last + 1] - edges[runs[r].first];
        if (dur < shortest_dur) {
          shortest_dur = dur;
          shortest = r;
        }
      }
      if (shortest == runs.size()) break;
      auto duration = [&](size_t r) {
        return edges[runs[r].last + 1] - edges[runs[r].first];
      };
      size_t target;
      if (shortest == 0) {
        target = 1;
      } else if (shortest + 1 == runs.size()) {
        target = shortest - 1;
      } else {
        target = duration(shortest + 1) > duration(shortest - 1) ? shortest + 1
                                                                 : shortest - 1;
      }
      for (size_t n = runs[shortest].first; n <= runs[shortest].last; ++n) {
        work[n] = runs[target].label;
      }
    }
  }

  std::vector<SpeakerSegment> segments;
  for (const Run& run : RunsOf(work)) {
    if (run.label == 0) continue;
    segments.push_back({edges[run.first], edges[run.last + 1], run.label});
  }
  return segments;
}

std::string WriteRttm(const std::vector<SpeakerSegment>& segments,
                      const std::string& recording_id) {
  std::string out;
  char line[256];
  for (const auto& seg : segments) {
    std::snprintf(line, sizeof(line),
                  "SPEAKER %s 1 %.3f %.3f <NA> <NA> spk%d <NA> <NA>\n",
                  recording_id.c_str(), seg.start_s, seg.end_s - seg.start_s,
                  seg.speaker);
    out += line;
  }
  return out;
}

std::vector<LabeledSegment> ParseRttm(const std::string& text) {
  std::vector<LabeledSegment> segments;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty() || tok[0] != "SPEAKER") continue;
    double start = 0.0, dur = 0.0;
    if (tok.size() < 8 || !ParseDouble(tok[3], &start) ||
        !ParseDouble(tok[4], &dur)) {
      throw InputError("malformed RTTM line " + std::to_string(line_no));
    }
    if (!(dur > 0.0)) continue;
    segments.push_back({start, start + dur, tok[7]});
  }
  return segments;
}

std::vector<LabeledSegment> ParseSegmentCsv(const std::string& text) {
  std::vector<LabeledSegment> segments;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::istringstream fields(line);
    for (std::string c; std::getline(fields, c, ',');) cols.push_back(Trim(c));
    double start = 0.0, end = 0.0;
    const bool numeric = cols.size() >= 3 && ParseDouble(cols[0], &start) &&
                         ParseDouble(cols[1], &end);
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw InputError("malformed CSV segment line " + std::to_string(line_no));
    }
    if (!(end > start)) {
      throw InputError("segment end must exceed start on line " +
                       std::to_string(line_no));
    }
    segments.push_back({start, end, cols[2]});
  }
  return segments;
}

std::vector<LabeledSegment> ReadSegmentsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open segment file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find("SPEAKER") != std::string::npos) return ParseRttm(text);
  return ParseSegmentCsv(text);
}

std::vector<LabeledSegment> ToLabeled(const std::vector<SpeakerSegment>& segments) {
  std::vector<LabeledSegment> out;
  out.reserve(segments.size());
  for (const auto& s : segments) {
    out.push_back({s.start_s, s.end_s, "spk" + std::to_string(s.speaker)});
  }
  return out;
}

std::vector<SpeakerSegment> FromLabeled(const std::vector<LabeledSegment>& segments) {
  std::vector<SpeakerSegment> out;
  out.reserve(segments.size());
  for (const auto& s : segments) {
    if (s.label.rfind("spk", 0) != 0) {
      throw InputError("hypothesis label is not of the form spk<k>: " + s.label);
    }
    int id = 0;
    try {
      id = std::stoi(s.label.substr(3));
    } catch (const std::exception&) {
      throw InputError("hypothesis label is not of the form spk<k>: " + s.label);
    }
    out.push_back({s.start_s, s.end_s, id});
  }
  return out;
}

}  // namespace sdiar
