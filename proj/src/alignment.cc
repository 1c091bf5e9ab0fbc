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

#include <algorithm>
#include <cmath>

#include "sdiar/common.h"

namespace sdiar {
namespace {

constexpr double kPowerFloor = 1e-20;

}  // namespace

int64_t DetectEvent(const DeviceRecording& rec, const EventDetectorConfig& cfg) {
  ValidateRecording(rec);
  const double fs = rec.sample_rate_hz;
  const auto n = static_cast<int64_t>(rec.num_samples());
  const auto w = std::max<int64_t>(1, std::llround(cfg.short_window_s * fs));
  const auto hist = std::max<int64_t>(1, std::llround(cfg.history_s * fs));
  if (!(cfg.search_end_s > cfg.search_start_s)) {
    throw InputError("event search window is empty");
  }
  const int64_t lo = std::max<int64_t>(0, std::llround(cfg.search_start_s * fs));
  const int64_t hi = std::min<int64_t>(n - w, std::llround(cfg.search_end_s * fs));

  std::vector<double> avg(n, 0.0);
  const double inv_m = 1.0 / static_cast<double>(rec.num_channels());
  for (const auto& ch : rec.channels) {
    for (int64_t t = 0; t < n; ++t) avg[t] += ch[t] * inv_m;
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (int64_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + avg[t] * avg[t];
  auto energy = [&](int64_t a, int64_t b) {
    return std::max(0.0, prefix[b] - prefix[a]);
  };
  const double threshold = std::pow(10.0, cfg.threshold_db / 10.0);
  auto ratio = [&](int64_t t) {
    const int64_t h0 = std::max<int64_t>(0, t - hist);
    const double past = energy(h0, t) / static_cast<double>(t - h0);
    const double next = energy(t, t + w) / static_cast<double>(w);
    if (next <= kPowerFloor) return 0.0;
    return next / (past + kPowerFloor);
  };

  // Require at least one short window of history.
  for (int64_t t = std::max(lo, w); t <= hi; ++t) {
    if (ratio(t) < threshold) continue;
    int64_t peak = t;
    double best = ratio(t);
    for (int64_t u = t + 1; u <= std::min(hi, t + w); ++u) {
      const double r = ratio(u);
      if (r > best) {
        best = r;
        peak = u;
      }
    }
    const int64_t end = std::min(n, peak + w);
    double local_max = 0.0;
    for (int64_t u = peak; u < end; ++u) local_max = std::max(local_max, avg[u] * avg[u]);
    for (int64_t u = peak; u < end; ++u) {
      if (avg[u] * avg[u] >= 0.1 * local_max) return u;
    }
    return peak;
  }
  throw InputError("no event detected");
}

AlignmentResult Align(const std::vector<DeviceRecording>& recs, AlignMode mode,
                      const EventDetectorConfig& detector,
                      const std::vector<double>& fixed_offsets_s,
                      double min_overlap_s) {
  if (recs.empty()) throw InputError("no recordings to align");
  const int fs = recs.front().sample_rate_hz;
  for (const auto& r : recs) {
    ValidateRecording(r);
    if (r.sample_rate_hz != fs) {
      throw InputError("recordings must share a sample rate before alignment");
    }
  }

  AlignmentResult result;
  result.method = mode;
  result.sample_rate_hz = fs;
  result.offsets_samples.assign(recs.size(), 0);
  switch (mode) {
    case AlignMode::kAcousticEvent:
      for (size_t p = 0; p < recs.size(); ++p) {
        try {
          result.event_samples.push_back(DetectEvent(recs[p], detector));
        } catch (const InputError& e) {
          throw InputError("device " + std::to_string(p + 1) + ": " + e.what());
        }
      }
      for (size_t p = 0; p < recs.size(); ++p) {
        result.offsets_samples[p] = result.event_samples[p] - result.event_samples[0];
      }
      break;
    case AlignMode::kFixedOffsets:
      if (fixed_offsets_s.size() != recs.size()) {
        throw InputError("fixed alignment needs one offset per device");
      }
      for (size_t p = 0; p < recs.size(); ++p) {
        result.offsets_samples[p] =
            std::llround((fixed_offsets_s[p] - fixed_offsets_s[0]) * fs);
      }
      break;
    case AlignMode::kNone:
      break;
  }

  // Device p covers device-0 indices [-offset_p, len_p - offset_p).
  int64_t start = 0;
  int64_t end = static_cast<int64_t>(recs.front().num_samples());
  for (size_t p = 0; p < recs.size(); ++p) {
    const int64_t off = result.offsets_samples[p];
    start = std::max(start, -off);
    end = std::min(end, static_cast<int64_t>(recs[p].num_samples()) - off);
  }
  result.common_start = start;
  result.common_length = std::max<int64_t>(0, end - start);
  if (static_cast<double>(result.common_length) < min_overlap_s * fs) {
    throw InputError("aligned recordings overlap by less than " +
                     std::to_string(min_overlap_s) + " s");
  }
  return result;
}

std::vector<DeviceRecording> ApplyAlignment(const std::vector<DeviceRecording>& recs,
                                            const AlignmentResult& alignment) {
  if (alignment.offsets_samples.size() != recs.size()) {
    throw InputError("alignment does not match the recordings");
  }
  std::vector<DeviceRecording> out;
  out.reserve(recs.size());
  for (size_t p = 0; p < recs.size(); ++p) {
    const int64_t begin = alignment.common_start + alignment.offsets_samples[p];
    const int64_t end = begin + alignment.common_length;
    if (begin < 0 || end > static_cast<int64_t>(recs[p].num_samples())) {
      throw InputError("alignment span exceeds recording " + std::to_string(p + 1));
    }
    DeviceRecording r;
    r.device_id = recs[p].device_id;
    r.sample_rate_hz = recs[p].sample_rate_hz;
    r.start_offset_samples = recs[p].start_offset_samples + begin;
    for (const auto& ch : recs[p].channels) {
      r.channels.emplace_back(ch.begin() + begin, ch.begin() + end);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sdiar
