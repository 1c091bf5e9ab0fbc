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

#include "sdiar/scoring.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sdiar {
namespace {

constexpr size_t kExhaustiveLimit = 6;

std::vector<std::vector<double>> PadSquare(const std::vector<std::vector<double>>& w,
                                           size_t n) {
  std::vector<std::vector<double>> sq(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < w.size(); ++i) {
    for (size_t j = 0; j < w[i].size(); ++j) sq[i][j] = w[i][j];
  }
  return sq;
}

std::vector<int> Exhaustive(const std::vector<std::vector<double>>& sq) {
  const size_t n = sq.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_total = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) total += sq[i][perm[i]];
    if (total > best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Kuhn-Munkres with potentials, minimizing -weight on a square matrix.
std::vector<int> Hungarian(const std::vector<std::vector<double>>& sq) {
  const size_t n = sq.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<size_t> match(n + 1, 0), way(n + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    match[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const size_t i0 = match[j0];
      double delta = inf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -sq[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (size_t j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

std::vector<std::string> UniqueLabels(const std::vector<LabeledSegment>& segs) {
  std::vector<std::string> labels;
  for (const auto& s : segs) {
    if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) {
      labels.push_back(s.label);
    }
  }
  return labels;
}

size_t IndexOf(const std::vector<std::string>& labels, const std::string& l) {
  return static_cast<size_t>(std::find(labels.begin(), labels.end(), l) -
                             labels.begin());
}

}  // namespace

std::vector<int> MaxWeightAssignment(const std::vector<std::vector<double>>& weight,
                                     MappingSolver solver) {
  const size_t rows = weight.size();
  size_t cols = 0;
  for (const auto& r : weight) cols = std::max(cols, r.size());
  const size_t n = std::max(rows, cols);
  if (n == 0) return {};
  const auto sq = PadSquare(weight, n);
  const bool exhaustive =
      solver == MappingSolver::kExhaustive ||
      (solver == MappingSolver::kAuto && n <= kExhaustiveLimit);
  const auto full = exhaustive ? Exhaustive(sq) : Hungarian(sq);
  std::vector<int> out(rows, -1);
  for (size_t i = 0; i < rows; ++i) {
    if (full[i] >= 0 && static_cast<size_t>(full[i]) < cols) out[i] = full[i];
  }
  return out;
}

DerResult ScoreDer(const std::vector<LabeledSegment>& reference,
                   const std::vector<LabeledSegment>& hypothesis,
                   const ScoreOptions& opts) {
  if (reference.empty()) throw InputError("empty reference annotation");
  if (!(opts.collar_s >= 0.0)) throw InputError("collar must be nonnegative");
  for (const auto& s : reference) {
    if (!(s.end_s > s.start_s)) throw InputError("reference segment with end <= start");
  }

  double span_lo = std::numeric_limits<double>::infinity();
  double span_hi = -span_lo;
  for (const auto& s : reference) {
    span_lo = std::min(span_lo, s.start_s);
    span_hi = std::max(span_hi, s.end_s);
  }
  if (opts.uem) {
    span_lo = opts.uem->first;
    span_hi = opts.uem->second;
    if (!(span_hi > span_lo)) throw InputError("empty evaluation span");
  }

  std::vector<std::pair<double, double>> no_score;
  if (opts.collar_s > 0.0) {
    for (const auto& s : reference) {
      no_score.emplace_back(s.start_s - opts.collar_s, s.start_s + opts.collar_s);
      no_score.emplace_back(s.end_s - opts.collar_s, s.end_s + opts.collar_s);
    }
  }

  std::vector<double> cuts = {span_lo, span_hi};
  for (const auto& s : reference) {
    cuts.push_back(s.start_s);
    cuts.push_back(s.end_s);
  }
  for (const auto& s : hypothesis) {
    cuts.push_back(s.start_s);
    cuts.push_back(s.end_s);
  }
  for (const auto& z : no_score) {
    cuts.push_back(z.first);
    cuts.push_back(z.second);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto ref_labels = UniqueLabels(reference);
  const auto hyp_labels = UniqueLabels(hypothesis);

  struct Piece {
    double dur;
    std::vector<bool> ref_active;
    std::vector<bool> hyp_active;
  };
  std::vector<Piece> pieces;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (lo < span_lo || hi > span_hi) continue;
    const double mid = 0.5 * (lo + hi);
    const bool collared = std::any_of(no_score.begin(), no_score.end(), [&](const auto& z) {
      return mid > z.first && mid < z.second;
    });
    if (collared) continue;
    Piece piece{hi - lo, std::vector<bool>(ref_labels.size(), false),
                std::vector<bool>(hyp_labels.size(), false)};
    for (const auto& s : reference) {
      if (mid >= s.start_s && mid < s.end_s) piece.ref_active[IndexOf(ref_labels, s.label)] = true;
    }
    for (const auto& s : hypothesis) {
      if (mid >= s.start_s && mid < s.end_s) piece.hyp_active[IndexOf(hyp_labels, s.label)] = true;
    }
    pieces.push_back(std::move(piece));
  }

  std::vector<std::vector<double>> overlap(hyp_labels.size(),
                                           std::vector<double>(ref_labels.size(), 0.0));
  for (const auto& p : pieces) {
    for (size_t h = 0; h < hyp_labels.size(); ++h) {
      if (!p.hyp_active[h]) continue;
      for (size_t r = 0; r < ref_labels.size(); ++r) {
        if (p.ref_active[r]) overlap[h][r] += p.dur;
      }
    }
  }
  const auto assignment = MaxWeightAssignment(overlap, opts.solver);

  DerResult result;
  for (size_t h = 0; h < hyp_labels.size(); ++h) {
    if (assignment[h] >= 0) result.mapping[hyp_labels[h]] = ref_labels[assignment[h]];
  }
  for (const auto& p : pieces) {
    const auto n_ref = static_cast<double>(
        std::count(p.ref_active.begin(), p.ref_active.end(), true));
    const auto n_hyp = static_cast<double>(
        std::count(p.hyp_active.begin(), p.hyp_active.end(), true));
    double n_correct = 0.0;
    for (size_t h = 0; h < hyp_labels.size(); ++h) {
      if (p.hyp_active[h] && assignment[h] >= 0 && p.ref_active[assignment[h]]) {
        n_correct += 1.0;
      }
    }
    result.scored_time_s += p.dur;
    result.scored_speech_s += n_ref * p.dur;
    result.miss_s += std::max(0.0, n_ref - n_hyp) * p.dur;
    result.false_alarm_s += std::max(0.0, n_hyp - n_ref) * p.dur;
    result.speaker_error_s += (std::min(n_ref, n_hyp) - n_correct) * p.dur;
  }
  if (!(result.scored_speech_s > 0.0)) {
    throw ProcessingError("no reference speech inside the scored region");
  }
  result.miss = result.miss_s / result.scored_speech_s;
  result.false_alarm = result.false_alarm_s / result.scored_speech_s;
  result.speaker_error = result.speaker_error_s / result.scored_speech_s;
  result.der = result.miss + result.false_alarm + result.speaker_error;
  return result;
}

OracleLabeling OracleLabels(const std::vector<LabeledSegment>& reference,
                            const std::vector<double>& frame_times_s) {
  if (reference.empty()) throw InputError("empty reference annotation");
  for (size_t n = 1; n < frame_times_s.size(); ++n) {
    if (frame_times_s[n] < frame_times_s[n - 1]) {
      throw InputError("frame times must be monotone");
    }
  }
  OracleLabeling out;
  // Speakers ordered by first appearance in time.
  std::vector<LabeledSegment> by_start = reference;
  std::stable_sort(by_start.begin(), by_start.end(),
                   [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  out.speakers = UniqueLabels(by_start);

  int previous = 1;  // earliest speaker for leading frames
  out.labels.reserve(frame_times_s.size());
  for (double t : frame_times_s) {
    int active = 0;
    size_t count = 0;
    for (const auto& s : reference) {
      if (t >= s.start_s && t < s.end_s) {
        const int id = static_cast<int>(IndexOf(out.speakers, s.label)) + 1;
        if (id != active) {
          ++count;
          active = id;
        }
      }
    }
    if (count == 1) previous = active;
    out.labels.push_back(previous);
  }
  return out;
}

}  // namespace sdiar
