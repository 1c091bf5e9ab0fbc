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

#include "sdiar/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "sdiar/stft.h"

namespace sdiar {
namespace {

using nlohmann::json;

std::string AlignName(AlignMode m) {
  switch (m) {
    case AlignMode::kFixedOffsets:
      return "fixed";
    case AlignMode::kNone:
      return "none";
    default:
      return "event";
  }
}

AlignMode ParseAlign(const std::string& s) {
  if (s == "event") return AlignMode::kAcousticEvent;
  if (s == "fixed") return AlignMode::kFixedOffsets;
  if (s == "none") return AlignMode::kNone;
  throw InputError("unknown alignment mode '" + s + "'");
}

std::string Num(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Mean per-frame power over all devices and microphones, in dB.
std::vector<double> FrameEnergyDb(const std::vector<DeviceRecording>& recs,
                                  const StftConfig& cfg, size_t frames) {
  std::vector<double> energy(frames, 0.0);
  for (const auto& rec : recs) {
    for (const auto& ch : rec.channels) {
      for (size_t n = 0; n < frames; ++n) {
        const size_t a = n * cfg.hop_samples;
        double e = 0.0;
        for (size_t t = a; t < a + cfg.frame_len_samples; ++t) e += ch[t] * ch[t];
        energy[n] += e / static_cast<double>(cfg.frame_len_samples);
      }
    }
  }
  for (double& e : energy) e = 10.0 * std::log10(e + 1e-20);
  return energy;
}

}  // namespace

void PipelineConfig::Validate() const {
  if (sample_rate_hz <= 0) throw InputError("sample rate must be positive");
  if (!(frame_ms > 0.0)) throw InputError("frame length must be positive");
  if (!(hop_fraction > 0.0 && hop_fraction <= 1.0)) {
    throw InputError("hop fraction must lie in (0, 1]");
  }
  if (!(grid_step_deg > 0.0)) throw InputError("grid step must be positive");
  if (!(mic_spacing_m > 0.0)) throw InputError("mic spacing must be positive");
  if (!(speed_of_sound_mps > 0.0)) throw InputError("speed of sound must be positive");
  if (!(smoothing.alpha >= 0.0 && smoothing.alpha < 1.0)) {
    throw InputError("smoothing alpha must lie in [0, 1)");
  }
  if (!(smoothing.floor > 0.0)) throw InputError("probability floor must be positive");
  if (num_sources == 0) throw InputError("number of sources must be at least 1");
  if (fit.max_iters < 0) throw InputError("max iterations must be nonnegative");
  if (!(fit.tol >= 0.0)) throw InputError("tolerance must be nonnegative");
  if (!(min_duration_s >= 0.0)) throw InputError("minimum duration must be nonnegative");
  if (!(collar_s >= 0.0)) throw InputError("collar must be nonnegative");
  if (threads < 1) throw InputError("threads must be at least 1");
}

std::string PipelineConfig::ToJson() const {
  json j;
  j["sample_rate_hz"] = sample_rate_hz;
  j["frame_ms"] = frame_ms;
  j["hop_fraction"] = hop_fraction;
  j["grid_step_deg"] = grid_step_deg;
  j["mic_spacing_m"] = mic_spacing_m;
  j["speed_of_sound_mps"] = speed_of_sound_mps;
  j["band_low_hz"] = band.low_hz;
  j["band_high_hz"] = band.high_hz;
  j["full_band"] = band.full_band;
  j["alpha"] = smoothing.alpha;
  j["alpha_on"] =
      smoothing.orientation == SmoothingOrientation::kAlphaOnCurrent ? "current" : "previous";
  j["floor"] = smoothing.floor;
  j["sources"] = num_sources;
  j["max_iters"] = fit.max_iters;
  j["tol"] = fit.tol;
  j["seed"] = fit.seed;
  j["init"] = fit.init == InitStrategy::kRandom ? "random" : "peak-kmeans";
  j["mle_solver"] = fit.mle.solver == DirichletSolver::kGradient ? "gradient" : "fixed-point";
  j["min_duration_s"] = min_duration_s;
  j["silence_gate"] = silence_gate;
  j["silence_gate_db"] = silence_gate_db;
  j["collar_s"] = collar_s;
  j["align"] = AlignName(align);
  j["align_window_s"] = {detector.search_start_s, detector.search_end_s};
  j["event_threshold_db"] = detector.threshold_db;
  j["offsets_s"] = fixed_offsets_s;
  j["threads"] = threads;
  return j.dump(2);
}

PipelineConfig PipelineConfig::FromJson(const std::string& text,
                                        const PipelineConfig& base) {
  PipelineConfig c = base;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InputError("config must be a JSON object");
    static const char* kKnown[] = {
        "sample_rate_hz", "frame_ms", "hop_fraction", "grid_step_deg", "mic_spacing_m",
        "speed_of_sound_mps", "band_low_hz", "band_high_hz", "full_band", "alpha",
        "alpha_on", "floor", "sources", "max_iters", "tol", "seed", "init", "mle_solver",
        "min_duration_s", "silence_gate", "silence_gate_db", "collar_s", "align",
        "align_window_s", "event_threshold_db", "offsets_s", "threads"};
    for (const auto& item : j.items()) {
      if (std::find(std::begin(kKnown), std::end(kKnown), item.key()) == std::end(kKnown)) {
        throw InputError("unknown config key '" + item.key() + "'");
      }
    }
    c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
    c.frame_ms = j.value("frame_ms", c.frame_ms);
    c.hop_fraction = j.value("hop_fraction", c.hop_fraction);
    c.grid_step_deg = j.value("grid_step_deg", c.grid_step_deg);
    c.mic_spacing_m = j.value("mic_spacing_m", c.mic_spacing_m);
    c.speed_of_sound_mps = j.value("speed_of_sound_mps", c.speed_of_sound_mps);
    c.band.low_hz = j.value("band_low_hz", c.band.low_hz);
    c.band.high_hz = j.value("band_high_hz", c.band.high_hz);
    c.band.full_band = j.value("full_band", c.band.full_band);
    c.smoothing.alpha = j.value("alpha", c.smoothing.alpha);
    if (j.contains("alpha_on")) {
      const auto s = j["alpha_on"].get<std::string>();
      if (s == "current") {
        c.smoothing.orientation = SmoothingOrientation::kAlphaOnCurrent;
      } else if (s == "previous") {
        c.smoothing.orientation = SmoothingOrientation::kAlphaOnPrevious;
      } else {
        throw InputError("alpha_on must be 'current' or 'previous'");
      }
    }
    c.smoothing.floor = j.value("floor", c.smoothing.floor);
    c.num_sources = j.value("sources", c.num_sources);
    c.fit.max_iters = j.value("max_iters", c.fit.max_iters);
    c.fit.tol = j.value("tol", c.fit.tol);
    c.fit.seed = j.value("seed", c.fit.seed);
    if (j.contains("init")) {
      const auto s = j["init"].get<std::string>();
      if (s == "peak-kmeans") {
        c.fit.init = InitStrategy::kPeakKMeans;
      } else if (s == "random") {
        c.fit.init = InitStrategy::kRandom;
      } else {
        throw InputError("init must be 'peak-kmeans' or 'random'");
      }
    }
    if (j.contains("mle_solver")) {
      const auto s = j["mle_solver"].get<std::string>();
      if (s == "fixed-point") {
        c.fit.mle.solver = DirichletSolver::kFixedPoint;
      } else if (s == "gradient") {
        c.fit.mle.solver = DirichletSolver::kGradient;
      } else {
        throw InputError("mle_solver must be 'fixed-point' or 'gradient'");
      }
    }
    c.min_duration_s = j.value("min_duration_s", c.min_duration_s);
    c.silence_gate = j.value("silence_gate", c.silence_gate);
    c.silence_gate_db = j.value("silence_gate_db", c.silence_gate_db);
    c.collar_s = j.value("collar_s", c.collar_s);
    if (j.contains("align")) c.align = ParseAlign(j["align"].get<std::string>());
    if (j.contains("align_window_s")) {
      const auto w = j["align_window_s"].get<std::vector<double>>();
      if (w.size() != 2) throw InputError("align_window_s must be [start, end]");
      c.detector.search_start_s = w[0];
      c.detector.search_end_s = w[1];
    }
    c.detector.threshold_db = j.value("event_threshold_db", c.detector.threshold_db);
    if (j.contains("offsets_s")) c.fixed_offsets_s = j["offsets_s"].get<std::vector<double>>();
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::FromJson(const std::string& text) {
  return FromJson(text, PipelineConfig());
}

PipelineResult ExtractFeatures(const std::vector<DeviceRecording>& recordings,
                               const PipelineConfig& config) {
  if (recordings.empty()) throw InputError("no input recordings");
  std::vector<DeviceRecording> recs;
  for (const auto& r : recordings) {
    ValidateRecording(r);
    if (r.sample_rate_hz < config.sample_rate_hz) {
      throw InputError("recording sample rate " + std::to_string(r.sample_rate_hz) +
                       " Hz is below the target " + std::to_string(config.sample_rate_hz) +
                       " Hz");
    }
    recs.push_back(Resample(r, config.sample_rate_hz));
  }

  PipelineResult result;
  result.alignment = Align(recs, config.align, config.detector, config.fixed_offsets_s);
  recs = ApplyAlignment(recs, result.alignment);

  const StftConfig stft = StftConfig::ForRate(config.sample_rate_hz, config.frame_ms,
                                              config.hop_fraction);
  const auto geom = ArrayGeometry::TwoMic(config.mic_spacing_m, config.speed_of_sound_mps);
  const auto grid = AngularGrid::Uniform(config.grid_step_deg);
  const SrpPhat srp(geom, grid, stft.fft_size, config.sample_rate_hz, config.band);
  result.grid_deg = grid.angles_deg;
  result.frame_len_s = static_cast<double>(stft.frame_len_samples) / config.sample_rate_hz;

  for (const auto& rec : recs) {
    if (rec.num_channels() != 2) {
      throw InputError("device " + std::to_string(rec.device_id) +
                       " must have exactly 2 channels for the two-microphone geometry");
    }
    const auto spectra = Stft(rec, stft);
    if (spectra.frames() == 0) throw InputError("recording shorter than one frame");
    if (result.frame_times_s.empty()) {
      for (double t : spectra.frame_times_s) {
        result.frame_times_s.push_back(t + result.alignment.origin_s());
      }
    }
    result.raw_srp.push_back(srp.ComputeAll(spectra, config.threads));
    result.features.push_back(SmoothAndNormalize(result.raw_srp.back(), config.smoothing));
  }
  return result;
}

PipelineResult RunPipeline(const std::vector<DeviceRecording>& recordings,
                           const PipelineConfig& config) {
  config.Validate();
  PipelineResult result = ExtractFeatures(recordings, config);
  result.fit = Fit(result.features, config.num_sources, config.fit);

  auto& labels = result.diarization.frame_labels;
  labels = LabelFrames(result.fit.gamma);
  if (config.silence_gate) {
    std::vector<DeviceRecording> recs;
    for (const auto& r : recordings) recs.push_back(Resample(r, config.sample_rate_hz));
    recs = ApplyAlignment(recs, result.alignment);
    const StftConfig stft = StftConfig::ForRate(config.sample_rate_hz, config.frame_ms,
                                                config.hop_fraction);
    const auto energy = FrameEnergyDb(recs, stft, labels.size());
    std::vector<double> sorted = energy;
    std::sort(sorted.begin(), sorted.end());
    const double loud = sorted[static_cast<size_t>(0.95 * static_cast<double>(sorted.size() - 1))];
    for (size_t n = 0; n < labels.size(); ++n) {
      if (energy[n] < loud - config.silence_gate_db) labels[n] = 0;
    }
  }
  result.diarization.segments = SegmentsFromLabels(labels, result.frame_times_s,
                                                   result.frame_len_s, config.min_duration_s);
  result.hypothesis = ToLabeled(result.diarization.segments);
  return result;
}

std::string PosteriorCsv(const PipelineResult& result) {
  std::ostringstream out;
  const Matrix& g = result.fit.gamma;
  out << "time_s,label";
  for (size_t s = 0; s < g.cols(); ++s) out << ",gamma_" << s + 1;
  out << "\n";
  for (size_t n = 0; n < g.rows(); ++n) {
    out << Num(result.frame_times_s[n], "%.4f") << ","
        << (n < result.diarization.frame_labels.size() ? result.diarization.frame_labels[n] : 0);
    for (size_t s = 0; s < g.cols(); ++s) out << "," << Num(g(n, s), "%.6g");
    out << "\n";
  }
  return out.str();
}

std::string FeatureCsv(const PipelineResult& result, size_t device, bool raw) {
  const auto& set = raw ? result.raw_srp : result.features;
  if (device >= set.size()) throw InputError("no such device");
  const Matrix& m = set[device];
  std::ostringstream out;
  out << "time_s";
  for (double a : result.grid_deg) out << ",deg_" << Num(a, "%g");
  out << "\n";
  for (size_t n = 0; n < m.rows(); ++n) {
    out << Num(result.frame_times_s[n], "%.4f");
    for (size_t l = 0; l < m.cols(); ++l) out << "," << Num(m(n, l), "%.6g");
    out << "\n";
  }
  return out.str();
}

std::string FitReportJson(const PipelineResult& result) {
  json j;
  j["iterations"] = result.fit.iterations_run;
  j["converged"] = result.fit.converged;
  j["reinitializations"] = result.fit.reinitializations;
  j["log_likelihood"] = result.fit.log_likelihood_trace;
  j["weights"] = result.fit.params.weights;
  j["frames"] = result.frame_times_s.size();
  j["devices"] = result.features.size();
  json align;
  align["method"] = AlignName(result.alignment.method);
  align["offsets_samples"] = result.alignment.offsets_samples;
  align["event_samples"] = result.alignment.event_samples;
  align["origin_s"] = result.alignment.origin_s();
  align["common_length_samples"] = result.alignment.common_length;
  j["alignment"] = align;
  return j.dump(2);
}

std::string DerJson(const DerResult& der, double collar_s) {
  json j;
  j["der"] = der.der;
  j["miss"] = der.miss;
  j["false_alarm"] = der.false_alarm;
  j["speaker_error"] = der.speaker_error;
  j["miss_s"] = der.miss_s;
  j["false_alarm_s"] = der.false_alarm_s;
  j["speaker_error_s"] = der.speaker_error_s;
  j["scored_speech_s"] = der.scored_speech_s;
  j["collar_s"] = collar_s;
  j["mapping"] = der.mapping;
  return j.dump(2);
}

std::string FeaturePgm(const Matrix& features) {
  const size_t w = features.rows();
  const size_t h = features.cols();
  double peak = 0.0;
  for (double v : features.data()) peak = std::max(peak, v);
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (size_t l = 0; l < h; ++l) {
    for (size_t n = 0; n < w; ++n) {
      const double v = peak > 0.0 ? features(n, l) / peak : 0.0;
      out.push_back(static_cast<char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    }
  }
  return out;
}

std::string Fnv1aHex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sdiar
