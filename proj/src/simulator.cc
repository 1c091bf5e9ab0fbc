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

#include "sdiar/simulator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "json.hpp"
#include "sdiar/common.h"

namespace sdiar {
namespace {

using nlohmann::json;

constexpr int kDelayHalfTaps = 16;     // 32-tap fractional delay
constexpr double kDelayKaiserBeta = 8.0;
constexpr int kBandHalfTaps = 127;     // 255-tap band-pass for source material
constexpr double kRampS = 0.010;
constexpr double kSourceRms = 0.1;
constexpr double kClapDurationS = 0.005;
constexpr double kMinDistanceM = 0.05;

// Independent, reproducible stream per (purpose, index).
class Stream {
 public:
  Stream(uint64_t seed, uint32_t purpose, uint32_t index) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      purpose, index};
    rng_.seed(seq);
  }
  double Uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(Uniform()));
    const double phi = 2.0 * M_PI * Uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum Purpose : uint32_t {
  kSourcePurpose = 1,
  kNoisePurpose = 2,
  kClapPurpose = 3,
  kScenePurpose = 4,
};

double Distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Sinc(double x) {
  return std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
}

std::vector<double> BandPass(double low_hz, double high_hz, int fs) {
  const double f1 = low_hz / fs, f2 = high_hz / fs;
  std::vector<double> h(2 * kBandHalfTaps + 1);
  double energy = 0.0;
  for (int j = -kBandHalfTaps; j <= kBandHalfTaps; ++j) {
    const double win = 0.42 + 0.5 * std::cos(M_PI * j / (kBandHalfTaps + 1)) +
                       0.08 * std::cos(2.0 * M_PI * j / (kBandHalfTaps + 1));
    const double v = (2.0 * f2 * Sinc(2.0 * f2 * j) - 2.0 * f1 * Sinc(2.0 * f1 * j)) * win;
    h[j + kBandHalfTaps] = v;
    energy += v * v;
  }
  // Unit output variance for unit-variance white input.
  for (double& v : h) v /= std::sqrt(energy);
  return h;
}

// Adds gain * x(t - delay) into y over output indices [lo, hi).
void AddDelayed(const std::vector<double>& x, double delay, double gain,
                int64_t lo, int64_t hi, std::vector<double>* y) {
  const auto d_int = static_cast<int64_t>(std::floor(delay));
  const double frac = delay - static_cast<double>(d_int);
  double taps[2 * kDelayHalfTaps];
  const double i0 = std::cyl_bessel_i(0.0, kDelayKaiserBeta);
  for (int j = -kDelayHalfTaps + 1; j <= kDelayHalfTaps; ++j) {
    const double u = j - frac;
    const double r = u / kDelayHalfTaps;
    const double win =
        std::cyl_bessel_i(0.0, kDelayKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0;
    taps[j + kDelayHalfTaps - 1] = Sinc(u) * win;
  }
  const auto n = static_cast<int64_t>(x.size());
  lo = std::max<int64_t>(lo, 0);
  hi = std::min<int64_t>(hi, static_cast<int64_t>(y->size()));
  for (int64_t t = lo; t < hi; ++t) {
    double acc = 0.0;
    for (int j = -kDelayHalfTaps + 1; j <= kDelayHalfTaps; ++j) {
      const int64_t i = t - d_int - j;
      if (i >= 0 && i < n) acc += x[i] * taps[j + kDelayHalfTaps - 1];
    }
    (*y)[t] += gain * acc;
  }
}

// Sample ranges [first, second) where a source is nonzero.
using Ranges = std::vector<std::pair<int64_t, int64_t>>;

struct DrySource {
  std::vector<double> signal;  // on the extended timeline
  Ranges active;
};

DrySource RenderSource(const SceneSpec& spec, size_t index, int64_t ext_len,
                       int64_t pad, uint64_t seed) {
  const int fs = spec.sample_rate_hz;
  const SceneSource& src = spec.sources[index];
  Stream rng(seed, kSourcePurpose, static_cast<uint32_t>(index));
  DrySource dry;
  dry.signal.assign(ext_len, 0.0);

  const double high = 0.45 * fs;
  const double low = src.signal == SourceSignal::kNoise ? 100.0 : 150.0;
  const auto band = BandPass(low, high, fs);
  const double mod_hz = rng.Uniform(3.0, 6.0);
  const double mod_phase = rng.Uniform(0.0, 2.0 * M_PI);

  std::vector<double> wav;
  if (src.signal == SourceSignal::kWav) {
    DeviceRecording rec = LoadWav(src.wav_path, 0, 1);
    if (rec.sample_rate_hz < fs) {
      throw InputError("source WAV sample rate is below the scene rate: " + src.wav_path);
    }
    rec.channels.resize(1);
    wav = ResampleChannel(rec.channels[0], rec.sample_rate_hz, fs);
    double power = 0.0;
    for (double v : wav) power += v * v;
    power /= static_cast<double>(wav.size());
    if (!(power > 0.0)) throw InputError("source WAV is silent: " + src.wav_path);
    for (double& v : wav) v *= kSourceRms / std::sqrt(power);
  }

  const auto ramp = static_cast<int64_t>(std::llround(kRampS * fs));
  for (const Turn& turn : spec.turns) {
    if (turn.source != index) continue;
    const int64_t a = std::llround(turn.start_s * fs) + pad;
    const int64_t b = std::llround(turn.end_s * fs) + pad;
    if (b <= a) continue;
    const int64_t len = b - a;
    std::vector<double> piece(len);
    if (src.signal == SourceSignal::kWav) {
      const auto offset = static_cast<size_t>(std::llround(turn.start_s * fs));
      for (int64_t i = 0; i < len; ++i) piece[i] = wav[(offset + i) % wav.size()];
    } else {
      std::vector<double> white(len + 2 * kBandHalfTaps);
      for (double& v : white) v = rng.Gaussian();
      for (int64_t i = 0; i < len; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= 2 * kBandHalfTaps; ++j) acc += band[j] * white[i + j];
        piece[i] = kSourceRms * acc;
      }
      if (src.signal == SourceSignal::kModulatedNoise) {
        for (int64_t i = 0; i < len; ++i) {
          const double t = static_cast<double>(a - pad + i) / fs;
          const double env =
              0.25 + 0.75 * (0.5 + 0.5 * std::sin(2.0 * M_PI * mod_hz * t + mod_phase));
          // Scale so the envelope keeps the long-term RMS.
          piece[i] *= env / std::sqrt(0.25 * 0.25 + 0.75 * 0.25 + 0.75 * 0.75 * 0.375);
        }
      }
    }
    for (int64_t i = 0; i < len; ++i) {
      double gate = 1.0;
      if (i < ramp) gate = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / ramp);
      if (len - 1 - i < ramp) {
        gate = std::min(gate, 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(len - 1 - i) / ramp));
      }
      const int64_t t = a + i;
      if (t >= 0 && t < ext_len) dry.signal[t] += gate * piece[i];
    }
    dry.active.emplace_back(a, b);
  }
  return dry;
}

std::array<double, 2> ReadPoint(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw InputError("positions must be [x, y]");
  return {v[0], v[1]};
}

std::string SignalName(SourceSignal s) {
  switch (s) {
    case SourceSignal::kNoise:
      return "noise";
    case SourceSignal::kWav:
      return "wav";
    default:
      return "modulated-noise";
  }
}

}  // namespace

void SceneSpec::Validate() const {
  if (sample_rate_hz <= 0) throw InputError("scene: sample rate must be positive");
  if (!(duration_s > 0.0)) throw InputError("scene: duration must be positive");
  if (!(speed_of_sound_mps > 0.0)) throw InputError("scene: speed of sound must be positive");
  if (sources.empty()) throw InputError("scene: no sources");
  if (devices.empty()) throw InputError("scene: no devices");
  for (const auto& t : turns) {
    if (t.source >= sources.size()) throw InputError("scene: turn names an unknown source");
    if (!(t.start_s >= 0.0) || !(t.end_s <= duration_s) || !(t.end_s > t.start_s)) {
      throw InputError("scene: turn outside the scene duration or empty");
    }
  }
  for (const auto& d : devices) {
    if (!(d.mic_spacing_m > 0.0)) throw InputError("scene: mic spacing must be positive");
  }
  for (size_t i = 0; i < devices.size(); ++i) {
    for (size_t j = i + 1; j < devices.size(); ++j) {
      if (Distance(devices[i].position, devices[j].position) == 0.0) {
        throw InputError("scene: device positions must be distinct");
      }
    }
    for (const auto& s : sources) {
      if (Distance(devices[i].position, s.position) < kMinDistanceM) {
        throw InputError("scene: source too close to a device");
      }
    }
  }
  for (size_t i = 0; i < sources.size(); ++i) {
    for (size_t j = i + 1; j < sources.size(); ++j) {
      if (Distance(sources[i].position, sources[j].position) == 0.0) {
        throw InputError("scene: source positions must be distinct");
      }
    }
  }
  if (clap_time_s && (*clap_time_s < 0.0 || *clap_time_s >= duration_s)) {
    throw InputError("scene: clap time outside the scene");
  }
}

std::pair<Point2, Point2> MicPositions(const SceneDevice& device) {
  const double phi = device.orientation_deg * M_PI / 180.0;
  const double h = 0.5 * device.mic_spacing_m;
  const Point2 axis{std::cos(phi), std::sin(phi)};
  return {{device.position.x + h * axis.x, device.position.y + h * axis.y},
          {device.position.x - h * axis.x, device.position.y - h * axis.y}};
}

double DeviceRelativeAngleDeg(const SceneDevice& device, Point2 target) {
  const double phi = device.orientation_deg * M_PI / 180.0;
  const double dx = target.x - device.position.x;
  const double dy = target.y - device.position.y;
  const double r = std::hypot(dx, dy);
  const double c = std::clamp((dx * std::cos(phi) + dy * std::sin(phi)) / r, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

double FarFieldTdoaSamples(const SceneDevice& device, Point2 source,
                           double speed_of_sound, int sample_rate_hz) {
  const double theta = DeviceRelativeAngleDeg(device, source) * M_PI / 180.0;
  return device.mic_spacing_m * std::cos(theta) * sample_rate_hz / speed_of_sound;
}

RenderedScene Render(const SceneSpec& spec, uint64_t seed) {
  spec.Validate();
  const int fs = spec.sample_rate_hz;
  double max_offset = 0.0;
  for (const auto& d : spec.devices) max_offset = std::max(max_offset, std::abs(d.clock_offset_s));
  const auto pad = static_cast<int64_t>(std::ceil((max_offset + 0.1) * fs));
  const auto out_len = static_cast<int64_t>(std::llround(spec.duration_s * fs));
  const int64_t ext_len = out_len + 2 * pad;

  std::vector<DrySource> dry;
  for (size_t s = 0; s < spec.sources.size(); ++s) {
    dry.push_back(RenderSource(spec, s, ext_len, pad, seed));
  }

  // Speech-active samples in scene time [0, duration), for the SNR reference.
  std::vector<bool> speech(out_len, false);
  for (const auto& src : dry) {
    for (const auto& [a, b] : src.active) {
      for (int64_t t = std::max<int64_t>(a - pad, 0); t < std::min(b - pad, out_len); ++t) {
        speech[t] = true;
      }
    }
  }

  std::vector<double> clap;
  if (spec.clap_time_s) {
    Stream rng(seed, kClapPurpose, 0);
    clap.resize(static_cast<size_t>(std::llround(kClapDurationS * fs)));
    for (double& v : clap) v = rng.Gaussian();
  }

  RenderedScene scene;
  const int64_t margin = kDelayHalfTaps + 1;
  for (size_t p = 0; p < spec.devices.size(); ++p) {
    const SceneDevice& dev = spec.devices[p];
    const auto [mic1, mic2] = MicPositions(dev);
    const Point2 mics[2] = {mic1, mic2};
    const int64_t shift = pad - std::llround(dev.clock_offset_s * fs);

    DeviceRecording rec;
    rec.device_id = static_cast<int>(p + 1);
    rec.sample_rate_hz = fs;
    double signal_power = 0.0;
    for (int m = 0; m < 2; ++m) {
      std::vector<double> clean(ext_len, 0.0);
      for (size_t s = 0; s < spec.sources.size(); ++s) {
        const double r = std::max(Distance(mics[m], spec.sources[s].position), kMinDistanceM);
        const double delay = r / spec.speed_of_sound_mps * fs;
        const auto lag = static_cast<int64_t>(std::ceil(delay));
        for (const auto& [a, b] : dry[s].active) {
          AddDelayed(dry[s].signal, delay, 1.0 / r, a + lag - margin, b + lag + margin, &clean);
        }
      }
      if (m == 0) {
        int64_t count = 0;
        for (int64_t t = 0; t < out_len; ++t) {
          if (!speech[t]) continue;
          signal_power += clean[t + pad] * clean[t + pad];
          ++count;
        }
        signal_power = count > 0 ? signal_power / static_cast<double>(count) : 0.0;
      }
      std::vector<double> out(out_len);
      for (int64_t i = 0; i < out_len; ++i) out[i] = clean[i + shift];
      rec.channels.push_back(std::move(out));
    }

    const double noise_power = signal_power > 0.0
                                   ? signal_power / std::pow(10.0, spec.snr_db / 10.0)
                                   : 1e-4;
    const double sigma = std::sqrt(noise_power);
    for (int m = 0; m < 2; ++m) {
      Stream rng(seed, kNoisePurpose, static_cast<uint32_t>(2 * p + m));
      for (double& v : rec.channels[m]) v += sigma * rng.Gaussian();
    }
    if (spec.clap_time_s) {
      const double gain = sigma * std::pow(10.0, spec.clap_level_db / 20.0);
      const int64_t at = std::llround((*spec.clap_time_s + dev.clock_offset_s) * fs);
      for (auto& ch : rec.channels) {
        for (size_t i = 0; i < clap.size(); ++i) {
          const int64_t t = at + static_cast<int64_t>(i);
          if (t >= 0 && t < out_len) ch[t] += gain * clap[i];
        }
      }
    }
    scene.recordings.push_back(std::move(rec));
  }

  for (const Turn& t : spec.turns) {
    scene.reference.push_back({t.start_s, t.end_s, "S" + std::to_string(t.source + 1)});
  }
  std::stable_sort(scene.reference.begin(), scene.reference.end(),
                   [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  return scene;
}

SceneSpec MakeMeetingScene(const MeetingOptions& opts, uint64_t seed) {
  if (opts.num_sources == 0 || opts.num_devices == 0) {
    throw InputError("meeting needs at least one source and one device");
  }
  if (!(opts.max_turn_s >= opts.min_turn_s) || !(opts.min_turn_s > 0.0)) {
    throw InputError("invalid turn duration range");
  }
  Stream rng(seed, kScenePurpose, 0);
  SceneSpec spec;
  spec.sample_rate_hz = opts.sample_rate_hz;
  spec.duration_s = opts.duration_s;
  spec.snr_db = opts.snr_db;
  spec.clap_time_s = opts.clap_time_s;
  spec.clap_level_db = opts.clap_level_db;

  for (size_t s = 0; s < opts.num_sources; ++s) {
    const double angle = (90.0 + 360.0 * static_cast<double>(s) / opts.num_sources +
                          rng.Uniform(-10.0, 10.0)) * M_PI / 180.0;
    const double radius = opts.source_radius_m + rng.Uniform(-0.1, 0.1);
    spec.sources.push_back({{radius * std::cos(angle), radius * std::sin(angle)},
                            SourceSignal::kModulatedNoise, ""});
  }
  for (size_t p = 0; p < opts.num_devices; ++p) {
    SceneDevice dev;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      dev.position = {rng.Uniform(-opts.device_spread_m, opts.device_spread_m),
                      rng.Uniform(-opts.device_spread_m, opts.device_spread_m)};
      const bool clear = std::all_of(spec.devices.begin(), spec.devices.end(), [&](const auto& o) {
        return Distance(o.position, dev.position) >= 0.15;
      });
      if (clear) break;
    }
    dev.orientation_deg = rng.Uniform(0.0, 360.0);
    dev.mic_spacing_m = opts.mic_spacing_m;
    dev.clock_offset_s =
        p == 0 ? 0.0 : rng.Uniform(-opts.max_clock_offset_s, opts.max_clock_offset_s);
    spec.devices.push_back(dev);
  }

  double t = opts.speech_start_s;
  size_t previous = opts.num_sources;
  while (t < opts.duration_s - 1.0) {
    double end = std::min(t + rng.Uniform(opts.min_turn_s, opts.max_turn_s), opts.duration_s);
    if (opts.duration_s - end < 1.0) end = opts.duration_s;
    size_t who = static_cast<size_t>(rng.Uniform() * static_cast<double>(opts.num_sources));
    who = std::min(who, opts.num_sources - 1);
    if (opts.num_sources > 1 && who == previous) who = (who + 1) % opts.num_sources;
    spec.turns.push_back({t, end, who});
    previous = who;
    t = end;
  }
  spec.Validate();
  return spec;
}

std::string SceneToJson(const SceneSpec& spec) {
  json j;
  j["sample_rate_hz"] = spec.sample_rate_hz;
  j["duration_s"] = spec.duration_s;
  j["speed_of_sound_mps"] = spec.speed_of_sound_mps;
  j["snr_db"] = spec.snr_db;
  if (spec.clap_time_s) {
    j["clap"] = {{"time_s", *spec.clap_time_s}, {"level_db", spec.clap_level_db}};
  } else {
    j["clap"] = nullptr;
  }
  j["sources"] = json::array();
  for (const auto& s : spec.sources) {
    json js = {{"position", {s.position.x, s.position.y}}, {"signal", SignalName(s.signal)}};
    if (s.signal == SourceSignal::kWav) js["wav_path"] = s.wav_path;
    j["sources"].push_back(js);
  }
  j["devices"] = json::array();
  for (const auto& d : spec.devices) {
    j["devices"].push_back({{"position", {d.position.x, d.position.y}},
                            {"orientation_deg", d.orientation_deg},
                            {"mic_spacing_m", d.mic_spacing_m},
                            {"clock_offset_s", d.clock_offset_s}});
  }
  j["turns"] = json::array();
  for (const auto& t : spec.turns) {
    j["turns"].push_back({{"start_s", t.start_s}, {"end_s", t.end_s}, {"source", t.source}});
  }
  return j.dump(2);
}

SceneSpec SceneFromJson(const std::string& text) {
  SceneSpec spec;
  try {
    const json j = json::parse(text);
    spec.sample_rate_hz = j.value("sample_rate_hz", spec.sample_rate_hz);
    spec.duration_s = j.at("duration_s").get<double>();
    spec.speed_of_sound_mps = j.value("speed_of_sound_mps", spec.speed_of_sound_mps);
    spec.snr_db = j.value("snr_db", spec.snr_db);
    if (j.contains("clap") && !j["clap"].is_null()) {
      spec.clap_time_s = j["clap"].at("time_s").get<double>();
      spec.clap_level_db = j["clap"].value("level_db", spec.clap_level_db);
    }
    for (const auto& js : j.at("sources")) {
      SceneSource s;
      const auto pos = ReadPoint(js.at("position"));
      s.position = {pos[0], pos[1]};
      const std::string kind = js.value("signal", "modulated-noise");
      if (kind == "modulated-noise") {
        s.signal = SourceSignal::kModulatedNoise;
      } else if (kind == "noise") {
        s.signal = SourceSignal::kNoise;
      } else if (kind == "wav") {
        s.signal = SourceSignal::kWav;
        s.wav_path = js.at("wav_path").get<std::string>();
      } else {
        throw InputError("scene: unknown source signal '" + kind + "'");
      }
      spec.sources.push_back(s);
    }
    for (const auto& jd : j.at("devices")) {
      SceneDevice d;
      const auto pos = ReadPoint(jd.at("position"));
      d.position = {pos[0], pos[1]};
      d.orientation_deg = jd.value("orientation_deg", 0.0);
      d.mic_spacing_m = jd.value("mic_spacing_m", d.mic_spacing_m);
      d.clock_offset_s = jd.value("clock_offset_s", 0.0);
      spec.devices.push_back(d);
    }
    if (j.contains("turns")) {
      for (const auto& jt : j.at("turns")) {
        spec.turns.push_back({jt.at("start_s").get<double>(), jt.at("end_s").get<double>(),
                              jt.at("source").get<size_t>()});
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scene file: ") + e.what());
  }
  spec.Validate();
  return spec;
}

}  // namespace sdiar
