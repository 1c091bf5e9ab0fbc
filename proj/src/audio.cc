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

#include "sdiar/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "sdiar/common.h"

namespace sdiar {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>((v >> 8) & 0xFF));
}

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

double DecodeSample(const unsigned char* p, uint16_t format, uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      uint32_t u = ReadU32(p);
      float f;
      std::memcpy(&f, &u, sizeof(f));
      return f;
    }
    uint64_t u = static_cast<uint64_t>(ReadU32(p)) |
                 (static_cast<uint64_t>(ReadU32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &u, sizeof(d));
    return d;
  }
  switch (bits) {
    case 16:
      return static_cast<int16_t>(ReadU16(p)) / 32768.0;
    case 24: {
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    default:
      return static_cast<int32_t>(ReadU32(p)) / 2147483648.0;
  }
}

// Zeroth-order modified Bessel function, used by the Kaiser window.
double BesselI0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

void ValidateRecording(const DeviceRecording& rec) {
  if (rec.sample_rate_hz <= 0) throw InputError("sample rate must be positive");
  if (rec.channels.size() < 2) {
    throw InputError("recording has fewer than 2 channels");
  }
  const size_t n = rec.channels.front().size();
  if (n == 0) throw InputError("zero-length audio");
  for (const auto& ch : rec.channels) {
    if (ch.size() != n) throw InputError("channels have unequal length");
  }
}

DeviceRecording LoadWav(const std::string& path, int device_id,
                        size_t min_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open WAV file: " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw InputError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = data + pos;
    const size_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    const size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw InputError("truncated fmt chunk: " + path);
      format = ReadU16(data + body);
      channels = ReadU16(data + body + 2);
      rate = ReadU32(data + body + 4);
      bits = ReadU16(data + body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw InputError("truncated extensible fmt: " + path);
        format = ReadU16(data + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data + body;
      pcm_bytes = avail;
    }
    pos = body + size + (size & 1);
  }
  if (format == 0 || pcm == nullptr) {
    throw InputError("missing fmt or data chunk: " + path);
  }
  const bool int_ok =
      format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!int_ok && !float_ok) {
    throw InputError("unsupported WAV encoding (format " +
                     std::to_string(format) + ", " + std::to_string(bits) +
                     " bits): " + path);
  }
  if (channels < min_channels || channels == 0) {
    throw InputError("recording has fewer than " + std::to_string(min_channels) +
                     " channels: " + path);
  }
  if (rate == 0) throw InputError("zero sample rate: " + path);

  const size_t width = bits / 8;
  const size_t frames = pcm_bytes / (width * channels);
  if (frames == 0) throw InputError("zero-length audio: " + path);

  DeviceRecording rec;
  rec.device_id = device_id;
  rec.sample_rate_hz = static_cast<int>(rate);
  rec.channels.assign(channels, std::vector<double>(frames));
  for (size_t t = 0; t < frames; ++t) {
    for (size_t m = 0; m < channels; ++m) {
      rec.channels[m][t] =
          DecodeSample(pcm + (t * channels + m) * width, format, bits);
    }
  }
  return rec;
}

void WriteWav(const std::string& path, const DeviceRecording& rec,
              WavEncoding encoding) {
  const uint16_t channels = static_cast<uint16_t>(rec.num_channels());
  const uint16_t bits = encoding == WavEncoding::kPcm16   ? 16
                        : encoding == WavEncoding::kPcm24 ? 24
                                                          : 32;
  const uint16_t format =
      encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm;
  const size_t frames = rec.num_samples();
  const uint32_t data_bytes =
      static_cast<uint32_t>(frames * channels * (bits / 8));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, format);
  PutU16(&out, channels);
  PutU32(&out, static_cast<uint32_t>(rec.sample_rate_hz));
  PutU32(&out, static_cast<uint32_t>(rec.sample_rate_hz) * channels * (bits / 8));
  PutU16(&out, static_cast<uint16_t>(channels * (bits / 8)));
  PutU16(&out, bits);
  out += "data";
  PutU32(&out, data_bytes);
  for (size_t t = 0; t < frames; ++t) {
    for (size_t m = 0; m < channels; ++m) {
      const double x = rec.channels[m][t];
      if (encoding == WavEncoding::kFloat32) {
        const float f = static_cast<float>(x);
        uint32_t u;
        std::memcpy(&u, &f, sizeof(u));
        PutU32(&out, u);
      } else {
        const double scale = bits == 16 ? 32768.0 : 8388608.0;
        const double lo = -scale, hi = scale - 1.0;
        const auto v =
            static_cast<int32_t>(std::clamp(std::round(x * scale), lo, hi));
        out.push_back(static_cast<char>(v & 0xFF));
        out.push_back(static_cast<char>((v >> 8) & 0xFF));
        if (bits == 24) out.push_back(static_cast<char>((v >> 16) & 0xFF));
      }
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write WAV file: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::vector<double> ResampleChannel(const std::vector<double>& x,
                                    int source_hz, int target_hz) {
  if (target_hz <= 0) throw InputError("target sample rate must be positive");
  if (target_hz > source_hz) throw InputError("upsampling is not supported");
  if (target_hz == source_hz) return x;

  const int64_t g = std::gcd(source_hz, target_hz);
  const int64_t up = target_hz / g;
  const int64_t down = source_hz / g;
  constexpr int64_t kHalfTaps = 32;  // 64 input samples per output
  constexpr double kBeta = 6.0;
  // Cutoff in cycles per upsampled sample, 85% of the target Nyquist.
  const double cutoff = 0.85 * 0.5 / static_cast<double>(down);
  const int64_t half = kHalfTaps * up;

  std::vector<double> proto(2 * half + 1);
  const double i0_beta = BesselI0(kBeta);
  for (int64_t j = -half; j <= half; ++j) {
    const double r = static_cast<double>(j) / static_cast<double>(half);
    const double arg = 2.0 * cutoff * static_cast<double>(j);
    const double sinc =
        j == 0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double win = BesselI0(kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    proto[j + half] = 2.0 * cutoff * sinc * win;
  }
  // Unit DC gain for every polyphase branch.
  std::vector<double> phase_gain(up, 0.0);
  for (int64_t j = -half; j <= half; ++j) {
    phase_gain[((j % up) + up) % up] += proto[j + half];
  }

  const int64_t n_in = static_cast<int64_t>(x.size());
  const auto n_out = static_cast<int64_t>(
      std::llround(static_cast<double>(n_in) * up / static_cast<double>(down)));
  std::vector<double> y(n_out, 0.0);
  for (int64_t n = 0; n < n_out; ++n) {
    const int64_t t = n * down;  // position on the upsampled grid
    const int64_t first = std::max<int64_t>(0, (t - half + up - 1) / up);
    const int64_t last = std::min<int64_t>(n_in - 1, (t + half) / up);
    const int64_t phase = ((t % up) + up) % up;
    double acc = 0.0;
    for (int64_t i = first; i <= last; ++i) {
      acc += x[i] * proto[t - i * up + half];
    }
    y[n] = acc / phase_gain[phase];
  }
  return y;
}

DeviceRecording Resample(const DeviceRecording& rec, int target_hz) {
  if (target_hz <= 0) throw InputError("target sample rate must be positive");
  if (target_hz > rec.sample_rate_hz) {
    throw InputError("upsampling is not supported");
  }
  DeviceRecording out = rec;
  if (target_hz == rec.sample_rate_hz) return out;
  for (auto& ch : out.channels) {
    ch = ResampleChannel(ch, rec.sample_rate_hz, target_hz);
  }
  out.sample_rate_hz = target_hz;
  out.start_offset_samples = static_cast<int64_t>(std::llround(
      static_cast<double>(rec.start_offset_samples) * target_hz /
      rec.sample_rate_hz));
  return out;
}

}  // namespace sdiar
