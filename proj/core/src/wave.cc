// core/src/wave.cc

// Copyright 2026  The mixret authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mixret/wave.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mixret {

double mean_power(const Waveform& w) {
  if (w.samples.empty()) throw EmptyWaveform("mean_power: empty waveform");
  long double acc = 0.0L;
  for (double s : w.samples) acc += static_cast<long double>(s) * s;
  return static_cast<double>(acc / static_cast<long double>(w.samples.size()));
}

namespace {

void check_mixable(const Waveform& x1, const Waveform& x2) {
  if (x1.samples.empty() || x2.samples.empty())
    throw EmptyWaveform("mix: empty component");
  if (x1.samples.size() != x2.samples.size())
    throw LengthMismatch("mix: component lengths differ (" +
                         std::to_string(x1.samples.size()) + " vs " +
                         std::to_string(x2.samples.size()) + ")");
  if (x1.sample_rate != x2.sample_rate)
    throw RateMismatch("mix: sample rates differ");
}

MixResult mix_with_gains(const Waveform& x1, const Waveform& x2, double a1,
                         double a2, double snr_db) {
  MixResult out;
  out.a1 = a1;
  out.a2 = a2;
  out.achieved_snr_db = snr_db;
  out.mixture.sample_rate = x1.sample_rate;
  out.mixture.samples.resize(x1.samples.size());
  for (size_t i = 0; i < x1.samples.size(); ++i)
    out.mixture.samples[i] = a1 * x1.samples[i] + a2 * x2.samples[i];
  return out;
}

}  // namespace

MixResult mix_at_snr_unitnoise(const Waveform& x1, const Waveform& x2, double snr_db) {
  check_mixable(x1, x2);
  double p1 = mean_power(x1);
  double p2 = mean_power(x2);
  if (p1 <= 0.0 || p2 <= 0.0)
    throw ZeroPowerComponent("mix_at_snr_unitnoise: zero-power component");
  double r = std::pow(10.0, snr_db / 10.0);
  double a1 = std::sqrt(r / p1);
  double a2 = std::sqrt(1.0 / p2);
  return mix_with_gains(x1, x2, a1, a2, snr_db);
}

MixResult mix_at_snr_scalenoise(const Waveform& clean, const Waveform& noise, double snr_db) {
  check_mixable(clean, noise);
  double p1 = mean_power(clean);
  double p2 = mean_power(noise);
  if (p1 <= 0.0 || p2 <= 0.0)
    throw ZeroPowerComponent("mix_at_snr_scalenoise: zero-power component");
  double r = std::pow(10.0, snr_db / 10.0);
  double a2 = std::sqrt(p1 / (r * p2));
  return mix_with_gains(clean, noise, 1.0, a2, snr_db);
}

// ---------------------------------------------------------------------------
// WAV I/O
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_wav(const Waveform& w, const std::string& path) {
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_bytes = n * 2;
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  put_u32(buf, 36 + data_bytes);
  buf += "WAVE";
  buf += "fmt ";
  put_u32(buf, 16);
  put_u16(buf, 1);  // PCM
  put_u16(buf, 1);  // mono
  put_u32(buf, static_cast<uint32_t>(w.sample_rate));
  put_u32(buf, static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(buf, 2);   // block align
  put_u16(buf, 16);  // bits per sample
  buf += "data";
  put_u32(buf, data_bytes);
  for (double s : w.samples) {
    double clamped = std::clamp(s, -1.0, 1.0);
    int v = static_cast<int>(std::lround(clamped * 32767.0));
    put_u16(buf, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("write_wav: cannot open " + path);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoFailure("write_wav: short write to " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("read_wav: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw UnsupportedFormat("read_wav: not a RIFF/WAVE file: " + path);

  const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data());
  size_t pos = 12;
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;
  while (pos + 8 <= buf.size()) {
    std::string id = buf.substr(pos, 4);
    uint32_t len = get_u32(p + pos + 4);
    size_t body = pos + 8;
    if (body + len > buf.size()) len = static_cast<uint32_t>(buf.size() - body);
    if (id == "fmt " && len >= 16) {
      format = get_u16(p + body);
      channels = get_u16(p + body + 2);
      rate = get_u32(p + body + 4);
      bits = get_u16(p + body + 14);
      have_fmt = true;
    } else if (id == "data") {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data_off == 0)
    throw UnsupportedFormat("read_wav: missing fmt/data chunk: " + path);
  if (format != 1 || bits != 16)
    throw UnsupportedFormat("read_wav: only PCM16 supported: " + path);
  if (channels != 1)
    throw UnsupportedFormat("read_wav: only mono supported: " + path);
  if (rate != kSampleRate)
    throw UnsupportedFormat("read_wav: only 16 kHz accepted, got " +
                            std::to_string(rate) + " Hz: " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  size_t n = data_len / 2;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    int16_t v = static_cast<int16_t>(get_u16(p + data_off + 2 * i));
    w.samples[i] = static_cast<double>(v) / 32767.0;
  }
  return w;
}

}  // namespace mixret
