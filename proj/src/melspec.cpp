// Copyright 2026 The caplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "caplab/melspec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "caplab/rng.hpp"

namespace caplab {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void fft(std::vector<std::complex<double>>& data) {
  const size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft size must be a power of two, got " +
                                std::to_string(n));
  }
  // bit reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = data[i + k];
        std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(size_t mel_bins, size_t n_fft,
                                                double sample_rate) {
  const size_t n_bins = n_fft / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  // mel_bins + 2 edge frequencies, uniform in mel
  std::vector<double> edges(mel_bins + 2);
  for (size_t k = 0; k < edges.size(); ++k) {
    edges[k] = mel_to_hz(mel_max * static_cast<double>(k) /
                         static_cast<double>(mel_bins + 1));
  }

  std::vector<std::vector<double>> bank(mel_bins, std::vector<double>(n_bins, 0.0));
  for (size_t m = 0; m < mel_bins; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      if (f <= lo || f >= hi) continue;
      bank[m][k] = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
    }
  }
  return bank;
}

MelSpectrogram log_mel(const std::vector<double>& audio, double sample_rate,
                       const MelConfig& config) {
  if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be > 0");
  if (!is_power_of_two(config.window)) {
    throw std::invalid_argument("window length must be a power of two");
  }
  if (config.hop == 0) throw std::invalid_argument("hop must be > 0");
  if (audio.size() < config.window) {
    throw std::invalid_argument("audio shorter than one analysis window (" +
                                std::to_string(audio.size()) + " < " +
                                std::to_string(config.window) + " samples)");
  }

  const size_t n = config.window;
  const size_t frames = 1 + (audio.size() - n) / config.hop;
  const size_t n_bins = n / 2 + 1;

  std::vector<double> window(n);
  for (size_t i = 0; i < n; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                      static_cast<double>(n)));
  }
  auto bank = mel_filterbank(config.mel_bins, n, sample_rate);

  MelSpectrogram m;
  m.frames = frames;
  m.bins = config.mel_bins;
  m.sample_rate = sample_rate;
  m.hop = config.hop;
  m.values.assign(frames * config.mel_bins, 0.0);

  std::vector<std::complex<double>> buf(n);
  std::vector<double> power(n_bins);
  for (size_t t = 0; t < frames; ++t) {
    const size_t start = t * config.hop;
    for (size_t i = 0; i < n; ++i) {
      buf[i] = std::complex<double>(audio[start + i] * window[i], 0.0);
    }
    fft(buf);
    for (size_t k = 0; k < n_bins; ++k) power[k] = std::norm(buf[k]);
    for (size_t b = 0; b < config.mel_bins; ++b) {
      double energy = 0.0;
      for (size_t k = 0; k < n_bins; ++k) energy += bank[b][k] * power[k];
      m.at(t, b) = std::log(std::max(energy, config.log_floor));
    }
  }
  return m;
}

MelSpectrogram spec_augment(const MelSpectrogram& m, uint64_t rng_seed,
                            int f_masks, int t_masks, size_t max_f, size_t max_t) {
  if (f_masks < 0 || t_masks < 0) {
    throw std::invalid_argument("mask counts must be non-negative");
  }
  if (f_masks > 0 && max_f >= m.bins) {
    throw std::invalid_argument("frequency mask bound exceeds bin count");
  }
  if (t_masks > 0 && max_t >= m.frames) {
    throw std::invalid_argument("time mask bound exceeds frame count");
  }

  MelSpectrogram out = m;
  if (m.values.empty()) return out;

  double mean = 0.0;
  for (double v : m.values) mean += v;
  mean /= static_cast<double>(m.values.size());

  Rng rng(rng_seed);
  for (int i = 0; i < f_masks; ++i) {
    const size_t width = rng.uniform_below(max_f + 1);
    const size_t start = rng.uniform_below(m.bins - width + 1);
    for (size_t t = 0; t < m.frames; ++t) {
      for (size_t b = start; b < start + width; ++b) out.at(t, b) = mean;
    }
  }
  for (int i = 0; i < t_masks; ++i) {
    const size_t width = rng.uniform_below(max_t + 1);
    const size_t start = rng.uniform_below(m.frames - width + 1);
    for (size_t t = start; t < start + width; ++t) {
      for (size_t b = 0; b < m.bins; ++b) out.at(t, b) = mean;
    }
  }
  return out;
}

namespace {

struct WavFormat {
  uint16_t audio_format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) {
    throw std::runtime_error(path + ": not a RIFF file");
  }
  read_u32(in);  // chunk size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) {
    throw std::runtime_error(path + ": not a WAVE file");
  }

  WavFormat fmt;
  bool have_fmt = false;
  AudioClip clip;

  while (in.read(tag, 4)) {
    uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error(path + ": malformed fmt chunk");
      fmt.audio_format = read_u16(in);
      fmt.channels = read_u16(in);
      fmt.sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      fmt.bits_per_sample = read_u16(in);
      in.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error(path + ": data chunk before fmt");
      if (fmt.channels != 1) {
        throw std::runtime_error(path + ": only mono supported, got " +
                                 std::to_string(fmt.channels) + " channels");
      }
      if (fmt.audio_format == 1 && fmt.bits_per_sample == 16) {
        const size_t count = size / 2;
        clip.samples.resize(count);
        for (size_t i = 0; i < count; ++i) {
          int16_t s = static_cast<int16_t>(read_u16(in));
          clip.samples[i] = static_cast<double>(s) / 32768.0;
        }
      } else if (fmt.audio_format == 3 && fmt.bits_per_sample == 32) {
        const size_t count = size / 4;
        clip.samples.resize(count);
        for (size_t i = 0; i < count; ++i) {
          uint32_t bits = read_u32(in);
          float f;
          std::memcpy(&f, &bits, sizeof(f));
          clip.samples[i] = static_cast<double>(f);
        }
      } else {
        throw std::runtime_error(path + ": unsupported format (need 16-bit PCM or 32-bit float)");
      }
      if (size & 1) in.ignore(1);
      clip.sample_rate = static_cast<double>(fmt.sample_rate);
      if (!in) throw std::runtime_error(path + ": truncated data chunk");
      return clip;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  throw std::runtime_error(path + ": no data chunk found");
}

namespace {

void write_wav_header(std::ostream& out, uint32_t sample_rate, uint16_t audio_format,
                      uint16_t bits, uint32_t data_bytes) {
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, audio_format);
  write_u16(out, 1);  // mono
  write_u32(out, sample_rate);
  write_u32(out, sample_rate * bits / 8);
  write_u16(out, static_cast<uint16_t>(bits / 8));
  write_u16(out, bits);
  out.write("data", 4);
  write_u32(out, data_bytes);
}

}  // namespace

void write_wav_pcm16(const std::string& path, const std::vector<double>& samples,
                     uint32_t sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open wav file for write: " + path);
  write_wav_header(out, sample_rate, 1, 16, static_cast<uint32_t>(samples.size() * 2));
  for (double s : samples) {
    double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    auto v = static_cast<int16_t>(std::lrint(clamped * 32768.0));
    write_u16(out, static_cast<uint16_t>(v));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       uint32_t sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open wav file for write: " + path);
  write_wav_header(out, sample_rate, 3, 32, static_cast<uint32_t>(samples.size() * 4));
  for (double s : samples) {
    float f = static_cast<float>(s);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    write_u32(out, bits);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {
constexpr char kMelMagic[4] = {'M', 'E', 'L', 'S'};
constexpr uint32_t kMelVersion = 1;
}  // namespace

void save_mel(const MelSpectrogram& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open mel file for write: " + path);
  out.write(kMelMagic, 4);
  write_u32(out, kMelVersion);
  write_u32(out, static_cast<uint32_t>(m.frames));
  write_u32(out, static_cast<uint32_t>(m.bins));
  write_f64(out, m.sample_rate);
  write_u32(out, static_cast<uint32_t>(m.hop));
  for (double v : m.values) write_f64(out, v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MelSpectrogram load_mel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mel file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMelMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a mel spectrogram file");
  }
  uint32_t version = read_u32(in);
  if (version != kMelVersion) {
    throw std::runtime_error(path + ": unsupported mel file version " +
                             std::to_string(version));
  }
  MelSpectrogram m;
  m.frames = read_u32(in);
  m.bins = read_u32(in);
  m.sample_rate = read_f64(in);
  m.hop = read_u32(in);
  m.values.resize(m.frames * m.bins);
  for (double& v : m.values) v = read_f64(in);
  if (!in) throw std::runtime_error(path + ": truncated mel file");
  return m;
}

}  // namespace caplab
