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

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace caplab {

/// Time x frequency matrix of log-mel energies, row-major (frame major).
struct MelSpectrogram {
  size_t frames = 0;
  size_t bins = 0;
  double sample_rate = 0;
  size_t hop = 0;
  std::vector<double> values;  // frames * bins

  double& at(size_t frame, size_t bin) { return values[frame * bins + bin]; }
  double at(size_t frame, size_t bin) const { return values[frame * bins + bin]; }
};

struct MelConfig {
  size_t window = 1024;   // Hann window length; power of two
  size_t hop = 512;
  size_t mel_bins = 64;
  double log_floor = 1e-10;
};

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

/// Log-mel spectrogram: periodic Hann window, power spectrum, triangular
/// HTK-scale mel bank from 0 Hz to Nyquist, natural log with floor.
/// Frame count is 1 + floor((len - window)/hop), no padding; audio shorter
/// than one window throws std::invalid_argument.
MelSpectrogram log_mel(const std::vector<double>& audio, double sample_rate,
                       const MelConfig& config = MelConfig{});

/// HTK mel scale, mel = 2595 * log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filter weights: mel_bins rows of (n_fft/2 + 1) columns.
std::vector<std::vector<double>> mel_filterbank(size_t mel_bins, size_t n_fft,
                                                double sample_rate);

/// SpecAugment: f_masks frequency bands (width uniform in 0..max_f) and
/// t_masks time bands (width uniform in 0..max_t), cells set to the
/// pre-mask spectrogram mean. Deterministic per seed; shape preserved.
/// Throws std::invalid_argument when max_f >= bins or max_t >= frames.
MelSpectrogram spec_augment(const MelSpectrogram& m, uint64_t rng_seed,
                            int f_masks, int t_masks, size_t max_f, size_t max_t);

struct AudioClip {
  std::vector<double> samples;
  double sample_rate = 0;
};

/// Mono PCM WAV reader: 16-bit integer or 32-bit IEEE float.
AudioClip read_wav(const std::string& path);

/// 16-bit PCM writer (test fixtures and round trips).
void write_wav_pcm16(const std::string& path, const std::vector<double>& samples,
                     uint32_t sample_rate);
/// 32-bit IEEE float writer.
void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       uint32_t sample_rate);

/// Self-describing binary spectrogram: header (magic, dims, sample rate,
/// hop) then row-major little-endian f64 values.
void save_mel(const MelSpectrogram& m, const std::string& path);
MelSpectrogram load_mel(const std::string& path);

}  // namespace caplab
