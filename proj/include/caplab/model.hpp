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

#include <cstdint>
#include <string>
#include <vector>

#include "caplab/linalg.hpp"
#include "caplab/melspec.hpp"
#include "caplab/rng.hpp"
#include "caplab/text.hpp"

namespace caplab {

/// Desk-scale conditional autoregressive captioner. The encoder side is a
/// linear projection of mean-pooled features; the decoder side predicts the
/// next token from [context ; embedding(previous token)] through one affine
/// map. Word embeddings are randomly initialized and frozen.
struct ToyCaptionModel {
  int vocab_size = 0;   // V
  int embed_dim = 0;    // d
  int feature_dim = 0;  // D, mel bins
  int context_dim = 0;  // D'

  Matrix context_proj;  // D' x D
  Matrix embed;         // V x d, frozen after init
  Matrix out_weights;   // V x (D' + d)
  Vector out_bias;      // V

  static ToyCaptionModel zeros(int vocab, int embed_d, int feature_d, int context_d);
  /// Gaussian init, stddev 0.1, deterministic per rng state.
  static ToyCaptionModel random_init(int vocab, int embed_d, int feature_d,
                                     int context_d, Rng& rng);
};

/// Gradients of the trainable parameters (embeddings are frozen and have
/// no slot here by construction).
struct Gradients {
  Matrix context_proj;
  Matrix out_weights;
  Vector out_bias;

  static Gradients zeros_like(const ToyCaptionModel& model);
  void add_scaled(const Gradients& other, double s);
  void scale(double s);
  bool all_finite() const;
  bool all_zero() const;
};

/// Mean over time frames of each mel bin; the D-dim model input.
Vector pool_features(const MelSpectrogram& mel);

/// context = context_proj * pooled features. Throws on shape mismatch.
Vector encode_context(const ToyCaptionModel& model, const MelSpectrogram& mel);
Vector encode_context_from_features(const ToyCaptionModel& model, const Vector& pooled);

/// Full-vocabulary log-distribution for the next token.
/// Throws std::invalid_argument when prev_token is out of range or the
/// context dimension does not match.
Vector next_token_logprobs(const ToyCaptionModel& model, const Vector& context,
                           int prev_token);

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

/// Teacher-forced label-smoothed cross entropy over one target sequence:
/// loss = -(1/T) sum_t sum_w q(w) log p_t(w), q = (1-eps)*onehot + eps/V.
/// Takes the pooled feature vector so the context projection receives its
/// gradient. eps must be in [0, 1).
LossAndGrads ce_loss_label_smoothed(const ToyCaptionModel& model,
                                    const Vector& pooled_features,
                                    const TokenSequence& target, double eps);

/// One autoregressive step of a sampled sequence.
struct SampledStep {
  int prev_token = 0;
  int token = 0;
};

/// Adds scale * grad of sum_t log p(token_t | prev_t, context) to g, with
/// the distribution renormalized over `allowed_tokens` (empty = full
/// vocabulary). Returns the unscaled summed log-probability.
double accumulate_sequence_logprob_grad(const ToyCaptionModel& model,
                                        const Vector& pooled_features,
                                        const std::vector<SampledStep>& steps,
                                        const std::vector<int>& allowed_tokens,
                                        double scale, Gradients& g);

struct TrainConfig {
  double lr0 = 1e-3;
  int warmup_epochs = 5;
  int decay_every = 10;
  int batch = 32;
  double label_eps = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// First-moment/second-moment accumulators for the trainable tensors.
struct AdamState {
  Gradients m;
  Gradients v;
  long step_count = 0;

  static AdamState zeros_like(const ToyCaptionModel& model);
};

/// Bias-corrected Adam update in place. Throws std::invalid_argument on
/// non-finite gradients.
void adam_step(ToyCaptionModel& model, const Gradients& grads, AdamState& state,
               double lr, const TrainConfig& cfg = TrainConfig{});

/// Warm-up then step decay: epochs 1..warmup ramp linearly to lr0; the
/// rate then drops by 10x every decay_every epochs, first at
/// warmup + decay_every + 1. Epoch is 1-based; epoch < 1 throws.
double lr_at_epoch(const TrainConfig& cfg, int epoch);

/// One clip: pooled features plus its 1..5 encoded captions.
struct CaptionExample {
  Vector features;
  std::vector<TokenSequence> captions;
};
using CaptionDataset = std::vector<CaptionExample>;

/// Teacher-forced training: each step pairs a clip with one of its
/// captions drawn at random; minibatch Adam with the warm-up/decay
/// schedule. Returns mean loss per epoch. Deterministic per seed.
std::vector<double> train_ce(ToyCaptionModel& model, const CaptionDataset& dataset,
                             const TrainConfig& cfg, int epochs, uint64_t seed);

/// Binary checkpoint: dims header + raw little-endian parameter blocks.
/// save/load round trips are byte-exact.
void save_checkpoint(const ToyCaptionModel& model, const std::string& path);
ToyCaptionModel load_checkpoint(const std::string& path);

}  // namespace caplab
