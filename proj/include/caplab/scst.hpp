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
#include <vector>

#include "caplab/decoding.hpp"
#include "caplab/metrics.hpp"
#include "caplab/model.hpp"
#include "caplab/rng.hpp"
#include "caplab/text.hpp"

namespace caplab {

/// One self-critical draw: the sampled rollout, the greedy baseline, and
/// the rewards of both. advantage = r_sample - r_baseline.
struct RewardSample {
  SampleResult sampled;
  DecodeResult baseline;
  double r_sample = 0.0;
  double r_baseline = 0.0;
  double advantage = 0.0;
};

/// CIDEr-D of one candidate under frozen IDF statistics. An empty
/// candidate scores 0 rather than faulting; sampling eos immediately is a
/// legal rollout.
double caption_reward(const WordList& candidate,
                      const std::vector<WordList>& references,
                      const CiderStats& stats);

/// Surrogate gradient for a known rollout: adds
/// -advantage * grad(sum_t log p(w_t)) to g and returns the surrogate loss
/// -advantage * sum_t log p(w_t). A zero advantage leaves g untouched, so
/// sampled == greedy yields bitwise-zero gradients.
double scst_gradient_for_sample(const ToyCaptionModel& model,
                                const Vector& pooled_features,
                                const std::vector<SampledStep>& steps,
                                const std::vector<int>& allowed_tokens,
                                double advantage, Gradients& g);

/// The sampled transitions of a rollout: one (prev, token) pair per drawn
/// token. A horizon-forced eos was never drawn and is excluded.
std::vector<SampledStep> sampled_steps(const SampleResult& sample);

struct ScstStepResult {
  double loss = 0.0;
  Gradients grads;
  RewardSample sample;
};

/// One clip's SCST contribution: draws a single rollout, decodes the
/// greedy baseline, scores both with the frozen-IDF CIDEr-D reward, and
/// accumulates the policy gradient.
ScstStepResult scst_gradient(const ToyCaptionModel& model,
                             const Vector& pooled_features,
                             const std::vector<WordList>& references,
                             const Vocabulary& vocab, const CiderStats& stats,
                             int max_len, Rng& rng);

struct ScstConfig {
  double lr = 5e-5;  // constant; RL uses no warm-up or decay
  int batch = 32;
  int max_len = 22;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// One clip for RL fine-tuning: pooled features plus normalized reference
/// word lists.
struct ScstExample {
  Vector features;
  std::vector<WordList> references;
};
using ScstDataset = std::vector<ScstExample>;

struct ScstEpochLog {
  int epoch = 0;
  double mean_reward = 0.0;  // greedy-baseline reward over the dataset
  double mean_advantage = 0.0;
};

/// Builds the frozen IDF statistics for a dataset's reference sets.
CiderStats freeze_reward_stats(const ScstDataset& dataset);

/// RL fine-tuning: per clip one sampled rollout against the greedy
/// baseline, minibatch Adam at a constant rate, IDF frozen before the
/// first update. Deterministic per seed.
std::vector<ScstEpochLog> train_scst(ToyCaptionModel& model,
                                     const ScstDataset& dataset,
                                     const Vocabulary& vocab,
                                     const ScstConfig& cfg, int epochs,
                                     uint64_t seed);

/// Mean greedy CIDEr-D reward of the model over a dataset; the quantity
/// train_scst logs per epoch.
double mean_greedy_reward(const ToyCaptionModel& model, const ScstDataset& dataset,
                          const Vocabulary& vocab, const CiderStats& stats,
                          int max_len);

}  // namespace caplab
