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

#include "caplab/scst.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace caplab {

namespace {

/// Decoding bans pad and sos, so gradients renormalize over the same set.
std::vector<int> default_allowed(int vocab_size) {
  std::vector<int> allowed;
  allowed.reserve(static_cast<size_t>(vocab_size));
  for (int tok = 0; tok < vocab_size; ++tok) {
    if (tok == Vocabulary::kPadId || tok == Vocabulary::kSosId) continue;
    allowed.push_back(tok);
  }
  return allowed;
}

}  // namespace

double caption_reward(const WordList& candidate,
                      const std::vector<WordList>& references,
                      const CiderStats& stats) {
  if (references.empty()) throw std::invalid_argument("caption_reward: no references");
  if (candidate.empty()) return 0.0;
  return cider_d_score(candidate, references, stats);
}

std::vector<SampledStep> sampled_steps(const SampleResult& sample) {
  std::vector<SampledStep> steps;
  steps.reserve(sample.step_logprobs.size());
  for (size_t i = 0; i < sample.step_logprobs.size(); ++i) {
    steps.push_back({sample.tokens.ids[i], sample.tokens.ids[i + 1]});
  }
  return steps;
}

double scst_gradient_for_sample(const ToyCaptionModel& model,
                                const Vector& pooled_features,
                                const std::vector<SampledStep>& steps,
                                const std::vector<int>& allowed_tokens,
                                double advantage, Gradients& g) {
  if (advantage == 0.0 || steps.empty()) return 0.0;
  const double logprob = accumulate_sequence_logprob_grad(
      model, pooled_features, steps, allowed_tokens, -advantage, g);
  return -advantage * logprob;
}

ScstStepResult scst_gradient(const ToyCaptionModel& model,
                             const Vector& pooled_features,
                             const std::vector<WordList>& references,
                             const Vocabulary& vocab, const CiderStats& stats,
                             int max_len, Rng& rng) {
  if (references.empty()) throw std::invalid_argument("scst_gradient: no references");

  const Vector context = encode_context_from_features(model, pooled_features);
  const DecoderModel decoder = make_decoder(model, context);

  ScstStepResult result;
  result.grads = Gradients::zeros_like(model);
  result.sample.sampled = sample_decode(decoder, max_len, rng);
  result.sample.baseline = greedy_decode(decoder, max_len);

  const WordList sampled_words = decode_to_words(result.sample.sampled.tokens, vocab);
  const WordList baseline_words = decode_to_words(result.sample.baseline.tokens, vocab);
  result.sample.r_sample = caption_reward(sampled_words, references, stats);
  result.sample.r_baseline = caption_reward(baseline_words, references, stats);
  result.sample.advantage = result.sample.r_sample - result.sample.r_baseline;

  result.loss = scst_gradient_for_sample(
      model, pooled_features, sampled_steps(result.sample.sampled),
      default_allowed(model.vocab_size), result.sample.advantage, result.grads);
  return result;
}

CiderStats freeze_reward_stats(const ScstDataset& dataset) {
  std::vector<std::vector<WordList>> reference_sets;
  reference_sets.reserve(dataset.size());
  for (const auto& ex : dataset) reference_sets.push_back(ex.references);
  return CiderStats::from_reference_sets(reference_sets);
}

double mean_greedy_reward(const ToyCaptionModel& model, const ScstDataset& dataset,
                          const Vocabulary& vocab, const CiderStats& stats,
                          int max_len) {
  if (dataset.empty()) throw std::invalid_argument("mean_greedy_reward: empty dataset");
  double sum = 0.0;
  for (const auto& ex : dataset) {
    const Vector context = encode_context_from_features(model, ex.features);
    const DecodeResult greedy = greedy_decode(make_decoder(model, context), max_len);
    sum += caption_reward(decode_to_words(greedy.tokens, vocab), ex.references, stats);
  }
  return sum / static_cast<double>(dataset.size());
}

std::vector<ScstEpochLog> train_scst(ToyCaptionModel& model,
                                     const ScstDataset& dataset,
                                     const Vocabulary& vocab,
                                     const ScstConfig& cfg, int epochs,
                                     uint64_t seed) {
  if (dataset.empty()) throw std::invalid_argument("train_scst: empty dataset");
  for (const auto& ex : dataset) {
    if (ex.references.empty()) {
      throw std::invalid_argument("train_scst: clip without references");
    }
  }
  if (cfg.batch < 1) throw std::invalid_argument("train_scst: batch must be >= 1");
  if (cfg.max_len < 1) throw std::invalid_argument("train_scst: max_len must be >= 1");

  const CiderStats stats = freeze_reward_stats(dataset);

  TrainConfig adam_cfg;
  adam_cfg.adam_beta1 = cfg.adam_beta1;
  adam_cfg.adam_beta2 = cfg.adam_beta2;
  adam_cfg.adam_eps = cfg.adam_eps;

  Rng rng(seed);
  AdamState state = AdamState::zeros_like(model);
  std::vector<ScstEpochLog> logs;
  logs.reserve(static_cast<size_t>(std::max(epochs, 0)));

  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order);
    double reward_sum = 0.0;
    double advantage_sum = 0.0;

    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(cfg.batch)) {
      const size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch));
      Gradients acc = Gradients::zeros_like(model);
      for (size_t i = begin; i < end; ++i) {
        const auto& ex = dataset[order[i]];
        ScstStepResult step = scst_gradient(model, ex.features, ex.references,
                                            vocab, stats, cfg.max_len, rng);
        acc.add_scaled(step.grads, 1.0);
        reward_sum += step.sample.r_baseline;
        advantage_sum += step.sample.advantage;
      }
      acc.scale(1.0 / static_cast<double>(end - begin));
      adam_step(model, acc, state, cfg.lr, adam_cfg);
    }

    ScstEpochLog log;
    log.epoch = epoch;
    log.mean_reward = reward_sum / static_cast<double>(order.size());
    log.mean_advantage = advantage_sum / static_cast<double>(order.size());
    logs.push_back(log);
  }
  return logs;
}

}  // namespace caplab
