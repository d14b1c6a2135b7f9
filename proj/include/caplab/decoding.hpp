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

#include <functional>
#include <vector>

#include "caplab/linalg.hpp"
#include "caplab/rng.hpp"
#include "caplab/text.hpp"

namespace caplab {

struct ToyCaptionModel;

/// Full-vocabulary next-token log-probabilities for a prefix. prefix[0] is
/// always the sos id; the callback may ignore all but the last element.
using StepScorer = std::function<Vector(const std::vector<int>& prefix)>;

/// Everything the decoders need to know about a model: vocabulary size,
/// framing ids, tokens that are never emitted, and the scorer itself.
struct DecoderModel {
  int vocab_size = 0;
  int sos_id = 0;
  int eos_id = 0;
  std::vector<int> banned;
  StepScorer logprobs;
};

/// A partial or complete decode. logprob is the sum of per-step
/// log-probabilities of every token after sos, including the terminating
/// eos whether chosen or appended at the horizon.
struct Hypothesis {
  TokenSequence tokens;
  double logprob = 0.0;
  bool finished = false;
};

struct DecodeResult {
  TokenSequence tokens;
  double logprob = 0.0;
};

/// Sets banned entries to -inf and renormalizes the rest in place.
/// Throws std::invalid_argument when nothing survives the mask.
void mask_and_renormalize(Vector& logp, const std::vector<int>& banned);

/// Argmax decoding, ties to the lowest token index. Stops at eos or after
/// max_len interior tokens, in which case eos is appended and its
/// log-probability added. max_len must be >= 1.
DecodeResult greedy_decode(const DecoderModel& model, int max_len);

/// Beam search on summed logprob with no length normalization. Runs
/// widening passes of width 1..beam into one shared completion pool, so
/// the returned logprob never drops below greedy's and never decreases as
/// beam grows. beam = 1 reproduces greedy_decode token for token.
DecodeResult beam_decode(const DecoderModel& model, int beam, int max_len);

/// One multinomial rollout. step_logprobs holds one entry per sampled
/// token; an eos appended at the horizon is part of tokens but was never
/// drawn, so it contributes no entry (the recorded probabilities of all
/// possible rollouts then sum to exactly 1).
struct SampleResult {
  TokenSequence tokens;
  std::vector<double> step_logprobs;
  bool eos_forced = false;

  double logprob_sum() const;
};

/// Temperature-1 multinomial sampling via inverse CDF in token order.
/// Deterministic per rng state.
SampleResult sample_decode(const DecoderModel& model, int max_len, Rng& rng);

/// Adapter for the toy captioner with a fixed context. pad and sos are
/// banned by default so decoded sequences are always valid TokenSequences.
/// Holds a reference: the model must outlive the returned decoder.
DecoderModel make_decoder(const ToyCaptionModel& model, const Vector& context,
                          std::vector<int> banned = {Vocabulary::kPadId,
                                                     Vocabulary::kSosId});

}  // namespace caplab
