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

#include "caplab/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "caplab/model.hpp"

namespace caplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_model(const DecoderModel& model, int max_len) {
  if (!model.logprobs) throw std::invalid_argument("decoder has no scorer");
  if (model.vocab_size < 1) throw std::invalid_argument("decoder vocab_size < 1");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  auto in_range = [&](int id) { return id >= 0 && id < model.vocab_size; };
  if (!in_range(model.sos_id) || !in_range(model.eos_id)) {
    throw std::invalid_argument("sos/eos id out of vocabulary range");
  }
  for (int b : model.banned) {
    if (!in_range(b)) throw std::invalid_argument("banned id out of range");
    if (b == model.eos_id) throw std::invalid_argument("eos cannot be banned");
  }
}

Vector scored(const DecoderModel& model, const std::vector<int>& prefix) {
  Vector lp = model.logprobs(prefix);
  if (lp.size() != static_cast<size_t>(model.vocab_size)) {
    throw std::invalid_argument("scorer returned " + std::to_string(lp.size()) +
                                " entries for vocabulary of " +
                                std::to_string(model.vocab_size));
  }
  mask_and_renormalize(lp, model.banned);
  return lp;
}

}  // namespace

void mask_and_renormalize(Vector& logp, const std::vector<int>& banned) {
  for (int b : banned) {
    if (b < 0 || static_cast<size_t>(b) >= logp.size()) {
      throw std::invalid_argument("banned id out of range");
    }
    logp[static_cast<size_t>(b)] = kNegInf;
  }
  double max_lp = kNegInf;
  for (double v : logp) max_lp = std::max(max_lp, v);
  if (max_lp == kNegInf) {
    throw std::invalid_argument("mask removed every token");
  }
  double sum = 0.0;
  for (double v : logp) {
    if (v != kNegInf) sum += std::exp(v - max_lp);
  }
  const double lse = max_lp + std::log(sum);
  for (double& v : logp) {
    if (v != kNegInf) v -= lse;
  }
}

DecodeResult greedy_decode(const DecoderModel& model, int max_len) {
  check_model(model, max_len);
  std::vector<int> prefix{model.sos_id};
  double total = 0.0;
  for (int step = 0; step < max_len; ++step) {
    Vector lp = scored(model, prefix);
    int best = -1;
    for (int tok = 0; tok < model.vocab_size; ++tok) {
      if (lp[static_cast<size_t>(tok)] == kNegInf) continue;
      if (best < 0 || lp[static_cast<size_t>(tok)] > lp[static_cast<size_t>(best)]) {
        best = tok;
      }
    }
    prefix.push_back(best);
    total += lp[static_cast<size_t>(best)];
    if (best == model.eos_id) return {TokenSequence{prefix}, total};
  }
  Vector lp = scored(model, prefix);
  prefix.push_back(model.eos_id);
  total += lp[static_cast<size_t>(model.eos_id)];
  return {TokenSequence{prefix}, total};
}

namespace {

struct BeamItem {
  std::vector<int> prefix;
  double logprob = 0.0;
};

/// One fixed-width pass, banking every completion it produces. Separate
/// passes share the pool so a wider beam keeps everything a narrower one
/// already found.
void beam_pass(const DecoderModel& model, int width, int max_len,
               std::vector<Hypothesis>& pool) {
  std::vector<BeamItem> active{{{model.sos_id}, 0.0}};

  struct Candidate {
    double score;
    int parent;
    int token;
  };

  for (int step = 0; step < max_len && !active.empty(); ++step) {
    std::vector<Candidate> candidates;
    candidates.reserve(active.size() * static_cast<size_t>(model.vocab_size));
    for (size_t pi = 0; pi < active.size(); ++pi) {
      Vector lp = scored(model, active[pi].prefix);
      for (int tok = 0; tok < model.vocab_size; ++tok) {
        const double step_lp = lp[static_cast<size_t>(tok)];
        if (step_lp == kNegInf) continue;
        candidates.push_back({active[pi].logprob + step_lp,
                              static_cast<int>(pi), tok});
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.parent != b.parent) return a.parent < b.parent;
                return a.token < b.token;
              });
    if (candidates.size() > static_cast<size_t>(width)) {
      candidates.resize(static_cast<size_t>(width));
    }

    std::vector<BeamItem> next;
    next.reserve(candidates.size());
    for (const Candidate& c : candidates) {
      BeamItem item;
      item.prefix = active[static_cast<size_t>(c.parent)].prefix;
      item.prefix.push_back(c.token);
      item.logprob = c.score;
      if (c.token == model.eos_id) {
        pool.push_back({TokenSequence{item.prefix}, item.logprob, true});
      } else {
        next.push_back(std::move(item));
      }
    }
    active = std::move(next);
  }

  // Horizon survivors are completed with eos, scored like any other step.
  for (BeamItem& item : active) {
    Vector lp = scored(model, item.prefix);
    item.logprob += lp[static_cast<size_t>(model.eos_id)];
    item.prefix.push_back(model.eos_id);
    pool.push_back({TokenSequence{item.prefix}, item.logprob, true});
  }
}

}  // namespace

DecodeResult beam_decode(const DecoderModel& model, int beam, int max_len) {
  check_model(model, max_len);
  if (beam < 1) throw std::invalid_argument("beam must be >= 1");

  std::vector<Hypothesis> pool;
  for (int width = 1; width <= beam; ++width) {
    beam_pass(model, width, max_len, pool);
  }

  size_t best = 0;
  for (size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].logprob > pool[best].logprob) best = i;
  }
  return {pool[best].tokens, pool[best].logprob};
}

double SampleResult::logprob_sum() const {
  return std::accumulate(step_logprobs.begin(), step_logprobs.end(), 0.0);
}

SampleResult sample_decode(const DecoderModel& model, int max_len, Rng& rng) {
  check_model(model, max_len);
  SampleResult result;
  std::vector<int> prefix{model.sos_id};

  for (int step = 0; step < max_len; ++step) {
    Vector lp = scored(model, prefix);
    const double u = rng.real01();
    double cum = 0.0;
    int pick = -1;
    int last_valid = -1;
    for (int tok = 0; tok < model.vocab_size; ++tok) {
      const double step_lp = lp[static_cast<size_t>(tok)];
      if (step_lp == kNegInf) continue;
      last_valid = tok;
      cum += std::exp(step_lp);
      if (u < cum) {
        pick = tok;
        break;
      }
    }
    if (pick < 0) pick = last_valid;  // rounding left cum slightly below 1
    prefix.push_back(pick);
    result.step_logprobs.push_back(lp[static_cast<size_t>(pick)]);
    if (pick == model.eos_id) {
      result.tokens = TokenSequence{prefix};
      return result;
    }
  }

  prefix.push_back(model.eos_id);
  result.eos_forced = true;
  result.tokens = TokenSequence{prefix};
  return result;
}

DecoderModel make_decoder(const ToyCaptionModel& model, const Vector& context,
                          std::vector<int> banned) {
  DecoderModel decoder;
  decoder.vocab_size = model.vocab_size;
  decoder.sos_id = Vocabulary::kSosId;
  decoder.eos_id = Vocabulary::kEosId;
  decoder.banned = std::move(banned);
  decoder.logprobs = [&model, context](const std::vector<int>& prefix) {
    return next_token_logprobs(model, context, prefix.back());
  };
  return decoder;
}

}  // namespace caplab
