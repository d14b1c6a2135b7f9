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

#include "caplab/melspec.hpp"
#include "caplab/model.hpp"
#include "caplab/scst.hpp"

namespace caplab {

/// Run orchestration behind the CLI commands. Every run funnels its
/// randomness through one master seed, so identical options produce
/// byte-identical artifacts.

struct FeatureOptions {
  MelConfig mel;
  bool spec_augment = false;
  int f_masks = 2;
  int t_masks = 2;
  size_t max_f = 8;
  // Time-mask bound is 10% of each clip's frames, clamped to valid range.
};

struct EvaluateOptions {
  std::string predictions_path;  // predictions, or joined results when
                                 // references_path is empty
  std::string references_path;
  std::string spice_path;
  std::string output_path;
};

/// Computes the metric report; returns the formatted text (also written to
/// output_path when set).
std::string run_evaluate(const EvaluateOptions& opt);

struct TrainOptions {
  std::string captions_csv;
  std::string audio_dir;
  std::string run_dir = "run";
  int captions_per_clip = 5;
  int epochs = 30;
  uint64_t seed = 1;
  int embed_dim = 16;
  int context_dim = 16;
  std::string init_checkpoint;  // optional warm start
  std::string vocab_path;       // optional existing vocabulary
  TrainConfig train;
  FeatureOptions features;
};

/// Cross-entropy training run. Writes vocab.txt, checkpoints/model_ce.ckpt
/// and logs/train_log.jsonl under run_dir; returns the checkpoint path.
std::string run_train(const TrainOptions& opt);

struct RlOptions {
  std::string captions_csv;
  std::string audio_dir;
  std::string run_dir = "run_rl";
  int captions_per_clip = 5;
  int epochs = 60;
  uint64_t seed = 1;
  std::string init_checkpoint;  // required
  std::string vocab_path;       // required
  std::string reward = "cider";
  ScstConfig scst;
  FeatureOptions features;
};

/// SCST fine-tuning run. Writes checkpoints/model_rl.ckpt and
/// logs/rl_log.jsonl under run_dir; returns the checkpoint path.
std::string run_rl_finetune(const RlOptions& opt);

struct DecodeOptions {
  std::string checkpoint;
  std::string vocab_path;
  std::string audio_dir;  // every *.wav inside, in filename order
  std::string output_path;
  int beam = 5;
  int max_len = 22;
  FeatureOptions features;
};

/// Decodes a caption per clip into a predictions file; returns clip count.
int run_decode(const DecodeOptions& opt);

struct StatsOptions {
  std::string captions_csv;
  int captions_per_clip = 5;
  std::string phrase;
};

struct StatsReport {
  int total_clips = 0;
  int total_captions = 0;
  int captions_matching = 0;
  int clips_matching = 0;
};

/// Phrase statistics over a captions file (phrase matching is on
/// normalized words).
StatsReport run_stats(const StatsOptions& opt);

}  // namespace caplab
