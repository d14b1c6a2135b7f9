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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "caplab/pipeline.hpp"

namespace {

void add_feature_flags(CLI::App* cmd, caplab::FeatureOptions& features) {
  cmd->add_flag("--spec-augment,!--no-spec-augment", features.spec_augment,
                "Apply SpecAugment masking during feature extraction");
  cmd->add_option("--mel-bins", features.mel.mel_bins, "Mel filter count")
      ->capture_default_str();
  cmd->add_option("--window", features.mel.window,
                  "Analysis window length in samples (power of two)")
      ->capture_default_str();
  cmd->add_option("--hop", features.mel.hop, "Hop size in samples")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"caplab: caption metrics, decoding, and training at desk scale"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file (flags override)");

  caplab::EvaluateOptions eval_opt;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against references");
  evaluate->add_option("--predictions", eval_opt.predictions_path,
                       "Predictions file; holds joined results when --references is absent")
      ->required();
  evaluate->add_option("--references", eval_opt.references_path, "References file");
  evaluate->add_option("--spice", eval_opt.spice_path,
                       "External SPICE score file ({\"corpus\": x})");
  evaluate->add_option("--output", eval_opt.output_path, "Also write the report here");
  evaluate->callback([&]() { std::cout << caplab::run_evaluate(eval_opt); });

  caplab::TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "Cross-entropy training");
  train->add_option("--captions", train_opt.captions_csv, "Captions CSV")->required();
  train->add_option("--audio-dir", train_opt.audio_dir, "Directory with the clips")
      ->required();
  train->add_option("--run-dir", train_opt.run_dir, "Artifact directory")
      ->capture_default_str();
  train->add_option("--captions-per-clip", train_opt.captions_per_clip,
                    "Caption columns in the CSV")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  train->add_option("--epochs", train_opt.epochs, "Training epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--seed", train_opt.seed, "Master seed")->capture_default_str();
  train->add_option("--batch", train_opt.train.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--lr", train_opt.train.lr0, "Initial learning rate")
      ->capture_default_str();
  train->add_option("--eps-label-smoothing", train_opt.train.label_eps,
                    "Label smoothing weight in [0,1)")
      ->capture_default_str();
  train->add_option("--embed-dim", train_opt.embed_dim, "Word embedding size")
      ->capture_default_str();
  train->add_option("--context-dim", train_opt.context_dim, "Context vector size")
      ->capture_default_str();
  train->add_option("--init-checkpoint", train_opt.init_checkpoint,
                    "Warm-start checkpoint");
  train->add_option("--vocab", train_opt.vocab_path,
                    "Existing vocabulary instead of building one");
  add_feature_flags(train, train_opt.features);
  train->callback([&]() {
    std::cout << "checkpoint: " << caplab::run_train(train_opt) << "\n";
  });

  caplab::RlOptions rl_opt;
  auto* rl = app.add_subcommand("rl-finetune", "Self-critical fine-tuning");
  rl->add_option("--captions", rl_opt.captions_csv, "Captions CSV")->required();
  rl->add_option("--audio-dir", rl_opt.audio_dir, "Directory with the clips")->required();
  rl->add_option("--run-dir", rl_opt.run_dir, "Artifact directory")->capture_default_str();
  rl->add_option("--captions-per-clip", rl_opt.captions_per_clip,
                 "Caption columns in the CSV")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  rl->add_option("--epochs", rl_opt.epochs, "Fine-tuning epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  rl->add_option("--seed", rl_opt.seed, "Master seed")->capture_default_str();
  rl->add_option("--lr", rl_opt.scst.lr, "Constant learning rate")->capture_default_str();
  rl->add_option("--batch", rl_opt.scst.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rl->add_option("--max-len", rl_opt.scst.max_len, "Longest generated caption")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rl->add_option("--reward", rl_opt.reward, "Reward metric")
      ->check(CLI::IsMember({"cider"}))
      ->capture_default_str();
  rl->add_option("--init-checkpoint", rl_opt.init_checkpoint, "Starting checkpoint")
      ->required();
  rl->add_option("--vocab", rl_opt.vocab_path, "Vocabulary file")->required();
  add_feature_flags(rl, rl_opt.features);
  rl->callback([&]() {
    std::cout << "checkpoint: " << caplab::run_rl_finetune(rl_opt) << "\n";
  });

  caplab::DecodeOptions decode_opt;
  auto* decode = app.add_subcommand("decode", "Caption every clip in a directory");
  decode->add_option("--checkpoint", decode_opt.checkpoint, "Model checkpoint")->required();
  decode->add_option("--vocab", decode_opt.vocab_path, "Vocabulary file")->required();
  decode->add_option("--audio-dir", decode_opt.audio_dir, "Directory with the clips")
      ->required();
  decode->add_option("--output", decode_opt.output_path, "Predictions file")->required();
  decode->add_option("--beam", decode_opt.beam, "Beam width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  decode->add_option("--max-len", decode_opt.max_len, "Longest generated caption")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_feature_flags(decode, decode_opt.features);
  decode->callback([&]() {
    const int n = caplab::run_decode(decode_opt);
    std::cout << "decoded " << n << " clips: " << decode_opt.output_path << "\n";
  });

  caplab::StatsOptions stats_opt;
  auto* stats = app.add_subcommand("stats", "Caption phrase statistics");
  stats->add_option("--captions", stats_opt.captions_csv, "Captions CSV")->required();
  stats->add_option("--captions-per-clip", stats_opt.captions_per_clip,
                    "Caption columns in the CSV")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  stats->add_option("--phrase", stats_opt.phrase, "Phrase to count")->required();
  stats->callback([&]() {
    const caplab::StatsReport report = caplab::run_stats(stats_opt);
    std::cout << "clips: " << report.total_clips << "\n"
              << "captions: " << report.total_captions << "\n"
              << "captions_matching: " << report.captions_matching << "\n"
              << "clips_matching: " << report.clips_matching << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
