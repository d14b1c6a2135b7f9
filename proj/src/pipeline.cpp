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

#include "caplab/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "caplab/dataset.hpp"
#include "caplab/decoding.hpp"
#include "caplab/records.hpp"
#include "caplab/rng.hpp"
#include "caplab/text.hpp"

namespace caplab {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;

Vector clip_features(const std::string& wav_path, const FeatureOptions& opt,
                     uint64_t augment_seed) {
  const AudioClip clip = read_wav(wav_path);
  MelSpectrogram mel = log_mel(clip.samples, clip.sample_rate, opt.mel);
  if (opt.spec_augment) {
    const size_t max_f = std::min(opt.max_f, mel.bins - 1);
    size_t max_t = std::max<size_t>(mel.frames / 10, 1);
    max_t = std::min(max_t, mel.frames - 1);
    // A single-frame clip leaves no room for a time mask; skip those.
    const int t_masks = mel.frames > 1 ? opt.t_masks : 0;
    mel = spec_augment(mel, augment_seed, opt.f_masks, t_masks, max_f, max_t);
  }
  return pool_features(mel);
}

/// Features for every record, in record order, with one augmentation
/// stream forked per clip.
std::vector<Vector> split_features(const DatasetSplit& split,
                                   const std::string& audio_dir,
                                   const FeatureOptions& opt, uint64_t seed) {
  Rng feature_rng(seed);
  std::vector<Vector> features;
  features.reserve(split.records.size());
  for (const auto& record : split.records) {
    const fs::path wav = fs::path(audio_dir) / record.id;
    features.push_back(clip_features(wav.string(), opt, feature_rng.fork_seed()));
  }
  return features;
}

void ensure_run_dirs(const std::string& run_dir) {
  fs::create_directories(fs::path(run_dir) / "checkpoints");
  fs::create_directories(fs::path(run_dir) / "logs");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for write");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void check_model_vocab(const ToyCaptionModel& model, const Vocabulary& vocab,
                       const std::string& what) {
  if (model.vocab_size != vocab.size()) {
    throw std::runtime_error(what + ": checkpoint vocabulary size " +
                             std::to_string(model.vocab_size) +
                             " does not match vocabulary of " +
                             std::to_string(vocab.size()));
  }
}

}  // namespace

std::string run_evaluate(const EvaluateOptions& opt) {
  std::vector<ResultRecord> results;
  if (opt.references_path.empty()) {
    results = load_results(opt.predictions_path);
  } else {
    results = join_predictions(load_predictions(opt.predictions_path),
                               load_references(opt.references_path));
  }

  std::optional<double> spice;
  if (!opt.spice_path.empty()) spice = load_spice_score(opt.spice_path);

  const MetricReport report = evaluate_corpus(to_eval_instances(results), spice);
  const std::string text = format_report(report);
  if (!opt.output_path.empty()) write_text(opt.output_path, text);
  return text;
}

std::string run_train(const TrainOptions& opt) {
  const DatasetSplit split = load_caption_csv(opt.captions_csv, opt.captions_per_clip);
  if (split.records.empty()) throw std::runtime_error("training set is empty");

  ensure_run_dirs(opt.run_dir);

  Vocabulary vocab;
  if (!opt.vocab_path.empty()) {
    vocab = load_vocabulary(opt.vocab_path);
  } else {
    std::vector<std::vector<std::string>> normalized;
    for (const auto& record : split.records) {
      for (const auto& caption : record.captions) {
        normalized.push_back(normalize_and_tokenize(caption));
      }
    }
    vocab = build_vocabulary(normalized);
  }
  save_vocabulary(vocab, (fs::path(opt.run_dir) / "vocab.txt").string());

  // Seed order is part of the format: features, then init, then training.
  Rng master(opt.seed);
  const uint64_t feature_seed = master.fork_seed();
  const uint64_t init_seed = master.fork_seed();
  const uint64_t train_seed = master.fork_seed();

  const std::vector<Vector> features =
      split_features(split, opt.audio_dir, opt.features, feature_seed);

  CaptionDataset dataset;
  dataset.reserve(split.records.size());
  for (size_t i = 0; i < split.records.size(); ++i) {
    CaptionExample example;
    example.features = features[i];
    for (const auto& caption : split.records[i].captions) {
      example.captions.push_back(encode(normalize_and_tokenize(caption), vocab));
    }
    dataset.push_back(std::move(example));
  }

  ToyCaptionModel model;
  if (!opt.init_checkpoint.empty()) {
    model = load_checkpoint(opt.init_checkpoint);
    check_model_vocab(model, vocab, "run_train");
  } else {
    Rng init_rng(init_seed);
    model = ToyCaptionModel::random_init(vocab.size(), opt.embed_dim,
                                         static_cast<int>(opt.features.mel.mel_bins),
                                         opt.context_dim, init_rng);
  }

  const std::vector<double> losses =
      train_ce(model, dataset, opt.train, opt.epochs, train_seed);

  std::string log_text;
  for (size_t i = 0; i < losses.size(); ++i) {
    json line{{"epoch", i + 1}, {"loss", losses[i]}};
    log_text += line.dump() + "\n";
  }
  write_text((fs::path(opt.run_dir) / "logs" / "train_log.jsonl").string(), log_text);

  const std::string ckpt = (fs::path(opt.run_dir) / "checkpoints" / "model_ce.ckpt").string();
  save_checkpoint(model, ckpt);
  return ckpt;
}

std::string run_rl_finetune(const RlOptions& opt) {
  if (opt.init_checkpoint.empty() || opt.vocab_path.empty()) {
    throw std::runtime_error("rl-finetune needs --init-checkpoint and --vocab");
  }
  if (opt.reward != "cider") {
    throw std::runtime_error("unsupported reward \"" + opt.reward + "\"");
  }

  const DatasetSplit split = load_caption_csv(opt.captions_csv, opt.captions_per_clip);
  if (split.records.empty()) throw std::runtime_error("fine-tuning set is empty");

  ensure_run_dirs(opt.run_dir);

  const Vocabulary vocab = load_vocabulary(opt.vocab_path);
  ToyCaptionModel model = load_checkpoint(opt.init_checkpoint);
  check_model_vocab(model, vocab, "run_rl_finetune");

  Rng master(opt.seed);
  const uint64_t feature_seed = master.fork_seed();
  const uint64_t scst_seed = master.fork_seed();

  const std::vector<Vector> features =
      split_features(split, opt.audio_dir, opt.features, feature_seed);

  ScstDataset dataset;
  dataset.reserve(split.records.size());
  for (size_t i = 0; i < split.records.size(); ++i) {
    ScstExample example;
    example.features = features[i];
    for (const auto& caption : split.records[i].captions) {
      example.references.push_back(normalize_and_tokenize(caption));
    }
    dataset.push_back(std::move(example));
  }

  const std::vector<ScstEpochLog> logs =
      train_scst(model, dataset, vocab, opt.scst, opt.epochs, scst_seed);

  std::string log_text;
  for (const auto& log : logs) {
    json line{{"epoch", log.epoch},
              {"mean_reward", log.mean_reward},
              {"mean_advantage", log.mean_advantage}};
    log_text += line.dump() + "\n";
  }
  write_text((fs::path(opt.run_dir) / "logs" / "rl_log.jsonl").string(), log_text);

  const std::string ckpt = (fs::path(opt.run_dir) / "checkpoints" / "model_rl.ckpt").string();
  save_checkpoint(model, ckpt);
  return ckpt;
}

int run_decode(const DecodeOptions& opt) {
  if (opt.beam < 1) throw std::runtime_error("beam must be >= 1");
  if (opt.max_len < 1) throw std::runtime_error("max-len must be >= 1");

  const Vocabulary vocab = load_vocabulary(opt.vocab_path);
  const ToyCaptionModel model = load_checkpoint(opt.checkpoint);
  check_model_vocab(model, vocab, "run_decode");

  std::vector<std::string> clips;
  for (const auto& entry : fs::directory_iterator(opt.audio_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      clips.push_back(entry.path().filename().string());
    }
  }
  std::sort(clips.begin(), clips.end());
  if (clips.empty()) {
    throw std::runtime_error("no .wav files found in " + opt.audio_dir);
  }

  FeatureOptions features = opt.features;
  features.spec_augment = false;  // inference is never augmented

  std::vector<PredictionRecord> predictions;
  predictions.reserve(clips.size());
  for (const auto& clip : clips) {
    const fs::path wav = fs::path(opt.audio_dir) / clip;
    const Vector pooled = clip_features(wav.string(), features, 0);
    const Vector context = encode_context_from_features(model, pooled);
    const DecodeResult best = beam_decode(make_decoder(model, context),
                                          opt.beam, opt.max_len);
    const std::vector<std::string> words = decode_to_words(best.tokens, vocab);
    std::string caption;
    for (size_t i = 0; i < words.size(); ++i) {
      if (i) caption += " ";
      caption += words[i];
    }
    predictions.push_back({clip, caption});
  }
  save_predictions(predictions, opt.output_path);
  return static_cast<int>(predictions.size());
}

StatsReport run_stats(const StatsOptions& opt) {
  const WordList phrase = normalize_and_tokenize(opt.phrase);
  if (phrase.empty()) throw std::runtime_error("empty phrase");

  const DatasetSplit split = load_caption_csv(opt.captions_csv, opt.captions_per_clip);

  StatsReport report;
  report.total_clips = static_cast<int>(split.records.size());
  std::vector<WordList> all_captions;
  for (const auto& record : split.records) {
    for (const auto& caption : record.captions) {
      all_captions.push_back(normalize_and_tokenize(caption));
    }
  }
  report.total_captions = static_cast<int>(all_captions.size());
  report.captions_matching = phrase_count(all_captions, phrase);
  report.clips_matching = clip_phrase_count(split, phrase);
  return report;
}

}  // namespace caplab
