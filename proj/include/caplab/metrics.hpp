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

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace caplab {

using WordList = std::vector<std::string>;

/// One candidate caption with its 1..5 reference captions, all normalized.
struct EvalInstance {
  WordList candidate;
  std::vector<WordList> references;
};

/// Corpus-level scores. spice comes from an external tool when present;
/// spider is filled only when spice is.
struct MetricReport {
  double bleu[4] = {0, 0, 0, 0};  // bleu[n-1] = BLEU_n
  double rouge_l = 0;
  double meteor_lite = 0;
  double cider = 0;
  std::optional<double> spice;
  std::optional<double> spider;
};

/// Corpus BLEU_1..BLEU_max_n with corpus-pooled clipped counts, uniform
/// 1/n weights and the closest-reference-length brevity penalty.
/// Throws std::invalid_argument for an empty corpus or max_n outside 1..4.
std::vector<double> bleu(const std::vector<EvalInstance>& instances, int max_n = 4);

/// Mean over instances of the best-per-reference LCS F-measure (beta = 1.2).
double rouge_l(const std::vector<EvalInstance>& instances);

/// Exact-match METEOR: one-to-one unigram alignment maximizing matches then
/// minimizing chunks; F_mean = 10PR/(R+9P), penalty = 0.5*(chunks/matches)^3.
/// No stemming or synonym matching, hence the _lite suffix.
double meteor_lite(const std::vector<EvalInstance>& instances);

/// Document frequencies of 1..4-grams over a corpus of reference sets
/// (one document = one reference set). Frozen stats make CIDEr usable as
/// a stationary reward.
class CiderStats {
 public:
  static constexpr int kMaxOrder = 4;

  static CiderStats from_reference_sets(const std::vector<std::vector<WordList>>& reference_sets);

  size_t num_docs() const { return num_docs_; }
  double log_num_docs() const;

  /// Count of documents containing the n-gram (words joined by '\x1f').
  double doc_frequency(int order, const std::string& key) const;

 private:
  std::array<std::unordered_map<std::string, int>, kMaxOrder> df_;
  size_t num_docs_ = 0;
};

/// CIDEr-D score of a single candidate against its references under the
/// given IDF statistics: per-order clipped TF-IDF cosine with the Gaussian
/// length penalty (sigma = 6), averaged over orders and references, x10.
double cider_d_score(const WordList& candidate,
                     const std::vector<WordList>& references,
                     const CiderStats& stats);

/// Corpus CIDEr-D: IDF from this corpus's reference sets, mean of
/// per-instance scores. Throws std::invalid_argument for an empty corpus.
double cider(const std::vector<EvalInstance>& instances);

/// Midpoint of CIDEr and SPICE. Throws std::invalid_argument for negative
/// or non-finite inputs.
double spider_combine(double cider_score, double spice_score);

/// All implemented metrics in one report; spider only when external_spice
/// is supplied.
MetricReport evaluate_corpus(const std::vector<EvalInstance>& instances,
                             std::optional<double> external_spice = std::nullopt);

/// Fixed-key "name: value" lines, 4 decimal places.
std::string format_report(const MetricReport& report);

}  // namespace caplab
