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

#include "caplab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace caplab {

namespace {

constexpr char kNgramSep = '\x1f';

std::string ngram_key(const WordList& words, size_t start, int order) {
  std::string key = words[start];
  for (int k = 1; k < order; ++k) {
    key.push_back(kNgramSep);
    key += words[start + static_cast<size_t>(k)];
  }
  return key;
}

std::unordered_map<std::string, int> ngram_counts(const WordList& words, int order) {
  std::unordered_map<std::string, int> counts;
  if (words.size() < static_cast<size_t>(order)) return counts;
  for (size_t i = 0; i + static_cast<size_t>(order) <= words.size(); ++i) {
    ++counts[ngram_key(words, i, order)];
  }
  return counts;
}

void check_instances(const std::vector<EvalInstance>& instances) {
  if (instances.empty()) {
    throw std::invalid_argument("metric computation needs a nonempty corpus");
  }
  for (size_t i = 0; i < instances.size(); ++i) {
    size_t n_refs = instances[i].references.size();
    if (n_refs < 1 || n_refs > 5) {
      throw std::invalid_argument("instance " + std::to_string(i) + " has " +
                                  std::to_string(n_refs) +
                                  " references, expected 1..5");
    }
  }
}

size_t lcs_length(const WordList& a, const WordList& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Exact unigram alignment: maximize matches, then adjacency links
// (chunks = matches - links). Memoized DFS over candidate positions with a
// used-reference bitmask; a node budget keeps pathological repetition
// bounded, falling back to the best complete alignment found.
class MeteorAligner {
 public:
  MeteorAligner(const WordList& cand, const WordList& ref)
      : cand_(cand), ref_(ref) {}

  // {matches, chunks}
  std::pair<int, int> align() {
    if (ref_.size() > 48 || cand_.size() > 63) return greedy_align();
    auto [matches, links] = search(0, 0, -1);
    if (budget_exhausted_) return greedy_align();
    return {matches, matches - links};
  }

 private:
  using Score = std::pair<int, int>;  // (matches, links), lexicographic

  Score search(size_t i, uint64_t used, int prev) {
    if (i == cand_.size()) return {0, 0};
    if (++nodes_ > kNodeBudget) budget_exhausted_ = true;
    if (budget_exhausted_) return {0, 0};

    // bijective for ref <= 48 and cand <= 63 (guarded in align())
    uint64_t key = used | (static_cast<uint64_t>(i) << 48) |
                   (static_cast<uint64_t>(prev + 1) << 54);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    Score best = search(i + 1, used, -1);  // leave c_i unmatched
    for (size_t j = 0; j < ref_.size(); ++j) {
      if ((used >> j) & 1) continue;
      if (ref_[j] != cand_[i]) continue;
      Score sub = search(i + 1, used | (1ull << j), static_cast<int>(j));
      Score opt{sub.first + 1,
                sub.second + (prev >= 0 && j == static_cast<size_t>(prev) + 1 ? 1 : 0)};
      if (opt > best) best = opt;
    }
    memo_.emplace(key, best);
    return best;
  }

  // Deterministic fallback: left-to-right, extend the current chunk when
  // possible, otherwise take the lowest unused reference slot.
  std::pair<int, int> greedy_align() {
    std::vector<bool> used(ref_.size(), false);
    int matches = 0, chunks = 0, prev = -2;
    for (size_t i = 0; i < cand_.size(); ++i) {
      int pick = -1;
      if (prev >= -1 && static_cast<size_t>(prev + 1) < ref_.size() &&
          !used[static_cast<size_t>(prev + 1)] && ref_[static_cast<size_t>(prev + 1)] == cand_[i]) {
        pick = prev + 1;
      } else {
        for (size_t j = 0; j < ref_.size(); ++j) {
          if (!used[j] && ref_[j] == cand_[i]) {
            pick = static_cast<int>(j);
            break;
          }
        }
      }
      if (pick < 0) {
        prev = -2;
        continue;
      }
      used[static_cast<size_t>(pick)] = true;
      ++matches;
      if (pick != prev + 1 || prev == -2) ++chunks;
      prev = pick;
    }
    return {matches, chunks};
  }

  static constexpr size_t kNodeBudget = 4'000'000;
  const WordList& cand_;
  const WordList& ref_;
  std::unordered_map<uint64_t, Score> memo_;
  size_t nodes_ = 0;
  bool budget_exhausted_ = false;
};

double meteor_single(const WordList& cand, const WordList& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  auto [matches, chunks] = MeteorAligner(cand, ref).align();
  if (matches == 0) return 0.0;
  const double m = matches;
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double frag = static_cast<double>(chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return f_mean * (1.0 - penalty);
}

struct TfIdfVector {
  std::array<std::unordered_map<std::string, double>, CiderStats::kMaxOrder> weights;
  std::array<double, CiderStats::kMaxOrder> norm{};
  double length = 0;
};

TfIdfVector tfidf_vector(const WordList& words, const CiderStats& stats) {
  TfIdfVector vec;
  vec.length = static_cast<double>(words.size());
  const double log_n = stats.log_num_docs();
  for (int order = 1; order <= CiderStats::kMaxOrder; ++order) {
    auto counts = ngram_counts(words, order);
    double sq = 0.0;
    for (const auto& [key, count] : counts) {
      double df = std::log(std::max(1.0, stats.doc_frequency(order, key)));
      double w = static_cast<double>(count) * (log_n - df);
      vec.weights[order - 1][key] = w;
      sq += w * w;
    }
    vec.norm[order - 1] = std::sqrt(sq);
  }
  return vec;
}

constexpr double kCiderSigma = 6.0;

double cider_d_pair(const TfIdfVector& hyp, const TfIdfVector& ref) {
  const double delta = hyp.length - ref.length;
  const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  double sum = 0.0;
  for (int n = 0; n < CiderStats::kMaxOrder; ++n) {
    double val = 0.0;
    for (const auto& [key, hw] : hyp.weights[n]) {
      auto it = ref.weights[n].find(key);
      if (it == ref.weights[n].end()) continue;
      val += std::min(hw, it->second) * it->second;
    }
    if (hyp.norm[n] > 0.0 && ref.norm[n] > 0.0) {
      val /= hyp.norm[n] * ref.norm[n];
    }
    sum += val * penalty;
  }
  return sum / CiderStats::kMaxOrder;
}

}  // namespace

CiderStats CiderStats::from_reference_sets(
    const std::vector<std::vector<WordList>>& reference_sets) {
  CiderStats stats;
  stats.num_docs_ = reference_sets.size();
  for (const auto& refs : reference_sets) {
    for (int order = 1; order <= kMaxOrder; ++order) {
      std::unordered_map<std::string, int> seen;
      for (const auto& ref : refs) {
        for (const auto& [key, count] : ngram_counts(ref, order)) seen[key] = 1;
      }
      for (const auto& [key, one] : seen) stats.df_[order - 1][key] += one;
    }
  }
  return stats;
}

double CiderStats::log_num_docs() const {
  return std::log(std::max<double>(1.0, static_cast<double>(num_docs_)));
}

double CiderStats::doc_frequency(int order, const std::string& key) const {
  if (order < 1 || order > kMaxOrder) {
    throw std::invalid_argument("n-gram order must be 1..4");
  }
  const auto& map = df_[order - 1];
  auto it = map.find(key);
  return it == map.end() ? 0.0 : static_cast<double>(it->second);
}

std::vector<double> bleu(const std::vector<EvalInstance>& instances, int max_n) {
  if (max_n < 1 || max_n > 4) {
    throw std::invalid_argument("bleu max_n must be in 1..4, got " + std::to_string(max_n));
  }
  check_instances(instances);

  std::vector<double> clipped(static_cast<size_t>(max_n), 0.0);
  std::vector<double> total(static_cast<size_t>(max_n), 0.0);
  double cand_len_sum = 0.0, ref_len_sum = 0.0;

  for (const auto& inst : instances) {
    const size_t c_len = inst.candidate.size();
    cand_len_sum += static_cast<double>(c_len);

    // closest reference length; ties go to the shorter reference
    size_t best_ref_len = inst.references[0].size();
    for (const auto& ref : inst.references) {
      size_t r_len = ref.size();
      auto diff = [&](size_t r) {
        return r > c_len ? r - c_len : c_len - r;
      };
      if (diff(r_len) < diff(best_ref_len) ||
          (diff(r_len) == diff(best_ref_len) && r_len < best_ref_len)) {
        best_ref_len = r_len;
      }
    }
    ref_len_sum += static_cast<double>(best_ref_len);

    for (int n = 1; n <= max_n; ++n) {
      auto cand_counts = ngram_counts(inst.candidate, n);
      if (cand_counts.empty()) continue;
      std::unordered_map<std::string, int> max_ref_counts;
      for (const auto& ref : inst.references) {
        for (const auto& [key, count] : ngram_counts(ref, n)) {
          auto& best = max_ref_counts[key];
          best = std::max(best, count);
        }
      }
      for (const auto& [key, count] : cand_counts) {
        total[static_cast<size_t>(n - 1)] += count;
        auto it = max_ref_counts.find(key);
        if (it != max_ref_counts.end()) {
          clipped[static_cast<size_t>(n - 1)] += std::min(count, it->second);
        }
      }
    }
  }

  double brevity = 1.0;
  if (cand_len_sum <= 0.0) {
    brevity = 0.0;
  } else if (cand_len_sum < ref_len_sum) {
    brevity = std::exp(1.0 - ref_len_sum / cand_len_sum);
  }

  std::vector<double> scores(static_cast<size_t>(max_n), 0.0);
  double log_prec_sum = 0.0;
  bool zero_precision = false;
  for (int n = 1; n <= max_n; ++n) {
    size_t k = static_cast<size_t>(n - 1);
    if (clipped[k] <= 0.0 || total[k] <= 0.0) zero_precision = true;
    if (!zero_precision) log_prec_sum += std::log(clipped[k] / total[k]);
    scores[k] = zero_precision ? 0.0 : brevity * std::exp(log_prec_sum / n);
  }
  return scores;
}

double rouge_l(const std::vector<EvalInstance>& instances) {
  check_instances(instances);
  constexpr double kBeta = 1.2;
  double sum = 0.0;
  for (const auto& inst : instances) {
    double best_f = 0.0;
    for (const auto& ref : inst.references) {
      size_t lcs = lcs_length(inst.candidate, ref);
      if (lcs == 0) continue;
      double p = static_cast<double>(lcs) / static_cast<double>(inst.candidate.size());
      double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
      double f = (1.0 + kBeta * kBeta) * p * r / (r + kBeta * kBeta * p);
      best_f = std::max(best_f, f);
    }
    sum += best_f;
  }
  return sum / static_cast<double>(instances.size());
}

double meteor_lite(const std::vector<EvalInstance>& instances) {
  check_instances(instances);
  double sum = 0.0;
  for (const auto& inst : instances) {
    double best = 0.0;
    for (const auto& ref : inst.references) {
      best = std::max(best, meteor_single(inst.candidate, ref));
    }
    sum += best;
  }
  return sum / static_cast<double>(instances.size());
}

double cider_d_score(const WordList& candidate,
                     const std::vector<WordList>& references,
                     const CiderStats& stats) {
  if (references.empty()) {
    throw std::invalid_argument("cider_d_score needs at least one reference");
  }
  TfIdfVector hyp = tfidf_vector(candidate, stats);
  double sum = 0.0;
  for (const auto& ref : references) {
    sum += cider_d_pair(hyp, tfidf_vector(ref, stats));
  }
  return 10.0 * sum / static_cast<double>(references.size());
}

double cider(const std::vector<EvalInstance>& instances) {
  check_instances(instances);
  std::vector<std::vector<WordList>> reference_sets;
  reference_sets.reserve(instances.size());
  for (const auto& inst : instances) reference_sets.push_back(inst.references);
  CiderStats stats = CiderStats::from_reference_sets(reference_sets);

  double sum = 0.0;
  for (const auto& inst : instances) {
    sum += cider_d_score(inst.candidate, inst.references, stats);
  }
  return sum / static_cast<double>(instances.size());
}

double spider_combine(double cider_score, double spice_score) {
  if (!std::isfinite(cider_score) || !std::isfinite(spice_score) ||
      cider_score < 0.0 || spice_score < 0.0) {
    throw std::invalid_argument("spider_combine requires finite non-negative scores");
  }
  return (cider_score + spice_score) / 2.0;
}

MetricReport evaluate_corpus(const std::vector<EvalInstance>& instances,
                             std::optional<double> external_spice) {
  check_instances(instances);
  MetricReport report;
  auto b = bleu(instances, 4);
  for (int n = 0; n < 4; ++n) report.bleu[n] = b[static_cast<size_t>(n)];
  report.rouge_l = rouge_l(instances);
  report.meteor_lite = meteor_lite(instances);
  report.cider = cider(instances);
  if (external_spice.has_value()) {
    report.spice = *external_spice;
    report.spider = spider_combine(report.cider, *external_spice);
  }
  return report;
}

std::string format_report(const MetricReport& report) {
  char buf[64];
  std::string out;
  auto line = [&](const char* key, double value) {
    std::snprintf(buf, sizeof(buf), "%s: %.4f\n", key, value);
    out += buf;
  };
  line("bleu1", report.bleu[0]);
  line("bleu2", report.bleu[1]);
  line("bleu3", report.bleu[2]);
  line("bleu4", report.bleu[3]);
  line("rouge_l", report.rouge_l);
  line("meteor_lite", report.meteor_lite);
  line("cider", report.cider);
  if (report.spice.has_value()) line("spice", *report.spice);
  if (report.spider.has_value()) line("spider", *report.spider);
  return out;
}

}  // namespace caplab
