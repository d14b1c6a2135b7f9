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

#include <string>
#include <vector>

#include "caplab/dataset.hpp"
#include "caplab/metrics.hpp"

namespace caplab {

/// Line-delimited JSON interchange between the pipeline stages. One
/// object per line; parse faults carry the line number.

/// {"id": ..., "caption": ...} -- decoder output.
struct PredictionRecord {
  std::string id;
  std::string caption;
};

/// {"id": ..., "captions": [...]} -- ground truth for evaluation.
struct ReferenceRecord {
  std::string id;
  std::vector<std::string> captions;
};

/// {"id": ..., "candidate": ..., "references": [...]} -- a joined result.
struct ResultRecord {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;
};

std::vector<PredictionRecord> load_predictions(const std::string& path);
void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::string& path);

std::vector<ReferenceRecord> load_references(const std::string& path);
void save_references(const std::vector<ReferenceRecord>& records,
                     const std::string& path);

std::vector<ResultRecord> load_results(const std::string& path);
void save_results(const std::vector<ResultRecord>& records, const std::string& path);

/// Joins predictions with references by id, in prediction order. Ids
/// missing on either side are a fault that lists them.
std::vector<ResultRecord> join_predictions(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<ReferenceRecord>& references);

/// Normalizes candidates and references into metric-ready instances.
std::vector<EvalInstance> to_eval_instances(const std::vector<ResultRecord>& results);

/// Reference records straight from a loaded dataset split.
std::vector<ReferenceRecord> references_from_split(const DatasetSplit& split);

/// Corpus-level SPICE from an external tool: a JSON object {"corpus": x}.
double load_spice_score(const std::string& path);

}  // namespace caplab
