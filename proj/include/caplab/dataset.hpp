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

#include "caplab/metrics.hpp"

namespace caplab {

/// One audio clip with its raw (unnormalized) captions. id is the
/// file_name column and must be unique within a split.
struct ClipRecord {
  std::string id;
  std::string audio_path;  // empty until resolved against an audio directory
  std::vector<std::string> captions;
};

struct DatasetSplit {
  std::string name;
  std::vector<ClipRecord> records;
};

/// Clotho-style CSV with header file_name,caption_1,...,caption_5.
/// Faults carry the 1-based row number; duplicate file_name is a fault.
/// Captions are kept raw; normalization happens at use.
DatasetSplit load_clotho_csv(const std::string& path);

/// Same layout with captions_per_clip caption columns (AudioCaps-style
/// training files have one).
DatasetSplit load_caption_csv(const std::string& path, int captions_per_clip);

/// Canonical writer (quotes only when needed, "" escaping, \n endings).
/// load_caption_csv(save_caption_csv(x)) preserves every record exactly.
/// All records must have the same caption count.
void save_caption_csv(const DatasetSplit& split, const std::string& path);

/// a-then-b concatenation. Colliding ids are a fault.
DatasetSplit merge_splits(const DatasetSplit& a, const DatasetSplit& b);

/// Number of captions containing the phrase as a contiguous word run,
/// counted once per caption. The phrase must be nonempty.
int phrase_count(const std::vector<WordList>& captions, const WordList& phrase);

/// Number of clips where any caption (normalized) contains the phrase.
int clip_phrase_count(const DatasetSplit& split, const WordList& phrase);

}  // namespace caplab
