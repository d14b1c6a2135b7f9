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

#include "caplab/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "caplab/text.hpp"

namespace caplab {

namespace {

/// RFC-4180-style reader: quoted fields may contain commas, escaped quotes
/// ("") and newlines. Rows are logical records, 1-based, header included.
class CsvReader {
 public:
  explicit CsvReader(std::string content) : content_(std::move(content)) {}

  bool next_row(std::vector<std::string>& fields, int& row_number) {
    if (pos_ >= content_.size()) return false;
    ++row_;
    row_number = row_;
    fields.clear();
    std::string field;
    bool quoted = false;
    while (pos_ < content_.size()) {
      const char c = content_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
          } else {
            quoted = false;
            ++pos_;
          }
        } else {
          field.push_back(c);
          ++pos_;
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
        ++pos_;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        ++pos_;
      } else if (c == '\n' || c == '\r') {
        ++pos_;
        if (c == '\r' && pos_ < content_.size() && content_[pos_] == '\n') ++pos_;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(c);
        ++pos_;
      }
    }
    if (quoted) {
      throw std::runtime_error("row " + std::to_string(row_) +
                               ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string content_;
  size_t pos_ = 0;
  int row_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> expected_header(int captions_per_clip) {
  std::vector<std::string> header{"file_name"};
  for (int i = 1; i <= captions_per_clip; ++i) {
    header.push_back("caption_" + std::to_string(i));
  }
  return header;
}

bool needs_quoting(const std::string& field) {
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return true;
  }
  return false;
}

std::string csv_field(const std::string& field) {
  if (!needs_quoting(field)) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

DatasetSplit load_caption_csv(const std::string& path, int captions_per_clip) {
  if (captions_per_clip < 1 || captions_per_clip > 5) {
    throw std::invalid_argument("captions_per_clip must be in 1..5");
  }

  CsvReader reader(read_file(path));
  std::vector<std::string> fields;
  int row = 0;

  if (!reader.next_row(fields, row)) {
    throw std::runtime_error(path + ": empty file, expected a header row");
  }
  const auto header = expected_header(captions_per_clip);
  if (fields != header) {
    std::string want;
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) want += ",";
      want += header[i];
    }
    throw std::runtime_error(path + ": row 1: bad header, expected \"" + want + "\"");
  }

  DatasetSplit split;
  std::unordered_set<std::string> seen;
  while (reader.next_row(fields, row)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " fields, found " +
                               std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": empty file_name");
    }
    if (!seen.insert(fields[0]).second) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": duplicate file_name \"" + fields[0] + "\"");
    }
    ClipRecord record;
    record.id = fields[0];
    record.captions.assign(fields.begin() + 1, fields.end());
    split.records.push_back(std::move(record));
  }
  return split;
}

DatasetSplit load_clotho_csv(const std::string& path) {
  return load_caption_csv(path, 5);
}

void save_caption_csv(const DatasetSplit& split, const std::string& path) {
  size_t captions = 0;
  for (const auto& record : split.records) {
    if (record.captions.empty()) {
      throw std::invalid_argument("record \"" + record.id + "\" has no captions");
    }
    if (captions == 0) captions = record.captions.size();
    if (record.captions.size() != captions) {
      throw std::invalid_argument("records disagree on caption count");
    }
  }
  if (captions == 0) captions = 5;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for write");
  out << "file_name";
  for (size_t i = 1; i <= captions; ++i) out << ",caption_" << i;
  out << "\n";
  for (const auto& record : split.records) {
    out << csv_field(record.id);
    for (const auto& caption : record.captions) out << "," << csv_field(caption);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetSplit merge_splits(const DatasetSplit& a, const DatasetSplit& b) {
  std::unordered_set<std::string> seen;
  for (const auto& record : a.records) seen.insert(record.id);
  for (const auto& record : b.records) {
    if (seen.count(record.id)) {
      throw std::runtime_error("merge_splits: id collision \"" + record.id + "\"");
    }
  }
  DatasetSplit merged;
  if (a.name.empty()) merged.name = b.name;
  else if (b.name.empty() || a.name == b.name) merged.name = a.name;
  else merged.name = a.name + "+" + b.name;
  merged.records = a.records;
  merged.records.insert(merged.records.end(), b.records.begin(), b.records.end());
  return merged;
}

namespace {

bool contains_phrase(const WordList& caption, const WordList& phrase) {
  if (phrase.size() > caption.size()) return false;
  for (size_t start = 0; start + phrase.size() <= caption.size(); ++start) {
    bool hit = true;
    for (size_t k = 0; k < phrase.size(); ++k) {
      if (caption[start + k] != phrase[k]) {
        hit = false;
        break;
      }
    }
    if (hit) return true;
  }
  return false;
}

}  // namespace

int phrase_count(const std::vector<WordList>& captions, const WordList& phrase) {
  if (phrase.empty()) throw std::invalid_argument("phrase_count: empty phrase");
  int count = 0;
  for (const auto& caption : captions) {
    if (contains_phrase(caption, phrase)) ++count;
  }
  return count;
}

int clip_phrase_count(const DatasetSplit& split, const WordList& phrase) {
  if (phrase.empty()) throw std::invalid_argument("clip_phrase_count: empty phrase");
  int count = 0;
  for (const auto& record : split.records) {
    for (const auto& raw : record.captions) {
      if (contains_phrase(normalize_and_tokenize(raw), phrase)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace caplab
