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

#include "caplab/text.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace caplab {

namespace {

const char* const kReservedWords[Vocabulary::kNumReserved] = {
    "<pad>", "<sos>", "<eos>", "<unk>"};

}  // namespace

Vocabulary::Vocabulary() {
  for (int i = 0; i < kNumReserved; ++i) {
    words_.emplace_back(kReservedWords[i]);
    index_.emplace(kReservedWords[i], i);
  }
}

int Vocabulary::add_word(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(words_.size());
  words_.push_back(word);
  index_.emplace(word, id);
  return id;
}

int Vocabulary::id_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return index_.count(word) != 0;
}

const std::string& Vocabulary::word_at(int id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("vocabulary id " + std::to_string(id) +
                            " out of range [0," + std::to_string(size()) + ")");
  }
  return words_[static_cast<size_t>(id)];
}

std::vector<std::string> normalize_and_tokenize(const std::string& raw) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : raw) {
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(static_cast<char>(c));
    } else if (c == '\'') {
      // deleted without splitting the word
    } else {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& captions) {
  Vocabulary v;
  for (const auto& caption : captions) {
    for (const auto& word : caption) v.add_word(word);
  }
  return v;
}

Vocabulary merge_vocabularies(const Vocabulary& a, const Vocabulary& b) {
  Vocabulary merged = a;
  for (int id = Vocabulary::kNumReserved; id < b.size(); ++id) {
    merged.add_word(b.word_at(id));
  }
  return merged;
}

TokenSequence encode(const std::vector<std::string>& words, const Vocabulary& v) {
  TokenSequence t;
  t.ids.reserve(words.size() + 2);
  t.ids.push_back(Vocabulary::kSosId);
  for (const auto& word : words) t.ids.push_back(v.id_of(word));
  t.ids.push_back(Vocabulary::kEosId);
  return t;
}

std::vector<std::string> decode_to_words(const TokenSequence& t, const Vocabulary& v) {
  if (t.ids.size() < 2 || t.ids.front() != Vocabulary::kSosId ||
      t.ids.back() != Vocabulary::kEosId) {
    throw std::runtime_error("corrupted token sequence: missing sos/eos frame");
  }
  std::vector<std::string> words;
  words.reserve(t.ids.size() - 2);
  for (size_t i = 1; i + 1 < t.ids.size(); ++i) {
    int id = t.ids[i];
    if (id < 0 || id >= v.size()) {
      throw std::runtime_error("corrupted token sequence: id " +
                               std::to_string(id) + " out of range");
    }
    words.push_back(v.word_at(id));
  }
  return words;
}

std::string serialize_vocabulary(const Vocabulary& v) {
  std::ostringstream out;
  for (const auto& word : v.words()) out << word << '\n';
  return out.str();
}

void save_vocabulary(const Vocabulary& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open vocabulary file for write: " + path);
  out << serialize_vocabulary(v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no < Vocabulary::kNumReserved) {
      if (line != kReservedWords[line_no]) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no + 1) +
                                 ": expected reserved token " +
                                 kReservedWords[line_no] + ", got \"" + line + "\"");
      }
    } else {
      if (line.empty()) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no + 1) +
                                 ": empty word");
      }
      if (v.contains(line)) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no + 1) +
                                 ": duplicate word \"" + line + "\"");
      }
      v.add_word(line);
    }
    ++line_no;
  }
  if (line_no < Vocabulary::kNumReserved) {
    throw std::runtime_error(path + ": truncated vocabulary (missing reserved block)");
  }
  return v;
}

}  // namespace caplab
