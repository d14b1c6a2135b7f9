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
#include <unordered_map>
#include <vector>

namespace caplab {

/// A caption as vocabulary indices, framed by <sos> ... <eos>.
/// Interior positions never hold pad/sos/eos; <unk> is allowed.
struct TokenSequence {
  std::vector<int> ids;

  size_t interior_length() const {
    return ids.size() >= 2 ? ids.size() - 2 : 0;
  }
  bool operator==(const TokenSequence& other) const = default;
};

/// Bidirectional word <-> index map. Indices 0..3 are the reserved block
/// (pad, sos, eos, unk, in that order); content words follow in
/// first-occurrence order. Immutable once built.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kSosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kUnkId = 3;
  static constexpr int kNumReserved = 4;

  Vocabulary();

  /// Appends a content word if absent. Returns its index either way.
  int add_word(const std::string& word);

  /// Index of a word, or kUnkId when absent.
  int id_of(const std::string& word) const;

  bool contains(const std::string& word) const;

  /// Word at an index. Throws std::out_of_range for invalid ids.
  const std::string& word_at(int id) const;

  int size() const { return static_cast<int>(words_.size()); }
  int content_size() const { return size() - kNumReserved; }

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// Lowercases and splits a raw caption into words. Apostrophes are deleted
/// in place ("it's" -> "its"); every other character outside [a-z0-9] acts
/// as a separator. Empty input gives an empty list.
std::vector<std::string> normalize_and_tokenize(const std::string& raw);

/// Builds a vocabulary from normalized captions: 4 reserved tokens plus
/// all distinct words in first-occurrence order.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& captions);

/// Union of two vocabularies. Words of `a` keep their indices; novel words
/// of `b` are appended in b's order.
Vocabulary merge_vocabularies(const Vocabulary& a, const Vocabulary& b);

/// sos + mapped ids (unknown words -> unk) + eos.
TokenSequence encode(const std::vector<std::string>& words, const Vocabulary& v);

/// Maps interior ids back to words; inverse of encode for in-vocabulary
/// captions. Unknown ids render as "<unk>". Throws std::runtime_error on a
/// corrupted sequence (id out of range or missing sos/eos frame).
std::vector<std::string> decode_to_words(const TokenSequence& t, const Vocabulary& v);

/// One word per line, reserved block first. Byte-exact for equal inputs.
std::string serialize_vocabulary(const Vocabulary& v);
void save_vocabulary(const Vocabulary& v, const std::string& path);

/// Inverse of save_vocabulary. Throws std::runtime_error on files that do
/// not start with the reserved block or contain duplicates.
Vocabulary load_vocabulary(const std::string& path);

}  // namespace caplab
