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

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "caplab/rng.hpp"
#include "caplab/text.hpp"

using namespace caplab;

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += " ";
    out += words[i];
  }
  return out;
}

std::string temp_path(const char* name) {
  return std::string("textproc_") + name + ".tmp";
}

}  // namespace

TEST_CASE("normalize lowercases and strips punctuation") {
  CHECK(normalize_and_tokenize("A Dog Barks.") ==
        std::vector<std::string>{"a", "dog", "barks"});
}

TEST_CASE("normalize of empty input is empty") {
  CHECK(normalize_and_tokenize("").empty());
  CHECK(normalize_and_tokenize("  \t ...  ").empty());
}

TEST_CASE("apostrophes vanish in place, other punctuation separates") {
  CHECK(normalize_and_tokenize("It's  raining, hard!") ==
        std::vector<std::string>{"its", "raining", "hard"});
  CHECK(normalize_and_tokenize("re-mix") == std::vector<std::string>{"re", "mix"});
  CHECK(normalize_and_tokenize("room 101") == std::vector<std::string>{"room", "101"});
}

TEST_CASE("non-ascii bytes act as separators") {
  CHECK(normalize_and_tokenize("caf\xc3\xa9 noise") ==
        std::vector<std::string>{"caf", "noise"});
}

TEST_CASE("normalization is idempotent on random text") {
  Rng rng(2024);
  const std::string alphabet = "abcXYZ 019.,'!-\t?";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const size_t len = rng.uniform_below(40);
    for (size_t i = 0; i < len; ++i) {
      s.push_back(alphabet[rng.uniform_below(alphabet.size())]);
    }
    auto once = normalize_and_tokenize(s);
    CHECK(normalize_and_tokenize(join(once)) == once);
  }
}

TEST_CASE("build_vocabulary counts reserved plus distinct words") {
  Vocabulary v = build_vocabulary({{"a", "dog"}, {"a", "cat"}});
  CHECK(v.size() == 7);
  CHECK(v.content_size() == 3);
  CHECK(build_vocabulary({}).size() == 4);
}

TEST_CASE("vocabulary keeps first-occurrence order after the reserved block") {
  Vocabulary v = build_vocabulary({{"dog", "a"}, {"cat", "a"}});
  CHECK(v.word_at(4) == "dog");
  CHECK(v.word_at(5) == "a");
  CHECK(v.word_at(6) == "cat");
  CHECK(v.id_of("cat") == 6);
}

TEST_CASE("reserved block is fixed") {
  Vocabulary v;
  CHECK(v.word_at(Vocabulary::kPadId) == "<pad>");
  CHECK(v.word_at(Vocabulary::kSosId) == "<sos>");
  CHECK(v.word_at(Vocabulary::kEosId) == "<eos>");
  CHECK(v.word_at(Vocabulary::kUnkId) == "<unk>");
}

TEST_CASE("merge keeps a's indices and appends b's novel words") {
  Vocabulary a = build_vocabulary({{"a", "dog"}});
  Vocabulary b = build_vocabulary({{"a", "cat"}});
  Vocabulary m = merge_vocabularies(a, b);
  CHECK(m.size() == 7);
  CHECK(m.id_of("a") == a.id_of("a"));
  CHECK(m.id_of("dog") == a.id_of("dog"));
  CHECK(m.id_of("cat") == 6);
}

TEST_CASE("merge is idempotent") {
  Vocabulary v = build_vocabulary({{"one", "two", "three"}});
  Vocabulary m = merge_vocabularies(v, v);
  CHECK(m.words() == v.words());
}

TEST_CASE("encode maps words and frames with sos/eos") {
  Vocabulary v = build_vocabulary({{"a", "dog"}});
  TokenSequence t = encode({"a", "dog"}, v);
  CHECK(t.ids == std::vector<int>{Vocabulary::kSosId, v.id_of("a"), v.id_of("dog"),
                                  Vocabulary::kEosId});
  CHECK(t.interior_length() == 2);
}

TEST_CASE("unknown words encode to unk") {
  Vocabulary v = build_vocabulary({{"a"}});
  TokenSequence t = encode({"zzz"}, v);
  CHECK(t.ids == std::vector<int>{Vocabulary::kSosId, Vocabulary::kUnkId,
                                  Vocabulary::kEosId});
}

TEST_CASE("empty caption is just the frame") {
  Vocabulary v;
  TokenSequence t = encode({}, v);
  CHECK(t.ids == std::vector<int>{Vocabulary::kSosId, Vocabulary::kEosId});
  CHECK(decode_to_words(t, v).empty());
}

TEST_CASE("decode round trips encode for in-vocabulary captions") {
  Vocabulary v = build_vocabulary({{"water", "drips", "steadily"}});
  std::vector<std::string> words{"water", "drips", "steadily", "drips"};
  CHECK(decode_to_words(encode(words, v), v) == words);
}

TEST_CASE("unk ids decode to the placeholder") {
  Vocabulary v = build_vocabulary({{"a"}});
  TokenSequence t = encode({"missing"}, v);
  CHECK(decode_to_words(t, v) == std::vector<std::string>{"<unk>"});
}

TEST_CASE("decode faults on corrupted sequences") {
  Vocabulary v = build_vocabulary({{"a"}});
  TokenSequence no_frame{{v.id_of("a")}};
  CHECK_THROWS_AS(decode_to_words(no_frame, v), std::runtime_error);
  TokenSequence bad_id{{Vocabulary::kSosId, 99, Vocabulary::kEosId}};
  CHECK_THROWS_AS(decode_to_words(bad_id, v), std::runtime_error);
}

TEST_CASE("word_at faults outside the table") {
  Vocabulary v;
  CHECK_THROWS_AS(v.word_at(-1), std::out_of_range);
  CHECK_THROWS_AS(v.word_at(4), std::out_of_range);
}

TEST_CASE("vocabulary serialization round trips byte-exactly") {
  Vocabulary v = build_vocabulary({{"rain", "falls"}, {"wind", "howls"}});
  const std::string path = temp_path("vocab");
  save_vocabulary(v, path);
  Vocabulary loaded = load_vocabulary(path);
  CHECK(loaded.words() == v.words());
  CHECK(serialize_vocabulary(loaded) == serialize_vocabulary(v));
  std::remove(path.c_str());
}

TEST_CASE("vocabulary loader rejects broken files") {
  const std::string path = temp_path("vocab_bad");

  {
    std::ofstream out(path);
    out << "<pad>\n<sos>\n<eos>\n";
  }
  CHECK_THROWS_AS(load_vocabulary(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "<pad>\n<sos>\n<eos>\n<unk>\nword\nword\n";
  }
  CHECK_THROWS_AS(load_vocabulary(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "wrong\n<sos>\n<eos>\n<unk>\n";
  }
  CHECK_THROWS_AS(load_vocabulary(path), std::runtime_error);

  std::remove(path.c_str());
}
