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

#include "caplab/dataset.hpp"
#include "caplab/records.hpp"
#include "caplab/rng.hpp"
#include "caplab/text.hpp"

using namespace caplab;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path(name) {}
  ~TempFile() { std::remove(path.c_str()); }

  void fill(const std::string& content) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
  }

  std::string slurp() const {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  }
};

WordList wl(std::initializer_list<const char*> ws) {
  WordList out;
  for (const char* w : ws) out.emplace_back(w);
  return out;
}

// A second opinion on phrase counting: scan every start offset.
int naive_phrase_count(const std::vector<WordList>& captions, const WordList& phrase) {
  int hits = 0;
  for (const auto& caption : captions) {
    bool found = false;
    for (size_t start = 0; !found && start + phrase.size() <= caption.size(); ++start) {
      bool match = true;
      for (size_t i = 0; i < phrase.size(); ++i) {
        if (caption[start + i] != phrase[i]) {
          match = false;
          break;
        }
      }
      found = match;
    }
    if (found) ++hits;
  }
  return hits;
}

}  // namespace

TEST_CASE("a clotho-style csv loads with ids and raw captions intact") {
  TempFile f("dataset_clotho.tmp.csv");
  f.fill(
      "file_name,caption_1,caption_2,caption_3,caption_4,caption_5\n"
      "clip_a.wav,A dog barks.,Dog barking loudly,a dog,The dog,dog dog\n"
      "clip_b.wav,Rain falls,\"rain, heavy rain\",rainfall,wet rain,storm rain\n");
  DatasetSplit split = load_clotho_csv(f.path);
  REQUIRE(split.records.size() == 2);
  CHECK(split.records[0].id == "clip_a.wav");
  REQUIRE(split.records[0].captions.size() == 5);
  CHECK(split.records[0].captions[0] == "A dog barks.");
  // quoted field keeps its comma
  CHECK(split.records[1].captions[1] == "rain, heavy rain");
}

TEST_CASE("quoted csv fields support escapes and embedded newlines") {
  TempFile f("dataset_quotes.tmp.csv");
  f.fill(
      "file_name,caption_1\n"
      "a.wav,\"he said \"\"loud\"\" again\"\n"
      "b.wav,\"line one\nline two\"\n");
  DatasetSplit split = load_caption_csv(f.path, 1);
  REQUIRE(split.records.size() == 2);
  CHECK(split.records[0].captions[0] == "he said \"loud\" again");
  CHECK(split.records[1].captions[0] == "line one\nline two");
}

TEST_CASE("csv loading faults carry 1-based row numbers") {
  TempFile f("dataset_bad.tmp.csv");

  SUBCASE("wrong header") {
    f.fill("file,caption_1\nx.wav,hi\n");
    CHECK_THROWS_WITH_AS(load_caption_csv(f.path, 1),
                         doctest::Contains("row 1"), std::runtime_error);
  }
  SUBCASE("wrong field count") {
    f.fill("file_name,caption_1\nx.wav,hi\ny.wav,hi,extra\n");
    CHECK_THROWS_WITH_AS(load_caption_csv(f.path, 1),
                         doctest::Contains("row 3"), std::runtime_error);
  }
  SUBCASE("empty file name") {
    f.fill("file_name,caption_1\n,hi\n");
    CHECK_THROWS_WITH_AS(load_caption_csv(f.path, 1),
                         doctest::Contains("row 2"), std::runtime_error);
  }
  SUBCASE("duplicate file name") {
    f.fill("file_name,caption_1\nx.wav,one\nx.wav,two\n");
    CHECK_THROWS_WITH_AS(load_caption_csv(f.path, 1),
                         doctest::Contains("row 3"), std::runtime_error);
  }
  SUBCASE("empty file") {
    f.fill("");
    CHECK_THROWS_AS(load_caption_csv(f.path, 1), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_caption_csv("dataset_no_such.tmp.csv", 1),
                    std::runtime_error);
  }
  SUBCASE("caption count out of range") {
    f.fill("file_name,caption_1\nx.wav,hi\n");
    CHECK_THROWS_AS(load_caption_csv(f.path, 0), std::invalid_argument);
    CHECK_THROWS_AS(load_caption_csv(f.path, 6), std::invalid_argument);
  }
}

TEST_CASE("blank lines between rows are skipped") {
  TempFile f("dataset_blank.tmp.csv");
  f.fill("file_name,caption_1\n\na.wav,one\n\n\nb.wav,two\n");
  DatasetSplit split = load_caption_csv(f.path, 1);
  REQUIRE(split.records.size() == 2);
  CHECK(split.records[1].id == "b.wav");
}

TEST_CASE("the csv writer round trips awkward content byte for byte") {
  DatasetSplit split;
  split.name = "round";
  split.records.push_back({"plain.wav", "", {"just words", "two, with comma"}});
  split.records.push_back({"tricky.wav", "", {"a \"quoted\" bit", "line\nbreak"}});

  TempFile f("dataset_round.tmp.csv");
  save_caption_csv(split, f.path);
  DatasetSplit back = load_caption_csv(f.path, 2);
  REQUIRE(back.records.size() == 2);
  for (size_t i = 0; i < split.records.size(); ++i) {
    CHECK(back.records[i].id == split.records[i].id);
    CHECK(back.records[i].captions == split.records[i].captions);
  }

  // canonical writer: a second pass produces identical bytes
  TempFile g("dataset_round2.tmp.csv");
  save_caption_csv(back, g.path);
  CHECK(f.slurp() == g.slurp());

  split.records[0].captions.pop_back();  // ragged caption counts are a fault
  CHECK_THROWS_AS(save_caption_csv(split, f.path), std::invalid_argument);
}

TEST_CASE("merge_splits concatenates and rejects id collisions") {
  DatasetSplit a{"dev", {{"x.wav", "", {"one"}}, {"y.wav", "", {"two"}}}};
  DatasetSplit b{"val", {{"z.wav", "", {"three"}}}};
  DatasetSplit merged = merge_splits(a, b);
  CHECK(merged.name == "dev+val");
  REQUIRE(merged.records.size() == 3);
  CHECK(merged.records[0].id == "x.wav");
  CHECK(merged.records[2].id == "z.wav");

  DatasetSplit clash{"clash", {{"y.wav", "", {"again"}}}};
  CHECK_THROWS_WITH_AS(merge_splits(a, clash), doctest::Contains("y.wav"),
                       std::runtime_error);
}

TEST_CASE("phrase_count finds contiguous runs once per caption") {
  std::vector<WordList> captions{
      wl({"rain", "falls", "on", "rain"}),
      wl({"heavy", "rain"}),
      wl({"rainfall"}),
      wl({"rain"}),
  };
  CHECK(phrase_count(captions, wl({"rain"})) == 3);  // "rainfall" is one word
  CHECK(phrase_count(captions, wl({"rain", "falls"})) == 1);
  CHECK(phrase_count(captions, wl({"falls", "rain"})) == 0);
  CHECK(phrase_count(captions, wl({"heavy", "rain"})) == 1);
  CHECK_THROWS_AS(phrase_count(captions, {}), std::invalid_argument);
}

TEST_CASE("phrase_count agrees with a naive scanner on random corpora") {
  Rng rng(747);
  const std::vector<std::string> vocab{"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<WordList> captions;
    const size_t n = 1 + rng.uniform_below(5);
    for (size_t i = 0; i < n; ++i) {
      WordList caption;
      const size_t len = 1 + rng.uniform_below(6);
      for (size_t k = 0; k < len; ++k) {
        caption.push_back(vocab[rng.uniform_below(vocab.size())]);
      }
      captions.push_back(caption);
    }
    WordList phrase;
    const size_t plen = 1 + rng.uniform_below(3);
    for (size_t k = 0; k < plen; ++k) {
      phrase.push_back(vocab[rng.uniform_below(vocab.size())]);
    }
    CHECK(phrase_count(captions, phrase) == naive_phrase_count(captions, phrase));
  }
}

TEST_CASE("clip_phrase_count normalizes captions before matching") {
  DatasetSplit split{"s",
                     {{"a.wav", "", {"A Dog barks!", "nothing here"}},
                      {"b.wav", "", {"the dog's bark", "dog"}},
                      {"c.wav", "", {"cat sounds"}}}};
  CHECK(clip_phrase_count(split, wl({"dog"})) == 2);
  CHECK(clip_phrase_count(split, wl({"dog", "barks"})) == 1);
  CHECK(clip_phrase_count(split, wl({"dogs", "bark"})) == 1);  // "dog's" -> "dogs"
  CHECK(clip_phrase_count(split, wl({"bird"})) == 0);
}

TEST_CASE("prediction records round trip through jsonl") {
  TempFile f("records_pred.tmp.jsonl");
  std::vector<PredictionRecord> preds{{"a.wav", "a dog barks"},
                                      {"b.wav", "rain \"falls\" hard"}};
  save_predictions(preds, f.path);
  auto back = load_predictions(f.path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == preds[0].id);
  CHECK(back[0].caption == preds[0].caption);
  CHECK(back[1].caption == preds[1].caption);
}

TEST_CASE("reference and result records round trip through jsonl") {
  TempFile f("records_refs.tmp.jsonl");
  std::vector<ReferenceRecord> refs{{"a.wav", {"one", "two"}}, {"b.wav", {"three"}}};
  save_references(refs, f.path);
  auto refs_back = load_references(f.path);
  REQUIRE(refs_back.size() == 2);
  CHECK(refs_back[0].captions == refs[0].captions);

  TempFile g("records_results.tmp.jsonl");
  std::vector<ResultRecord> results{{"a.wav", "cand one", {"ref a", "ref b"}}};
  save_results(results, g.path);
  auto results_back = load_results(g.path);
  REQUIRE(results_back.size() == 1);
  CHECK(results_back[0].candidate == "cand one");
  CHECK(results_back[0].references == results[0].references);
}

TEST_CASE("jsonl faults carry the line number") {
  TempFile f("records_bad.tmp.jsonl");

  SUBCASE("syntax error") {
    f.fill("{\"id\": \"a\", \"caption\": \"ok\"}\n{not json}\n");
    CHECK_THROWS_WITH_AS(load_predictions(f.path), doctest::Contains(".jsonl:2:"),
                         std::runtime_error);
  }
  SUBCASE("missing field") {
    f.fill("{\"id\": \"a\"}\n");
    CHECK_THROWS_WITH_AS(load_predictions(f.path), doctest::Contains(".jsonl:1:"),
                         std::runtime_error);
  }
  SUBCASE("wrong field type") {
    f.fill("{\"id\": \"a\", \"captions\": \"not an array\"}\n");
    CHECK_THROWS_WITH_AS(load_references(f.path), doctest::Contains(".jsonl:1:"),
                         std::runtime_error);
  }
  SUBCASE("duplicate id") {
    f.fill(
        "{\"id\": \"a\", \"caption\": \"x\"}\n"
        "{\"id\": \"a\", \"caption\": \"y\"}\n");
    CHECK_THROWS_WITH_AS(load_predictions(f.path), doctest::Contains("a"),
                         std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_predictions("records_no_such.tmp.jsonl"),
                    std::runtime_error);
  }
}

TEST_CASE("join_predictions pairs by id in prediction order") {
  std::vector<PredictionRecord> preds{{"b.wav", "second"}, {"a.wav", "first"}};
  std::vector<ReferenceRecord> refs{{"a.wav", {"ra"}}, {"b.wav", {"rb1", "rb2"}}};
  auto joined = join_predictions(preds, refs);
  REQUIRE(joined.size() == 2);
  CHECK(joined[0].id == "b.wav");
  CHECK(joined[0].candidate == "second");
  CHECK(joined[0].references == std::vector<std::string>{"rb1", "rb2"});
  CHECK(joined[1].id == "a.wav");
}

TEST_CASE("join_predictions faults name every unmatched id") {
  std::vector<PredictionRecord> preds{{"a.wav", "x"}, {"orphan.wav", "y"}};
  std::vector<ReferenceRecord> refs{{"a.wav", {"r"}}};
  CHECK_THROWS_WITH_AS(join_predictions(preds, refs),
                       doctest::Contains("orphan.wav"), std::runtime_error);

  std::vector<ReferenceRecord> extra{{"a.wav", {"r"}}, {"lonely.wav", {"s"}}};
  std::vector<PredictionRecord> just_a{{"a.wav", "x"}};
  CHECK_THROWS_WITH_AS(join_predictions(just_a, extra),
                       doctest::Contains("lonely.wav"), std::runtime_error);
}

TEST_CASE("to_eval_instances normalizes candidates and references") {
  std::vector<ResultRecord> results{{"a.wav", "A Dog Barks!", {"the dog's bark"}}};
  auto instances = to_eval_instances(results);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].candidate == wl({"a", "dog", "barks"}));
  REQUIRE(instances[0].references.size() == 1);
  CHECK(instances[0].references[0] == wl({"the", "dogs", "bark"}));
}

TEST_CASE("references_from_split copies ids and captions") {
  DatasetSplit split{"s", {{"a.wav", "", {"one", "two"}}, {"b.wav", "", {"three"}}}};
  auto refs = references_from_split(split);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].id == "a.wav");
  CHECK(refs[0].captions == std::vector<std::string>{"one", "two"});
  CHECK(refs[1].id == "b.wav");
}

TEST_CASE("load_spice_score reads the corpus number and rejects junk") {
  TempFile f("records_spice.tmp.json");
  f.fill("{\"corpus\": 0.134}\n");
  CHECK(load_spice_score(f.path) == doctest::Approx(0.134));

  SUBCASE("not an object") {
    f.fill("[1, 2]\n");
    CHECK_THROWS_AS(load_spice_score(f.path), std::runtime_error);
  }
  SUBCASE("missing key") {
    f.fill("{\"score\": 0.1}\n");
    CHECK_THROWS_AS(load_spice_score(f.path), std::runtime_error);
  }
  SUBCASE("wrong type") {
    f.fill("{\"corpus\": \"high\"}\n");
    CHECK_THROWS_AS(load_spice_score(f.path), std::runtime_error);
  }
}
