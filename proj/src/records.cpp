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

#include "caplab/records.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "caplab/text.hpp"

namespace caplab {

namespace {

using nlohmann::json;

/// Applies fn to each nonempty line's parsed JSON object.
template <typename Fn>
void for_each_json_line(const std::string& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " +
                               e.what());
    }
    if (!parsed.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": expected a JSON object");
    }
    fn(parsed, line_number);
  }
}

std::string require_string(const json& obj, const char* key,
                           const std::string& path, int line) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": missing string field \"" + key + "\"");
  }
  return obj[key].get<std::string>();
}

std::vector<std::string> require_string_array(const json& obj, const char* key,
                                              const std::string& path, int line) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty()) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": missing nonempty array field \"" + key + "\"");
  }
  std::vector<std::string> values;
  for (const auto& item : obj[key]) {
    if (!item.is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(line) + ": field \"" +
                               key + "\" must hold strings");
    }
    values.push_back(item.get<std::string>());
  }
  return values;
}

void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id,
                     const std::string& path, int line) {
  if (!seen.insert(id).second) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": duplicate id \"" + id + "\"");
  }
}

void write_lines(const std::vector<json>& lines, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for write");
  for (const auto& obj : lines) out << obj.dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::vector<PredictionRecord> records;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](const json& obj, int line) {
    PredictionRecord record;
    record.id = require_string(obj, "id", path, line);
    record.caption = require_string(obj, "caption", path, line);
    check_unique_id(seen, record.id, path, line);
    records.push_back(std::move(record));
  });
  return records;
}

void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::string& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& record : records) {
    lines.push_back(json{{"id", record.id}, {"caption", record.caption}});
  }
  write_lines(lines, path);
}

std::vector<ReferenceRecord> load_references(const std::string& path) {
  std::vector<ReferenceRecord> records;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](const json& obj, int line) {
    ReferenceRecord record;
    record.id = require_string(obj, "id", path, line);
    record.captions = require_string_array(obj, "captions", path, line);
    check_unique_id(seen, record.id, path, line);
    records.push_back(std::move(record));
  });
  return records;
}

void save_references(const std::vector<ReferenceRecord>& records,
                     const std::string& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& record : records) {
    lines.push_back(json{{"id", record.id}, {"captions", record.captions}});
  }
  write_lines(lines, path);
}

std::vector<ResultRecord> load_results(const std::string& path) {
  std::vector<ResultRecord> records;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](const json& obj, int line) {
    ResultRecord record;
    record.id = require_string(obj, "id", path, line);
    record.candidate = require_string(obj, "candidate", path, line);
    record.references = require_string_array(obj, "references", path, line);
    check_unique_id(seen, record.id, path, line);
    records.push_back(std::move(record));
  });
  return records;
}

void save_results(const std::vector<ResultRecord>& records, const std::string& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& record : records) {
    lines.push_back(json{{"id", record.id},
                         {"candidate", record.candidate},
                         {"references", record.references}});
  }
  write_lines(lines, path);
}

std::vector<ResultRecord> join_predictions(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<ReferenceRecord>& references) {
  std::unordered_map<std::string, const ReferenceRecord*> by_id;
  for (const auto& record : references) by_id[record.id] = &record;

  std::string missing;
  std::unordered_set<std::string> predicted;
  for (const auto& prediction : predictions) {
    predicted.insert(prediction.id);
    if (!by_id.count(prediction.id)) {
      missing += (missing.empty() ? "" : ", ") + prediction.id;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error("ids without references: " + missing);
  }
  for (const auto& reference : references) {
    if (!predicted.count(reference.id)) {
      missing += (missing.empty() ? "" : ", ") + reference.id;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error("ids without predictions: " + missing);
  }

  std::vector<ResultRecord> results;
  results.reserve(predictions.size());
  for (const auto& prediction : predictions) {
    const ReferenceRecord& reference = *by_id.at(prediction.id);
    results.push_back({prediction.id, prediction.caption, reference.captions});
  }
  return results;
}

std::vector<EvalInstance> to_eval_instances(const std::vector<ResultRecord>& results) {
  std::vector<EvalInstance> instances;
  instances.reserve(results.size());
  for (const auto& result : results) {
    EvalInstance instance;
    instance.candidate = normalize_and_tokenize(result.candidate);
    for (const auto& reference : result.references) {
      instance.references.push_back(normalize_and_tokenize(reference));
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<ReferenceRecord> references_from_split(const DatasetSplit& split) {
  std::vector<ReferenceRecord> records;
  records.reserve(split.records.size());
  for (const auto& record : split.records) {
    records.push_back({record.id, record.captions});
  }
  return records;
}

double load_spice_score(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("corpus") ||
      !parsed["corpus"].is_number()) {
    throw std::runtime_error(path + ": expected {\"corpus\": <number>}");
  }
  return parsed["corpus"].get<double>();
}

}  // namespace caplab
