// Copyright 2026 The miplgp Authors. All Rights Reserved.
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

// MIPL-JSONL v1 reader/writer. Line 1 is a header object
//   {"version":1,"num_classes":q,"feature_dim":d,"metadata":{...}}
// and every further line is one bag
//   {"bag_id":str,"instances":[[...],...],"candidate_labels":[...],"true_label":int|null}

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "miplgp/data_model.hpp"

namespace miplgp {

inline constexpr int kDatasetFormatVersion = 1;

inline void write_dataset(std::ostream& out, const MiplDataset& dataset) {
  nlohmann::json header = {{"version", kDatasetFormatVersion},
                           {"num_classes", dataset.num_classes()},
                           {"feature_dim", dataset.feature_dim()},
                           {"metadata", dataset.metadata()}};
  out << header.dump() << '\n';
  for (const auto& bag : dataset.bags()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < bag.instances.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < bag.instances.cols(); ++j) row.push_back(bag.instances(i, j));
      rows.push_back(std::move(row));
    }
    nlohmann::json line = {{"bag_id", bag.bag_id},
                           {"instances", std::move(rows)},
                           {"candidate_labels", bag.candidate_labels},
                           {"true_label", nullptr}};
    if (bag.true_label) line["true_label"] = *bag.true_label;
    out << line.dump() << '\n';
  }
}

inline std::string dataset_to_string(const MiplDataset& dataset) {
  std::ostringstream out;
  write_dataset(out, dataset);
  return out.str();
}

inline MiplDataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> IoError {
    return IoError("MIPL-JSONL line " + std::to_string(line_no) + ": " + what);
  };
  nlohmann::json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) break;
  }
  if (line.empty()) throw IoError("MIPL-JSONL: missing header line");
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid header: ") + e.what());
  }
  if (!header.is_object() || header.value("version", 0) != kDatasetFormatVersion)
    throw fail("unsupported or missing version (expected 1)");
  int q = 0, d = 0;
  nlohmann::json metadata = nlohmann::json::object();
  try {
    q = header.at("num_classes").get<int>();
    d = header.at("feature_dim").get<int>();
    if (header.contains("metadata")) metadata = header.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid header: ") + e.what());
  }

  std::vector<Bag> bags;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      Bag bag;
      bag.bag_id = obj.at("bag_id").get<std::string>();
      const auto& rows = obj.at("instances");
      if (!rows.is_array()) throw fail("instances must be an array");
      bag.instances.resize(static_cast<Eigen::Index>(rows.size()), d);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(d))
          throw fail("instance row width differs from feature_dim");
        for (int j = 0; j < d; ++j)
          bag.instances(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)].get<double>();
      }
      bag.candidate_labels = obj.at("candidate_labels").get<std::vector<int>>();
      if (obj.contains("true_label") && !obj.at("true_label").is_null())
        bag.true_label = obj.at("true_label").get<int>();
      bags.push_back(std::move(bag));
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
  }
  try {
    return MiplDataset(LabelSpace(q, false), d, std::move(bags), std::move(metadata));
  } catch (const ValidationError& e) {
    throw IoError(std::string("MIPL-JSONL: ") + e.what());
  }
}

inline MiplDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  return read_dataset(in);
}

inline void save_dataset(const std::string& path, const MiplDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file '" + path + "'");
  write_dataset(out, dataset);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace miplgp
