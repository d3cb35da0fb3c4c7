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

// Dataset synthesis: bags are assembled from a labeled base pool of
// instances. Positives come from the bag's ground-truth target class,
// negatives from the union of reserved classes, and r false-positive labels
// are drawn from the other target classes without replacement.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/random.hpp"

namespace miplgp {

struct SynthesisConfig {
  std::vector<int> target_classes;    // base-pool labels, mapped to 0..q-1 in order
  std::vector<int> reserved_classes;  // negative-instance source, may be empty
  int num_bags = 100;
  int min_instances = 5;
  int max_instances = 15;
  double positive_fraction = 0.2;
  int num_false_positives = 1;
  std::uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(target_classes.size()); }
};

struct BasePool {
  Matrix instances;         // N x d
  std::vector<int> labels;  // N
};

inline nlohmann::json to_json(const SynthesisConfig& cfg) {
  return {{"target_classes", cfg.target_classes},
          {"reserved_classes", cfg.reserved_classes},
          {"num_bags", cfg.num_bags},
          {"min_instances", cfg.min_instances},
          {"max_instances", cfg.max_instances},
          {"positive_fraction", cfg.positive_fraction},
          {"num_false_positives", cfg.num_false_positives},
          {"seed", cfg.seed}};
}

// Number of ground-truth instances in a bag of size z: round(fraction * z),
// at least 1 and at most z.
inline int positive_count(double positive_fraction, int z) {
  const int k = static_cast<int>(std::floor(positive_fraction * z + 0.5));
  return std::clamp(k, 1, z);
}

inline void validate(const SynthesisConfig& cfg) {
  const int q = cfg.num_classes();
  if (q < 2) throw ValidationError("synthesis needs at least 2 target classes");
  if (cfg.num_bags < 1) throw ValidationError("num_bags must be positive");
  if (cfg.min_instances < 1 || cfg.max_instances < cfg.min_instances)
    throw ValidationError("instances per bag must satisfy 1 <= min <= max");
  if (!(cfg.positive_fraction > 0.0 && cfg.positive_fraction <= 1.0))
    throw ValidationError("positive_fraction must lie in (0,1]");
  if (cfg.num_false_positives < 0 || cfg.num_false_positives >= q)
    throw ValidationError("number of false positives r must satisfy 0 <= r < q");
  std::set<int> targets(cfg.target_classes.begin(), cfg.target_classes.end());
  if (static_cast<int>(targets.size()) != q) throw ValidationError("duplicate target class");
  for (int c : cfg.reserved_classes)
    if (targets.count(c)) throw ValidationError("target and reserved classes overlap");
}

inline MiplDataset synthesize(const BasePool& pool, const SynthesisConfig& cfg) {
  validate(cfg);
  if (pool.instances.rows() != static_cast<Eigen::Index>(pool.labels.size()))
    throw ValidationError("base pool labels and instances disagree in length");
  const int q = cfg.num_classes();
  const auto d = static_cast<int>(pool.instances.cols());

  std::map<int, std::vector<Eigen::Index>> rows_by_label;
  for (std::size_t i = 0; i < pool.labels.size(); ++i)
    rows_by_label[pool.labels[i]].push_back(static_cast<Eigen::Index>(i));
  std::vector<std::vector<Eigen::Index>> target_rows;
  for (int c : cfg.target_classes) {
    auto it = rows_by_label.find(c);
    if (it == rows_by_label.end())
      throw ValidationError("base pool has no instance of target class " + std::to_string(c));
    target_rows.push_back(it->second);
  }
  std::vector<Eigen::Index> reserved_rows;
  for (int c : cfg.reserved_classes) {
    auto it = rows_by_label.find(c);
    if (it == rows_by_label.end())
      throw ValidationError("base pool has no instance of reserved class " + std::to_string(c));
    reserved_rows.insert(reserved_rows.end(), it->second.begin(), it->second.end());
  }
  std::sort(reserved_rows.begin(), reserved_rows.end());
  const bool all_target = cfg.reserved_classes.empty();

  Rng rng = make_rng({cfg.seed, 0x5a17u});
  std::uniform_int_distribution<int> size_dist(cfg.min_instances, cfg.max_instances);
  std::uniform_int_distribution<int> class_dist(0, q - 1);
  auto pick = [&rng](const std::vector<Eigen::Index>& rows) {
    std::uniform_int_distribution<std::size_t> dist(0, rows.size() - 1);
    return rows[dist(rng)];
  };

  const int width = static_cast<int>(std::to_string(cfg.num_bags - 1).size());
  std::vector<Bag> bags;
  bags.reserve(static_cast<std::size_t>(cfg.num_bags));
  for (int b = 0; b < cfg.num_bags; ++b) {
    const int z = size_dist(rng);
    const int truth = class_dist(rng);
    const int n_pos = all_target ? z : positive_count(cfg.positive_fraction, z);

    std::vector<Eigen::Index> picked;
    picked.reserve(static_cast<std::size_t>(z));
    for (int j = 0; j < n_pos; ++j) picked.push_back(pick(target_rows[static_cast<std::size_t>(truth)]));
    for (int j = n_pos; j < z; ++j) picked.push_back(pick(reserved_rows));
    std::shuffle(picked.begin(), picked.end(), rng);

    std::vector<int> others;
    for (int c = 0; c < q; ++c)
      if (c != truth) others.push_back(c);
    std::shuffle(others.begin(), others.end(), rng);
    std::vector<int> candidates(others.begin(), others.begin() + cfg.num_false_positives);
    candidates.push_back(truth);
    std::sort(candidates.begin(), candidates.end());

    Bag bag;
    char id[32];
    std::snprintf(id, sizeof(id), "bag_%0*d", width, b);
    bag.bag_id = id;
    bag.instances.resize(z, d);
    for (int j = 0; j < z; ++j) bag.instances.row(j) = pool.instances.row(picked[static_cast<std::size_t>(j)]);
    bag.candidate_labels = std::move(candidates);
    bag.true_label = truth;
    bags.push_back(std::move(bag));
  }

  nlohmann::json meta = {{"generator", "synthesize"}, {"config", to_json(cfg)}};
  if (all_target && cfg.positive_fraction < 1.0) meta["positive_fraction_ignored"] = true;
  if (cfg.num_false_positives == q - 1) meta["uninformative"] = true;
  return MiplDataset(LabelSpace(q, false), d, std::move(bags), std::move(meta));
}

// Class means with pairwise distance `separation`. When d >= q they are the
// scaled standard basis vectors (separation / sqrt(2)) e_c, so the origin sits
// at distance separation / sqrt(2) from every mean. For d < q the vertices of
// an origin-centered regular simplex are used in Helmert coordinates,
// truncated to d columns (distances are exact only when d = q - 1).
inline Matrix simplex_means(int q, int d, double separation) {
  const double scale = separation / std::sqrt(2.0);
  Matrix means = Matrix::Zero(q, d);
  if (d >= q) {
    for (int c = 0; c < q; ++c) means(c, c) = scale;
    return means;
  }
  const Matrix centered = scale * (Matrix::Identity(q, q).rowwise() - RowVector::Constant(q, 1.0 / q));
  Matrix helmert = Matrix::Zero(q, q - 1);
  for (int k = 1; k < q; ++k) {
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) helmert(i, k - 1) = 1.0 / norm;
    helmert(k, k - 1) = -static_cast<double>(k) / norm;
  }
  means = (centered * helmert).leftCols(d);
  return means;
}

// Number of pool rows generated per Gaussian component.
inline constexpr int kBlobPoolRowsPerClass = 1000;

// Base pool of q unit-covariance Gaussian target classes (labels 0..q-1) and
// one background class (label q) at the origin.
inline BasePool make_blob_pool(int q, int d, double separation, std::uint64_t seed) {
  if (q < 2) throw ValidationError("make_blobs needs q >= 2");
  if (d < 1) throw ValidationError("make_blobs needs d >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw ValidationError("separation must be finite and non-negative");
  const Matrix means = simplex_means(q, d, separation);
  BasePool pool;
  const int per = kBlobPoolRowsPerClass;
  pool.instances.resize(static_cast<Eigen::Index>(per) * (q + 1), d);
  pool.labels.reserve(static_cast<std::size_t>(per) * (q + 1));
  Rng rng = make_rng({seed, 0xb10bu});
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index row = 0;
  for (int c = 0; c <= q; ++c) {
    for (int i = 0; i < per; ++i, ++row) {
      for (int j = 0; j < d; ++j) {
        const double mu = c < q ? means(c, j) : 0.0;
        pool.instances(row, j) = mu + normal(rng);
      }
      pool.labels.push_back(c);
    }
  }
  return pool;
}

// Gaussian-blob dataset. The target/reserved classes of cfg are replaced by
// the blob classes; everything else in cfg is honored.
inline MiplDataset make_blobs(int q, int d, double separation, SynthesisConfig cfg) {
  const BasePool pool = make_blob_pool(q, d, separation, cfg.seed);
  cfg.target_classes.resize(static_cast<std::size_t>(q));
  std::iota(cfg.target_classes.begin(), cfg.target_classes.end(), 0);
  cfg.reserved_classes = {q};
  MiplDataset base = synthesize(pool, cfg);
  nlohmann::json meta = base.metadata();
  meta["generator"] = "make_blobs";
  meta["blobs"] = {{"num_classes", q}, {"feature_dim", d}, {"separation", separation}};
  return MiplDataset(base.label_space(), base.feature_dim(), base.bags(), std::move(meta));
}

// Base-pool CSV: one instance per line, "label,f1,...,fd", no header.
inline BasePool read_base_pool(std::istream& in) {
  BasePool pool;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    const std::string where = "base pool line " + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw IoError(where + "expected a label and at least one feature");
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw IoError(where + "expected " + std::to_string(width) + " columns, got " +
                    std::to_string(fields.size()));
    auto parse = [&](const std::string& text, const char* what) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        throw IoError(where + "non-numeric " + what + " '" + text + "'");
      }
      if (text.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
        throw IoError(where + "non-numeric " + what + " '" + text + "'");
      return v;
    };
    const double label = parse(fields[0], "label");
    if (label < 0 || label != std::floor(label))
      throw IoError(where + "label must be a non-negative integer");
    pool.labels.push_back(static_cast<int>(label));
    std::vector<double> feats;
    for (std::size_t k = 1; k < fields.size(); ++k) feats.push_back(parse(fields[k], "feature"));
    rows.push_back(std::move(feats));
  }
  if (rows.empty()) throw IoError("base pool: no instances");
  pool.instances.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      pool.instances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return pool;
}

inline BasePool load_base_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open base pool '" + path + "'");
  return read_base_pool(in);
}

}  // namespace miplgp
