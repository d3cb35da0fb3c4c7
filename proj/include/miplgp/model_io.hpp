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

// MIPLGP-MODEL v1 persistence. See docs/model_format.md for the layout.
//
//   magic   12 bytes  "MIPLGP-MODEL"
//   version u32 LE    1
//   count   u32 LE    number of records
//   record  u32 LE name length, name bytes, u32 LE kind, payload
//     kind 0 (matrix): u64 LE rows, u64 LE cols, rows*cols f64 LE, row-major
//     kind 1 (text):   u64 LE byte length, UTF-8 bytes
//
// The GP factorizations are not stored; loading refits them from the stored
// training matrix, targets, kernel parameters and jitter.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/model.hpp"

namespace miplgp {

inline constexpr char kModelMagic[] = "MIPLGP-MODEL";
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

enum class RecordKind : std::uint32_t { kMatrix = 0, kText = 1 };

inline void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint64_t get_uint(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError("model file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

struct Record {
  RecordKind kind = RecordKind::kMatrix;
  Matrix matrix;
  std::string text;
};

inline void put_name(std::ostream& out, const std::string& name, RecordKind kind) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(kind));
}

inline void put_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  put_name(out, name, RecordKind::kMatrix);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(m(i, j)));
}

inline void put_text(std::ostream& out, const std::string& name, const std::string& text) {
  put_name(out, name, RecordKind::kText);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline Matrix as_row(const Vector& v) { return v.transpose(); }

}  // namespace detail

inline void write_model(std::ostream& out, const TrainedModel& model) {
  const KernelParams& p = model.gp.params();
  nlohmann::json header = {
      {"format", "MIPLGP-MODEL"},
      {"version", kModelFormatVersion},
      {"label_space", {{"num_classes", model.label_space.num_classes()},
                       {"augmented", model.label_space.augmented()}}},
      {"kernel", {{"nu", smoothness_value(p.nu)},
                  {"log_lengthscale", p.log_lengthscale},
                  {"log_outputscale", p.log_outputscale},
                  {"train_lengthscale", p.train_lengthscale},
                  {"train_outputscale", p.train_outputscale}}},
      {"jitter_scale", model.gp.jitter_scale()},
      {"jitter", model.gp.jitter()},
      {"config", to_json(model.config)}};

  out.write(kModelMagic, 12);
  detail::put_u32(out, kModelFormatVersion);
  detail::put_u32(out, 9);
  detail::put_text(out, "header", header.dump());
  detail::put_matrix(out, "kernel_params",
                     (Matrix(1, 3) << p.log_lengthscale, p.log_outputscale, model.gp.jitter_scale()).finished());
  detail::put_matrix(out, "stats_mean", detail::as_row(model.stats.mean));
  detail::put_matrix(out, "stats_std", detail::as_row(model.stats.stddev));
  detail::put_matrix(out, "train_x", model.gp.train_x());
  detail::put_matrix(out, "alpha", model.alpha.values);
  detail::put_matrix(out, "y_dot", model.gp.targets().y_dot);
  detail::put_matrix(out, "sigma_dot", model.gp.targets().sigma_dot);
  detail::put_matrix(out, "jitter", (Matrix(1, 1) << model.gp.jitter()).finished());
  if (!out) throw IoError("failed writing model");
}

inline TrainedModel read_model(std::istream& in) {
  char magic[12];
  in.read(magic, 12);
  if (!in || std::memcmp(magic, kModelMagic, 12) != 0) throw IoError("not a MIPLGP-MODEL file");
  const auto version = static_cast<std::uint32_t>(detail::get_uint(in, 4));
  if (version != kModelFormatVersion) throw IoError("unsupported model version " + std::to_string(version));
  const auto count = detail::get_uint(in, 4);
  std::map<std::string, detail::Record> records;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto name_len = detail::get_uint(in, 4);
    if (name_len > 4096) throw IoError("model record name too long");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    detail::Record rec;
    rec.kind = static_cast<detail::RecordKind>(detail::get_uint(in, 4));
    if (rec.kind == detail::RecordKind::kMatrix) {
      const auto rows = detail::get_uint(in, 8);
      const auto cols = detail::get_uint(in, 8);
      if (rows > (1ull << 32) || cols > (1ull << 32)) throw IoError("model matrix too large");
      rec.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j)
          rec.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              std::bit_cast<double>(detail::get_uint(in, 8));
    } else if (rec.kind == detail::RecordKind::kText) {
      const auto len = detail::get_uint(in, 8);
      if (len > (1ull << 30)) throw IoError("model text record too large");
      rec.text.resize(len);
      in.read(rec.text.data(), static_cast<std::streamsize>(len));
    } else {
      throw IoError("unknown model record kind in '" + name + "'");
    }
    if (!in) throw IoError("model file truncated");
    records[name] = std::move(rec);
  }
  auto need = [&](const std::string& name) -> const detail::Record& {
    auto it = records.find(name);
    if (it == records.end()) throw IoError("model file lacks record '" + name + "'");
    return it->second;
  };

  try {
    const auto header = nlohmann::json::parse(need("header").text);
    const LabelSpace space(header.at("label_space").at("num_classes").get<int>(),
                           header.at("label_space").at("augmented").get<bool>());
    const TrainConfig config = train_config_from_json(header.at("config"));
    KernelParams params;
    params.nu = smoothness_from_value(header.at("kernel").at("nu").get<double>());
    params.train_lengthscale = header.at("kernel").at("train_lengthscale").get<bool>();
    params.train_outputscale = header.at("kernel").at("train_outputscale").get<bool>();
    const Matrix& kp = need("kernel_params").matrix;
    if (kp.size() != 3) throw IoError("kernel_params record must hold 3 values");
    params.log_lengthscale = kp(0, 0);
    params.log_outputscale = kp(0, 1);
    const double jitter_scale = kp(0, 2);

    FeatureStats stats{need("stats_mean").matrix.transpose(), need("stats_std").matrix.transpose()};
    TransformedTargets targets{need("y_dot").matrix, need("sigma_dot").matrix};
    AlphaMatrix alpha{need("alpha").matrix};
    const Matrix& x = need("train_x").matrix;
    if (targets.cols() != space.width() || alpha.values.cols() != space.width())
      throw IoError("model target width does not match its label space");
    if (stats.mean.size() != x.cols() || stats.stddev.size() != x.cols())
      throw IoError("standardization stats do not match the training matrix");
    GpModel gp = fit(x, std::move(targets), params, FitOptions{jitter_scale, 0});
    return TrainedModel{space, std::move(stats), std::move(gp), std::move(alpha), config};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid model header: ") + e.what());
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid model contents: ") + e.what());
  }
}

inline void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  write_model(out, model);
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace miplgp
