#pragma once

#include "probelab/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probelab {

using RowMeta = std::map<std::string, std::string>;

/// Paired activations for n contrast pairs in d dimensions.
///
/// Row i of `pos` is the activation for the statement completed with the
/// positive answer, row i of `neg` the negative one. `labels[i] == 1` means
/// the positive completion is the true one.
struct ContrastPairSet {
  Matrix pos;
  Matrix neg;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<RowMeta>> meta;

  std::size_t size() const { return static_cast<std::size_t>(pos.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(pos.cols()); }
};

inline void validate(const ContrastPairSet& set) {
  if (set.pos.rows() != set.neg.rows() || set.pos.cols() != set.neg.cols()) {
    throw Error("contrast pair set: pos and neg shapes differ");
  }
  if (set.pos.rows() < 1 || set.pos.cols() < 1) {
    throw Error("contrast pair set: need n >= 1 and d >= 1");
  }
  if (!all_finite(set.pos) || !all_finite(set.neg)) {
    throw Error("contrast pair set: non-finite activation entry");
  }
  if (set.labels) {
    if (set.labels->size() != set.size()) {
      throw Error("contrast pair set: labels length does not match n");
    }
    for (int v : *set.labels) {
      if (v != 0 && v != 1) throw Error("contrast pair set: label outside {0,1}");
    }
  }
  if (set.meta && set.meta->size() != set.size()) {
    throw Error("contrast pair set: meta length does not match n");
  }
}

inline ContrastPairSet subset(const ContrastPairSet& set, const std::vector<std::size_t>& rows) {
  ContrastPairSet out;
  out.pos = gather_rows(set.pos, rows);
  out.neg = gather_rows(set.neg, rows);
  if (set.labels) {
    std::vector<int> l;
    l.reserve(rows.size());
    for (auto r : rows) l.push_back((*set.labels)[r]);
    out.labels = std::move(l);
  }
  if (set.meta) {
    std::vector<RowMeta> m;
    m.reserve(rows.size());
    for (auto r : rows) m.push_back((*set.meta)[r]);
    out.meta = std::move(m);
  }
  return out;
}

/// Binary labels for evaluation. "label" reads the ground-truth labels;
/// any other key reads that metadata field, which must take exactly two
/// distinct values (mapped to 0/1 in lexicographic order).
inline std::vector<int> labels_for_key(const ContrastPairSet& set, const std::string& key) {
  if (key == "label") {
    if (!set.labels) throw Error("dataset has no labels; evaluation requires them");
    return *set.labels;
  }
  if (!set.meta) throw Error("dataset has no metadata; cannot read label key '" + key + "'");
  std::vector<std::string> values;
  values.reserve(set.size());
  for (const auto& row : *set.meta) {
    auto it = row.find(key);
    if (it == row.end()) throw Error("metadata row is missing key '" + key + "'");
    values.push_back(it->second);
  }
  std::vector<std::string> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() > 2) {
    throw Error("label key '" + key + "' has more than two distinct values");
  }
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v == distinct.front() ? 0 : 1);
  return out;
}

// ---------------------------------------------------------------------------
// On-disk format: manifest.json + row-major little-endian f32 binaries.

struct DatasetManifest {
  int version = 1;
  std::size_t n = 0;
  std::size_t d = 0;
  std::string dtype = "f32le";
  std::string pos_file = "pos.bin";
  std::string neg_file = "neg.bin";
  std::optional<std::string> labels_file;
  std::optional<std::string> meta_file;
};

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["n"] = m.n;
  j["d"] = m.d;
  j["dtype"] = m.dtype;
  j["pos_file"] = m.pos_file;
  j["neg_file"] = m.neg_file;
  if (m.labels_file) j["labels_file"] = *m.labels_file;
  if (m.meta_file) j["meta_file"] = *m.meta_file;
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw Error(std::string("manifest: missing field '") + key + "'");
    return j.at(key);
  };
  DatasetManifest m;
  m.version = need("version").get<int>();
  if (m.version != 1) throw Error("manifest: unsupported version " + std::to_string(m.version));
  m.n = need("n").get<std::size_t>();
  m.d = need("d").get<std::size_t>();
  m.dtype = need("dtype").get<std::string>();
  if (m.dtype != "f32le") throw Error("manifest: unsupported dtype '" + m.dtype + "'");
  m.pos_file = need("pos_file").get<std::string>();
  m.neg_file = need("neg_file").get<std::string>();
  if (j.contains("labels_file")) m.labels_file = j.at("labels_file").get<std::string>();
  if (j.contains("meta_file")) m.meta_file = j.at("meta_file").get<std::string>();
  if (m.n < 1 || m.d < 1) throw Error("manifest: need n >= 1 and d >= 1");
  return m;
}

namespace detail {

inline std::vector<char> encode_f32le(const Matrix& x) {
  std::vector<char> bytes;
  bytes.reserve(static_cast<std::size_t>(x.size()) * 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x(i, k)));
      for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<char>((bits >> s) & 0xffu));
    }
  }
  return bytes;
}

inline Matrix decode_f32le(const std::vector<char>& bytes, std::size_t n, std::size_t d) {
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      std::uint32_t bits = 0;
      for (int s = 0; s < 32; s += 8) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++])) << s;
      }
      x(i, k) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return x;
}

inline void write_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<char>(text.begin(), text.end()));
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::vector<char> read_sized(const std::filesystem::path& path, std::size_t expected) {
  auto bytes = read_file(path);
  if (bytes.size() != expected) {
    throw Error("size mismatch for '" + path.filename().string() + "': expected " +
                std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()));
  }
  return bytes;
}

}  // namespace detail

/// Writes `set` under `dir` (created if needed). Activations are narrowed
/// to 32-bit floats.
inline void save_dataset(const ContrastPairSet& set, const std::filesystem::path& dir) {
  validate(set);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());

  DatasetManifest m;
  m.n = set.size();
  m.d = set.dim();
  detail::write_file(dir / m.pos_file, detail::encode_f32le(set.pos));
  detail::write_file(dir / m.neg_file, detail::encode_f32le(set.neg));
  if (set.labels) {
    m.labels_file = "labels.bin";
    std::vector<char> bytes;
    bytes.reserve(set.size());
    for (int v : *set.labels) bytes.push_back(static_cast<char>(v));
    detail::write_file(dir / *m.labels_file, bytes);
  }
  if (set.meta) {
    m.meta_file = "meta.json";
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : *set.meta) arr.push_back(row);
    detail::write_text(dir / *m.meta_file, arr.dump(1) + "\n");
  }
  detail::write_text(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

inline ContrastPairSet load_dataset(const std::filesystem::path& dir) {
  const auto manifest_bytes = detail::read_file(dir / "manifest.json");
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(manifest_bytes.begin(), manifest_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  const auto m = manifest_from_json(mj);
  const std::size_t bytes = m.n * m.d * 4;

  ContrastPairSet set;
  set.pos = detail::decode_f32le(detail::read_sized(dir / m.pos_file, bytes), m.n, m.d);
  set.neg = detail::decode_f32le(detail::read_sized(dir / m.neg_file, bytes), m.n, m.d);
  if (m.labels_file) {
    const auto raw = detail::read_sized(dir / *m.labels_file, m.n);
    std::vector<int> labels;
    labels.reserve(m.n);
    for (char c : raw) labels.push_back(static_cast<unsigned char>(c));
    set.labels = std::move(labels);
  }
  if (m.meta_file) {
    const auto raw = detail::read_file(dir / *m.meta_file);
    std::vector<RowMeta> meta;
    try {
      auto arr = nlohmann::json::parse(raw.begin(), raw.end());
      if (!arr.is_array()) throw Error("meta.json: expected an array");
      for (const auto& row : arr) meta.push_back(row.get<RowMeta>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("meta.json: ") + e.what());
    }
    set.meta = std::move(meta);
  }
  validate(set);
  return set;
}

}  // namespace probelab
