#pragma once

// Subcommand implementations for the probelab CLI. Kept in a header so
// the test suite can drive them in-process.

#include "probelab.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace probelab::cli {

namespace fs = std::filesystem;

inline void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void cmd_synth(const fs::path& config, const fs::path& out_dir) {
  const Json j = read_json_file(config);
  json_detail::check_schema(j, "synth config");
  const SynthConfig cfg = synth_config_from_json(j.contains("synthetic") ? j.at("synthetic") : j);
  save_dataset(generate_synthetic(cfg).set, out_dir);
}

inline Report cmd_experiment(const fs::path& config, const fs::path& out_json,
                             const std::optional<fs::path>& csv_dir = std::nullopt, bool timing = false) {
  const ExperimentConfig cfg = experiment_config_from_json(read_json_file(config), config.parent_path());
  Report report = run_experiment(cfg);
  write_json_file(out_json, to_json(report, timing));
  if (csv_dir) {
    write_text_file(*csv_dir / "accuracy.csv", accuracy_csv(report, false));
    write_text_file(*csv_dir / "accuracy_raw.csv", accuracy_csv(report, true));
  }
  return report;
}

/// Normalizes the whole dataset with the requested method. Cluster-Norm
/// uses `assignment` when given, otherwise clusters the pair averages.
inline std::pair<ContrastPairSet, NormStats> normalize_dataset(const ContrastPairSet& set, NormMethod norm,
                                                               const ClusterParams& params,
                                                               const std::optional<ClusterAssignment>& given,
                                                               std::optional<ClusterAssignment>* used = nullptr) {
  if (norm == NormMethod::burns) return burns_normalize(set);
  ClusterAssignment a = given ? *given : cluster_pair_averages(set, params);
  if (a.labels.size() != set.size()) throw Error("assignment length does not match the dataset");
  auto result = cluster_normalize(set, a.labels);
  if (used) *used = std::move(a);
  return result;
}

inline std::vector<int> optional_key(const ContrastPairSet& set, const std::string& key) {
  try {
    return labels_for_key(set, key);
  } catch (const Error&) {
    return std::vector<int>(set.size(), 0);
  }
}

struct PcaOutputs {
  PcaResult pca;
  std::vector<int> color;
  std::vector<int> shade;
};

/// PCA of normalized contrast differences: projections.csv, one SVG per
/// pair of the top three components, and components.json.
inline PcaOutputs cmd_pca(const fs::path& data, NormMethod norm, const fs::path& out_dir,
                          const ClusterParams& params = {}, const std::string& color_key = "label",
                          const std::string& shade_key = "distractor") {
  const ContrastPairSet set = load_dataset(data);
  const auto [normed, stats] = normalize_dataset(set, norm, params, std::nullopt);
  PcaOutputs out;
  out.pca = pca_top_k(contrast_diffs(normed), 3);
  out.color = optional_key(set, color_key);
  out.shade = optional_key(set, shade_key);
  const auto k = out.pca.components.rows();

  std::ostringstream csv;
  csv.precision(17);
  csv << "index," << color_key << "," << shade_key;
  for (Eigen::Index c = 0; c < k; ++c) csv << ",pc" << c + 1;
  csv << "\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    csv << i << "," << out.color[i] << "," << out.shade[i];
    for (Eigen::Index c = 0; c < k; ++c) csv << "," << out.pca.projections(static_cast<Eigen::Index>(i), c);
    csv << "\n";
  }
  write_text_file(out_dir / "projections.csv", csv.str());

  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      std::vector<ScatterPoint> pts;
      pts.reserve(set.size());
      for (std::size_t i = 0; i < set.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        pts.push_back({out.pca.projections(r, a), out.pca.projections(r, b), out.color[i], out.shade[i]});
      }
      const std::string xa = "PC" + std::to_string(a + 1);
      const std::string xb = "PC" + std::to_string(b + 1);
      write_text_file(out_dir / ("pc" + std::to_string(a + 1) + "_pc" + std::to_string(b + 1) + ".svg"),
                      scatter_svg(pts, to_string(norm) + " normalization: " + xa + " vs " + xb, xa, xb));
    }
  }

  Json comps = Json::array();
  for (Eigen::Index c = 0; c < k; ++c) {
    comps.push_back({{"variance", out.pca.variances(c)},
                     {"direction", json_detail::to_array(out.pca.components.row(c))}});
  }
  write_json_file(out_dir / "components.json",
                  {{"norm", to_string(norm)}, {"truncated", out.pca.truncated}, {"components", comps}});
  return out;
}

struct ReportRow {
  std::string report;
  std::string method;
  SummaryStats summary;
  std::size_t failures = 0;
};

inline std::vector<ReportRow> collect_report_rows(const std::vector<fs::path>& reports) {
  if (reports.empty()) throw Error("report: no input reports");
  std::vector<ReportRow> rows;
  for (const auto& path : reports) {
    if (!fs::exists(path)) throw Error("report: missing file '" + path.string() + "'");
    const Json j = read_json_file(path);
    if (!j.contains("methods")) throw Error("report: '" + path.string() + "' has no 'methods'");
    for (const auto& m : j.at("methods")) {
      ReportRow row;
      row.report = path.stem().string();
      row.method = m.at("name").get<std::string>();
      const Json& s = m.at("summary");
      row.summary.count = s.at("count").get<std::size_t>();
      row.summary.mean = s.at("mean").get<double>();
      row.summary.std = s.at("std").get<double>();
      row.summary.min = s.at("min").get<double>();
      row.summary.median = s.at("median").get<double>();
      row.summary.max = s.at("max").get<double>();
      row.failures = m.value("failures", std::size_t{0});
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Comparison table across reports: Markdown for *.md, CSV otherwise.
inline std::vector<ReportRow> cmd_report(const std::vector<fs::path>& reports, const fs::path& out) {
  auto rows = collect_report_rows(reports);
  std::ostringstream text;
  if (out.extension() == ".md") {
    text << std::fixed << std::setprecision(4);
    text << "| Report | Method | Mean accuracy | Std | Min | Median | Max | Fits | Failures |\n";
    text << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      text << "| " << r.report << " | " << r.method << " | " << r.summary.mean << " | " << r.summary.std << " | "
           << r.summary.min << " | " << r.summary.median << " | " << r.summary.max << " | " << r.summary.count
           << " | " << r.failures << " |\n";
    }
  } else {
    text.precision(17);
    text << "report,method,mean,std,min,median,max,fits,failures\n";
    for (const auto& r : rows) {
      text << r.report << "," << r.method << "," << r.summary.mean << "," << r.summary.std << "," << r.summary.min
           << "," << r.summary.median << "," << r.summary.max << "," << r.summary.count << "," << r.failures << "\n";
    }
  }
  write_text_file(out, text.str());
  return rows;
}

inline ClusterAssignment cmd_cluster(const fs::path& data, const ClusterParams& params, const fs::path& out) {
  const ClusterAssignment a = cluster_pair_averages(load_dataset(data), params);
  write_json_file(out, to_json(a));
  return a;
}

/// Writes the normalized dataset plus stats.json (and assignment.json for
/// Cluster-Norm) under `out_dir`.
inline NormStats cmd_normalize(const fs::path& data, NormMethod norm, const fs::path& out_dir,
                               const ClusterParams& params = {},
                               const std::optional<fs::path>& assignment = std::nullopt) {
  const ContrastPairSet set = load_dataset(data);
  std::optional<ClusterAssignment> given;
  if (assignment) given = cluster_assignment_from_json(read_json_file(*assignment));
  std::optional<ClusterAssignment> used;
  auto [normed, stats] = normalize_dataset(set, norm, params, given, &used);
  save_dataset(normed, out_dir);
  write_json_file(out_dir / "stats.json", to_json(stats));
  if (used) write_json_file(out_dir / "assignment.json", to_json(*used));
  return stats;
}

}  // namespace probelab::cli
