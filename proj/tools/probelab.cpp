#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_cluster_flags(CLI::App* cmd, std::string& method, probelab::ClusterParams& params, std::string& selection) {
  cmd->add_option("--method", method, "Clustering method: hdbscan | kmeans")->check(CLI::IsMember({"hdbscan", "kmeans"}));
  cmd->add_option("--min-cluster-size", params.hdbscan.min_cluster_size, "HDBSCAN minimum cluster size");
  cmd->add_option("--min-samples", params.hdbscan.min_samples, "HDBSCAN min_samples (default: min cluster size)");
  cmd->add_option("--selection", selection, "HDBSCAN selection: eom | leaf")->check(CLI::IsMember({"eom", "leaf"}));
  cmd->add_option("--k", params.kmeans.k, "k-means cluster count");
  cmd->add_option("--seed", params.kmeans.seed, "k-means seed");
  cmd->add_option("--max-iters", params.kmeans.max_iters, "k-means iteration cap");
}

void finish_cluster_flags(const std::string& method, const std::string& selection, probelab::ClusterParams& params) {
  params.method = probelab::parse_cluster_method(method);
  params.hdbscan.selection = selection == "leaf" ? probelab::ClusterSelection::leaf : probelab::ClusterSelection::eom;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = probelab::cli;
  CLI::App app{"probelab: contrast-pair probing with Burns and cluster normalization"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string data;
  std::string norm = "burns";
  std::string method = "hdbscan";
  std::string selection = "eom";
  std::string csv_dir;
  std::string assignment;
  std::string color_key = "label";
  std::string shade_key = "distractor";
  std::vector<std::string> reports;
  bool timing = false;
  probelab::ClusterParams params;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic contrast-pair dataset");
  synth->add_option("--config", config, "Synthetic config JSON")->required();
  synth->add_option("--out", out, "Output dataset directory")->required();

  auto* experiment = app.add_subcommand("experiment", "Run repeated probe fits and write a report");
  experiment->add_option("--config", config, "Experiment config JSON")->required();
  experiment->add_option("--out", out, "Report JSON path")->required();
  experiment->add_option("--csv", csv_dir, "Directory for per-fit accuracy CSVs");
  experiment->add_flag("--timing", timing, "Include wall-clock seconds in the report");

  auto* pca = app.add_subcommand("pca", "PCA projections and scatter plots of normalized differences");
  pca->add_option("--data", data, "Dataset directory")->required();
  pca->add_option("--norm", norm, "burns | cluster")->check(CLI::IsMember({"burns", "cluster"}));
  pca->add_option("--out", out, "Output directory")->required();
  pca->add_option("--color-key", color_key, "Label key for point color");
  pca->add_option("--shade-key", shade_key, "Metadata key for point shade");
  add_cluster_flags(pca, method, params, selection);

  auto* report = app.add_subcommand("report", "Summarize reports into one comparison table");
  report->add_option("--reports", reports, "Report JSON files")->required();
  report->add_option("--out", out, "Output table (.md or .csv)")->required();

  auto* cluster = app.add_subcommand("cluster", "Cluster pair averages and dump the assignment");
  cluster->add_option("--data", data, "Dataset directory")->required();
  cluster->add_option("--out", out, "Assignment JSON path")->required();
  add_cluster_flags(cluster, method, params, selection);

  auto* normalize = app.add_subcommand("normalize", "Write a normalized copy of a dataset");
  normalize->add_option("--data", data, "Dataset directory")->required();
  normalize->add_option("--norm", norm, "burns | cluster")->check(CLI::IsMember({"burns", "cluster"}));
  normalize->add_option("--out", out, "Output dataset directory")->required();
  normalize->add_option("--assignment", assignment, "Cluster assignment JSON (Cluster-Norm)");
  add_cluster_flags(normalize, method, params, selection);

  CLI11_PARSE(app, argc, argv);

  try {
    finish_cluster_flags(method, selection, params);
    if (*synth) {
      cli::cmd_synth(config, out);
    } else if (*experiment) {
      const auto r = cli::cmd_experiment(config, out, csv_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(csv_dir), timing);
      for (const auto& m : r.methods) {
        std::cerr << m.name << ": mean accuracy " << m.summary.mean << " over " << m.summary.count << " fits\n";
      }
      std::cerr << "wall time " << r.wall_seconds << " s\n";
    } else if (*pca) {
      cli::cmd_pca(data, probelab::parse_norm_method(norm), out, params, color_key, shade_key);
    } else if (*report) {
      std::vector<std::filesystem::path> paths(reports.begin(), reports.end());
      cli::cmd_report(paths, out);
    } else if (*cluster) {
      const auto a = cli::cmd_cluster(data, params, out);
      std::cerr << a.clusters << " clusters, " << a.noise_count() << " noise points\n";
    } else if (*normalize) {
      cli::cmd_normalize(data, probelab::parse_norm_method(norm), out, params,
                         assignment.empty() ? std::nullopt : std::optional<std::filesystem::path>(assignment));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
