#pragma once

#include "probelab/ccs.hpp"
#include "probelab/cluster.hpp"
#include "probelab/dataset.hpp"
#include "probelab/eval.hpp"
#include "probelab/logreg.hpp"
#include "probelab/norm.hpp"
#include "probelab/parallel.hpp"
#include "probelab/pca.hpp"
#include "probelab/synth.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

namespace probelab {

enum class NormMethod { burns, cluster };
enum class ProbeMethod { ccs, crc_tpc, logreg };

inline std::string to_string(NormMethod m) { return m == NormMethod::burns ? "burns" : "cluster"; }

inline std::string to_string(ProbeMethod m) {
  switch (m) {
    case ProbeMethod::ccs: return "ccs";
    case ProbeMethod::crc_tpc: return "crc_tpc";
    case ProbeMethod::logreg: return "logreg";
  }
  return "?";
}

inline NormMethod parse_norm_method(const std::string& s) {
  if (s == "burns") return NormMethod::burns;
  if (s == "cluster") return NormMethod::cluster;
  throw Error("unknown norm method '" + s + "' (valid: burns, cluster)");
}

inline ProbeMethod parse_probe_method(const std::string& s) {
  if (s == "ccs") return ProbeMethod::ccs;
  if (s == "crc_tpc") return ProbeMethod::crc_tpc;
  if (s == "logreg") return ProbeMethod::logreg;
  throw Error("unknown probe '" + s + "' (valid: ccs, crc_tpc, logreg)");
}

struct DataSource {
  std::optional<SynthConfig> synthetic;
  std::optional<std::filesystem::path> path;
};

struct ExperimentConfig {
  DataSource data;
  std::vector<NormMethod> norms{NormMethod::burns};
  ClusterParams cluster;
  std::vector<ProbeMethod> probes{ProbeMethod::ccs, ProbeMethod::crc_tpc, ProbeMethod::logreg};
  std::size_t fits = 50;
  double split_ratio = 0.7;
  bool refit_split = true;
  std::uint64_t seed = 0;
  std::string label_key = "label";
  CcsHyper ccs;
  LogregHyper logreg;
  std::size_t threads = 0;
};

struct FitOutcome {
  bool ok = false;
  std::string error;
  double accuracy_raw = 0.0;
  double accuracy = 0.0;  // flip-corrected
  bool flipped = false;
  std::optional<double> final_loss;
};

struct MethodReport {
  std::string name;  // "<probe>@<norm>"
  ProbeMethod probe = ProbeMethod::ccs;
  NormMethod norm = NormMethod::burns;
  std::vector<FitOutcome> fits;
  SummaryStats summary;      // flip-corrected accuracy over successful fits
  SummaryStats summary_raw;  // raw accuracy over successful fits
  std::size_t failures = 0;
};

struct ClusterSummary {
  std::size_t fit = 0;
  bool ok = false;
  std::string error;
  int clusters = 0;
  std::vector<std::size_t> sizes;
  std::size_t noise = 0;
};

struct Report {
  ExperimentConfig config;
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<MethodReport> methods;
  std::vector<ClusterSummary> clusters;  // one per fit when Cluster-Norm runs
  double wall_seconds = 0.0;

  const MethodReport& method(const std::string& name) const {
    for (const auto& m : methods) {
      if (m.name == name) return m;
    }
    throw Error("report has no method '" + name + "'");
  }
};

inline std::string method_name(ProbeMethod p, NormMethod n) { return to_string(p) + "@" + to_string(n); }

inline std::uint64_t fit_seed(const ExperimentConfig& cfg, std::size_t fit) {
  return derive_seed(cfg.seed, stream::fit, fit);
}

/// Everything a single fit trains and evaluates on. Train-time statistics
/// and cluster assignments depend on the train rows only; the test split is
/// always Burns-normalized with its own statistics.
struct PreparedFit {
  SplitIndices split;
  ContrastPairSet train;
  NormStats train_stats;
  std::optional<ClusterAssignment> assignment;
  ContrastPairSet test;
  NormStats test_stats;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
};

inline PreparedFit prepare_fit(const ContrastPairSet& set, const std::vector<int>& labels,
                               const ExperimentConfig& cfg, std::size_t fit, NormMethod norm) {
  const std::uint64_t seed = fit_seed(cfg, fit);
  PreparedFit out;
  out.split = split_indices(set.size(), cfg.split_ratio, cfg.refit_split ? seed : cfg.seed);
  const ContrastPairSet train = subset(set, out.split.train);
  const ContrastPairSet test = subset(set, out.split.test);
  for (auto i : out.split.train) out.train_labels.push_back(labels[i]);
  for (auto i : out.split.test) out.test_labels.push_back(labels[i]);

  if (norm == NormMethod::burns) {
    std::tie(out.train, out.train_stats) = burns_normalize(train);
  } else {
    ClusterParams params = cfg.cluster;
    params.kmeans.seed = derive_seed(seed, stream::kmeans);
    out.assignment = cluster_pair_averages(train, params);
    std::tie(out.train, out.train_stats) = cluster_normalize(train, out.assignment->labels);
  }
  std::tie(out.test, out.test_stats) = burns_normalize(test);
  return out;
}

namespace experiment_detail {

inline FitOutcome score(const std::vector<int>& predicted, const std::vector<int>& labels) {
  FitOutcome o;
  o.ok = true;
  o.accuracy_raw = accuracy(predicted, labels);
  o.flipped = o.accuracy_raw < 0.5;
  o.accuracy = flip_corrected_accuracy(o.accuracy_raw);
  return o;
}

inline FitOutcome run_probe(ProbeMethod probe, const PreparedFit& fit, const ExperimentConfig& cfg,
                            std::uint64_t seed) {
  try {
    switch (probe) {
      case ProbeMethod::ccs: {
        CcsHyper hyper = cfg.ccs;
        hyper.seed = derive_seed(seed, stream::ccs_restart);
        const LinearProbe p = train_ccs(fit.train.pos, fit.train.neg, hyper);
        FitOutcome o = score(ccs_predict(p, fit.test.pos, fit.test.neg).labels, fit.test_labels);
        o.final_loss = p.final_loss;
        return o;
      }
      case ProbeMethod::crc_tpc: {
        const DirectionProbe p = crc_tpc(contrast_diffs(fit.train));
        return score(crc_predict(p, contrast_diffs(fit.test)).labels, fit.test_labels);
      }
      case ProbeMethod::logreg: {
        LogregHyper hyper = cfg.logreg;
        hyper.seed = derive_seed(seed, stream::logreg);
        const LinearProbe p = train_logreg(contrast_diffs(fit.train), fit.train_labels, hyper);
        FitOutcome o = score(logreg_predict(p, contrast_diffs(fit.test)).labels, fit.test_labels);
        o.final_loss = p.final_loss;
        return o;
      }
    }
  } catch (const std::exception& e) {
    FitOutcome o;
    o.error = e.what();
    return o;
  }
  return {};
}

}  // namespace experiment_detail

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.fits < 1) throw Error("experiment: fits must be >= 1");
  if (cfg.norms.empty()) throw Error("experiment: no normalization method");
  if (cfg.probes.empty()) throw Error("experiment: no probe");
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw Error("experiment: split_ratio must lie in (0, 1)");
}

/// Runs `fits` independent train/evaluate rounds for every (norm, probe)
/// combination. All combinations in one fit share the split, so the
/// comparison between normalizations is paired.
inline Report run_experiment(const ContrastPairSet& set, const ExperimentConfig& cfg) {
  validate(cfg);
  validate(set);
  const auto started = std::chrono::steady_clock::now();
  const std::vector<int> labels = labels_for_key(set, cfg.label_key);

  Report report;
  report.config = cfg;
  report.n = set.size();
  report.d = set.dim();
  for (auto norm : cfg.norms) {
    for (auto probe : cfg.probes) {
      MethodReport m;
      m.name = method_name(probe, norm);
      m.probe = probe;
      m.norm = norm;
      m.fits.resize(cfg.fits);
      report.methods.push_back(std::move(m));
    }
  }
  const bool clustered =
      std::find(cfg.norms.begin(), cfg.norms.end(), NormMethod::cluster) != cfg.norms.end();
  if (clustered) report.clusters.resize(cfg.fits);

  const std::size_t jobs = cfg.fits * cfg.norms.size();
  parallel_for(jobs, worker_count(cfg.threads), [&](std::size_t job) {
    const std::size_t fit = job / cfg.norms.size();
    const std::size_t norm_index = job % cfg.norms.size();
    const NormMethod norm = cfg.norms[norm_index];
    const std::size_t base = norm_index * cfg.probes.size();
    std::optional<PreparedFit> prepared;
    std::string failure;
    try {
      prepared = prepare_fit(set, labels, cfg, fit, norm);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (norm == NormMethod::cluster) {
      ClusterSummary& cs = report.clusters[fit];
      cs.fit = fit;
      if (prepared && prepared->assignment) {
        cs.ok = true;
        cs.clusters = prepared->assignment->clusters;
        cs.sizes = prepared->assignment->sizes();
        cs.noise = prepared->assignment->noise_count();
      } else {
        cs.error = failure;
      }
    }
    for (std::size_t p = 0; p < cfg.probes.size(); ++p) {
      FitOutcome& slot = report.methods[base + p].fits[fit];
      if (!prepared) {
        slot.error = failure;
        continue;
      }
      slot = experiment_detail::run_probe(cfg.probes[p], *prepared, cfg, fit_seed(cfg, fit));
    }
  });

  for (auto& m : report.methods) {
    std::vector<double> acc;
    std::vector<double> raw;
    for (const auto& f : m.fits) {
      if (!f.ok) {
        ++m.failures;
        continue;
      }
      acc.push_back(f.accuracy);
      raw.push_back(f.accuracy_raw);
    }
    m.summary = summarize(acc);
    m.summary_raw = summarize(raw);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

inline ContrastPairSet load_source(const DataSource& source) {
  if (source.synthetic) return generate_synthetic(*source.synthetic).set;
  if (source.path) return load_dataset(*source.path);
  throw Error("experiment: no data source");
}

inline Report run_experiment(const ExperimentConfig& cfg) { return run_experiment(load_source(cfg.data), cfg); }

}  // namespace probelab
