#include "commands.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace probelab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json synth_json(std::size_t n = 200) {
  return {{"n", n},
          {"d", 32},
          {"m", 2},
          {"coefficients", {{"pm", 1.0}, {"know", 1.0}, {"distract", 5.0}, {"xor_pm", 4.0}, {"xor_know", 0.25}}},
          {"noise_sigma", 0.05},
          {"balanced", true},
          {"seed", 3}};
}

Json experiment_json(std::size_t fits = 2) {
  return {{"schema_version", 1},
          {"seed", 5},
          {"data", {{"synthetic", synth_json(400)}}},
          {"norm", {"burns", "cluster"}},
          {"cluster", {{"method", "hdbscan"}, {"min_cluster_size", 5}}},
          {"probes", {"ccs", "crc_tpc", "logreg"}},
          {"fits", fits},
          {"ccs", {{"steps", 100}, {"restarts", 2}}},
          {"logreg", {{"steps", 200}}}};
}

struct Run {
  int status = 0;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(PROBELAB_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  r.status = ::pclose(pipe);
  return r;
}

}  // namespace

TEST(CliSynth, WritesLoadableDataset) {
  testutil::TempDir tmp("synth");
  write_json_file(tmp.path() / "s.json", synth_json());
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
  const auto set = load_dataset(tmp.path() / "ds");
  EXPECT_EQ(set.size(), 200u);
  EXPECT_EQ(set.dim(), 32u);
  ASSERT_TRUE(set.meta.has_value());
  EXPECT_EQ((*set.meta)[1].at("distractor"), "1");
}

TEST(CliSynth, DeterministicBytes) {
  testutil::TempDir tmp("synth_det");
  write_json_file(tmp.path() / "s.json", synth_json());
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "a");
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "b");
  for (const char* f : {"manifest.json", "pos.bin", "neg.bin", "labels.bin", "meta.json"}) {
    EXPECT_EQ(slurp(tmp.path() / "a" / f), slurp(tmp.path() / "b" / f)) << f;
  }
}

TEST(CliSynth, MissingFieldIsNamed) {
  testutil::TempDir tmp("synth_bad");
  Json j = synth_json();
  j.erase("noise_sigma");
  write_json_file(tmp.path() / "s.json", j);
  try {
    cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("noise_sigma"), std::string::npos) << e.what();
  }
  Json k = synth_json();
  k["coefficients"].erase("xor_pm");
  write_json_file(tmp.path() / "k.json", k);
  EXPECT_THROW(cli::cmd_synth(tmp.path() / "k.json", tmp.path() / "ds"), Error);
}

TEST(CliExperiment, ByteIdenticalReports) {
  testutil::TempDir tmp("exp");
  write_json_file(tmp.path() / "e.json", experiment_json());
  const auto r = cli::cmd_experiment(tmp.path() / "e.json", tmp.path() / "a.json", tmp.path() / "csv");
  cli::cmd_experiment(tmp.path() / "e.json", tmp.path() / "b.json");
  EXPECT_EQ(slurp(tmp.path() / "a.json"), slurp(tmp.path() / "b.json"));
  const Json j = read_json_file(tmp.path() / "a.json");
  EXPECT_EQ(j.at("methods").size(), 6u);
  EXPECT_FALSE(j.contains("wall_seconds"));
  EXPECT_EQ(j.at("methods")[0].at("accuracy").size(), 2u);
  const std::string csv = slurp(tmp.path() / "csv" / "accuracy.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "fit,ccs@burns,crc_tpc@burns,logreg@burns,ccs@cluster,crc_tpc@cluster,logreg@cluster");
  EXPECT_EQ(r.methods.size(), 6u);
}

TEST(CliExperiment, DatasetPathResolvesRelativeToConfig) {
  testutil::TempDir tmp("exp_path");
  write_json_file(tmp.path() / "s.json", synth_json());
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
  Json e = experiment_json(1);
  e["data"] = {{"path", "ds"}};
  e["norm"] = "burns";
  e["probes"] = {"crc_tpc"};
  write_json_file(tmp.path() / "e.json", e);
  const auto r = cli::cmd_experiment(tmp.path() / "e.json", tmp.path() / "r.json");
  EXPECT_EQ(r.n, 200u);
  EXPECT_EQ(r.methods.size(), 1u);
}

TEST(CliExperiment, InvalidProbeListsValidNames) {
  testutil::TempDir tmp("exp_bad");
  Json e = experiment_json();
  e["probes"] = {"svm"};
  write_json_file(tmp.path() / "e.json", e);
  try {
    cli::cmd_experiment(tmp.path() / "e.json", tmp.path() / "r.json");
    FAIL() << "expected an error";
  } catch (const Error& err) {
    const std::string msg = err.what();
    for (const char* name : {"ccs", "crc_tpc", "logreg"}) EXPECT_NE(msg.find(name), std::string::npos) << msg;
  }
  e = experiment_json();
  e["schema_version"] = 2;
  write_json_file(tmp.path() / "v.json", e);
  EXPECT_THROW(cli::cmd_experiment(tmp.path() / "v.json", tmp.path() / "r.json"), Error);
}

TEST(CliPca, KnowledgeOnlySeparatesLabels) {
  testutil::TempDir tmp("pca");
  Json s = synth_json();
  s["coefficients"] = {{"pm", 1.0}, {"know", 1.0}, {"distract", 0.0}, {"xor_pm", 0.0}, {"xor_know", 0.0}};
  write_json_file(tmp.path() / "s.json", s);
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
  const auto out = cli::cmd_pca(tmp.path() / "ds", NormMethod::burns, tmp.path() / "pca");
  double lo1 = 1e300, hi1 = -1e300, lo0 = 1e300, hi0 = -1e300;
  for (std::size_t i = 0; i < out.color.size(); ++i) {
    const double v = out.pca.projections(static_cast<Eigen::Index>(i), 0);
    if (out.color[i] == 1) {
      lo1 = std::min(lo1, v);
      hi1 = std::max(hi1, v);
    } else {
      lo0 = std::min(lo0, v);
      hi0 = std::max(hi0, v);
    }
  }
  EXPECT_TRUE(hi0 < lo1 || hi1 < lo0);
  const std::string csv = slurp(tmp.path() / "pca" / "projections.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 201);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,label,distractor,pc1,pc2,pc3");
  for (const char* f : {"pc1_pc2.svg", "pc1_pc3.svg", "pc2_pc3.svg", "components.json"}) {
    EXPECT_TRUE(fs::exists(tmp.path() / "pca" / f)) << f;
  }
}

TEST(CliPca, DistractorDominatesAfterBurns) {
  testutil::TempDir tmp("pca_d");
  write_json_file(tmp.path() / "s.json", synth_json());
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
  const auto out = cli::cmd_pca(tmp.path() / "ds", NormMethod::burns, tmp.path() / "pca");
  double lo1 = 1e300, hi1 = -1e300, lo0 = 1e300, hi0 = -1e300;
  for (std::size_t i = 0; i < out.shade.size(); ++i) {
    const double v = out.pca.projections(static_cast<Eigen::Index>(i), 0);
    if (out.shade[i] == 1) {
      lo1 = std::min(lo1, v);
      hi1 = std::max(hi1, v);
    } else {
      lo0 = std::min(lo0, v);
      hi0 = std::max(hi0, v);
    }
  }
  EXPECT_TRUE(hi0 < lo1 || hi1 < lo0);
}

TEST(CliReport, RowsAndMeans) {
  testutil::TempDir tmp("report");
  write_json_file(tmp.path() / "e.json", experiment_json());
  const auto a = cli::cmd_experiment(tmp.path() / "e.json", tmp.path() / "first.json");
  Json e = experiment_json();
  e["norm"] = "burns";
  write_json_file(tmp.path() / "f.json", e);
  const auto b = cli::cmd_experiment(tmp.path() / "f.json", tmp.path() / "second.json");
  const auto rows = cli::cmd_report({tmp.path() / "first.json", tmp.path() / "second.json"}, tmp.path() / "t.md");
  ASSERT_EQ(rows.size(), a.methods.size() + b.methods.size());
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    EXPECT_EQ(rows[i].report, "first");
    EXPECT_EQ(rows[i].method, a.methods[i].name);
    EXPECT_EQ(rows[i].summary.mean, a.methods[i].summary.mean);
  }
  EXPECT_EQ(rows.back().summary.mean, b.methods.back().summary.mean);
  const std::string md = slurp(tmp.path() / "t.md");
  EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 2 + 9);
  cli::cmd_report({tmp.path() / "first.json"}, tmp.path() / "t.csv");
  const std::string csv = slurp(tmp.path() / "t.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_THROW(cli::cmd_report({tmp.path() / "nope.json"}, tmp.path() / "x.md"), Error);
  EXPECT_THROW(cli::cmd_report({}, tmp.path() / "x.md"), Error);
}

TEST(CliClusterNormalize, RoundTrip) {
  testutil::TempDir tmp("cn");
  write_json_file(tmp.path() / "s.json", synth_json());
  cli::cmd_synth(tmp.path() / "s.json", tmp.path() / "ds");
  const auto a = cli::cmd_cluster(tmp.path() / "ds", {}, tmp.path() / "a.json");
  EXPECT_EQ(a.clusters, 2);
  const auto set = load_dataset(tmp.path() / "ds");
  std::vector<int> truth;
  for (const auto& m : *set.meta) truth.push_back(std::stoi(m.at("distractor")));
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a.labels, truth), 1.0);

  const auto stats = cli::cmd_normalize(tmp.path() / "ds", NormMethod::cluster, tmp.path() / "n", {}, tmp.path() / "a.json");
  EXPECT_EQ(stats.groups.size(), 2u);
  const auto normed = load_dataset(tmp.path() / "n");
  const auto expect = cluster_normalize(set, a.labels).first;
  EXPECT_LE((normed.pos - expect.pos).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_TRUE(fs::exists(tmp.path() / "n" / "stats.json"));
  EXPECT_TRUE(fs::exists(tmp.path() / "n" / "assignment.json"));
  cli::cmd_normalize(tmp.path() / "ds", NormMethod::burns, tmp.path() / "b");
  EXPECT_FALSE(fs::exists(tmp.path() / "b" / "assignment.json"));
}

TEST(CliBinary, SynthExperimentAndErrors) {
  testutil::TempDir tmp("bin");
  write_json_file(tmp.path() / "s.json", synth_json());
  auto r = run_cli("synth --config " + (tmp.path() / "s.json").string() + " --out " + (tmp.path() / "ds").string());
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(tmp.path() / "ds" / "manifest.json"));

  write_json_file(tmp.path() / "e.json", experiment_json(1));
  r = run_cli("experiment --config " + (tmp.path() / "e.json").string() + " --out " + (tmp.path() / "r.json").string() +
              " --timing");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("ccs@cluster: mean accuracy"), std::string::npos) << r.output;
  EXPECT_TRUE(read_json_file(tmp.path() / "r.json").contains("wall_seconds"));

  r = run_cli("synth --config " + (tmp.path() / "missing.json").string() + " --out " + (tmp.path() / "x").string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
  r = run_cli("bogus");
  EXPECT_NE(r.status, 0);
  r = run_cli("pca --data " + (tmp.path() / "ds").string() + " --norm l2 --out " + (tmp.path() / "p").string());
  EXPECT_NE(r.status, 0);
}

TEST(CliConfigs, ShippedConfigsParse) {
  const fs::path dir = fs::path(PROBELAB_SOURCE_DIR) / "configs";
  for (const char* name : {"headline.json", "control.json"}) {
    const auto cfg = experiment_config_from_json(read_json_file(dir / name), dir);
    EXPECT_EQ(cfg.fits, 50u) << name;
    EXPECT_TRUE(cfg.data.synthetic.has_value()) << name;
  }
  const Json s = read_json_file(dir / "synth.json");
  EXPECT_EQ(synth_config_from_json(s).n, 2000u);
}
