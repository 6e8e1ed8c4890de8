#pragma once

#include "probelab/assignment.hpp"
#include "probelab/ccs.hpp"
#include "probelab/cluster.hpp"
#include "probelab/experiment.hpp"
#include "probelab/logreg.hpp"
#include "probelab/norm.hpp"
#include "probelab/probe.hpp"
#include "probelab/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace probelab {

using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

namespace json_detail {

// Reads `key` from `j`, reporting the dotted path on absence or type error.
template <typename T>
T required(const Json& j, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!j.is_object() || !j.contains(key)) throw Error("missing field '" + where + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("field '" + where + "' has the wrong type");
  }
}

template <typename T>
T optional(const Json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return required<T>(j, key, path);
}

inline Json to_array(const Eigen::Ref<const RowVector>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline RowVector row_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error("field '" + where + "' must be an array");
  RowVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error("field '" + where + "' must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline void check_schema(const Json& j, const std::string& what) {
  const int version = optional<int>(j, "schema_version", "", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion) {
    throw Error(what + ": unsupported schema_version " + std::to_string(version));
  }
}

inline Json summary_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean},     {"std", s.std}, {"min", s.min},
          {"q1", s.q1},       {"median", s.median}, {"q3", s.q3},   {"max", s.max}};
}

}  // namespace json_detail

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// --- synth -----------------------------------------------------------------

inline Json to_json(const SynthConfig& c) {
  return {{"n", c.n},
          {"d", c.d},
          {"m", c.m},
          {"coefficients",
           {{"pm", c.coef.pm},
            {"know", c.coef.know},
            {"distract", c.coef.distract},
            {"xor_pm", c.coef.xor_pm},
            {"xor_know", c.coef.xor_know}}},
          {"noise_sigma", c.noise_sigma},
          {"balanced", c.balanced},
          {"seed", c.seed}};
}

inline SynthConfig synth_config_from_json(const Json& j, const std::string& path = "") {
  using json_detail::required;
  SynthConfig c;
  c.n = required<std::size_t>(j, "n", path);
  c.d = required<std::size_t>(j, "d", path);
  c.m = required<std::size_t>(j, "m", path);
  const std::string cpath = path.empty() ? "coefficients" : path + ".coefficients";
  if (!j.contains("coefficients")) throw Error("missing field '" + cpath + "'");
  const Json& co = j.at("coefficients");
  c.coef.pm = required<double>(co, "pm", cpath);
  c.coef.know = required<double>(co, "know", cpath);
  c.coef.distract = required<double>(co, "distract", cpath);
  c.coef.xor_pm = required<double>(co, "xor_pm", cpath);
  c.coef.xor_know = required<double>(co, "xor_know", cpath);
  c.noise_sigma = required<double>(j, "noise_sigma", path);
  c.balanced = json_detail::optional<bool>(j, "balanced", path, true);
  c.seed = required<std::uint64_t>(j, "seed", path);
  validate(c);
  return c;
}

// --- norm ------------------------------------------------------------------

inline Json to_json(const NormStats& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups) {
    groups.push_back({{"id", g.id},
                      {"count", g.count},
                      {"mu_pos", json_detail::to_array(g.pos.mean)},
                      {"sigma_pos", json_detail::to_array(g.pos.sigma)},
                      {"mu_neg", json_detail::to_array(g.neg.mean)},
                      {"sigma_neg", json_detail::to_array(g.neg.sigma)}});
  }
  return {{"groups", groups}, {"assignment", s.assignment}};
}

inline NormStats norm_stats_from_json(const Json& j) {
  using json_detail::required;
  NormStats s;
  s.assignment = required<std::vector<int>>(j, "assignment", "");
  if (!j.contains("groups") || !j.at("groups").is_array()) throw Error("missing field 'groups'");
  for (const auto& g : j.at("groups")) {
    NormGroup group;
    group.id = required<int>(g, "id", "groups[]");
    group.count = required<std::size_t>(g, "count", "groups[]");
    group.pos.mean = json_detail::row_from(g.at("mu_pos"), "groups[].mu_pos");
    group.pos.sigma = json_detail::row_from(g.at("sigma_pos"), "groups[].sigma_pos");
    group.neg.mean = json_detail::row_from(g.at("mu_neg"), "groups[].mu_neg");
    group.neg.sigma = json_detail::row_from(g.at("sigma_neg"), "groups[].sigma_neg");
    s.groups.push_back(std::move(group));
  }
  return s;
}

// --- cluster ---------------------------------------------------------------

inline Json to_json(const ClusterAssignment& a) {
  Json params = {{"metric", a.metric}};
  if (a.method == "hdbscan") {
    params["min_cluster_size"] = a.min_cluster_size;
    params["min_samples"] = a.min_samples;
    params["selection"] = a.selection;
  } else if (a.method == "kmeans") {
    params["k"] = a.k;
    params["seed"] = a.seed;
  }
  return {{"method", a.method},
          {"clusters", a.clusters},
          {"noise", a.noise_count()},
          {"sizes", a.sizes()},
          {"parameters", params},
          {"labels", a.labels}};
}

inline ClusterAssignment cluster_assignment_from_json(const Json& j) {
  using json_detail::required;
  ClusterAssignment a;
  a.labels = required<std::vector<int>>(j, "labels", "");
  a.method = json_detail::optional<std::string>(j, "method", "", "given");
  a.clusters = relabel_by_first_index(a.labels);
  if (j.contains("parameters")) {
    const Json& p = j.at("parameters");
    a.metric = json_detail::optional<std::string>(p, "metric", "parameters", "euclidean");
    a.min_cluster_size = json_detail::optional<std::size_t>(p, "min_cluster_size", "parameters", 0);
    a.min_samples = json_detail::optional<std::size_t>(p, "min_samples", "parameters", 0);
    a.selection = json_detail::optional<std::string>(p, "selection", "parameters", "");
    a.k = json_detail::optional<std::size_t>(p, "k", "parameters", 0);
    a.seed = json_detail::optional<std::uint64_t>(p, "seed", "parameters", 0);
  }
  return a;
}

inline Json to_json(const ClusterParams& p) {
  return {{"method", to_string(p.method)},
          {"min_cluster_size", p.hdbscan.min_cluster_size},
          {"min_samples", p.hdbscan.effective_min_samples()},
          {"selection", to_string(p.hdbscan.selection)},
          {"k", p.kmeans.k},
          {"max_iters", p.kmeans.max_iters}};
}

inline ClusterParams cluster_params_from_json(const Json& j, const std::string& path = "cluster") {
  using json_detail::optional;
  ClusterParams p;
  p.method = parse_cluster_method(optional<std::string>(j, "method", path, "hdbscan"));
  p.hdbscan.min_cluster_size = optional<std::size_t>(j, "min_cluster_size", path, 5);
  p.hdbscan.min_samples = optional<std::size_t>(j, "min_samples", path, 0);
  const auto selection = optional<std::string>(j, "selection", path, "eom");
  if (selection == "eom") {
    p.hdbscan.selection = ClusterSelection::eom;
  } else if (selection == "leaf") {
    p.hdbscan.selection = ClusterSelection::leaf;
  } else {
    throw Error("field '" + path + ".selection' must be 'eom' or 'leaf'");
  }
  p.kmeans.k = optional<std::size_t>(j, "k", path, 2);
  p.kmeans.max_iters = optional<std::size_t>(j, "max_iters", path, 300);
  return p;
}

// --- probes ----------------------------------------------------------------

inline Json to_json(const CcsHyper& h) {
  return {{"restarts", h.restarts},     {"steps", h.steps},     {"learning_rate", h.learning_rate},
          {"beta1", h.beta1},           {"beta2", h.beta2},     {"epsilon", h.epsilon},
          {"init_scale", h.init_scale}, {"seed", h.seed},       {"loss_reduction", "mean"},
          {"precision", to_string(h.precision)}};
}

inline CcsHyper ccs_hyper_from_json(const Json& j, const std::string& path = "ccs") {
  using json_detail::optional;
  CcsHyper h;
  h.restarts = optional<std::size_t>(j, "restarts", path, h.restarts);
  h.steps = optional<std::size_t>(j, "steps", path, h.steps);
  h.learning_rate = optional<double>(j, "learning_rate", path, h.learning_rate);
  h.beta1 = optional<double>(j, "beta1", path, h.beta1);
  h.beta2 = optional<double>(j, "beta2", path, h.beta2);
  h.epsilon = optional<double>(j, "epsilon", path, h.epsilon);
  h.init_scale = optional<double>(j, "init_scale", path, h.init_scale);
  h.seed = optional<std::uint64_t>(j, "seed", path, h.seed);
  h.precision = parse_ccs_precision(optional<std::string>(j, "precision", path, to_string(h.precision)));
  return h;
}

inline Json to_json(const LogregHyper& h) {
  return {{"l2", h.l2}, {"steps", h.steps}, {"learning_rate", h.learning_rate}, {"seed", h.seed}};
}

inline LogregHyper logreg_hyper_from_json(const Json& j, const std::string& path = "logreg") {
  using json_detail::optional;
  LogregHyper h;
  h.l2 = optional<double>(j, "l2", path, h.l2);
  h.steps = optional<std::size_t>(j, "steps", path, h.steps);
  h.learning_rate = optional<double>(j, "learning_rate", path, h.learning_rate);
  h.seed = optional<std::uint64_t>(j, "seed", path, h.seed);
  return h;
}

inline Json to_json(const LinearProbe& p, const Json& hyper = nullptr) {
  Json w = Json::array();
  for (Eigen::Index i = 0; i < p.w.size(); ++i) w.push_back(p.w(i));
  return {{"kind", to_string(p.kind)}, {"w", w},           {"b", p.b},
          {"flipped", p.flipped},      {"final_loss", p.final_loss}, {"hyper", hyper}};
}

inline LinearProbe linear_probe_from_json(const Json& j) {
  using json_detail::required;
  LinearProbe p;
  const auto kind = required<std::string>(j, "kind", "");
  if (kind == "ccs") {
    p.kind = ProbeKind::ccs;
  } else if (kind == "logreg") {
    p.kind = ProbeKind::logreg;
  } else {
    throw Error("field 'kind' must be 'ccs' or 'logreg'");
  }
  p.w = json_detail::row_from(j.at("w"), "w").transpose();
  p.b = required<double>(j, "b", "");
  p.flipped = required<bool>(j, "flipped", "");
  p.final_loss = required<double>(j, "final_loss", "");
  return p;
}

inline Json to_json(const DirectionProbe& p) {
  Json u = Json::array();
  for (Eigen::Index i = 0; i < p.u.size(); ++i) u.push_back(p.u(i));
  return {{"kind", "crc_tpc"},
          {"u", u},
          {"flipped", p.flipped},
          {"sign_convention", p.sign_convention},
          {"eigenvalue", p.eigenvalue}};
}

// --- experiment ------------------------------------------------------------

inline Json to_json(const ExperimentConfig& c) {
  Json data;
  if (c.data.synthetic) data["synthetic"] = to_json(*c.data.synthetic);
  if (c.data.path) data["path"] = c.data.path->generic_string();
  Json norms = Json::array();
  for (auto n : c.norms) norms.push_back(to_string(n));
  Json probes = Json::array();
  for (auto p : c.probes) probes.push_back(to_string(p));
  return {{"schema_version", kConfigSchemaVersion},
          {"seed", c.seed},
          {"data", data},
          {"norm", norms},
          {"cluster", to_json(c.cluster)},
          {"probes", probes},
          {"fits", c.fits},
          {"split_ratio", c.split_ratio},
          {"refit_split", c.refit_split},
          {"label_key", c.label_key},
          {"ccs", to_json(c.ccs)},
          {"logreg", to_json(c.logreg)}};
}

/// Relative dataset paths resolve against `base`.
inline ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base = {}) {
  using json_detail::optional;
  using json_detail::required;
  json_detail::check_schema(j, "experiment config");
  ExperimentConfig c;
  c.seed = required<std::uint64_t>(j, "seed", "");
  if (!j.contains("data")) throw Error("missing field 'data'");
  const Json& data = j.at("data");
  if (data.contains("synthetic")) {
    c.data.synthetic = synth_config_from_json(data.at("synthetic"), "data.synthetic");
  } else if (data.contains("path")) {
    std::filesystem::path p = required<std::string>(data, "path", "data");
    c.data.path = p.is_relative() && !base.empty() ? base / p : p;
  } else {
    throw Error("field 'data' needs 'synthetic' or 'path'");
  }
  if (j.contains("norm")) {
    c.norms.clear();
    const Json& n = j.at("norm");
    if (n.is_string()) {
      c.norms.push_back(parse_norm_method(n.get<std::string>()));
    } else if (n.is_array()) {
      for (const auto& v : n) c.norms.push_back(parse_norm_method(v.get<std::string>()));
    } else {
      throw Error("field 'norm' must be a string or an array of strings");
    }
  }
  if (j.contains("cluster")) c.cluster = cluster_params_from_json(j.at("cluster"));
  if (j.contains("probes")) {
    c.probes.clear();
    for (const auto& v : j.at("probes")) {
      if (!v.is_string()) throw Error("field 'probes' must hold strings");
      c.probes.push_back(parse_probe_method(v.get<std::string>()));
    }
  }
  c.fits = optional<std::size_t>(j, "fits", "", c.fits);
  c.split_ratio = optional<double>(j, "split_ratio", "", c.split_ratio);
  c.refit_split = optional<bool>(j, "refit_split", "", c.refit_split);
  c.label_key = optional<std::string>(j, "label_key", "", c.label_key);
  if (j.contains("ccs")) c.ccs = ccs_hyper_from_json(j.at("ccs"));
  if (j.contains("logreg")) c.logreg = logreg_hyper_from_json(j.at("logreg"));
  c.threads = optional<std::size_t>(j, "threads", "", 0);
  validate(c);
  return c;
}

/// Report as JSON. Wall-clock time is left out unless requested so that
/// reports of identical configurations are byte-identical.
inline Json to_json(const Report& r, bool include_timing = false) {
  Json methods = Json::array();
  for (const auto& m : r.methods) {
    Json acc = Json::array();
    Json raw = Json::array();
    Json flips = Json::array();
    Json losses = Json::array();
    Json errors = Json::array();
    for (const auto& f : m.fits) {
      acc.push_back(f.ok ? Json(f.accuracy) : Json(nullptr));
      raw.push_back(f.ok ? Json(f.accuracy_raw) : Json(nullptr));
      flips.push_back(f.ok ? Json(f.flipped) : Json(nullptr));
      losses.push_back(f.final_loss ? Json(*f.final_loss) : Json(nullptr));
      errors.push_back(f.ok ? Json(nullptr) : Json(f.error));
    }
    methods.push_back({{"name", m.name},
                       {"probe", to_string(m.probe)},
                       {"norm", to_string(m.norm)},
                       {"failures", m.failures},
                       {"summary", json_detail::summary_json(m.summary)},
                       {"summary_raw", json_detail::summary_json(m.summary_raw)},
                       {"accuracy", acc},
                       {"accuracy_raw", raw},
                       {"flipped", flips},
                       {"final_loss", losses},
                       {"errors", errors}});
  }
  Json clusters = Json::array();
  for (const auto& c : r.clusters) {
    clusters.push_back({{"fit", c.fit},
                        {"ok", c.ok},
                        {"clusters", c.clusters},
                        {"sizes", c.sizes},
                        {"noise", c.noise},
                        {"error", c.ok ? Json(nullptr) : Json(c.error)}});
  }
  Json out = {{"config", to_json(r.config)},
              {"n", r.n},
              {"d", r.d},
              {"fits", r.config.fits},
              {"methods", methods},
              {"clusters", clusters}};
  if (include_timing) out["wall_seconds"] = r.wall_seconds;
  return out;
}

/// Per-fit accuracy table, one column per method; failed fits are empty.
inline std::string accuracy_csv(const Report& r, bool raw) {
  std::ostringstream out;
  out.precision(17);
  out << "fit";
  for (const auto& m : r.methods) out << "," << m.name;
  out << "\n";
  for (std::size_t f = 0; f < r.config.fits; ++f) {
    out << f;
    for (const auto& m : r.methods) {
      out << ",";
      if (m.fits[f].ok) out << (raw ? m.fits[f].accuracy_raw : m.fits[f].accuracy);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace probelab
