#include "stride/trajopt/library.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stride::trajopt {

using nlohmann::json;

std::string model_hash(const rbd::RobotModel& m) {
  std::ostringstream ss;
  ss.precision(17);
  ss << m.torso_mass << ',' << m.thigh_mass << ',' << m.shank_mass << ',' << m.torso_length << ','
     << m.thigh_length << ',' << m.shank_length << ',' << m.torso_com << ',' << m.thigh_com << ','
     << m.shank_com << ',' << m.torso_inertia << ',' << m.thigh_inertia << ',' << m.shank_inertia
     << ',' << m.gravity;
  for (int i = 0; i < 4; ++i) ss << ',' << m.tau_lim[i];
  const size_t h = std::hash<std::string>{}(ss.str());
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

GaitLibrary build_library(const rbd::RobotModel& model, std::vector<double> speeds,
                          const TranscriptionSpec& spec, const GaitTask& base_task,
                          const SolveOptions& opts, LibraryBuildReport* report) {
  if (speeds.empty()) throw std::invalid_argument("build_library: empty speed grid");
  if (!std::is_sorted(speeds.begin(), speeds.end(), std::greater<>()))
    throw std::invalid_argument("build_library: speeds must be sorted descending");

  GaitLibrary lib;
  lib.model_hash = model_hash(model);

  const GaitParams* warm = nullptr;
  std::optional<Vec2d> frozen;
  for (double v : speeds) {
    GaitTask task = base_task;
    task.speed = v;
    task.frozen_durations = frozen;
    const GaitSolveResult res = optimize_gait(model, spec, task, warm, opts);
    if (report)
      report->entries.push_back({v, warm != nullptr, res.gait.iterations, res.gait.max_residual,
                                 res.success});
    if (!res.success) {
      lib.partial = true;
      lib.failures.push_back("speed " + std::to_string(v) + ": " + res.failure);
      continue;
    }
    lib.entries.push_back(res.gait);
    warm = &lib.entries.back();
    if (!frozen) frozen = Vec2d(res.gait.durations[0], res.gait.durations[1]);
  }

  const GaitSolveResult standing = optimize_standing(model, base_task, opts);
  if (standing.success) {
    lib.standing = standing.gait;
  } else {
    lib.partial = true;
    lib.failures.push_back("standing: " + standing.failure);
  }
  return lib;
}

namespace {

json gait_to_json(const GaitParams& g) {
  json j;
  j["speed"] = g.speed;
  j["step_length"] = g.step_length;
  json durations;
  json bezier;
  for (size_t d = 0; d < g.domains.size(); ++d) {
    std::string dn = to_string(g.domains[d]);
    std::transform(dn.begin(), dn.end(), dn.begin(), ::tolower);
    durations[dn] = g.durations[d];
    const auto names = rbd::output_names(g.domains[d]);
    for (int i = 0; i < g.alpha[d].rows(); ++i) {
      std::vector<double> row(g.alpha[d].cols());
      for (int c = 0; c < g.alpha[d].cols(); ++c) row[c] = g.alpha[d](i, c);
      bezier[dn + ":" + names[i]] = row;
    }
  }
  j["durations"] = durations;
  j["bezier"] = bezier;
  j["residuals"] = g.max_residual;
  j["iterations"] = g.iterations;
  j["status"] = g.status;
  j["output_set"] = g.output_set;
  json nodes;
  nodes["per_domain"] = g.nodes_per_domain;
  nodes["x"] = std::vector<std::vector<double>>();
  nodes["u"] = std::vector<std::vector<double>>();
  for (int k = 0; k < g.x_nodes.rows(); ++k) {
    std::vector<double> xr(g.x_nodes.cols()), ur(g.u_nodes.cols());
    for (int i = 0; i < g.x_nodes.cols(); ++i) xr[i] = g.x_nodes(k, i);
    for (int i = 0; i < g.u_nodes.cols(); ++i) ur[i] = g.u_nodes(k, i);
    nodes["x"].push_back(xr);
    nodes["u"].push_back(ur);
  }
  j["nodes"] = nodes;
  return j;
}

Domain domain_from_string(const std::string& s) {
  if (s == "ssp_l") return Domain::SspLeft;
  if (s == "ssp_r") return Domain::SspRight;
  if (s == "dsp") return Domain::Dsp;
  if (s == "flt") return Domain::Flight;
  throw std::invalid_argument("unknown domain label: " + s);
}

GaitParams gait_from_json(const json& j) {
  GaitParams g;
  g.speed = j.at("speed").get<double>();
  g.step_length = j.at("step_length").get<double>();
  g.output_set = j.at("output_set").get<std::string>();
  g.max_residual = j.at("residuals").get<double>();
  g.iterations = j.at("iterations").get<int>();
  g.status = j.at("status").get<std::string>();

  // Domain order is canonical per output set.
  std::vector<std::string> domain_keys;
  if (g.output_set == "run_ssp_flt")
    domain_keys = {"ssp_l", "flt"};
  else
    domain_keys = {"dsp"};
  const auto& durations = j.at("durations");
  g.durations.resize(domain_keys.size());
  for (size_t d = 0; d < domain_keys.size(); ++d) {
    g.domains.push_back(domain_from_string(domain_keys[d]));
    g.durations[d] = durations.at(domain_keys[d]).get<double>();
  }
  const auto& bezier = j.at("bezier");
  for (size_t d = 0; d < domain_keys.size(); ++d) {
    const auto names = rbd::output_names(g.domains[d]);
    MatXd a(names.size(), 0);
    for (size_t i = 0; i < names.size(); ++i) {
      const auto row = bezier.at(domain_keys[d] + ":" + names[i]).get<std::vector<double>>();
      if (a.cols() == 0) a.resize(names.size(), row.size());
      for (size_t c = 0; c < row.size(); ++c) a(i, c) = row[c];
    }
    g.alpha.push_back(std::move(a));
  }
  const auto& nodes = j.at("nodes");
  g.nodes_per_domain = nodes.at("per_domain").get<std::vector<int>>();
  const auto xs = nodes.at("x").get<std::vector<std::vector<double>>>();
  const auto us = nodes.at("u").get<std::vector<std::vector<double>>>();
  g.x_nodes.resize(xs.size(), 2 * kNumCoords);
  g.u_nodes.resize(us.size(), kNumActuators);
  for (size_t k = 0; k < xs.size(); ++k)
    for (int i = 0; i < 2 * kNumCoords; ++i) g.x_nodes(k, i) = xs[k][i];
  for (size_t k = 0; k < us.size(); ++k)
    for (int i = 0; i < kNumActuators; ++i) g.u_nodes(k, i) = us[k][i];
  g.validate();
  return g;
}

}  // namespace

std::string library_to_json(const GaitLibrary& lib) {
  json j;
  j["model_hash"] = lib.model_hash;
  j["output_set"] = lib.output_set;
  j["entries"] = json::array();
  for (const GaitParams& g : lib.entries) j["entries"].push_back(gait_to_json(g));
  if (lib.standing) j["standing"] = gait_to_json(*lib.standing);
  j["partial"] = lib.partial;
  j["failures"] = lib.failures;
  return j.dump(2);
}

GaitLibrary library_from_json(const std::string& text) {
  const json j = json::parse(text);
  GaitLibrary lib;
  lib.model_hash = j.at("model_hash").get<std::string>();
  lib.output_set = j.at("output_set").get<std::string>();
  for (const auto& e : j.at("entries")) lib.entries.push_back(gait_from_json(e));
  if (j.contains("standing") && !j.at("standing").is_null())
    lib.standing = gait_from_json(j.at("standing"));
  lib.partial = j.at("partial").get<bool>();
  lib.failures = j.at("failures").get<std::vector<std::string>>();
  return lib;
}

void save_library(const GaitLibrary& lib, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open library output: " + path);
  out << library_to_json(lib);
}

GaitLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open library: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return library_from_json(ss.str());
}

}  // namespace stride::trajopt
