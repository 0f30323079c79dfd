#pragma once

#include <optional>

#include "stride/trajopt/gait.hpp"

namespace stride::trajopt {

struct GaitLibrary {
  std::string model_hash;
  std::string output_set = "run_ssp_flt";
  std::vector<GaitParams> entries;  // running gaits, descending speed
  std::optional<GaitParams> standing;
  bool partial = false;
  std::vector<std::string> failures;  // one message per failed entry
};

/// Stable hash of the physical parameters, so libraries are matched to the
/// model that produced them.
std::string model_hash(const rbd::RobotModel& m);

struct LibraryBuildReport {
  struct Entry {
    double speed;
    bool warm_started;
    int iterations;
    double max_residual;
    bool success;
  };
  std::vector<Entry> entries;
};

/// Solves the fastest gait cold, then each slower speed warm-started from its
/// faster neighbor with the step-length constraint retargeted and the domain
/// durations frozen to the fastest solve's values. Appends the DSP standing
/// entry. Failed entries leave the library partial.
GaitLibrary build_library(const rbd::RobotModel& model, std::vector<double> speeds_descending,
                          const TranscriptionSpec& spec, const GaitTask& base_task,
                          const SolveOptions& opts = {}, LibraryBuildReport* report = nullptr);

std::string library_to_json(const GaitLibrary& lib);
GaitLibrary library_from_json(const std::string& text);
void save_library(const GaitLibrary& lib, const std::string& path);
GaitLibrary load_library(const std::string& path);

}  // namespace stride::trajopt
