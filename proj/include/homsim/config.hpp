#pragma once

// Run configuration read from a YAML file. Every error names the file, the
// line and the offending field.

#include <optional>
#include <string>
#include <vector>

#include "homsim/crystal.hpp"
#include "homsim/sweep.hpp"

namespace homsim {

struct SweepBlock {
  SweepVariable variable = SweepVariable::FilterFwhmNm;
  std::vector<double> grid;
  std::vector<SweepOutput> outputs;
};

struct OptimizeBlock {
  Objective objective = Objective::V0;
  SweepVariable variable = SweepVariable::FilterFwhmNm;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t scan_points = 9;
  /// When set, solve objective = target instead of maximizing.
  std::optional<double> target;
};

struct MaterialBlock {
  std::string name;
  /// Degenerate down-converted wavelength; the pump sits at half of it.
  double wavelength_nm = 800.0;
  std::optional<double> length_mm;
};

struct RunConfig {
  std::string path;
  bool has_source = false;
  Experiment experiment;
  std::optional<SweepBlock> sweep;
  std::optional<OptimizeBlock> optimize;
  std::optional<MaterialBlock> material;
  /// Normalized YAML text of the file, one entry per line.
  std::vector<std::string> echo;

  SweepPlan sweep_plan() const;
};

/// Throws Error(Config) with "path:line: message" on any problem.
RunConfig load_config(const std::string& path, const MaterialLibrary& materials);
RunConfig parse_config(const std::string& text, const MaterialLibrary& materials,
                       const std::string& origin = "<config>");

}  // namespace homsim
