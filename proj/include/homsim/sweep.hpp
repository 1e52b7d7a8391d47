#pragma once

// Parameter sweeps and one-dimensional design optimization over an
// experiment described in laboratory units.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "homsim/crystal.hpp"
#include "homsim/interference.hpp"
#include "homsim/spectra.hpp"

namespace homsim {

inline constexpr const char* kVersion = "0.1.0";

struct PumpSetting {
  double phi1_ps = 0.0;
  double phi2_ps2 = 0.0;
  std::optional<TabulatedSpectrum> tabulated;
};

/// Bandwidths in nm, chirp in ps and ps^2, lengths in mm.
struct Experiment {
  double pump_wavelength_nm = 400.0;
  double pump_nu_fwhm_nm = 5.0;
  /// sigma_mu / sigma_nu.
  double pump_mu_ratio = 1.0;
  PumpSetting pump_nu;
  PumpSetting pump_mu;
  double filter_fwhm_nm = 2.0;
  double transmittance = 0.5;
  std::optional<Material> material;
  double crystal_length_mm = 0.0;
  double jitter_rms_ps = 0.0;
  IntegrationSpec integration;

  SourceConfig source() const;
  /// Throws NonPhysical or InvalidArgument for inconsistent settings.
  void validate() const;
  bool finite_crystal() const { return material.has_value() && crystal_length_mm > 0.0; }
};

enum class SweepVariable {
  FilterFwhmNm,
  PumpNuFwhmNm,
  PumpMuRatio,
  CrystalLengthMm,
  ChirpPhi2,
  JitterRmsPs,
};

enum class SweepOutput { V0, V, Tangle, IS, IN, Tau0 };

std::string to_string(SweepVariable v);
std::string to_string(SweepOutput o);
/// Throws Config for an unknown name.
SweepVariable parse_sweep_variable(const std::string& name);
SweepOutput parse_sweep_output(const std::string& name);

/// Copy of `base` with the variable set to `value`; chirp applies to both pumps.
Experiment with_variable(const Experiment& base, SweepVariable variable, double value);

struct PointResult {
  double v0 = 0.0;
  double v = 0.0;
  std::optional<double> tangle;
  Complex i_s{0.0, 0.0};
  double i_n = 0.0;
  double tau0 = 0.0;
  double prefactor = 1.0;
};

/// Tangle column: the closed form of v for the gate splitter and of v0 for any
/// other splitter, when that value lies in [0, 0.8]; nothing otherwise.
std::optional<double> tangle_for(const BeamSplitter& bs, double v, double v0);

PointResult evaluate_point(const Experiment& e);

struct SweepPlan {
  SweepVariable variable = SweepVariable::FilterFwhmNm;
  std::vector<double> grid;
  Experiment base;
  std::vector<SweepOutput> outputs{SweepOutput::V0, SweepOutput::V, SweepOutput::Tangle,
                                   SweepOutput::IS, SweepOutput::IN, SweepOutput::Tau0};

  /// Throws Config for an empty or non-monotone grid.
  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  std::optional<PointResult> result;
  std::string error;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::FilterFwhmNm;
  std::vector<SweepOutput> outputs;
  std::vector<SweepRow> rows;
  std::vector<std::string> config_echo;
  std::string version = kVersion;
  std::string timestamp;
};

/// Evaluates every grid point on `workers` threads; rows keep grid order and a
/// failing point becomes an error row.
SweepResult run_sweep(const SweepPlan& plan, std::size_t workers = 1);

/// '#' preamble, header row, one row per grid point.
void write_csv(std::ostream& out, const SweepResult& result);

enum class Objective { V0, Tangle };
Objective parse_objective(const std::string& name);
std::string to_string(Objective o);

struct MaximizeResult {
  double argmax = 0.0;
  double value = 0.0;
  bool non_unimodal = false;
  std::size_t evaluations = 0;
};

/// Golden-section maximization on [lower, upper] to 1e-3 relative argument
/// tolerance after a coarse scan; non_unimodal is set when the scan shows more
/// than one local maximum.
MaximizeResult maximize(Objective objective, SweepVariable variable, double lower,
                        double upper, const Experiment& base, std::size_t scan_points = 9);

/// Same search over an arbitrary objective.
MaximizeResult maximize_function(const std::function<double(double)>& f, double lower,
                                 double upper, std::size_t scan_points = 9);

struct TargetResult {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Value of the variable on [lower, upper] where the objective equals
/// `target`, by bracketed root finding. Throws OutOfRange when the target is
/// not bracketed by the objective at the bounds.
TargetResult solve_target(Objective objective, SweepVariable variable, double lower,
                          double upper, double target, const Experiment& base);
TargetResult solve_target_function(const std::function<double(double)>& f, double lower,
                                   double upper, double target);

std::string utc_timestamp();

}  // namespace homsim
