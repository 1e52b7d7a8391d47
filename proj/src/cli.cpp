#include "homsim/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "homsim/config.hpp"
#include "homsim/crystal.hpp"
#include "homsim/entanglement.hpp"
#include "homsim/error.hpp"
#include "homsim/sweep.hpp"

namespace homsim {

namespace {

constexpr double kDegree = 180.0 / 3.14159265358979323846;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

struct Options {
  std::string config;
  std::string out;
  std::string materials = MaterialLibrary::default_path();
  std::size_t workers = 1;
  bool validate_only = false;
  std::string material_name;
  std::optional<double> wavelength_nm;
  std::optional<double> length_mm;
};

RunConfig require_config(const Options& o, const MaterialLibrary& lib) {
  if (o.config.empty()) fail(ErrorKind::Config, "--config is required");
  return load_config(o.config, lib);
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  out << text;
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) fail(ErrorKind::Config, "cannot write '" + o.out + "'");
    f << text;
  }
}

void cmd_visibility(const Options& o, const MaterialLibrary& lib, std::ostream& out) {
  const RunConfig cfg = require_config(o, lib);
  if (!cfg.has_source) fail(ErrorKind::Config, cfg.path + ": field 'source' is required");
  if (o.validate_only) return;
  const Experiment& e = cfg.experiment;
  const PointResult p = evaluate_point(e);
  std::ostringstream s;
  s << "crystal: "
    << (e.finite_crystal()
            ? e.material->name + " " + num(e.crystal_length_mm) + " mm"
            : std::string("thin"))
    << "\n";
  s << "i_s_re: " << num(p.i_s.real()) << "\n";
  s << "i_s_im: " << num(p.i_s.imag()) << "\n";
  s << "i_n: " << num(p.i_n) << "\n";
  s << "tau0_ps: " << num(p.tau0) << "\n";
  s << "prefactor: " << num(p.prefactor) << "\n";
  s << "v0: " << num(p.v0) << "\n";
  s << "v: " << num(p.v) << "\n";
  if (e.jitter_rms_ps > 0.0) s << "jitter_rms_ps: " << num(e.jitter_rms_ps) << "\n";
  const BeamSplitter bs = BeamSplitter::from_transmittance(e.transmittance);
  if (bs.is_gate_splitter() && p.tangle) {
    const OverlapAmplitude ce = c_eps_from_visibility(std::min(p.v, 0.8));
    s << "c: " << num(ce.c) << "\n";
    s << "eps: " << num(ce.eps) << "\n";
    s << "tangle: " << num(*p.tangle) << "\n";
  }
  emit(s.str(), o, out);
}

void cmd_sweep(const Options& o, const MaterialLibrary& lib, std::ostream& out) {
  const RunConfig cfg = require_config(o, lib);
  if (!cfg.sweep) fail(ErrorKind::Config, cfg.path + ": field 'sweep' is required");
  const SweepPlan plan = cfg.sweep_plan();
  plan.validate();
  if (o.validate_only) return;
  SweepResult result = run_sweep(plan, o.workers);
  result.config_echo.push_back("config: " + cfg.path);
  for (const auto& line : cfg.echo) result.config_echo.push_back(line);
  if (o.out.empty()) {
    write_csv(out, result);
    return;
  }
  std::ofstream f(o.out);
  if (!f) fail(ErrorKind::Config, "cannot write '" + o.out + "'");
  write_csv(f, result);
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.result ? 0 : 1;
  out << "wrote " << result.rows.size() << " rows to " << o.out;
  if (failed) out << " (" << failed << " failed)";
  out << "\n";
}

void cmd_optimize(const Options& o, const MaterialLibrary& lib, std::ostream& out,
                  std::ostream& err) {
  const RunConfig cfg = require_config(o, lib);
  if (!cfg.optimize) fail(ErrorKind::Config, cfg.path + ": field 'optimize' is required");
  if (!cfg.has_source) fail(ErrorKind::Config, cfg.path + ": field 'source' is required");
  if (o.validate_only) return;
  const OptimizeBlock& b = *cfg.optimize;
  if (b.target) {
    const TargetResult t =
        solve_target(b.objective, b.variable, b.lower, b.upper, *b.target, cfg.experiment);
    std::ostringstream s;
    s << "objective: " << to_string(b.objective) << "\n";
    s << "variable: " << to_string(b.variable) << "\n";
    s << "target: " << num(*b.target) << "\n";
    s << "solution: " << num(t.x) << "\n";
    s << "value: " << num(t.value) << "\n";
    s << "evaluations: " << t.evaluations << "\n";
    emit(s.str(), o, out);
    return;
  }
  const MaximizeResult m =
      maximize(b.objective, b.variable, b.lower, b.upper, cfg.experiment, b.scan_points);
  if (m.non_unimodal) {
    err << "warning: NonUnimodal: the objective has several local maxima on the bounds\n";
  }
  std::ostringstream s;
  s << "objective: " << to_string(b.objective) << "\n";
  s << "variable: " << to_string(b.variable) << "\n";
  s << "argmax: " << num(m.argmax) << "\n";
  s << "value: " << num(m.value) << "\n";
  s << "non_unimodal: " << (m.non_unimodal ? "true" : "false") << "\n";
  s << "evaluations: " << m.evaluations << "\n";
  emit(s.str(), o, out);
}

void cmd_material(const Options& o, const MaterialLibrary& lib, std::ostream& out) {
  MaterialBlock b;
  if (!o.config.empty()) {
    const RunConfig cfg = load_config(o.config, lib);
    if (cfg.material) b = *cfg.material;
  }
  if (!o.material_name.empty()) b.name = o.material_name;
  if (o.wavelength_nm) b.wavelength_nm = *o.wavelength_nm;
  if (o.length_mm) b.length_mm = *o.length_mm;
  if (b.name.empty()) fail(ErrorKind::Config, "material name is required");
  if (!(b.wavelength_nm > 0.0)) fail(ErrorKind::Config, "wavelength must be positive");
  if (b.length_mm && !(*b.length_mm > 0.0)) fail(ErrorKind::Config, "--length must be positive");
  const Material& m = lib.get(b.name);
  if (o.validate_only) return;
  const double lw = b.wavelength_nm;
  const double lp = 0.5 * lw;
  const PhaseMatching per_mm = alphas(m, 1.0, lp);
  const double th = per_mm.theta;
  std::ostringstream s;
  s << "material: " << m.name << "\n";
  s << "wavelength_nm: " << num(lw) << "\n";
  s << "pump_wavelength_nm: " << num(lp) << "\n";
  s << "theta_deg: " << num(th * kDegree) << "\n";
  s << "n_o: " << num(refractive_index(m, Polarization::Ordinary, lw)) << "\n";
  s << "n_e: " << num(refractive_index(m, Polarization::Extraordinary, lw, th)) << "\n";
  s << "n_e_pump: " << num(refractive_index(m, Polarization::Extraordinary, lp, th)) << "\n";
  s << "u_o_nm_per_ps: " << num(group_velocity(m, Polarization::Ordinary, lw)) << "\n";
  s << "u_e_nm_per_ps: " << num(group_velocity(m, Polarization::Extraordinary, lw, th))
    << "\n";
  s << "u_e_pump_nm_per_ps: "
    << num(group_velocity(m, Polarization::Extraordinary, lp, th)) << "\n";
  s << "alpha_p_ps_per_mm: " << num(per_mm.alpha_p) << "\n";
  s << "alpha_minus_ps_per_mm: " << num(per_mm.alpha_minus) << "\n";
  s << "alpha_ratio: " << num(per_mm.alpha_minus / per_mm.alpha_p) << "\n";
  if (b.length_mm) {
    const PhaseMatching at = alphas(m, *b.length_mm, lp);
    s << "length_mm: " << num(*b.length_mm) << "\n";
    s << "alpha_p_ps: " << num(at.alpha_p) << "\n";
    s << "alpha_minus_ps: " << num(at.alpha_minus) << "\n";
    s << "alpha_ratio_at_length: " << num(at.alpha_minus / at.alpha_p) << "\n";
  }
  emit(s.str(), o, out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hong-Ou-Mandel visibility and gate entanglement simulator", "homsim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--materials", o.materials, "Sellmeier data file");
  app.add_flag("--validate", o.validate_only, "Check the configuration and exit");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "YAML configuration file");
  };
  auto* vis = app.add_subcommand("visibility", "Visibility and tangle at the optimal delay");
  add_config(vis);
  vis->add_option("--out", o.out, "Also write the report to this file");
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and write CSV");
  add_config(sweep);
  sweep->add_option("--out", o.out, "CSV output path (default: standard output)");
  sweep->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* opt = app.add_subcommand("optimize", "Maximize v0 or tangle over one parameter");
  add_config(opt);
  opt->add_option("--out", o.out, "Also write the result to this file");
  auto* mat = app.add_subcommand("material", "Dispersion report for a crystal");
  mat->add_option("name", o.material_name, "Material name");
  mat->add_option("wavelength_nm", o.wavelength_nm, "Down-converted wavelength in nm");
  mat->add_option("--length", o.length_mm, "Crystal length in mm");
  add_config(mat);
  mat->add_option("--out", o.out, "Also write the report to this file");
  auto* val = app.add_subcommand("validate", "Check a configuration file");
  add_config(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_msg;
    std::ostringstream e_msg;
    const int code = app.exit(e, o_msg, e_msg);
    out << o_msg.str();
    err << e_msg.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const MaterialLibrary lib = MaterialLibrary::load(o.materials);
    if (*vis) {
      cmd_visibility(o, lib, out);
    } else if (*sweep) {
      cmd_sweep(o, lib, out);
    } else if (*opt) {
      cmd_optimize(o, lib, out, err);
    } else if (*mat) {
      cmd_material(o, lib, out);
    } else if (*val) {
      const RunConfig cfg = require_config(o, lib);
      if (cfg.sweep) cfg.sweep_plan().validate();
      out << cfg.path << ": ok\n";
    }
    if (o.validate_only && !*val) out << "ok\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (o.validate_only) return kExitConfig;
    return e.is_numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return o.validate_only ? kExitConfig : kExitNumerical;
  }
}

}  // namespace homsim
