#include "homsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "homsim/error.hpp"

namespace homsim {

namespace {

class Reader {
 public:
  Reader(std::string origin, std::filesystem::path base_dir)
      : origin_(std::move(origin)), base_dir_(std::move(base_dir)) {}

  [[noreturn]] void error(const YAML::Node& at, const std::string& field,
                          const std::string& what) const {
    std::ostringstream msg;
    msg << origin_;
    if (at.IsDefined() && at.Mark().line >= 0) msg << ":" << at.Mark().line + 1;
    msg << ": ";
    if (!field.empty()) msg << "field '" << field << "' ";
    msg << what;
    fail(ErrorKind::Config, msg.str());
  }

  void allow(const YAML::Node& map, const std::string& prefix,
             std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) error(map, prefix, "must be a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) error(kv.first, join(prefix, key), "is not recognized");
    }
  }

  double number(const YAML::Node& map, const std::string& prefix, const char* key,
                std::optional<double> fallback = std::nullopt) const {
    const YAML::Node n = map[key];
    if (!n) {
      if (fallback) return *fallback;
      error(map, join(prefix, key), "is required");
    }
    double x = 0.0;
    try {
      x = n.as<double>();
    } catch (const YAML::Exception&) {
      error(n, join(prefix, key), "must be a number");
    }
    if (!std::isfinite(x)) error(n, join(prefix, key), "must be finite");
    return x;
  }

  double positive(const YAML::Node& map, const std::string& prefix, const char* key,
                  std::optional<double> fallback = std::nullopt) const {
    const double x = number(map, prefix, key, fallback);
    if (!(x > 0.0)) error(map[key] ? map[key] : map, join(prefix, key), "must be positive");
    return x;
  }

  double non_negative(const YAML::Node& map, const std::string& prefix, const char* key,
                      std::optional<double> fallback = std::nullopt) const {
    const double x = number(map, prefix, key, fallback);
    if (!(x >= 0.0)) error(map[key] ? map[key] : map, join(prefix, key), "must be >= 0");
    return x;
  }

  std::string text(const YAML::Node& map, const std::string& prefix, const char* key) const {
    const YAML::Node n = map[key];
    if (!n) error(map, join(prefix, key), "is required");
    if (!n.IsScalar()) error(n, join(prefix, key), "must be a string");
    return n.as<std::string>();
  }

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir_ / path;
  }

  template <class F>
  auto rethrow_at(const YAML::Node& at, const std::string& field, F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      error(at, field, e.what());
    }
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

 private:
  std::string origin_;
  std::filesystem::path base_dir_;
};

void read_pump(const Reader& r, const YAML::Node& node, const std::string& prefix,
               PumpSetting& pump) {
  r.allow(node, prefix, {"fwhm_nm", "ratio", "phi1_ps", "phi2_ps2", "spectrum_file"});
  pump.phi1_ps = r.number(node, prefix, "phi1_ps", 0.0);
  pump.phi2_ps2 = r.number(node, prefix, "phi2_ps2", 0.0);
  if (node["spectrum_file"]) {
    const std::string file = r.text(node, prefix, "spectrum_file");
    pump.tabulated = r.rethrow_at(node["spectrum_file"], Reader::join(prefix, "spectrum_file"),
                                  [&] { return TabulatedSpectrum::load(r.resolve(file)); });
  }
}

void read_source(const Reader& r, const YAML::Node& node, Experiment& e) {
  const std::string p = "source";
  r.allow(node, p, {"pump_wavelength_nm", "pump", "filter_fwhm_nm", "beamsplitter"});
  e.pump_wavelength_nm = r.positive(node, p, "pump_wavelength_nm", 400.0);
  e.filter_fwhm_nm = r.positive(node, p, "filter_fwhm_nm");

  const YAML::Node pump = node["pump"];
  if (!pump) r.error(node, "source.pump", "is required");
  r.allow(pump, "source.pump", {"nu", "mu"});
  const YAML::Node nu = pump["nu"];
  if (!nu) r.error(pump, "source.pump.nu", "is required");
  read_pump(r, nu, "source.pump.nu", e.pump_nu);
  if (nu["ratio"]) r.error(nu["ratio"], "source.pump.nu.ratio", "is only valid for pump mu");
  if (!e.pump_nu.tabulated) {
    e.pump_nu_fwhm_nm = r.positive(nu, "source.pump.nu", "fwhm_nm");
  } else if (nu["fwhm_nm"]) {
    r.error(nu["fwhm_nm"], "source.pump.nu.fwhm_nm", "conflicts with spectrum_file");
  }

  const YAML::Node mu = pump["mu"] ? pump["mu"] : YAML::Node(YAML::NodeType::Map);
  read_pump(r, mu, "source.pump.mu", e.pump_mu);
  if (mu["fwhm_nm"] && mu["ratio"]) {
    r.error(mu["ratio"], "source.pump.mu.ratio", "conflicts with source.pump.mu.fwhm_nm");
  }
  if (e.pump_mu.tabulated && (mu["fwhm_nm"] || mu["ratio"])) {
    r.error(mu, "source.pump.mu", "bandwidth conflicts with spectrum_file");
  }
  if (mu["fwhm_nm"]) {
    e.pump_mu_ratio = r.positive(mu, "source.pump.mu", "fwhm_nm") / e.pump_nu_fwhm_nm;
  } else {
    e.pump_mu_ratio = r.positive(mu, "source.pump.mu", "ratio", 1.0);
  }

  const YAML::Node bs = node["beamsplitter"];
  if (!bs) {
    e.transmittance = 0.5;
  } else if (bs.IsScalar()) {
    const auto name = bs.as<std::string>();
    if (name == "gate") {
      e.transmittance = 1.0 / 3.0;
    } else if (name == "balanced") {
      e.transmittance = 0.5;
    } else {
      r.error(bs, "source.beamsplitter", "must be gate, balanced or a mapping");
    }
  } else {
    r.allow(bs, "source.beamsplitter", {"transmittance"});
    e.transmittance = r.number(bs, "source.beamsplitter", "transmittance");
    if (!(e.transmittance >= 0.0 && e.transmittance <= 1.0)) {
      r.error(bs["transmittance"], "source.beamsplitter.transmittance", "must lie in [0, 1]");
    }
  }
}

std::vector<double> read_grid(const Reader& r, const YAML::Node& node,
                              const std::string& field) {
  std::vector<double> grid;
  if (!node) r.error(node, field, "is required");
  if (node.IsSequence()) {
    for (const auto& item : node) {
      try {
        grid.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        r.error(item, field, "entries must be numbers");
      }
    }
  } else if (node.IsMap()) {
    r.allow(node, field, {"start", "stop", "count"});
    const double start = r.number(node, field, "start");
    const double stop = r.number(node, field, "stop");
    const double count = r.number(node, field, "count");
    if (!(count >= 1.0) || count != std::floor(count)) {
      r.error(node["count"], field + ".count", "must be a positive integer");
    }
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i) {
      grid.push_back(n == 1 ? start
                            : start + (stop - start) * static_cast<double>(i) /
                                          static_cast<double>(n - 1));
    }
  } else {
    r.error(node, field, "must be a list or a start/stop/count mapping");
  }
  if (grid.empty()) r.error(node, field, "is empty");
  return grid;
}

SweepVariable read_variable(const Reader& r, const YAML::Node& node, const std::string& p) {
  const std::string name = r.text(node, p, "variable");
  return r.rethrow_at(node["variable"], p + ".variable",
                      [&] { return parse_sweep_variable(name); });
}

std::vector<std::string> emit_lines(const YAML::Node& root) {
  YAML::Emitter em;
  em << root;
  std::vector<std::string> lines;
  std::istringstream in(em.c_str());
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

SweepPlan RunConfig::sweep_plan() const {
  if (!sweep) fail(ErrorKind::Config, path + ": no sweep block");
  SweepPlan plan;
  plan.variable = sweep->variable;
  plan.grid = sweep->grid;
  plan.base = experiment;
  if (!sweep->outputs.empty()) plan.outputs = sweep->outputs;
  return plan;
}

RunConfig parse_config(const std::string& text, const MaterialLibrary& materials,
                       const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.mark.line + 1 << ": " << e.msg;
    fail(ErrorKind::Config, msg.str());
  }
  const Reader r(origin, std::filesystem::path(origin).parent_path());
  if (!root.IsMap()) r.error(root, "", "top level must be a mapping");
  r.allow(root, "",
          {"source", "crystal", "jitter", "integration", "sweep", "optimize", "material"});

  RunConfig cfg;
  cfg.path = origin;
  Experiment& e = cfg.experiment;
  const YAML::Node source = root["source"];
  if (source) {
    read_source(r, source, e);
    cfg.has_source = true;
  }

  if (const YAML::Node c = root["crystal"]) {
    r.allow(c, "crystal", {"material", "length_mm"});
    const std::string name = r.text(c, "crystal", "material");
    e.material = r.rethrow_at(c["material"], "crystal.material",
                              [&] { return materials.get(name); });
    e.crystal_length_mm = r.non_negative(c, "crystal", "length_mm");
  }
  if (const YAML::Node j = root["jitter"]) {
    r.allow(j, "jitter", {"rms_ps"});
    e.jitter_rms_ps = r.non_negative(j, "jitter", "rms_ps");
  }
  if (const YAML::Node in = root["integration"]) {
    const std::string p = "integration";
    r.allow(in, p,
            {"relative_tolerance", "absolute_floor", "max_subdivisions", "truncation_sigmas"});
    IntegrationSpec& s = e.integration;
    s.relative_tolerance = r.positive(in, p, "relative_tolerance", s.relative_tolerance);
    s.absolute_floor = r.non_negative(in, p, "absolute_floor", s.absolute_floor);
    const double subdiv =
        r.positive(in, p, "max_subdivisions", static_cast<double>(s.max_subdivisions));
    if (subdiv != std::floor(subdiv)) {
      r.error(in["max_subdivisions"], p + ".max_subdivisions", "must be an integer");
    }
    s.max_subdivisions = static_cast<std::size_t>(subdiv);
    s.truncation_sigmas = r.positive(in, p, "truncation_sigmas", s.truncation_sigmas);
  }

  if (const YAML::Node sw = root["sweep"]) {
    r.allow(sw, "sweep", {"variable", "grid", "outputs"});
    SweepBlock b;
    b.variable = read_variable(r, sw, "sweep");
    b.grid = read_grid(r, sw["grid"], "sweep.grid");
    if (const YAML::Node outs = sw["outputs"]) {
      if (!outs.IsSequence()) r.error(outs, "sweep.outputs", "must be a list");
      for (const auto& o : outs) {
        b.outputs.push_back(r.rethrow_at(o, "sweep.outputs",
                                         [&] { return parse_sweep_output(o.as<std::string>()); }));
      }
    }
    SweepPlan check;
    check.grid = b.grid;
    r.rethrow_at(sw["grid"], "sweep.grid", [&] {
      check.validate();
      return 0;
    });
    cfg.sweep = b;
  }
  if (const YAML::Node op = root["optimize"]) {
    r.allow(op, "optimize", {"objective", "variable", "lower", "upper", "scan_points", "target"});
    OptimizeBlock b;
    const std::string obj = r.text(op, "optimize", "objective");
    b.objective = r.rethrow_at(op["objective"], "optimize.objective",
                               [&] { return parse_objective(obj); });
    b.variable = read_variable(r, op, "optimize");
    b.lower = r.number(op, "optimize", "lower");
    b.upper = r.number(op, "optimize", "upper");
    if (!(b.upper > b.lower)) r.error(op["upper"], "optimize.upper", "must exceed lower");
    const double n = r.positive(op, "optimize", "scan_points", 9.0);
    if (n < 3.0 || n != std::floor(n)) {
      r.error(op["scan_points"], "optimize.scan_points", "must be an integer >= 3");
    }
    b.scan_points = static_cast<std::size_t>(n);
    if (op["target"]) b.target = r.non_negative(op, "optimize", "target", 0.0);
    cfg.optimize = b;
  }
  if (const YAML::Node m = root["material"]) {
    r.allow(m, "material", {"name", "wavelength_nm", "length_mm"});
    MaterialBlock b;
    b.name = r.text(m, "material", "name");
    r.rethrow_at(m["name"], "material.name", [&] { return materials.get(b.name); });
    b.wavelength_nm = r.positive(m, "material", "wavelength_nm", 800.0);
    if (m["length_mm"]) b.length_mm = r.positive(m, "material", "length_mm");
    cfg.material = b;
  }

  if (source) {
    r.rethrow_at(source, "source", [&] {
      e.validate();
      return 0;
    });
  } else if (cfg.sweep || cfg.optimize || root["crystal"] || root["jitter"]) {
    r.error(root, "source", "is required");
  }
  cfg.echo = emit_lines(root);
  return cfg;
}

RunConfig load_config(const std::string& path, const MaterialLibrary& materials) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), materials, path);
}

}  // namespace homsim
