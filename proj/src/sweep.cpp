#include "homsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <sstream>
#include <thread>

#include "homsim/entanglement.hpp"
#include "homsim/error.hpp"
#include "homsim/golden_section.hpp"

namespace homsim {

namespace {

constexpr double kGateVisibility = 0.8;

PumpSpectrum make_pump(const PumpSetting& p, double fwhm_nm, double center_nm) {
  if (p.tabulated) return PumpSpectrum(*p.tabulated);
  GaussianChirped g;
  g.fwhm_sigma_nu = nm_fwhm_to_angular(fwhm_nm, center_nm);
  g.phi1 = p.phi1_ps;
  g.phi2 = p.phi2_ps2;
  return PumpSpectrum(g);
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::string describe(const std::exception& e) {
  if (const auto* he = dynamic_cast<const Error*>(&e)) {
    return std::string(homsim::to_string(he->kind())) + ": " + he->what();
  }
  return e.what();
}

}  // namespace

SourceConfig Experiment::source() const {
  const double lp = pump_wavelength_nm;
  return SourceConfig{make_pump(pump_nu, pump_nu_fwhm_nm, lp),
                      make_pump(pump_mu, pump_nu_fwhm_nm * pump_mu_ratio, lp), lp,
                      DetectionFilter::from_nm(2.0 * lp, filter_fwhm_nm),
                      BeamSplitter::from_transmittance(transmittance)};
}

void Experiment::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      fail(ErrorKind::NonPhysical, std::string(name) + " must be positive");
    }
  };
  positive(pump_wavelength_nm, "pump_wavelength_nm");
  positive(pump_nu_fwhm_nm, "pump_nu_fwhm_nm");
  positive(pump_mu_ratio, "pump_mu_ratio");
  positive(filter_fwhm_nm, "filter_fwhm_nm");
  if (!(crystal_length_mm >= 0.0) || !std::isfinite(crystal_length_mm)) {
    fail(ErrorKind::NonPhysical, "crystal_length_mm must be >= 0");
  }
  if (crystal_length_mm > 0.0 && !material) {
    fail(ErrorKind::InvalidArgument, "crystal_length_mm needs a crystal material");
  }
  if (!(jitter_rms_ps >= 0.0) || !std::isfinite(jitter_rms_ps)) {
    fail(ErrorKind::NonPhysical, "jitter_rms_ps must be >= 0");
  }
  source().validate();
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::FilterFwhmNm: return "filter_fwhm_nm";
    case SweepVariable::PumpNuFwhmNm: return "pump_nu_fwhm_nm";
    case SweepVariable::PumpMuRatio: return "pump_mu_ratio";
    case SweepVariable::CrystalLengthMm: return "crystal_length_mm";
    case SweepVariable::ChirpPhi2: return "chirp_phi2";
    case SweepVariable::JitterRmsPs: return "jitter_rms_ps";
  }
  return "?";
}

std::string to_string(SweepOutput o) {
  switch (o) {
    case SweepOutput::V0: return "v0";
    case SweepOutput::V: return "v";
    case SweepOutput::Tangle: return "tangle";
    case SweepOutput::IS: return "i_s";
    case SweepOutput::IN: return "i_n";
    case SweepOutput::Tau0: return "tau0";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  for (auto v : {SweepVariable::FilterFwhmNm, SweepVariable::PumpNuFwhmNm,
                 SweepVariable::PumpMuRatio, SweepVariable::CrystalLengthMm,
                 SweepVariable::ChirpPhi2, SweepVariable::JitterRmsPs}) {
    if (to_string(v) == name) return v;
  }
  fail(ErrorKind::Config, "unknown sweep variable '" + name + "'");
}

SweepOutput parse_sweep_output(const std::string& name) {
  for (auto o : {SweepOutput::V0, SweepOutput::V, SweepOutput::Tangle, SweepOutput::IS,
                 SweepOutput::IN, SweepOutput::Tau0}) {
    if (to_string(o) == name) return o;
  }
  fail(ErrorKind::Config, "unknown output '" + name + "'");
}

Experiment with_variable(const Experiment& base, SweepVariable variable, double value) {
  Experiment e = base;
  switch (variable) {
    case SweepVariable::FilterFwhmNm: e.filter_fwhm_nm = value; break;
    case SweepVariable::PumpNuFwhmNm: e.pump_nu_fwhm_nm = value; break;
    case SweepVariable::PumpMuRatio: e.pump_mu_ratio = value; break;
    case SweepVariable::CrystalLengthMm: e.crystal_length_mm = value; break;
    case SweepVariable::ChirpPhi2:
      if (e.pump_nu.tabulated || e.pump_mu.tabulated) {
        fail(ErrorKind::InvalidArgument, "chirp_phi2 applies to Gaussian pumps only");
      }
      e.pump_nu.phi2_ps2 = value;
      e.pump_mu.phi2_ps2 = value;
      break;
    case SweepVariable::JitterRmsPs: e.jitter_rms_ps = value; break;
  }
  return e;
}

std::optional<double> tangle_for(const BeamSplitter& bs, double v, double v0) {
  if (bs.is_gate_splitter()) {
    // The gate can only exceed 0.8 through rounding.
    if (v > kGateVisibility && v <= kGateVisibility + 1e-9) return 1.0;
  } else {
    v = v0;
  }
  if (!(v >= 0.0 && v <= kGateVisibility)) return std::nullopt;
  return tangle_closed_form(v);
}

PointResult evaluate_point(const Experiment& e) {
  e.validate();
  const SourceConfig src = e.source();
  AmplitudeContext ctx = [&] {
    if (!e.finite_crystal()) return AmplitudeContext::thin(src, e.integration);
    const CrystalSpec c = CrystalSpec::make(*e.material, e.crystal_length_mm,
                                            e.pump_wavelength_nm);
    return AmplitudeContext::finite(src, c, c, e.integration);
  }();
  const VisibilityReport r = visibility(ctx);
  PointResult p;
  p.v0 = r.v0;
  p.v = r.v;
  p.i_s = r.i_s_at_tau0;
  p.i_n = r.i_n;
  p.tau0 = r.tau0;
  p.prefactor = r.prefactor;
  if (e.jitter_rms_ps > 0.0) {
    p.v = jitter_averaged_visibility(ctx, e.jitter_rms_ps);
    p.v0 = p.v / p.prefactor;
  }
  p.tangle = tangle_for(src.beamsplitter, p.v, p.v0);
  return p;
}

void SweepPlan::validate() const {
  if (grid.empty()) fail(ErrorKind::Config, "sweep grid is empty");
  for (double x : grid) {
    if (!std::isfinite(x)) fail(ErrorKind::Config, "sweep grid has a non-finite value");
  }
  if (grid.size() > 1) {
    const bool up = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
        fail(ErrorKind::Config, "sweep grid must be strictly monotone");
      }
    }
  }
  if (outputs.empty()) fail(ErrorKind::Config, "sweep outputs are empty");
}

SweepResult run_sweep(const SweepPlan& plan, std::size_t workers) {
  plan.validate();
  SweepResult result;
  result.variable = plan.variable;
  result.outputs = plan.outputs;
  result.timestamp = utc_timestamp();
  result.rows.resize(plan.grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < plan.grid.size(); i = next++) {
      SweepRow& row = result.rows[i];
      row.value = plan.grid[i];
      try {
        row.result = evaluate_point(with_variable(plan.base, plan.variable, row.value));
      } catch (const std::exception& e) {
        row.error = describe(e);
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(workers, 1, plan.grid.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return result;
}

void write_csv(std::ostream& out, const SweepResult& result) {
  out << "# homsim " << result.version << "\n";
  out << "# timestamp: " << result.timestamp << "\n";
  for (const auto& line : result.config_echo) out << "# " << line << "\n";
  out << to_string(result.variable);
  for (auto o : result.outputs) {
    if (o == SweepOutput::IS) {
      out << ",i_s_re,i_s_im";
    } else {
      out << "," << to_string(o);
    }
  }
  out << ",error\n";
  for (const auto& row : result.rows) {
    out << format_number(row.value);
    for (auto o : result.outputs) {
      const auto& r = row.result;
      switch (o) {
        case SweepOutput::V0: out << "," << (r ? format_number(r->v0) : ""); break;
        case SweepOutput::V: out << "," << (r ? format_number(r->v) : ""); break;
        case SweepOutput::Tangle:
          out << "," << (r && r->tangle ? format_number(*r->tangle) : "");
          break;
        case SweepOutput::IS:
          out << "," << (r ? format_number(r->i_s.real()) : "") << ","
              << (r ? format_number(r->i_s.imag()) : "");
          break;
        case SweepOutput::IN: out << "," << (r ? format_number(r->i_n) : ""); break;
        case SweepOutput::Tau0: out << "," << (r ? format_number(r->tau0) : ""); break;
      }
    }
    out << "," << csv_field(row.error) << "\n";
  }
}

Objective parse_objective(const std::string& name) {
  if (name == "v0") return Objective::V0;
  if (name == "tangle") return Objective::Tangle;
  fail(ErrorKind::Config, "unknown objective '" + name + "' (expected v0 or tangle)");
}

std::string to_string(Objective o) { return o == Objective::V0 ? "v0" : "tangle"; }

MaximizeResult maximize_function(const std::function<double(double)>& f, double lower,
                                 double upper, std::size_t scan_points) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower)) {
    fail(ErrorKind::InvalidArgument, "maximize needs finite bounds with lower < upper");
  }
  const std::size_t n = std::max<std::size_t>(scan_points, 3);
  std::vector<double> xs(n);
  std::vector<double> fs(n);
  MaximizeResult out;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(n - 1);
    fs[i] = f(xs[i]);
    if (!std::isfinite(fs[i])) fail(ErrorKind::NonFiniteSample, "objective is not finite");
  }
  out.evaluations = n;
  const auto [lo_it, hi_it] = std::minmax_element(fs.begin(), fs.end());
  const double scale = std::max(1.0, std::abs(*hi_it));
  const double flat = 1e-12 * scale;
  if (*hi_it - *lo_it <= flat) {
    out.argmax = lower;
    out.value = fs[0];
    return out;
  }
  std::size_t peaks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || fs[i] > fs[i - 1] + flat;
    const bool right = i + 1 == n || fs[i] > fs[i + 1] + flat;
    if (left && right) ++peaks;
  }
  out.non_unimodal = peaks > 1;
  const auto k = static_cast<std::size_t>(hi_it - fs.begin());
  const double a = xs[k == 0 ? 0 : k - 1];
  const double b = xs[k + 1 == n ? n - 1 : k + 1];
  std::size_t calls = 0;
  auto counted = [&](double x) {
    ++calls;
    return f(x);
  };
  const ScalarOptimum g = golden_section_maximize(counted, a, b, 1e-3 * (upper - lower));
  out.evaluations += calls;
  if (g.value > fs[k]) {
    out.argmax = g.x;
    out.value = g.value;
  } else {
    out.argmax = xs[k];
    out.value = fs[k];
  }
  return out;
}

namespace {

std::function<double(double)> objective_function(Objective objective, SweepVariable variable,
                                                 const Experiment& base) {
  return [=](double x) {
    const PointResult p = evaluate_point(with_variable(base, variable, x));
    if (objective == Objective::V0) return p.v0;
    if (!p.tangle) {
      fail(ErrorKind::InvalidArgument, "tangle is undefined outside the gate range");
    }
    return *p.tangle;
  };
}

}  // namespace

MaximizeResult maximize(Objective objective, SweepVariable variable, double lower,
                        double upper, const Experiment& base, std::size_t scan_points) {
  return maximize_function(objective_function(objective, variable, base), lower, upper,
                           scan_points);
}

TargetResult solve_target_function(const std::function<double(double)>& f, double lower,
                                   double upper, double target) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower) ||
      !std::isfinite(target)) {
    fail(ErrorKind::InvalidArgument, "target search needs finite bounds with lower < upper");
  }
  std::size_t calls = 0;
  auto g = [&](double x) {
    ++calls;
    const double y = f(x);
    if (!std::isfinite(y)) fail(ErrorKind::NonFiniteSample, "objective is not finite");
    return y - target;
  };
  const double g_lo = g(lower);
  const double g_hi = g(upper);
  TargetResult out;
  if (g_lo == 0.0 || g_hi == 0.0) {
    out.x = g_lo == 0.0 ? lower : upper;
    out.value = target;
    out.evaluations = calls;
    return out;
  }
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    std::ostringstream msg;
    msg << "target " << target << " is not bracketed: objective is " << g_lo + target
        << " at " << lower << " and " << g_hi + target << " at " << upper;
    fail(ErrorKind::OutOfRange, msg.str());
  }
  std::uintmax_t iterations = 100;
  const double xtol = 1e-6 * (upper - lower);
  const auto root = boost::math::tools::toms748_solve(
      g, lower, upper, g_lo, g_hi,
      [xtol](double a, double b) { return std::abs(b - a) <= xtol; }, iterations);
  out.x = 0.5 * (root.first + root.second);
  out.value = f(out.x);
  out.evaluations = calls + 1;
  return out;
}

TargetResult solve_target(Objective objective, SweepVariable variable, double lower,
                          double upper, double target, const Experiment& base) {
  return solve_target_function(objective_function(objective, variable, base), lower, upper,
                               target);
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace homsim
