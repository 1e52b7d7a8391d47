#include "homsim/crystal.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef HOMSIM_DATA_DIR
#define HOMSIM_DATA_DIR "data"
#endif

namespace homsim {

namespace {

void check_range(const SellmeierCoefficients& s, double wavelength_nm) {
  if (!(wavelength_nm >= s.valid_min_nm && wavelength_nm <= s.valid_max_nm)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_nm << " nm outside the Sellmeier range ["
        << s.valid_min_nm << ", " << s.valid_max_nm << "] nm";
    fail(ErrorKind::OutOfRange, msg.str());
  }
}

double angle_index(double n_axis, double n_perp, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return 1.0 / std::sqrt(c * c / (n_axis * n_axis) + s * s / (n_perp * n_perp));
}

}  // namespace

double SellmeierCoefficients::index(double wavelength_nm) const {
  check_range(*this, wavelength_nm);
  const double l = wavelength_nm * 1e-3;
  const double n2 = A + B / (l * l - C) - D * l * l;
  if (!(n2 > 1.0)) fail(ErrorKind::OutOfRange, "Sellmeier index not above 1");
  return std::sqrt(n2);
}

double SellmeierCoefficients::index_derivative(double wavelength_nm) const {
  const double n = index(wavelength_nm);
  const double l = wavelength_nm * 1e-3;
  const double q = l * l - C;
  const double dn2_dl = -2.0 * B * l / (q * q) - 2.0 * D * l;  // per micrometre
  return dn2_dl / (2.0 * n) * 1e-3;
}

MaterialLibrary MaterialLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open materials file '" + path + "'");
  MaterialLibrary lib;
  std::map<std::string, std::map<std::string, SellmeierCoefficients>> axes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string name;
    if (!(row >> name)) continue;
    std::string axis;
    SellmeierCoefficients s;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (!(row >> axis >> s.A >> s.B >> s.C >> s.D >> s.valid_min_nm >> s.valid_max_nm)) {
      fail(ErrorKind::Config,
           where + "expected name axis A B C D valid_min_nm valid_max_nm");
    }
    std::string extra;
    if (row >> extra) fail(ErrorKind::Config, where + "trailing field '" + extra + "'");
    if (axis != "o" && axis != "e" && axis != "e0") {
      fail(ErrorKind::Config, where + "axis must be o, e or e0, got '" + axis + "'");
    }
    if (!(s.valid_min_nm > 0.0 && s.valid_max_nm > s.valid_min_nm)) {
      fail(ErrorKind::Config, where + "invalid validity range");
    }
    if (!axes[name].emplace(axis, s).second) {
      fail(ErrorKind::Config, where + "duplicate axis '" + axis + "' for " + name);
    }
  }
  for (auto& [name, rec] : axes) {
    if (!rec.count("o") || !rec.count("e")) {
      fail(ErrorKind::Config, path + ": material " + name + " needs both o and e records");
    }
    Material m;
    m.name = name;
    m.ordinary = rec.at("o");
    m.extraordinary = rec.at("e");
    if (auto it = rec.find("e0"); it != rec.end()) m.extraordinary_axis = it->second;
    lib.materials_.emplace(name, std::move(m));
  }
  return lib;
}

std::string MaterialLibrary::default_path() {
  return std::string(HOMSIM_DATA_DIR) + "/materials.dat";
}

const Material& MaterialLibrary::get(const std::string& name) const {
  const auto it = materials_.find(name);
  if (it == materials_.end()) {
    std::string known;
    for (const auto& [n, m] : materials_) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorKind::Config, "unknown material '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> MaterialLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [n, m] : materials_) out.push_back(n);
  return out;
}

double refractive_index(const Material& m, Polarization pol, double wavelength_nm,
                        double theta) {
  if (pol == Polarization::Ordinary) return m.ordinary.index(wavelength_nm);
  return angle_index(m.axis_coefficients().index(wavelength_nm),
                     m.extraordinary.index(wavelength_nm), theta);
}

double refractive_index_derivative(const Material& m, Polarization pol,
                                   double wavelength_nm, double theta) {
  if (pol == Polarization::Ordinary) return m.ordinary.index_derivative(wavelength_nm);
  const double n0 = m.axis_coefficients().index(wavelength_nm);
  const double n90 = m.extraordinary.index(wavelength_nm);
  const double d0 = m.axis_coefficients().index_derivative(wavelength_nm);
  const double d90 = m.extraordinary.index_derivative(wavelength_nm);
  const double n = angle_index(n0, n90, theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return n * n * n * (c * c * d0 / (n0 * n0 * n0) + s * s * d90 / (n90 * n90 * n90));
}

double group_index(const Material& m, Polarization pol, double wavelength_nm,
                   double theta) {
  return refractive_index(m, pol, wavelength_nm, theta) -
         wavelength_nm * refractive_index_derivative(m, pol, wavelength_nm, theta);
}

double group_velocity(const Material& m, Polarization pol, double wavelength_nm,
                      double theta) {
  const double ng = group_index(m, pol, wavelength_nm, theta);
  if (!(ng > 0.0) || !std::isfinite(ng)) {
    fail(ErrorKind::OutOfRange, "group index is not positive for " + m.name);
  }
  return kSpeedOfLight / ng;
}

double phase_matching_angle(const Material& m, double pump_wavelength_nm) {
  const double lp = pump_wavelength_nm;
  const double ls = 2.0 * pump_wavelength_nm;
  const double no = refractive_index(m, Polarization::Ordinary, ls);
  auto mismatch = [&](double theta) {
    return refractive_index(m, Polarization::Extraordinary, lp, theta) -
           0.5 * (no + refractive_index(m, Polarization::Extraordinary, ls, theta));
  };
  const double lo = 0.0;
  const double hi = kRightAngle;
  const double f_lo = mismatch(lo);
  const double f_hi = mismatch(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream msg;
    msg << m.name << " cannot be type-II phase matched for a " << pump_wavelength_nm
        << " nm pump";
    fail(ErrorKind::NonPhysical, msg.str());
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(
      mismatch, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50),
      iterations);
  return 0.5 * (root.first + root.second);
}

PhaseMatching alphas(const Material& m, double length_mm, double pump_wavelength_nm) {
  if (!(length_mm >= 0.0) || !std::isfinite(length_mm)) {
    fail(ErrorKind::NonPhysical, "crystal length must be >= 0");
  }
  PhaseMatching pm;
  pm.theta = phase_matching_angle(m, pump_wavelength_nm);
  const double ls = 2.0 * pump_wavelength_nm;
  const double L = length_mm * 1e6;  // nm
  const double inv_uo = 1.0 / group_velocity(m, Polarization::Ordinary, ls);
  const double inv_ue = 1.0 / group_velocity(m, Polarization::Extraordinary, ls, pm.theta);
  const double inv_up =
      1.0 / group_velocity(m, Polarization::Extraordinary, pump_wavelength_nm, pm.theta);
  pm.alpha_p = L / 4.0 * (inv_uo + inv_ue) - L / 2.0 * inv_up;
  pm.alpha_minus = L / 2.0 * (inv_uo - inv_ue);
  return pm;
}

CrystalSpec CrystalSpec::make(const Material& m, double length_mm,
                              double pump_wavelength_nm) {
  const PhaseMatching pm = alphas(m, length_mm, pump_wavelength_nm);
  CrystalSpec c;
  c.material = m;
  c.length_mm = length_mm;
  c.pump_wavelength_nm = pump_wavelength_nm;
  c.alpha_p = pm.alpha_p;
  c.alpha_minus = pm.alpha_minus;
  c.theta = pm.theta;
  return c;
}

CrystalSpec CrystalSpec::from_alphas(double alpha_p, double alpha_minus) {
  if (!std::isfinite(alpha_p) || !std::isfinite(alpha_minus)) {
    fail(ErrorKind::InvalidArgument, "crystal constants must be finite");
  }
  CrystalSpec c;
  c.alpha_p = alpha_p;
  c.alpha_minus = alpha_minus;
  return c;
}

Complex g_profile(const FilteredProfile& F, const CrystalSpec& spec, double delta0_sq,
                  double t, double t_prime, const IntegrationSpec& ispec) {
  const double b = 4.0 * delta0_sq;
  if (spec.alpha_p == 0.0) {
    if (spec.alpha_minus != 0.0) {
      fail(ErrorKind::InvalidArgument, "g_profile needs alpha_p != 0 when alpha_- != 0");
    }
    return F(t) * std::exp(-b * t_prime * t_prime);
  }
  const double ap = std::abs(spec.alpha_p);
  const double ratio = spec.alpha_minus / spec.alpha_p;
  auto integrand = [&](double s) {
    const double u = t_prime + ratio * s;
    return F(t + s) * std::exp(-b * u * u);
  };
  // Seed the subdivision finer than either factor's width so that narrow
  // features inside a long window are not missed by the first rule.
  const double w_gauss =
      ratio == 0.0 ? ap : std::abs(1.0 / ratio) / std::sqrt(2.0 * b);
  const double feature = std::min(F.axis().width, w_gauss);
  const auto pieces = static_cast<std::size_t>(
      std::clamp(std::ceil(2.0 * ap / feature), 1.0, 512.0));
  std::vector<double> points(pieces + 1);
  for (std::size_t i = 0; i <= pieces; ++i) {
    points[i] = -0.5 * ap + ap * static_cast<double>(i) / static_cast<double>(pieces);
  }
  return integrate_breakpoints(integrand, std::span<const double>(points), ispec) / ap;
}

}  // namespace homsim
