#pragma once

// Sellmeier dispersion, group velocities and the finite-crystal pair profile
//   G(t, t') = (1/a_p) integral_{-a_p/2}^{a_p/2} ds F(t + s)
//              exp(-4 d0^2 (t' + (a_m / a_p) s)^2).
//
// Wavelengths in nm, lengths in mm at the interface, times in ps.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homsim/quadrature.hpp"
#include "homsim/spectra.hpp"

namespace homsim {

/// n^2 = A + B / (l^2 - C) - D l^2, l in micrometres.
struct SellmeierCoefficients {
  double A = 1.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  double valid_min_nm = 0.0;
  double valid_max_nm = 0.0;

  /// Throws OutOfRange outside the validity interval.
  double index(double wavelength_nm) const;
  /// dn/dl in 1/nm.
  double index_derivative(double wavelength_nm) const;
};

enum class Polarization { Ordinary, Extraordinary };

/// Uniaxial description of a type-II crystal. `extraordinary` is the index
/// for propagation perpendicular to the reference axis, `extraordinary_axis`
/// the index along it (defaults to the ordinary index, as for a true uniaxial
/// crystal). The extraordinary index at angle theta follows
///   1/n(theta)^2 = cos^2(theta)/n_axis^2 + sin^2(theta)/n_perp^2.
struct Material {
  std::string name;
  SellmeierCoefficients ordinary;
  SellmeierCoefficients extraordinary;
  std::optional<SellmeierCoefficients> extraordinary_axis;

  const SellmeierCoefficients& axis_coefficients() const {
    return extraordinary_axis ? *extraordinary_axis : ordinary;
  }
};

class MaterialLibrary {
 public:
  /// Records: name axis A B C D valid_min_nm valid_max_nm, with axis one of
  /// o, e, e0. '#' starts a comment.
  static MaterialLibrary load(const std::string& path);
  /// Materials file shipped with the sources.
  static std::string default_path();

  const Material& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Material> materials_;
};

inline constexpr double kRightAngle = 1.57079632679489661923;

double refractive_index(const Material& m, Polarization pol, double wavelength_nm,
                        double theta = kRightAngle);
double refractive_index_derivative(const Material& m, Polarization pol,
                                   double wavelength_nm, double theta = kRightAngle);
/// n - l dn/dl.
double group_index(const Material& m, Polarization pol, double wavelength_nm,
                   double theta = kRightAngle);
/// c / n_g in nm/ps.
double group_velocity(const Material& m, Polarization pol, double wavelength_nm,
                      double theta = kRightAngle);

/// Angle (rad) solving n_e(theta, l_p) = (n_o(2 l_p) + n_e(theta, 2 l_p)) / 2
/// for degenerate type-II down-conversion. Throws NonPhysical when the
/// material cannot phase-match at this pump.
double phase_matching_angle(const Material& m, double pump_wavelength_nm);

struct PhaseMatching {
  double alpha_p = 0.0;      // ps
  double alpha_minus = 0.0;  // ps
  double theta = 0.0;        // rad
};

/// alpha_p = L/4 (1/u_o(W) + 1/u_e(W)) - L/(2 u_e(W_p)),
/// alpha_- = L/2 (1/u_o(W) - 1/u_e(W)), W at twice the pump wavelength and
/// the extraordinary velocities taken at the phase-matching angle.
PhaseMatching alphas(const Material& m, double length_mm, double pump_wavelength_nm);

struct CrystalSpec {
  std::optional<Material> material;
  double length_mm = 0.0;
  double pump_wavelength_nm = 400.0;
  double alpha_p = 0.0;
  double alpha_minus = 0.0;
  double theta = 0.0;

  static CrystalSpec make(const Material& m, double length_mm,
                          double pump_wavelength_nm);
  /// Crystal described by its constants alone.
  static CrystalSpec from_alphas(double alpha_p, double alpha_minus);

  bool is_thin() const { return alpha_p == 0.0 && alpha_minus == 0.0; }
};

/// G(t, t'); reduces to F(t) exp(-4 d0^2 t'^2) for a thin crystal.
Complex g_profile(const FilteredProfile& F, const CrystalSpec& spec, double delta0_sq,
                  double t, double t_prime, const IntegrationSpec& ispec = {});

}  // namespace homsim
