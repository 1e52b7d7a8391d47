#include "homsim/finite_crystal.hpp"

#include <cmath>
#include <numbers>

namespace homsim {

VisibilityReport finite_crystal_visibility(const SourceConfig& source,
                                           const CrystalSpec& spec_nu,
                                           const CrystalSpec& spec_mu,
                                           const IntegrationSpec& ispec,
                                           bool optimize_delay) {
  return visibility(AmplitudeContext::finite(source, spec_nu, spec_mu, ispec),
                    optimize_delay, 0.0);
}

double perfect_correlation_visibility(const SourceConfig& source, const CrystalSpec& crystal,
                                      const IntegrationSpec& ispec) {
  source.validate();
  const double a = crystal.alpha_p + crystal.alpha_minus;
  const double b = crystal.alpha_p - crystal.alpha_minus;
  if (a == 0.0 || b == 0.0) {
    fail(ErrorKind::InvalidArgument, "perfect-correlation limit needs alpha_p != +-alpha_-");
  }
  const double rho = -a / b;
  const double kappa = 1.0 + rho;
  const DetectionFilter& f = source.filter;
  const PumpSpectrum& sn = source.pump_nu;
  const PumpSpectrum& sm = source.pump_mu;
  const Axis axis{0.0, f.fwhm_sigma() / std::sqrt(8.0 * std::numbers::ln2)};

  auto norm = [&](const PumpSpectrum& s) {
    auto h = [&](double x) {
      const double g = f.amplitude(x) * f.amplitude(rho * x);
      return Complex(std::norm(s.amplitude(kappa * x)) * g * g);
    };
    return integrate_1d(h, axis, ispec).real();
  };
  auto cross = [&](double x) {
    const double g1 = f.amplitude(x);
    const double g2 = f.amplitude(rho * x);
    const double g3 = f.amplitude(rho * rho * x);
    return Complex(std::norm(sn.amplitude(kappa * x)) * std::norm(sm.amplitude(kappa * rho * x)) *
                   g1 * g1 * g2 * g2 * g2 * g2 * g3 * g3);
  };
  const double x = integrate_1d(cross, axis, ispec).real();
  return 2.0 * std::numbers::pi / std::abs(b) * x / (norm(sn) * norm(sm));
}

}  // namespace homsim
