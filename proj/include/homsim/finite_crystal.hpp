#pragma once

#include "homsim/crystal.hpp"
#include "homsim/interference.hpp"
#include "homsim/spectra.hpp"

namespace homsim {

/// Visibility with finite-length crystals in both sources, from the 4-D cross
/// term and the product of pair-profile norms.
VisibilityReport finite_crystal_visibility(const SourceConfig& source,
                                           const CrystalSpec& spec_nu,
                                           const CrystalSpec& spec_mu,
                                           const IntegrationSpec& ispec = {},
                                           bool optimize_delay = true);

/// Long-crystal limit of v0 at zero delay with identical crystals in both
/// sources. The phase-matching function becomes 2 pi delta(a nu1 + b nu2)
/// with a = alpha_p + alpha_-, b = alpha_p - alpha_-; with rho = -a/b and
/// kappa = 1 + rho,
///   v0 = (2 pi/|b|) int |S_nu(k x)|^2 |S_mu(k rho x)|^2 g(x)^2 g(rho x)^4 g(rho^2 x)^2 dx
///        / (int |S_nu(k x)|^2 g(x)^2 g(rho x)^2 dx  int |S_mu(k x)|^2 g(x)^2 g(rho x)^2 dx),
/// g the filter amplitude.
double perfect_correlation_visibility(const SourceConfig& source, const CrystalSpec& crystal,
                                      const IntegrationSpec& ispec = {});

}  // namespace homsim
