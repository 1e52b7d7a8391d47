#pragma once

// Post-selected polarization state of the controlled-sign gate. Basis order
// {VV, VH, HV, HH}.

#include <Eigen/Dense>

#include "homsim/quadrature.hpp"
#include "homsim/spectra.hpp"

namespace homsim {

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

struct PolarizationState {
  Matrix4c rho = Matrix4c::Zero();
  Complex c{0.0, 0.0};
  double eps = 0.0;
};

struct OverlapAmplitude {
  double c = 0.0;
  double eps = 0.0;
};

/// c = 3/sqrt(5(1 - v)) (1/3 - 5v/6), eps = sqrt(5(1 - v)) for 0 <= v <= 0.8.
OverlapAmplitude c_eps_from_visibility(double v);

struct StateOverlap {
  Complex c{0.0, 0.0};
  double eps = 0.0;
};

/// c = <A|B> and eps = |B| / (|t|^2 |A|) from the interference integrals,
/// with |A> the transmitted-only amplitude and |B> the full amplitude at the
/// splitter for H photons:
///   c = (|t|^2 - |r|^2 x) / s, eps = s / |t|^2,
///   s^2 = |t|^4 + |r|^4 - 2 |t r|^2 Re x, x = I_S / I_N.
/// For the gate splitter this reproduces c_eps_from_visibility.
StateOverlap overlap_from_interference(Complex i_s, double i_n, const BeamSplitter& bs);

/// (|phi'><phi'| + eps^2 (1 - |c|^2) |HH><HH|) / trace, with
/// phi' = VV + VH + HV + eps c HH.
PolarizationState density_matrix(Complex c, double eps);

/// 25 v^2 / (8 - 5 v)^2 for 0 <= v <= 0.8.
double tangle_closed_form(double v);

/// Squared Wootters concurrence.
double tangle_from_rho(const PolarizationState& state);
double tangle_from_rho(const Matrix4c& rho);

/// State reached by the gate at visibility v.
PolarizationState state_from_visibility(double v);

}  // namespace homsim
