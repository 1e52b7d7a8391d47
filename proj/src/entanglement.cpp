#include "homsim/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "homsim/error.hpp"

namespace homsim {

namespace {

constexpr double kGateVisibility = 0.8;

void check_gate_range(double v) {
  if (!(v >= 0.0 && v <= kGateVisibility)) {
    std::ostringstream msg;
    msg << "visibility " << v << " outside the gate range [0, 0.8]";
    fail(ErrorKind::OutOfRange, msg.str());
  }
}

}  // namespace

OverlapAmplitude c_eps_from_visibility(double v) {
  check_gate_range(v);
  const double root = std::sqrt(5.0 * (1.0 - v));
  return {3.0 / root * (1.0 / 3.0 - 5.0 / 6.0 * v), root};
}

StateOverlap overlap_from_interference(Complex i_s, double i_n, const BeamSplitter& bs) {
  if (!(i_n > 0.0) || !std::isfinite(i_n) || !std::isfinite(std::abs(i_s))) {
    fail(ErrorKind::InvalidArgument, "interference integrals must be finite with I_N > 0");
  }
  bs.validate();
  const double t2 = std::norm(bs.t);
  const double r2 = std::norm(bs.r);
  if (!(t2 > 0.0)) fail(ErrorKind::InvalidArgument, "splitter transmits nothing");
  const Complex x = i_s / i_n;
  const double s2 = t2 * t2 + r2 * r2 - 2.0 * t2 * r2 * x.real();
  if (!(s2 > 0.0)) fail(ErrorKind::InvalidOverlap, "interfering amplitude vanishes");
  const double s = std::sqrt(s2);
  return {(t2 - r2 * x) / s, s / t2};
}

PolarizationState density_matrix(Complex c, double eps) {
  if (!std::isfinite(std::abs(c)) || !std::isfinite(eps)) {
    fail(ErrorKind::InvalidArgument, "c and eps must be finite");
  }
  if (!(eps >= 0.0)) fail(ErrorKind::InvalidArgument, "eps must be >= 0");
  const double c_abs2 = std::norm(c);
  if (c_abs2 > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "|c| = " << std::sqrt(c_abs2) << " exceeds 1";
    fail(ErrorKind::InvalidOverlap, msg.str());
  }
  Eigen::Matrix<Complex, 4, 1> phi;
  phi << 1.0, 1.0, 1.0, eps * c;
  PolarizationState s;
  s.c = c;
  s.eps = eps;
  s.rho = phi * phi.adjoint();
  s.rho(3, 3) += eps * eps * std::max(0.0, 1.0 - c_abs2);
  s.rho /= s.rho.trace().real();
  return s;
}

double tangle_closed_form(double v) {
  check_gate_range(v);
  const double d = 8.0 - 5.0 * v;
  return 25.0 * v * v / (d * d);
}

double tangle_from_rho(const Matrix4c& rho) {
  if (!rho.allFinite()) fail(ErrorKind::NumericalFailure, "density matrix is not finite");
  // rho = W W^+; the concurrence eigenvalues are the singular values of
  // W^T (sy x sy) W, which avoids square roots of nearly singular matrices.
  const Matrix4c hermitian = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(hermitian);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure, "eigen-decomposition of rho did not converge");
  }
  const Eigen::Vector4d w = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c W = eig.eigenvectors() * w.cast<Complex>().asDiagonal();
  Matrix4c flip = Matrix4c::Zero();
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  const Matrix4c tau = W.transpose() * flip * W;
  Eigen::JacobiSVD<Matrix4c> svd(tau);
  if (svd.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure, "singular value decomposition did not converge");
  }
  const Eigen::Vector4d l = svd.singularValues();
  const double concurrence = std::max(0.0, l(0) - l(1) - l(2) - l(3));
  return concurrence * concurrence;
}

double tangle_from_rho(const PolarizationState& state) { return tangle_from_rho(state.rho); }

PolarizationState state_from_visibility(double v) {
  const OverlapAmplitude ce = c_eps_from_visibility(v);
  return density_matrix(ce.c, ce.eps);
}

}  // namespace homsim
