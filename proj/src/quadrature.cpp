#include "homsim/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numbers>

namespace homsim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NonFiniteSample: return "NonFiniteSample";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidOverlap: return "InvalidOverlap";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

void IntegrationSpec::validate() const {
  if (!(relative_tolerance > 0.0)) {
    fail(ErrorKind::InvalidArgument, "relative_tolerance must be > 0");
  }
  if (!(absolute_floor >= 0.0)) {
    fail(ErrorKind::InvalidArgument, "absolute_floor must be >= 0");
  }
  if (max_subdivisions < 1) {
    fail(ErrorKind::InvalidArgument, "max_subdivisions must be >= 1");
  }
  // Below 5 widths a Gaussian tail carries more than 1e-6 of the mass.
  if (!(truncation_sigmas >= 5.0)) {
    fail(ErrorKind::InvalidArgument, "truncation_sigmas must be >= 5");
  }
}

Complex integrate_1d(const ComplexFunction1D& f, const IntegrationSpec& spec) {
  return integrate_1d(f.eval, f.axis, spec);
}

Complex integrate_nd(const ComplexFunctionND& f, const IntegrationSpec& spec) {
  return integrate_nd(f.eval, std::span<const Axis>(f.axes), spec);
}

Complex convolve(const ComplexFunction1D& f, const ComplexFunction1D& g,
                 double at, const IntegrationSpec& spec) {
  // t' lives where both f(t') and g(at - t') are non-negligible.
  const auto [fa, fb] = truncation_window(f.axis, spec);
  const auto [ga, gb] = truncation_window(g.axis, spec);
  const double lo = std::max(fa, at - gb);
  const double hi = std::min(fb, at - ga);
  if (!(lo < hi)) return {};
  auto integrand = [&](double tp) { return f.eval(tp) * g.eval(at - tp); };
  return integrate_interval(integrand, lo, hi, spec);
}

GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "gauss_hermite needs n >= 1");
  // Golub-Welsch on the symmetric Jacobi matrix of the Hermite recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (std::size_t k = 1; k < n; ++k) {
    sub(static_cast<Eigen::Index>(k - 1)) = std::sqrt(0.5 * static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure, "Gauss-Hermite eigen-solve failed");
  }
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mass = std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    rule.nodes[i] = solver.eigenvalues()(ii);
    const double v0 = solver.eigenvectors()(0, ii);
    rule.weights[i] = mass * v0 * v0;
  }
  // Odd rules: pin the middle node to exactly zero.
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace homsim
