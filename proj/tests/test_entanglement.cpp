#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "homsim/entanglement.hpp"
#include "homsim/error.hpp"
#include "homsim/interference.hpp"

using namespace homsim;

namespace {

const BeamSplitter kGate = BeamSplitter::from_transmittance(1.0 / 3.0);

Eigen::Matrix<Complex, 4, 1> ket(Complex vv, Complex vh, Complex hv, Complex hh) {
  Eigen::Matrix<Complex, 4, 1> k;
  k << vv, vh, hv, hh;
  return k / k.norm();
}

Matrix4c projector(const Eigen::Matrix<Complex, 4, 1>& k) { return k * k.adjoint(); }

std::vector<double> grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = 0.8 * static_cast<double>(i) / (n - 1);
  return g;
}

// Dense square root of rho * flip * conj(rho) * flip through its eigenvalues.
double wootters_eigen(const Matrix4c& rho) {
  Matrix4c flip = Matrix4c::Zero();
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  const Matrix4c m = rho * flip * rho.conjugate() * flip;
  Eigen::ComplexEigenSolver<Matrix4c> es(m);
  std::vector<double> l;
  for (int i = 0; i < 4; ++i) l.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  std::sort(l.rbegin(), l.rend());
  const double c = std::max(0.0, l[0] - l[1] - l[2] - l[3]);
  return c * c;
}

template <class F>
void expect_kind(F&& f, ErrorKind kind) {
  try {
    f();
    FAIL() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind);
  }
}

}  // namespace

TEST(Overlap, IdealVisibility) {
  const auto o = c_eps_from_visibility(0.8);
  EXPECT_NEAR(o.c, -1.0, 1e-15);
  EXPECT_NEAR(o.eps, 1.0, 1e-15);
}

TEST(Overlap, ZeroVisibility) {
  const auto o = c_eps_from_visibility(0.0);
  EXPECT_NEAR(o.c, 1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(o.eps, std::sqrt(5.0), 1e-15);
}

TEST(Overlap, BoundedOnGateRange) {
  for (double v : grid(100)) EXPECT_LE(std::abs(c_eps_from_visibility(v).c), 1.0 + 1e-15);
}

TEST(Overlap, RejectsOutsideGateRange) {
  expect_kind([] { c_eps_from_visibility(0.81); }, ErrorKind::OutOfRange);
  expect_kind([] { c_eps_from_visibility(-1e-3); }, ErrorKind::OutOfRange);
  expect_kind([] { tangle_closed_form(0.9); }, ErrorKind::OutOfRange);
}

TEST(Overlap, DirectRouteMatchesClosedForm) {
  for (double x : {0.0, 0.25, 0.6, 0.9, 1.0}) {
    const auto d = overlap_from_interference(Complex(x, 0.0), 1.0, kGate);
    const auto o = c_eps_from_visibility(0.8 * x);
    EXPECT_NEAR(d.c.real(), o.c, 1e-14);
    EXPECT_NEAR(d.c.imag(), 0.0, 1e-15);
    EXPECT_NEAR(d.eps, o.eps, 1e-14);
  }
}

TEST(Overlap, DirectRouteFromSimulatedSource) {
  const double lp = 400.0;
  const PumpSpectrum pump(GaussianChirped{nm_fwhm_to_angular(5.0, lp), 0.0, 0.0});
  const SourceConfig src{pump, pump, lp, DetectionFilter::from_nm(2.0 * lp, 2.0), kGate};
  const auto r = visibility(AmplitudeContext::thin(src));
  const auto d = overlap_from_interference(r.i_s_at_tau0, r.i_n, kGate);
  const auto o = c_eps_from_visibility(r.v);
  EXPECT_NEAR(d.c.real(), o.c, 1e-12);
  EXPECT_NEAR(d.eps, o.eps, 1e-12);
  EXPECT_NEAR(tangle_from_rho(density_matrix(d.c, d.eps)), tangle_closed_form(r.v), 1e-10);
}

TEST(Overlap, DirectRouteStaysPhysicalForComplexIs) {
  for (double phase : {0.3, 1.0, 2.5}) {
    const auto d = overlap_from_interference(std::polar(0.7, phase), 1.0, kGate);
    EXPECT_LE(std::abs(d.c), 1.0 + 1e-12);
  }
}

TEST(DensityMatrix, IdealStateIsPure) {
  const auto s = density_matrix(-1.0, 1.0);
  const Matrix4c expect = projector(ket(1.0, 1.0, 1.0, -1.0));
  EXPECT_LT((s.rho - expect).norm(), 1e-14);
  EXPECT_NEAR((s.rho * s.rho).trace().real(), 1.0, 1e-14);
}

TEST(DensityMatrix, ZeroOverlapHasQuarterSeparableHH) {
  const auto s = density_matrix(0.0, 1.0);
  EXPECT_NEAR(s.rho(3, 3).real(), 0.25, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(std::abs(s.rho(i, 3)), 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(s.rho);
  int rank = 0;
  for (int i = 0; i < 4; ++i) rank += es.eigenvalues()(i) > 1e-12;
  EXPECT_EQ(rank, 2);
}

TEST(DensityMatrix, ValidStateInvariants) {
  for (double v : grid(100)) {
    const auto s = state_from_visibility(v);
    EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-12);
    EXPECT_LT((s.rho - s.rho.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(s.rho);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
  }
  const auto z = density_matrix(std::polar(0.9, 0.7), 1.4);
  EXPECT_NEAR(z.rho.trace().real(), 1.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(z.rho);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(DensityMatrix, QubitSwapInvariance) {
  Matrix4c swap = Matrix4c::Zero();
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  for (double v : {0.1, 0.5, 0.8}) {
    const auto s = state_from_visibility(v);
    EXPECT_LT((swap * s.rho * swap - s.rho).norm(), 1e-15);
  }
}

TEST(DensityMatrix, RejectsInvalidOverlap) {
  expect_kind([] { density_matrix(1.01, 1.0); }, ErrorKind::InvalidOverlap);
  expect_kind([] { density_matrix(std::polar(1.1, 0.4), 0.5); }, ErrorKind::InvalidOverlap);
  expect_kind([] { density_matrix(0.5, -1.0); }, ErrorKind::InvalidArgument);
}

TEST(Tangle, ClosedFormValues) {
  EXPECT_NEAR(tangle_closed_form(0.8), 1.0, 1e-15);
  EXPECT_EQ(tangle_closed_form(0.0), 0.0);
  EXPECT_NEAR(tangle_closed_form(0.4), 1.0 / 9.0, 1e-15);
}

TEST(Tangle, BellAndProductStates) {
  const double h = 1.0 / std::numbers::sqrt2;
  EXPECT_NEAR(tangle_from_rho(projector(ket(h, 0.0, 0.0, h))), 1.0, 1e-12);
  EXPECT_NEAR(tangle_from_rho(projector(ket(0.0, h, -h, 0.0))), 1.0, 1e-12);
  EXPECT_NEAR(tangle_from_rho(projector(ket(0.0, 0.0, 0.0, 1.0))), 0.0, 1e-12);
  EXPECT_NEAR(tangle_from_rho(Matrix4c(Matrix4c::Identity() / 4.0)), 0.0, 1e-12);
}

TEST(Tangle, MatchesEigenvalueConstruction) {
  for (double v : {0.05, 0.3, 0.6, 0.75}) {
    const auto s = state_from_visibility(v);
    EXPECT_NEAR(tangle_from_rho(s), wootters_eigen(s.rho), 1e-8);
  }
  const Matrix4c werner =
      0.7 * projector(ket(1.0, 0.0, 0.0, 1.0)) + 0.3 * Matrix4c::Identity() / 4.0;
  EXPECT_NEAR(tangle_from_rho(werner), std::pow((3.0 * 0.7 - 1.0) / 2.0, 2), 1e-12);
}

TEST(Tangle, KeyPointsConsistent) {
  for (double v : {0.2, 0.5, 0.79}) {
    EXPECT_NEAR(tangle_from_rho(state_from_visibility(v)), tangle_closed_form(v), 1e-10);
  }
}

TEST(Tangle, ConsistentOnGrid) {
  for (double v : grid(100)) {
    const auto o = c_eps_from_visibility(v);
    EXPECT_NEAR(tangle_from_rho(density_matrix(o.c, o.eps)), tangle_closed_form(v), 1e-9)
        << "v = " << v;
  }
}

TEST(Tangle, StrictlyIncreasing) {
  const auto g = grid(100);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_GT(tangle_closed_form(g[i]), tangle_closed_form(g[i - 1]));
  }
}

TEST(Tangle, RapidDegradation) {
  EXPECT_LT(tangle_closed_form(0.95 * 0.8) / tangle_closed_form(0.8), 0.9);
}

TEST(Tangle, RejectsNonFiniteMatrix) {
  Matrix4c rho = Matrix4c::Identity() / 4.0;
  rho(1, 1) = std::nan("");
  expect_kind([&] { tangle_from_rho(rho); }, ErrorKind::NumericalFailure);
}
