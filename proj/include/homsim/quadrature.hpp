#pragma once

// Adaptive quadrature of complex-valued functions on the real line and on
// boxes of up to four dimensions.
//
// Every integrand in this library carries a Gaussian envelope, so infinite
// domains are clipped at `truncation_sigmas` declared widths around a declared
// center. The 1-D engine is a globally adaptive Gauss-Kronrod (7, 15) scheme;
// real and imaginary parts share nodes and a single refinement queue. The N-D
// engine nests the 1-D engine axis by axis.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "homsim/error.hpp"

namespace homsim {

using Complex = std::complex<double>;

struct IntegrationSpec {
  double relative_tolerance = 1e-8;
  double absolute_floor = 1e-14;
  std::size_t max_subdivisions = 4000;
  /// Half-width of the truncated domain in units of the declared width.
  double truncation_sigmas = 10.0;

  /// Throws InvalidArgument when the spec is unusable.
  void validate() const;
};

/// Characteristic location and scale of an integrand along one axis.
struct Axis {
  double center = 0.0;
  double width = 1.0;
};

inline constexpr std::size_t kMaxIntegrationDims = 4;

struct ComplexFunction1D {
  std::function<Complex(double)> eval;
  Axis axis;
};

struct ComplexFunctionND {
  std::function<Complex(std::span<const double>)> eval;
  std::vector<Axis> axes;
};

/// Truncated integration window [center - K w, center + K w].
inline std::pair<double, double> truncation_window(const Axis& axis,
                                                   const IntegrationSpec& spec) {
  const double half = spec.truncation_sigmas * axis.width;
  return {axis.center - half, axis.center + half};
}

namespace detail {

struct Segment {
  double a = 0.0;
  double b = 0.0;
  Complex value;
  double error = 0.0;
  double abs_sum = 0.0;  // integral of |f|, for the roundoff floor

  bool operator<(const Segment& other) const { return error < other.error; }
};

// QUADPACK-style error scaling for one real component.
inline double scaled_error(double diff, double resabs, double resasc) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double err = std::abs(diff);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return err;
}

[[noreturn]] inline void non_finite_sample(double x, Complex v) {
  std::ostringstream msg;
  msg << "integrand returned a non-finite value " << v << " at x = " << x;
  fail(ErrorKind::NonFiniteSample, msg.str());
}

template <class F>
Complex checked_eval(F& f, double x) {
  const Complex v = static_cast<Complex>(f(x));
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    non_finite_sample(x, v);
  }
  return v;
}

template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<Complex, 15> fv;
  fv[7] = checked_eval(f, center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    fv[j] = checked_eval(f, center - dx);
    fv[14 - j] = checked_eval(f, center + dx);
  }

  Complex kronrod = wgk[7] * fv[7];
  Complex gauss = wg[3] * fv[7];
  double abs_re = wgk[7] * std::abs(fv[7].real());
  double abs_im = wgk[7] * std::abs(fv[7].imag());
  for (int j = 0; j < 7; ++j) {
    const Complex pair = fv[j] + fv[14 - j];
    kronrod += wgk[j] * pair;
    abs_re += wgk[j] * (std::abs(fv[j].real()) + std::abs(fv[14 - j].real()));
    abs_im += wgk[j] * (std::abs(fv[j].imag()) + std::abs(fv[14 - j].imag()));
    if (j % 2 == 1) gauss += wg[j / 2] * pair;
  }
  const Complex mean = 0.5 * kronrod;
  double asc_re = wgk[7] * std::abs(fv[7].real() - mean.real());
  double asc_im = wgk[7] * std::abs(fv[7].imag() - mean.imag());
  for (int j = 0; j < 7; ++j) {
    asc_re += wgk[j] * (std::abs(fv[j].real() - mean.real()) +
                        std::abs(fv[14 - j].real() - mean.real()));
    asc_im += wgk[j] * (std::abs(fv[j].imag() - mean.imag()) +
                        std::abs(fv[14 - j].imag() - mean.imag()));
  }

  const double h = std::abs(half);
  const Complex diff = (kronrod - gauss) * half;
  const double err_re = scaled_error(diff.real(), abs_re * h, asc_re * h);
  const double err_im = scaled_error(diff.imag(), abs_im * h, asc_im * h);

  Segment s;
  s.a = a;
  s.b = b;
  s.value = kronrod * half;
  s.error = std::hypot(err_re, err_im);
  s.abs_sum = std::hypot(abs_re, abs_im) * h;
  return s;
}

template <class F>
Complex adaptive(F& f, std::vector<Segment> initial, const IntegrationSpec& spec) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::priority_queue<Segment> queue;
  Complex total{};
  double total_error = 0.0;
  double total_abs = 0.0;
  for (auto& s : initial) {
    total += s.value;
    total_error += s.error;
    total_abs += s.abs_sum;
    queue.push(std::move(s));
  }

  auto converged = [&]() {
    // Twice the per-segment roundoff floor, so integrals that cancel to zero
    // can still terminate.
    const double target = std::max(
        {spec.absolute_floor, spec.relative_tolerance * std::abs(total),
         100.0 * eps * total_abs});
    return total_error <= target;
  };

  while (!converged()) {
    if (queue.size() >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge within "
          << spec.max_subdivisions << " subintervals (estimate " << total
          << ", error " << total_error << ")";
      fail(ErrorKind::NonConvergence, msg.str());
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gauss_kronrod15(f, worst.a, mid);
    Segment right = gauss_kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    total_abs += left.abs_sum + right.abs_sum - worst.abs_sum;
    queue.push(std::move(left));
    queue.push(std::move(right));
  }

  // Re-sum to shed the drift accumulated by incremental updates.
  Complex sum{};
  while (!queue.empty()) {
    sum += queue.top().value;
    queue.pop();
  }
  return sum;
}

}  // namespace detail

/// Adaptive integral of f over the finite interval [a, b].
template <class F>
Complex integrate_interval(F&& f, double a, double b,
                           const IntegrationSpec& spec) {
  if (a == b) return {};
  std::vector<detail::Segment> init;
  init.push_back(detail::gauss_kronrod15(f, a, b));
  return detail::adaptive(f, std::move(init), spec);
}

/// Adaptive integral over [points.front(), points.back()] with the given
/// interior breakpoints seeded as initial subintervals.
template <class F>
Complex integrate_breakpoints(F&& f, std::span<const double> points,
                              const IntegrationSpec& spec) {
  if (points.size() < 2) {
    fail(ErrorKind::InvalidArgument, "integrate_breakpoints needs two points");
  }
  std::vector<detail::Segment> init;
  init.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    init.push_back(detail::gauss_kronrod15(f, points[i], points[i + 1]));
  }
  IntegrationSpec local = spec;
  local.max_subdivisions = std::max(spec.max_subdivisions, 4 * init.size());
  return detail::adaptive(f, std::move(init), local);
}

/// Integral of f over the real line, truncated around the declared axis.
template <class F>
Complex integrate_1d(F&& f, const Axis& axis, const IntegrationSpec& spec) {
  const auto [a, b] = truncation_window(axis, spec);
  return integrate_interval(f, a, b, spec);
}

/// Nested adaptive integral over up to four axes. `f` receives the full
/// coordinate vector as a span of length axes.size().
template <class F>
Complex integrate_nd(F&& f, std::span<const Axis> axes,
                     const IntegrationSpec& spec) {
  const std::size_t dims = axes.size();
  if (dims == 0 || dims > kMaxIntegrationDims) {
    std::ostringstream msg;
    msg << "integrate_nd supports 1 to " << kMaxIntegrationDims
        << " dimensions, got " << dims;
    fail(ErrorKind::DimensionTooLarge, msg.str());
  }
  std::array<double, kMaxIntegrationDims> x{};
  std::function<Complex(std::size_t)> level = [&](std::size_t d) -> Complex {
    const auto [a, b] = truncation_window(axes[d], spec);
    auto inner = [&, d](double xd) -> Complex {
      x[d] = xd;
      if (d + 1 == dims) {
        return f(std::span<const double>(x.data(), dims));
      }
      return level(d + 1);
    };
    return integrate_interval(inner, a, b, spec);
  };
  return level(0);
}

Complex integrate_1d(const ComplexFunction1D& f, const IntegrationSpec& spec);
Complex integrate_nd(const ComplexFunctionND& f, const IntegrationSpec& spec);

/// (f * g)(at) = integral of f(t') g(at - t') dt'.
Complex convolve(const ComplexFunction1D& f, const ComplexFunction1D& g,
                 double at, const IntegrationSpec& spec);

/// Gauss-Hermite rule for weight exp(-x^2): nodes ascending, weights summing
/// to sqrt(pi).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(std::size_t n);

}  // namespace homsim
