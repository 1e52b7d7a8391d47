#include "homsim/interference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homsim/golden_section.hpp"

namespace homsim {

namespace {

constexpr double kPi = std::numbers::pi;
const double kFwhmPerWidth = 2.0 * std::sqrt(2.0 * std::numbers::ln2);
constexpr std::size_t kMaxGridPoints = 1025;

// Nodes center + (i - (n-1)/2) h, optionally offset by a fraction of h.
std::vector<double> grid(double center, std::size_t n, double h, double offset = 0.0) {
  std::vector<double> g(n);
  const double half = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = center + (static_cast<double>(i) - half + offset) * h;
  }
  return g;
}

struct GridShape {
  std::size_t n = 0;
  double h = 0.0;
};

// Grid covering +-K widths of single detector times at the coarsest step
// that still resolves the narrowest feature.
GridShape initial_grid(const AmplitudeContext& ctx) {
  const Axis snu = ctx.nu.sum_axis();
  const Axis smu = ctx.mu.sum_axis();
  const double dnu = ctx.nu.difference_width();
  const double dmu = ctx.mu.difference_width();
  const double feature =
      std::min({2.0 * snu.width, 2.0 * smu.width, dnu, dmu});
  const double reach = std::max(std::hypot(snu.width, 0.5 * dnu),
                                std::hypot(smu.width, 0.5 * dmu));
  GridShape s;
  s.h = 0.75 * feature;
  const double half = ctx.integration.truncation_sigmas * reach;
  s.n = 2 * static_cast<std::size_t>(std::ceil(half / s.h)) + 1;
  return s;
}

GridShape refine(const GridShape& s) { return {2 * s.n - 1, 0.5 * s.h}; }

[[noreturn]] void grid_not_converged(const char* what, Complex last, double change) {
  std::ostringstream msg;
  msg << what << " did not converge within " << kMaxGridPoints
      << " points per axis (estimate " << last << ", last change " << change << ")";
  fail(ErrorKind::NonConvergence, msg.str());
}

Eigen::MatrixXcd sample(const std::vector<double>& rows, const std::vector<double>& cols,
                        auto&& f) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXcd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      const Complex v = f(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        fail(ErrorKind::NonFiniteSample, "pair profile returned a non-finite value");
      }
      m(i, j) = v;
    }
  }
  return m;
}

// Cross term on one grid as the trace of the matrix cycle t1 -> t2 -> t4 -> t3 -> t1.
Complex cross_on_grid(const AmplitudeContext& ctx, double tau, const GridShape& s) {
  const double cnu = ctx.nu.sum_axis().center;
  const double cmu = ctx.mu.sum_axis().center;
  const auto t1 = grid(cnu + 0.5 * tau, s.n, s.h);
  const auto t2 = grid(0.5 * (cnu + cmu), s.n, s.h);
  const auto t3 = t2;
  const auto t4 = grid(cmu - 0.5 * tau, s.n, s.h);
  const PairProfile& qn = ctx.nu;
  const PairProfile& qm = ctx.mu;

  const Eigen::MatrixXcd A = sample(t1, t2, [&](double a, double b) { return std::conj(qn(a, b)); });
  const Eigen::MatrixXcd B = sample(t2, t4, [&](double b, double d) { return qm(b, d + tau); });
  const Eigen::MatrixXcd C = sample(t4, t3, [&](double d, double c) { return std::conj(qm(c, d)); });
  const Eigen::MatrixXcd D = sample(t3, t1, [&](double c, double a) { return qn(a - tau, c); });
  const Eigen::MatrixXcd AB = A * B;
  const Eigen::MatrixXcd CD = C * D;
  const double h2 = s.h * s.h;
  return h2 * h2 * AB.cwiseProduct(CD.transpose()).sum();
}

// h^2 sum of |Q(a - da, b - db)|^2 on a grid following the shifted profile.
double pair_norm_on_grid(const PairProfile& q, double da, double db, double offset,
                         const GridShape& s) {
  const double c = q.sum_axis().center;
  const auto a = grid(c + da, s.n, s.h, offset);
  const auto b = grid(c + db, s.n, s.h, offset);
  double sum = 0.0;
  for (double x : a) {
    for (double y : b) sum += std::norm(q(x - da, y - db));
  }
  return sum * s.h * s.h;
}

// Norm of one pair profile by trapezoid refinement.
double pair_norm(const PairProfile& q, double da, double db, double offset,
                 const AmplitudeContext& ctx) {
  GridShape s = initial_grid(ctx);
  double prev = pair_norm_on_grid(q, da, db, offset, s);
  while (true) {
    s = refine(s);
    if (s.n > kMaxGridPoints) grid_not_converged("pair norm", prev, 0.0);
    const double next = pair_norm_on_grid(q, da, db, offset, s);
    if (std::abs(next - prev) <= ctx.integration.relative_tolerance * std::abs(next)) {
      return next;
    }
    prev = next;
  }
}

struct Converged {
  Complex value;
  GridShape shape;
};

Converged converge_cross(const AmplitudeContext& ctx, double tau, double norm) {
  GridShape s = initial_grid(ctx);
  Complex prev = cross_on_grid(ctx, tau, s);
  while (true) {
    const GridShape next_shape = refine(s);
    if (next_shape.n > kMaxGridPoints) {
      grid_not_converged("4-D cross term", prev, 0.0);
    }
    const Complex next = cross_on_grid(ctx, tau, next_shape);
    const double change = std::abs(next - prev);
    if (change <= ctx.integration.relative_tolerance * norm) {
      return {next, next_shape};
    }
    prev = next;
    s = next_shape;
  }
}

struct DelayOptimum {
  double tau = 0.0;
  double value = 0.0;
};

// Coarse scan over the bracket and the seeds, golden section around the
// best sample, ties resolved towards the smallest |tau|.
template <class F>
DelayOptimum maximize_delay(F&& objective, double duration, double seed,
                            double relative_tie) {
  const double reach = std::max(5.0 * duration, std::abs(seed) + duration);
  constexpr int kScan = 21;
  const double step = 2.0 * reach / (kScan - 1);
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < kScan; ++i) {
    const double tau = -reach + step * i;
    samples.emplace_back(tau, objective(tau));
  }
  for (double tau : {0.0, seed, -seed}) samples.emplace_back(tau, objective(tau));
  const auto best = *std::max_element(
      samples.begin(), samples.end(),
      [](const auto& x, const auto& y) { return x.second < y.second; });
  const double lo = std::max(-reach, best.first - step);
  const double hi = std::min(reach, best.first + step);
  const ScalarOptimum g = golden_section_maximize(objective, lo, hi, 1e-6 * duration);
  samples.emplace_back(g.x, g.value);

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) top = std::max(top, s.second);
  const double floor = top - relative_tie * std::abs(top);
  DelayOptimum out{std::numeric_limits<double>::infinity(), top};
  for (const auto& s : samples) {
    if (s.second >= floor && std::abs(s.first) < std::abs(out.tau)) {
      out = {s.first, s.second};
    }
  }
  return out;
}

}  // namespace

PairProfile PairProfile::thin(FilteredProfile F, double delta0_sq) {
  if (!(delta0_sq > 0.0)) fail(ErrorKind::InvalidArgument, "delta0_sq must be > 0");
  return PairProfile(std::move(F), CrystalSpec{}, delta0_sq, CrystalMode::ThinCrystal, {});
}

PairProfile PairProfile::finite(FilteredProfile F, CrystalSpec crystal, double delta0_sq,
                                IntegrationSpec spec) {
  if (!(delta0_sq > 0.0)) fail(ErrorKind::InvalidArgument, "delta0_sq must be > 0");
  spec.validate();
  return PairProfile(std::move(F), std::move(crystal), delta0_sq,
                     CrystalMode::FiniteCrystal, spec);
}

Complex PairProfile::operator()(double first, double second) const {
  return g(0.5 * (first + second), 0.5 * (first - second));
}

Complex PairProfile::g(double t, double t_prime) const {
  if (mode_ == CrystalMode::ThinCrystal) {
    return F_(t) * std::exp(-4.0 * delta0_sq_ * t_prime * t_prime);
  }
  return g_profile(F_, crystal_, delta0_sq_, t, t_prime, spec_);
}

Axis PairProfile::sum_axis() const {
  const Axis a = F_.axis();
  return {a.center, std::sqrt(a.width * a.width + crystal_.alpha_p * crystal_.alpha_p / 12.0)};
}

double PairProfile::difference_width() const {
  return std::sqrt(1.0 / (2.0 * delta0_sq_) + crystal_.alpha_minus * crystal_.alpha_minus / 3.0);
}

PairProfile PairProfile::shifted(double dt) const {
  PairProfile out = *this;
  out.F_ = F_.shifted(dt);
  return out;
}

AmplitudeContext AmplitudeContext::thin(const SourceConfig& source,
                                        const IntegrationSpec& spec) {
  source.validate();
  spec.validate();
  const double d2 = source.filter.delta0_sq();
  return {PairProfile::thin(make_filtered_profile(source.pump_nu, source.filter, spec), d2),
          PairProfile::thin(make_filtered_profile(source.pump_mu, source.filter, spec), d2),
          d2, source.beamsplitter, CrystalMode::ThinCrystal, spec};
}

AmplitudeContext AmplitudeContext::finite(const SourceConfig& source, const CrystalSpec& nu,
                                          const CrystalSpec& mu, const IntegrationSpec& spec) {
  source.validate();
  spec.validate();
  const double d2 = source.filter.delta0_sq();
  return {PairProfile::finite(make_filtered_profile(source.pump_nu, source.filter, spec), nu,
                              d2, spec),
          PairProfile::finite(make_filtered_profile(source.pump_mu, source.filter, spec), mu,
                              d2, spec),
          d2, source.beamsplitter, CrystalMode::FiniteCrystal, spec};
}

AmplitudeContext AmplitudeContext::from_profiles(FilteredProfile F_nu, FilteredProfile F_mu,
                                                 double delta0_sq, BeamSplitter bs,
                                                 const IntegrationSpec& spec) {
  bs.validate();
  spec.validate();
  return {PairProfile::thin(std::move(F_nu), delta0_sq),
          PairProfile::thin(std::move(F_mu), delta0_sq), delta0_sq, bs,
          CrystalMode::ThinCrystal, spec};
}

void AmplitudeContext::validate() const {
  if (nu.mode() != mode || mu.mode() != mode) {
    fail(ErrorKind::ModeMismatch,
         mode == CrystalMode::FiniteCrystal
             ? "finite-crystal context needs two-argument G profiles"
             : "thin-crystal context needs one-argument F profiles");
  }
  if (!(delta0_sq > 0.0)) fail(ErrorKind::InvalidArgument, "delta0_sq must be > 0");
  beamsplitter.validate();
}

AmplitudeContext AmplitudeContext::with_mu_delay(double dt) const {
  AmplitudeContext out = *this;
  out.mu = mu.shifted(dt);
  return out;
}

AmplitudeContext AmplitudeContext::swapped() const {
  AmplitudeContext out = *this;
  std::swap(out.nu, out.mu);
  return out;
}

Complex amplitude(const AmplitudeContext& ctx, double t_plus_nu, double t_minus_nu,
                  double t_plus_mu, double t_minus_mu, double tau) {
  ctx.validate();
  const double t1 = t_plus_nu + 0.5 * t_minus_nu;
  const double t2 = t_plus_nu - 0.5 * t_minus_nu;
  const double t4 = t_plus_mu + 0.5 * t_minus_mu;
  const double t3 = t_plus_mu - 0.5 * t_minus_mu;
  const double tt = std::norm(ctx.beamsplitter.t);
  const double rr = std::norm(ctx.beamsplitter.r);
  Complex a{};
  if (tt != 0.0) a += tt * ctx.nu(t1, t2) * ctx.mu(t3, t4);
  if (rr != 0.0) a -= rr * ctx.nu(t1 - tau, t3) * ctx.mu(t2, t4 + tau);
  return a;
}

Complex compute_i_s(const AmplitudeContext& ctx, double tau) {
  ctx.validate();
  if (ctx.mode != CrystalMode::ThinCrystal) {
    fail(ErrorKind::ModeMismatch, "compute_i_s is thin-crystal only; use compute_cross_term_4d");
  }
  const FilteredProfile& fn = ctx.nu.profile();
  const FilteredProfile& fm = ctx.mu.profile();
  const double d0 = std::sqrt(ctx.delta0_sq);
  const IntegrationSpec& spec = ctx.integration;
  auto H = [&](double x1, double s) {
    auto f = [&](double x) {
      const double u = x - s;
      return fn(0.5 * (x1 + x)) * fm(0.5 * (x1 - x)) * std::exp(-2.0 * ctx.delta0_sq * u * u);
    };
    return integrate_1d(f, Axis{s, 0.5 / d0}, spec);
  };
  const Axis outer{fn.axis().center + fm.axis().center,
                   2.0 * std::max(fn.axis().width, fm.axis().width) + 0.5 / d0};
  auto g = [&](double x1) { return std::conj(H(x1, tau)) * H(x1, -tau); };
  return std::sqrt(kPi) / (2.0 * d0) * integrate_1d(g, outer, spec);
}

double compute_i_n(const AmplitudeContext& ctx) {
  ctx.validate();
  if (ctx.mode == CrystalMode::FiniteCrystal) {
    return pair_norm(ctx.nu, 0.0, 0.0, 0.0, ctx) * pair_norm(ctx.mu, 0.0, 0.0, 0.0, ctx);
  }
  auto norm = [&](const FilteredProfile& f) {
    return integrate_1d([&](double t) { return Complex(std::norm(f(t))); }, f.axis(),
                        ctx.integration).real();
  };
  return kPi / (2.0 * ctx.delta0_sq) * norm(ctx.nu.profile()) * norm(ctx.mu.profile());
}

CrossTerm4D cross_term_4d(const AmplitudeContext& ctx, double tau) {
  ctx.validate();
  CrossTerm4D out;
  out.norm_transmission =
      pair_norm(ctx.nu, 0.0, 0.0, 0.0, ctx) * pair_norm(ctx.mu, 0.0, 0.0, 0.0, ctx);
  // Reflection-term norm in its own detector coordinates on a staggered grid.
  out.norm_reflection =
      pair_norm(ctx.nu, tau, 0.0, 0.5, ctx) * pair_norm(ctx.mu, 0.0, -tau, 0.5, ctx);
  const Converged c = converge_cross(ctx, tau, out.norm_transmission);
  out.value = c.value;
  out.grid_points = c.shape.n;
  out.grid_step = c.shape.h;
  return out;
}

Complex compute_cross_term_4d(const AmplitudeContext& ctx, double tau) {
  return cross_term_4d(ctx, tau).value;
}

double pulse_duration(const AmplitudeContext& ctx) {
  return kFwhmPerWidth * std::max(ctx.nu.sum_axis().width, ctx.mu.sum_axis().width);
}

VisibilityReport visibility(const AmplitudeContext& ctx, bool optimize_delay,
                            double tau_fixed) {
  ctx.validate();
  VisibilityReport r;
  r.mode = ctx.mode;
  r.prefactor = ctx.beamsplitter.prefactor();
  r.i_n = compute_i_n(ctx);
  if (!(r.i_n > 0.0)) fail(ErrorKind::NumericalFailure, "no-interference norm is not positive");
  const bool thin = ctx.mode == CrystalMode::ThinCrystal;
  r.tau0 = tau_fixed;
  if (optimize_delay) {
    const double seed = ctx.nu.sum_axis().center - ctx.mu.sum_axis().center;
    const double tie = 10.0 * ctx.integration.relative_tolerance;
    if (thin) {
      r.tau0 = maximize_delay([&](double tau) { return compute_i_s(ctx, tau).real(); },
                              pulse_duration(ctx), seed, tie).tau;
    } else {
      // One resolved grid serves the whole search.
      const GridShape shape = converge_cross(ctx, seed, r.i_n).shape;
      r.tau0 = maximize_delay(
          [&](double tau) { return cross_on_grid(ctx, tau, shape).real(); },
          pulse_duration(ctx), seed, tie).tau;
    }
  }
  r.i_s_at_tau0 = thin ? compute_i_s(ctx, r.tau0) : converge_cross(ctx, r.tau0, r.i_n).value;
  r.v0 = r.i_s_at_tau0.real() / r.i_n;
  r.v = r.prefactor * r.v0;
  return r;
}

double overlap_time_domain(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                           const IntegrationSpec& spec) {
  const Axis a = p_nu.time_axis(spec);
  const Axis b = p_mu.time_axis(spec);
  const double w = std::max(a.width, b.width);
  const double k = spec.truncation_sigmas;
  const double lo = std::min(a.center, b.center) - k * w;
  const double hi = std::max(a.center, b.center) + k * w;
  auto f = [&](double t) {
    return Complex(std::norm(pump_time_profile(p_nu, t, spec)) *
                   std::norm(pump_time_profile(p_mu, t, spec)));
  };
  return integrate_interval(f, lo, hi, spec).real();
}

double overlap_frequency_domain(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                                const IntegrationSpec& spec) {
  const auto [an, bn] = p_nu.support(spec);
  const auto [am, bm] = p_mu.support(spec);
  auto conv = [&](double nu0) {
    const double lo = std::max(an, nu0 - bm);
    const double hi = std::min(bn, nu0 - am);
    if (!(lo < hi)) return Complex{};
    auto f = [&](double x) { return p_nu.amplitude(x) * p_mu.amplitude(nu0 - x); };
    return integrate_interval(f, lo, hi, spec);
  };
  auto g = [&](double nu0) { return Complex(std::norm(conv(nu0))); };
  const double mid = 0.5 * (an + am + bn + bm);
  const double points[] = {an + am, mid, bn + bm};
  return 2.0 * kPi * integrate_breakpoints(g, std::span<const double>(points), spec).real();
}

double overlap_infinite_filters(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                                const DetectionFilter& filter, const IntegrationSpec& spec) {
  auto energy = [&](const PumpSpectrum& p) {
    const auto [a, b] = p.support(spec);
    return 2.0 * kPi *
           integrate_interval([&](double x) { return Complex(std::norm(p.amplitude(x))); },
                              a, b, spec).real();
  };
  const double overlap = overlap_frequency_domain(p_nu, p_mu, spec);
  return std::sqrt(kPi) / filter.delta0() * overlap / (energy(p_nu) * energy(p_mu));
}

double max_visibility_residual(const FilteredProfile& F_nu, const FilteredProfile& F_mu,
                               double delta0_sq,
                               const std::vector<std::pair<double, double>>& probes,
                               const IntegrationSpec& spec) {
  if (probes.size() < 10) {
    fail(ErrorKind::InvalidArgument, "max_visibility_residual needs at least 10 probes");
  }
  if (!(delta0_sq > 0.0)) fail(ErrorKind::InvalidArgument, "delta0_sq must be > 0");
  const double d0 = std::sqrt(delta0_sq);
  const Axis z_axis{0.0, 0.25 / d0};
  double worst = 0.0;
  double scale = 0.0;
  for (const auto& [x, y] : probes) {
    const Complex lhs = F_nu(x + y) * F_mu(x - y);
    auto f = [&](double z) {
      return std::exp(-8.0 * delta0_sq * z * z) * F_nu(x + z) * F_mu(x - z);
    };
    const Complex rhs = 4.0 * d0 / std::sqrt(kPi) * std::exp(-8.0 * delta0_sq * y * y) *
                        integrate_1d(f, z_axis, spec);
    worst = std::max(worst, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(lhs));
  }
  if (scale == 0.0) fail(ErrorKind::NumericalFailure, "profiles vanish on every probe");
  return worst / scale;
}

std::vector<std::pair<double, double>> default_residual_probes(const FilteredProfile& F_nu,
                                                               const FilteredProfile& F_mu) {
  const Axis a = F_nu.axis();
  const Axis b = F_mu.axis();
  const double x0 = 0.5 * (a.center + b.center);
  const double y0 = 0.5 * (a.center - b.center);
  const double w = std::max(a.width, b.width);
  std::vector<std::pair<double, double>> probes;
  constexpr int kSide = 9;
  for (int i = 0; i < kSide; ++i) {
    for (int j = 0; j < kSide; ++j) {
      probes.emplace_back(x0 + w * (-2.0 + 0.5 * i), y0 + w * (-2.0 + 0.5 * j));
    }
  }
  return probes;
}

double jitter_averaged_visibility(const AmplitudeContext& ctx, double jitter_rms,
                                  std::size_t n_samples) {
  if (!(jitter_rms >= 0.0) || !std::isfinite(jitter_rms)) {
    fail(ErrorKind::InvalidArgument, "jitter_rms must be >= 0");
  }
  const VisibilityReport base = visibility(ctx);
  if (jitter_rms == 0.0) return base.v;
  const GaussHermiteRule rule = gauss_hermite(n_samples);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double dt = std::sqrt(2.0) * jitter_rms * rule.nodes[k];
    sum += rule.weights[k] * visibility(ctx.with_mu_delay(dt), false, base.tau0).v;
  }
  return sum / std::sqrt(kPi);
}

}  // namespace homsim
