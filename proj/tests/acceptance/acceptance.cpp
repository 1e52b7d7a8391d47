// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "homsim/crystal.hpp"
#include "homsim/entanglement.hpp"
#include "homsim/finite_crystal.hpp"
#include "homsim/interference.hpp"
#include "homsim/spectra.hpp"
#include "homsim/sweep.hpp"
#include "oracles.hpp"

using namespace homsim;

namespace {

constexpr double kLp = 400.0;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) detail << "; ";
      detail << what;
      ok = false;
    }
  }
};

SourceConfig gaussian_source(double pump_nu_nm, double pump_mu_nm, double filter_nm,
                             double transmittance = 0.5, double phi1_nu = 0.0,
                             double phi1_mu = 0.0, double phi2_nu = 0.0, double phi2_mu = 0.0) {
  return SourceConfig{
      PumpSpectrum(GaussianChirped{nm_fwhm_to_angular(pump_nu_nm, kLp), phi1_nu, phi2_nu}),
      PumpSpectrum(GaussianChirped{nm_fwhm_to_angular(pump_mu_nm, kLp), phi1_mu, phi2_mu}),
      kLp, DetectionFilter::from_nm(2.0 * kLp, filter_nm),
      BeamSplitter::from_transmittance(transmittance)};
}

SourceConfig random_source(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sn = 2.0 + 6.0 * u(rng);
  const double sm = 2.0 + 6.0 * u(rng);
  const double sf = 1.0 + 3.0 * u(rng);
  const double unit_n = 4.0 * oracle::kLn2 / std::pow(nm_fwhm_to_angular(sn, kLp), 2);
  const double unit_m = 4.0 * oracle::kLn2 / std::pow(nm_fwhm_to_angular(sm, kLp), 2);
  return gaussian_source(sn, sm, sf, 0.2 + 0.6 * u(rng), 0.2 * (u(rng) - 0.5),
                         0.2 * (u(rng) - 0.5), 2.0 * (u(rng) - 0.5) * unit_n,
                         2.0 * (u(rng) - 0.5) * unit_m);
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

void ac1(Check& c) {
  const BeamSplitter gate = BeamSplitter::from_transmittance(1.0 / 3.0);
  c.require(std::abs(gate.prefactor() - 0.8) < 1e-12, "prefactor != 0.8");
  const auto r = visibility(AmplitudeContext::thin(gaussian_source(60.0, 60.0, 0.5, 1.0 / 3.0)));
  c.detail << "prefactor " << gate.prefactor() << ", delta-pulse v " << r.v;
  c.require(std::abs(r.v - 0.8) < 2e-3, "v not within 2e-3 of 0.8");
}

void ac2(Check& c) {
  const auto r = visibility(AmplitudeContext::thin(gaussian_source(50.0, 50.0, 0.5)));
  c.detail << "v0 " << r.v0 << " (pump/filter 100)";
  c.require(r.v0 >= 0.997 && r.v0 <= 1.0006, "v0 outside [0.997, 1.0006]");
}

void ac3(Check& c) {
  c.require(tangle_closed_form(0.8) == 1.0, "T(0.8) != 1");
  c.require(tangle_closed_form(0.0) == 0.0, "T(0) != 0");
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double v = 0.8 * i / 99.0;
    const auto o = c_eps_from_visibility(v);
    worst = std::max(worst, std::abs(tangle_from_rho(density_matrix(o.c, o.eps)) -
                                     tangle_closed_form(v)));
  }
  c.detail << "max |T_rho - T| " << worst;
  c.require(worst < 1e-9, "density-matrix tangle deviates");
}

void ac4(Check& c) {
  const double r = tangle_closed_form(0.95 * 0.8) / tangle_closed_form(0.8);
  c.detail << "T(0.95 v_id)/T(v_id) " << r;
  c.require(r < 0.9, "ratio not below 0.9");
}

void ac5(Check& c) {
  std::mt19937 rng(2024);
  double worst_4d = 0.0;
  double worst_freq = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SourceConfig src = random_source(rng);
    const auto ctx = AmplitudeContext::thin(src);
    const double tau = 0.15 * (i - 4.5) / 4.5;
    const Complex closed = compute_i_s(ctx, tau) / compute_i_n(ctx);
    const CrossTerm4D x = cross_term_4d(ctx, tau);
    const Complex four = x.value / x.norm_transmission;
    const double sf = src.filter.fwhm_sigma();
    const auto f = oracle::frequency_domain(oracle::thin_phi(src.pump_nu, sf),
                                            oracle::thin_phi(src.pump_mu, sf), tau,
                                            7.0 * sf / 2.3548, 401);
    const Complex freq = f.cross / f.norm;
    worst_4d = std::max(worst_4d, rel(four, closed));
    worst_freq = std::max(worst_freq, rel(freq, closed));
  }
  c.detail << "max rel 4-D time " << worst_4d << ", 4-D frequency " << worst_freq;
  c.require(worst_4d < 1e-5, "4-D time cross term disagrees");
  c.require(worst_freq < 1e-5, "frequency-domain oracle disagrees");
}

void ac6(Check& c) {
  std::mt19937 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SourceConfig src = random_source(rng);
    const double a = overlap_time_domain(src.pump_nu, src.pump_mu);
    const double b = overlap_frequency_domain(src.pump_nu, src.pump_mu);
    worst = std::max(worst, std::abs(a - b) / a);
  }
  const double sp = 8.0;
  const PumpSpectrum p(GaussianChirped{sp});
  const DetectionFilter f(2.0 * kLp, 20.0 * sp);
  const SourceConfig src{p, p, kLp, f, BeamSplitter{}};
  const double v0 = visibility(AmplitudeContext::thin(src), false, 0.0).v0;
  const double limit = overlap_infinite_filters(p, p, f);
  c.detail << "max rel Parseval " << worst << ", |v0 - overlap| " << std::abs(v0 - limit);
  c.require(worst < 1e-8, "Parseval forms disagree");
  c.require(std::abs(v0 - limit) < 1e-3, "large-filter visibility misses the overlap");
}

std::vector<double> curve(double pump_nu_nm, double ratio, const std::vector<double>& filters) {
  Experiment e;
  e.pump_nu_fwhm_nm = pump_nu_nm;
  e.pump_mu_ratio = ratio;
  const SweepResult r = run_sweep({SweepVariable::FilterFwhmNm, filters, e}, 4);
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back(row.result ? row.result->v0 : std::nan(""));
  return out;
}

void ac7(Check& c) {
  const std::vector<double> filters{0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0};
  std::vector<std::vector<double>> by_pump;
  for (double s : {1.0, 3.0, 5.0}) by_pump.push_back(curve(s, 1.0, filters));
  bool decreasing = true;
  bool ordered = true;
  for (const auto& k : by_pump) {
    for (std::size_t i = 1; i < k.size(); ++i) decreasing &= k[i] < k[i - 1];
  }
  for (std::size_t i = 0; i < filters.size(); ++i) {
    ordered &= by_pump[0][i] < by_pump[1][i] && by_pump[1][i] < by_pump[2][i];
  }
  std::vector<std::vector<double>> by_ratio;
  for (double r : {1.0, 2.0, 4.0, 0.25}) by_ratio.push_back(curve(3.0, r, filters));
  double spread = 0.0;
  bool quarter_lower = true;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const double hi = std::max({by_ratio[0][i], by_ratio[1][i], by_ratio[2][i]});
    const double lo = std::min({by_ratio[0][i], by_ratio[1][i], by_ratio[2][i]});
    spread = std::max(spread, hi - lo);
    quarter_lower &= by_ratio[3][i] < lo;
  }
  c.detail << "ratio {1,2,4} spread " << spread;
  c.require(decreasing, "v0 not decreasing in filter bandwidth");
  c.require(ordered, "curves not ordered by pump bandwidth");
  c.require(spread < 0.05, "ratio curves spread beyond 0.05");
  c.require(quarter_lower, "ratio 1/4 curve not lower");
}

void ac8(Check& c) {
  const MaterialLibrary lib = MaterialLibrary::load(MaterialLibrary::default_path());
  const SourceConfig src = gaussian_source(5.0, 5.0, 2.0);
  const FilteredProfile F = make_filtered_profile(src.pump_nu, src.filter);
  const double d2 = src.filter.delta0_sq();
  double worst_g = 0.0;
  for (const auto& name : lib.names()) {
    const CrystalSpec s = CrystalSpec::make(lib.get(name), 0.001, kLp);
    for (double t : {-0.2, 0.0, 0.15}) {
      for (double tp : {-0.3, 0.0, 0.25}) {
        const Complex thin = F(t) * std::exp(-4.0 * d2 * tp * tp);
        worst_g = std::max(worst_g, rel(g_profile(F, s, d2, t, tp), thin));
      }
    }
  }
  double worst_alpha = 0.0;
  for (const auto& name : lib.names()) {
    const Material& m = lib.get(name);
    const PhaseMatching one = alphas(m, 1.0, kLp);
    for (double L : {0.5, 2.0, 4.0, 8.0}) {
      const PhaseMatching a = alphas(m, L, kLp);
      worst_alpha = std::max({worst_alpha, std::abs(a.alpha_p - L * one.alpha_p) / std::abs(a.alpha_p),
                              std::abs(a.alpha_minus - L * one.alpha_minus) / std::abs(a.alpha_minus),
                              std::abs(a.alpha_minus / a.alpha_p - one.alpha_minus / one.alpha_p) /
                                  std::abs(one.alpha_minus / one.alpha_p)});
    }
  }
  const double thin = visibility(AmplitudeContext::thin(src)).v0;
  bool lbo_above = true;
  double worst_bbo = 0.0;
  std::ostringstream values;
  for (double L : {1.0, 2.0, 3.0, 4.0}) {
    const CrystalSpec b = CrystalSpec::make(lib.get("BBO"), L, kLp);
    const CrystalSpec l = CrystalSpec::make(lib.get("LBO"), L, kLp);
    const double vb = finite_crystal_visibility(src, b, b).v0;
    if (L != 3.0) {
      const double vl = finite_crystal_visibility(src, l, l).v0;
      lbo_above &= vl >= vb;
      values << " L" << L << " BBO " << vb << " LBO " << vl << ";";
    }
    if (L >= 2.0) worst_bbo = std::max(worst_bbo, std::abs(vb - thin));
  }
  c.detail << "g rel " << worst_g << ", alpha rel " << worst_alpha << ", max |BBO - thin| "
           << worst_bbo << ";" << values.str();
  c.require(worst_g < 1e-4, "g_profile misses the thin form");
  c.require(worst_alpha < 1e-12, "alphas not linear in length");
  c.require(lbo_above, "LBO below BBO");
  c.require(worst_bbo < 0.02, "BBO at 2-4 mm departs from thin by 0.02 or more");
}

void ac9(Check& c) {
  const auto ctx = AmplitudeContext::thin(gaussian_source(5.0, 5.0, 2.0));
  const double fixed = visibility(ctx).v;
  const double zero = jitter_averaged_visibility(ctx, 0.0);
  std::vector<double> vs;
  for (double rms : {0.02, 0.05, 0.1, 0.2, 0.4}) vs.push_back(jitter_averaged_visibility(ctx, rms));
  bool decreasing = fixed > vs[0];
  for (std::size_t i = 1; i < vs.size(); ++i) decreasing &= vs[i] < vs[i - 1];
  c.detail << "|v(0) - v| " << std::abs(zero - fixed) << ", v at 0.4 ps " << vs.back();
  c.require(std::abs(zero - fixed) < 1e-10, "zero-RMS average differs");
  c.require(decreasing, "average not strictly decreasing in RMS");
}

void ac10(Check& c) {
  const double d2 = DetectionFilter(2.0 * kLp, 5.0).delta0_sq();
  const auto g = FilteredProfile::gaussian(1.0, 4.0 * d2, 0.0);
  const double fixed_point = max_visibility_residual(g, g, d2, default_residual_probes(g, g));
  const DetectionFilter f(2.0 * kLp, 5.0);
  const PumpSpectrum p(GaussianChirped{f.fwhm_sigma() / 5.0});
  const auto F = make_filtered_profile(p, f);
  const double narrow = max_visibility_residual(F, F, d2, default_residual_probes(F, F));
  const double v0 = visibility(AmplitudeContext::thin({p, p, kLp, f, BeamSplitter{}})).v0;
  c.detail << "fixed-point residual " << fixed_point << ", narrow-pump residual " << narrow
           << ", v0 " << v0;
  c.require(fixed_point < 1e-6, "Gaussian fixed point residual too large");
  c.require(narrow > 0.05, "narrow-pump residual not above 0.05");
  c.require(v0 < 0.9, "narrow-pump v0 not below 0.9");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"AC1 gate prefactor and ideal visibility", ac1},
      {"AC2 perfect-visibility limit", ac2},
      {"AC3 tangle closed form", ac3},
      {"AC4 entanglement sensitivity", ac4},
      {"AC5 oracle equivalence", ac5},
      {"AC6 Parseval and large-filter limit", ac6},
      {"AC7 filter-bandwidth trends", ac7},
      {"AC8 crystal suite", ac8},
      {"AC9 jitter averaging", ac9},
      {"AC10 maximum-visibility residual", ac10},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s (%.1f s): %s\n", c.ok ? "PASS" : "FAIL", name, dt, c.detail.str().c_str());
    std::fflush(stdout);
    failed += c.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
