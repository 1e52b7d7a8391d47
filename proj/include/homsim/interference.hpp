#pragma once

// Four-fold coincidence amplitude and Hong-Ou-Mandel visibility for two
// independent down-conversion sources meeting at a beam splitter.
//
// Photons 1, 2 come from source nu and 3, 4 from source mu; photons 2 and 3
// meet at the beam splitter. With the pair profile
// Q(a, b) = G((a + b)/2, (a - b)/2) of the detection times of the first
// (1 or 3) and second (2 or 4) photon of a pair,
//   A = |T|^2 Q_nu(t1, t2) Q_mu(t3, t4) - |R|^2 Q_nu(t1 - tau, t3) Q_mu(t2, t4 + tau).
// For a thin crystal G(t, t') = F(t) exp(-4 d0^2 t'^2).

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "homsim/crystal.hpp"
#include "homsim/quadrature.hpp"
#include "homsim/spectra.hpp"

namespace homsim {

enum class CrystalMode { ThinCrystal, FiniteCrystal };

class PairProfile {
 public:
  static PairProfile thin(FilteredProfile F, double delta0_sq);
  static PairProfile finite(FilteredProfile F, CrystalSpec crystal, double delta0_sq,
                            IntegrationSpec spec = {});

  /// Q(first, second).
  Complex operator()(double first, double second) const;
  /// G(t, t').
  Complex g(double t, double t_prime) const;

  CrystalMode mode() const { return mode_; }
  const FilteredProfile& profile() const { return F_; }
  const CrystalSpec& crystal() const { return crystal_; }
  double delta0_sq() const { return delta0_sq_; }

  /// Location and width of (a + b)/2.
  Axis sum_axis() const;
  /// Width of a - b.
  double difference_width() const;

  /// Profile of a pump delayed by dt.
  PairProfile shifted(double dt) const;

 private:
  PairProfile(FilteredProfile F, CrystalSpec crystal, double delta0_sq, CrystalMode mode,
              IntegrationSpec spec)
      : F_(std::move(F)), crystal_(std::move(crystal)), delta0_sq_(delta0_sq),
        mode_(mode), spec_(spec) {}

  FilteredProfile F_;
  CrystalSpec crystal_;
  double delta0_sq_;
  CrystalMode mode_;
  IntegrationSpec spec_;
};

struct AmplitudeContext {
  PairProfile nu;
  PairProfile mu;
  double delta0_sq;
  BeamSplitter beamsplitter;
  CrystalMode mode = CrystalMode::ThinCrystal;
  IntegrationSpec integration;

  static AmplitudeContext thin(const SourceConfig& source,
                               const IntegrationSpec& spec = {});
  static AmplitudeContext finite(const SourceConfig& source, const CrystalSpec& nu,
                                 const CrystalSpec& mu, const IntegrationSpec& spec = {});
  static AmplitudeContext from_profiles(FilteredProfile F_nu, FilteredProfile F_mu,
                                        double delta0_sq, BeamSplitter bs = {},
                                        const IntegrationSpec& spec = {});

  /// Throws ModeMismatch when the pair profiles disagree with `mode`.
  void validate() const;

  /// Context with pump mu delayed by dt.
  AmplitudeContext with_mu_delay(double dt) const;
  /// Context with the two sources exchanged.
  AmplitudeContext swapped() const;
};

/// A(t+^nu, t-^nu, t+^mu, t-^mu; tau) with t-^nu = t1 - t2 and t-^mu = t4 - t3.
Complex amplitude(const AmplitudeContext& ctx, double t_plus_nu, double t_minus_nu,
                  double t_plus_mu, double t_minus_mu, double tau);

/// Thin-crystal I_S(tau), including the sqrt(pi)/(2 d0) prefactor. Evaluated as
///   sqrt(pi)/(2 d0) integral dx1 conj(H(x1, tau)) H(x1, -tau),
///   H(x1, s) = integral dx F_nu((x1 + x)/2) F_mu((x1 - x)/2) exp(-2 d0^2 (x - s)^2).
/// Throws ModeMismatch in finite-crystal mode.
Complex compute_i_s(const AmplitudeContext& ctx, double tau);

/// No-interference norm: pi/(2 d0^2) int |F_nu|^2 int |F_mu|^2 (thin) or the
/// product of the two pair-profile norms (finite crystal).
double compute_i_n(const AmplitudeContext& ctx);

struct CrossTerm4D {
  Complex value;
  /// Integral of |transmission term|^2 and of |reflection term|^2.
  double norm_transmission = 0.0;
  double norm_reflection = 0.0;
  std::size_t grid_points = 0;
  double grid_step = 0.0;
};

/// Integral over t1..t4 of conj(transmission term) * reflection term, as a
/// trapezoid tensor grid refined until the change is below
/// relative_tolerance * norm.
CrossTerm4D cross_term_4d(const AmplitudeContext& ctx, double tau);
Complex compute_cross_term_4d(const AmplitudeContext& ctx, double tau);

struct VisibilityReport {
  Complex i_s_at_tau0;
  double i_n = 0.0;
  double tau0 = 0.0;
  double prefactor = 1.0;
  double v0 = 0.0;
  double v = 0.0;
  CrystalMode mode = CrystalMode::ThinCrystal;
};

VisibilityReport visibility(const AmplitudeContext& ctx, bool optimize_delay = true,
                            double tau_fixed = 0.0);

/// FWHM of the widest filtered profile, used to bracket the delay search.
double pulse_duration(const AmplitudeContext& ctx);

/// int |S~_nu(t)|^2 |S~_mu(t)|^2 dt.
double overlap_time_domain(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                           const IntegrationSpec& spec = {});
/// 2 pi int |(S_nu * S_mu)(nu0)|^2 dnu0; equal to the time-domain form.
double overlap_frequency_domain(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                                const IntegrationSpec& spec = {});
/// Large-filter limit of v0:
///   (sqrt(pi)/d0) overlap / (int |S~_nu|^2 int |S~_mu|^2).
double overlap_infinite_filters(const PumpSpectrum& p_nu, const PumpSpectrum& p_mu,
                                const DetectionFilter& filter,
                                const IntegrationSpec& spec = {});

/// max over probes of |LHS - RHS| / max |LHS| for
///   F_nu(x+y) F_mu(x-y) = (4 d0/sqrt(pi)) int dz exp(-8 d0^2 (y^2+z^2)) F_nu(x+z) F_mu(x-z).
double max_visibility_residual(const FilteredProfile& F_nu, const FilteredProfile& F_mu,
                               double delta0_sq,
                               const std::vector<std::pair<double, double>>& probes,
                               const IntegrationSpec& spec = {});
/// 9 x 9 probes on +-2 widths around the profile centers.
std::vector<std::pair<double, double>> default_residual_probes(
    const FilteredProfile& F_nu, const FilteredProfile& F_mu);

/// Gauss-Hermite average of v(T) over a zero-mean Gaussian delay T of pump mu
/// with the given RMS, at the delay that is optimal without jitter.
double jitter_averaged_visibility(const AmplitudeContext& ctx, double jitter_rms,
                                  std::size_t n_samples = 24);

}  // namespace homsim
