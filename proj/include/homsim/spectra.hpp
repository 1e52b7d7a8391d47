#pragma once

// Pump spectra, detection filters and the filtered time-domain pump profile
// F(t) = integral of S~(t') exp(-4 d0^2 (t - t')^2) dt'.
//
// Units: time in ps, angular frequency in rad/ps. Wavelengths (nm) appear
// only at the interface. Fourier convention: S~(t) = integral of
// S(nu) exp(-i nu t) dnu.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "homsim/quadrature.hpp"

namespace homsim {

/// Speed of light in nm/ps.
inline constexpr double kSpeedOfLight = 2.99792458e5;

/// FWHM in wavelength -> FWHM in angular frequency, 2 pi c dl / l^2.
/// Throws NonPhysical unless 0 < fwhm_nm < center_nm / 2.
double nm_fwhm_to_angular(double fwhm_nm, double center_nm);
double angular_fwhm_to_nm(double fwhm_angular, double center_nm);

/// exp(-4 ln2 (nu / fwhm)^2) exp(i (phi1 nu + phi2 nu^2)).
struct GaussianChirped {
  double fwhm_sigma_nu = 1.0;  // rad/ps
  double phi1 = 0.0;           // ps
  double phi2 = 0.0;           // ps^2

  /// 1/(4 a) with a = 4 ln2 / fwhm^2 - i phi2.
  Complex gamma() const;
};

/// Complex spectral amplitude sampled on a uniform detuning grid, cubically
/// interpolated inside the grid and zero outside it.
class TabulatedSpectrum {
 public:
  TabulatedSpectrum(double first_detuning, double step,
                    std::vector<Complex> samples);

  /// Text file with columns detuning_rad_per_ps real [imag]; '#' comments.
  static TabulatedSpectrum load(const std::string& path);

  static TabulatedSpectrum sample(const std::function<Complex(double)>& s,
                                  double first_detuning, double step,
                                  std::size_t count);

  Complex operator()(double nu) const;
  Complex derivative(double nu) const;

  double first() const { return first_; }
  double last() const { return first_ + step_ * static_cast<double>(samples_.size() - 1); }
  double step() const { return step_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<Complex>& samples() const { return samples_; }

 private:
  struct Splines;
  double first_ = 0.0;
  double step_ = 1.0;
  std::vector<Complex> samples_;
  std::shared_ptr<const Splines> splines_;
};

class PumpSpectrum {
 public:
  PumpSpectrum(GaussianChirped g);
  PumpSpectrum(TabulatedSpectrum t);

  const GaussianChirped* gaussian() const { return std::get_if<GaussianChirped>(&repr_); }
  const TabulatedSpectrum* tabulated() const { return std::get_if<TabulatedSpectrum>(&repr_); }

  Complex amplitude(double nu) const;
  Complex amplitude_derivative(double nu) const;

  /// Detuning interval that carries the spectrum (grid span or +-K widths).
  std::pair<double, double> support(const IntegrationSpec& spec) const;

  /// Time centroid of |S~(t)|^2 and the RMS width of |S~(t)| as an amplitude
  /// Gaussian exp(-t^2 / 2w^2).
  Axis time_axis(const IntegrationSpec& spec = {}) const;

  /// Spectrum with every amplitude conjugated.
  PumpSpectrum conjugated() const;

 private:
  std::variant<GaussianChirped, TabulatedSpectrum> repr_;
};

class DetectionFilter {
 public:
  DetectionFilter(double center_wavelength_nm, double fwhm_sigma);
  static DetectionFilter from_nm(double center_wavelength_nm, double fwhm_nm);

  double center_wavelength_nm() const { return center_nm_; }
  double fwhm_sigma() const { return fwhm_; }
  /// sigma^2 / (32 ln 2).
  double delta0_sq() const { return delta0_sq_; }
  double delta0() const;
  /// Amplitude transmission exp(-4 ln2 (detuning / sigma)^2).
  double amplitude(double detuning) const;

 private:
  double center_nm_;
  double fwhm_;
  double delta0_sq_;
};

struct BeamSplitter {
  Complex t{std::sqrt(0.5), 0.0};
  Complex r{std::sqrt(0.5), 0.0};

  /// Real amplitudes with |t|^2 = transmittance.
  static BeamSplitter from_transmittance(double transmittance);
  void validate() const;
  /// 2 |t r|^2 / (|t|^4 + |r|^4).
  double prefactor() const;
  bool is_gate_splitter(double tol = 1e-9) const;
};

struct SourceConfig {
  PumpSpectrum pump_nu;
  PumpSpectrum pump_mu;
  double pump_center_wavelength_nm = 400.0;
  DetectionFilter filter;
  BeamSplitter beamsplitter;

  void validate() const;
};

/// S~(t); closed form for Gaussian spectra, quadrature otherwise.
Complex pump_time_profile(const PumpSpectrum& p, double t,
                          const IntegrationSpec& spec = {});

/// F(t). Gaussian spectra use the closed form
///   F(t) = exp(-4 d0^2 g (t - phi1)^2 / (g + 4 d0^2)) / sqrt(g + 4 d0^2).
/// Tabulated spectra evaluate the convolution in the frequency domain and
/// divide by sqrt(pi) S~(t_c), t_c the centroid of |S~|^2; for a Gaussian
/// spectrum this reproduces the closed form exactly.
Complex filtered_profile_F(const PumpSpectrum& p, const DetectionFilter& f,
                           double t, const IntegrationSpec& spec = {});

/// Callable one-argument profile with a declared axis, shift and scale.
class FilteredProfile {
 public:
  /// amplitude * exp(-exponent (t - center)^2)
  static FilteredProfile gaussian(Complex amplitude, Complex exponent,
                                  double center);
  static FilteredProfile from_function(std::function<Complex(double)> f,
                                       Axis axis);
  static FilteredProfile sampled(std::vector<Complex> values, double first_time,
                                 double step, Axis axis);

  Complex operator()(double t) const;
  Axis axis() const;

  FilteredProfile shifted(double dt) const;
  FilteredProfile scaled(Complex k) const;

 private:
  struct Gaussian {
    Complex amplitude;
    Complex exponent;
    double center;
  };
  struct Sampled;
  using Repr = std::variant<Gaussian, std::function<Complex(double)>,
                            std::shared_ptr<const Sampled>>;

  FilteredProfile(Repr repr, Axis axis) : repr_(std::move(repr)), axis_(axis) {}
  Complex eval_unshifted(double t) const;

  Repr repr_;
  Axis axis_;
  double shift_ = 0.0;
  Complex scale_{1.0, 0.0};
};

/// Closed form for Gaussian pumps; for tabulated pumps the slow path is
/// sampled densely once and cubically interpolated.
FilteredProfile make_filtered_profile(const PumpSpectrum& p,
                                      const DetectionFilter& f,
                                      const IntegrationSpec& spec = {});

}  // namespace homsim
