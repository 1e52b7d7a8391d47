#include "homsim/spectra.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <fstream>
#include <numbers>
#include <sstream>

namespace homsim {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

struct ComplexSpline {
  Spline re;
  Spline im;

  ComplexSpline(const std::vector<Complex>& v, double first, double step)
      : re(make(v, first, step, [](Complex z) { return z.real(); })),
        im(make(v, first, step, [](Complex z) { return z.imag(); })) {}

  Complex value(double x) const { return {re(x), im(x)}; }
  Complex prime(double x) const { return {re.prime(x), im.prime(x)}; }

  template <class Part>
  static Spline make(const std::vector<Complex>& v, double first, double step,
                     Part part) {
    std::vector<double> y(v.size());
    std::transform(v.begin(), v.end(), y.begin(), part);
    return Spline(y.begin(), y.end(), first, step);
  }
};

std::vector<double> knots(double first, double step, std::size_t n) {
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = first + step * static_cast<double>(i);
  return k;
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << x;
    fail(ErrorKind::NonPhysical, msg.str());
  }
}

// Integral over the pump spectrum support of g(nu); tabulated spectra get
// one initial subinterval per grid cell.
template <class G>
Complex integrate_spectrum(const PumpSpectrum& p, G&& g,
                           const IntegrationSpec& spec) {
  if (const auto* tab = p.tabulated()) {
    const auto k = knots(tab->first(), tab->step(), tab->size());
    return integrate_breakpoints(g, std::span<const double>(k), spec);
  }
  const auto [lo, hi] = p.support(spec);
  return integrate_interval(g, lo, hi, spec);
}

struct SlowPathNorm {
  double centroid = 0.0;
  Complex scale;  // 1 / (sqrt(pi) S~(t_c))
};

SlowPathNorm slow_path_norm(const PumpSpectrum& p, const IntegrationSpec& spec) {
  SlowPathNorm n;
  n.centroid = p.time_axis(spec).center;
  const Complex s = pump_time_profile(p, n.centroid, spec);
  if (std::abs(s) == 0.0) {
    fail(ErrorKind::NumericalFailure, "pump time profile vanishes at its centroid");
  }
  n.scale = 1.0 / (std::sqrt(kPi) * s);
  return n;
}

Complex slow_path_F(const PumpSpectrum& p, double b, double t,
                    const SlowPathNorm& norm, const IntegrationSpec& spec) {
  auto g = [&](double nu) {
    return p.amplitude(nu) * std::exp(Complex(-nu * nu / (4.0 * b), -nu * t));
  };
  return std::sqrt(kPi / b) * integrate_spectrum(p, g, spec) * norm.scale;
}

}  // namespace

double nm_fwhm_to_angular(double fwhm_nm, double center_nm) {
  require_positive(fwhm_nm, "bandwidth (nm)");
  require_positive(center_nm, "center wavelength (nm)");
  if (fwhm_nm >= 0.5 * center_nm) {
    std::ostringstream msg;
    msg << "bandwidth " << fwhm_nm << " nm is not small against the center "
        << center_nm << " nm";
    fail(ErrorKind::NonPhysical, msg.str());
  }
  return 2.0 * kPi * kSpeedOfLight * fwhm_nm / (center_nm * center_nm);
}

double angular_fwhm_to_nm(double fwhm_angular, double center_nm) {
  require_positive(fwhm_angular, "bandwidth (rad/ps)");
  require_positive(center_nm, "center wavelength (nm)");
  return fwhm_angular * center_nm * center_nm / (2.0 * kPi * kSpeedOfLight);
}

Complex GaussianChirped::gamma() const {
  const Complex a(4.0 * kLn2 / (fwhm_sigma_nu * fwhm_sigma_nu), -phi2);
  return 1.0 / (4.0 * a);
}

struct TabulatedSpectrum::Splines : ComplexSpline {
  using ComplexSpline::ComplexSpline;
};

TabulatedSpectrum::TabulatedSpectrum(double first_detuning, double step,
                                     std::vector<Complex> samples)
    : first_(first_detuning), step_(step), samples_(std::move(samples)) {
  if (!(step_ > 0.0) || !std::isfinite(step_) || !std::isfinite(first_)) {
    fail(ErrorKind::InvalidArgument, "tabulated spectrum needs a finite positive step");
  }
  if (samples_.size() < 16) {
    fail(ErrorKind::InvalidArgument, "tabulated spectrum needs at least 16 points");
  }
  double peak = 0.0;
  for (const Complex& z : samples_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      fail(ErrorKind::InvalidArgument, "tabulated spectrum has a non-finite sample");
    }
    peak = std::max(peak, std::abs(z));
  }
  if (peak == 0.0) fail(ErrorKind::InvalidArgument, "tabulated spectrum is identically zero");
  const double edge = std::max(std::abs(samples_.front()), std::abs(samples_.back()));
  if (edge >= 1e-3 * peak) {
    std::ostringstream msg;
    msg << "tabulated spectrum does not decay at its edges (|edge|/|max| = "
        << edge / peak << ", need < 1e-3)";
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  splines_ = std::make_shared<const Splines>(samples_, first_, step_);
}

TabulatedSpectrum TabulatedSpectrum::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open spectrum file '" + path + "'");
  std::vector<double> nu;
  std::vector<Complex> amp;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::vector<double> cols;
    double x = 0.0;
    while (row >> x) cols.push_back(x);
    if (!row.eof()) {
      fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": not a number");
    }
    if (cols.empty()) continue;
    if (cols.size() < 2 || cols.size() > 3) {
      fail(ErrorKind::Config, path + ":" + std::to_string(lineno) +
                                  ": expected 2 or 3 columns");
    }
    nu.push_back(cols[0]);
    amp.emplace_back(cols[1], cols.size() == 3 ? cols[2] : 0.0);
  }
  if (nu.size() < 2) fail(ErrorKind::Config, path + ": too few samples");
  const double step = (nu.back() - nu.front()) / static_cast<double>(nu.size() - 1);
  for (std::size_t i = 1; i < nu.size(); ++i) {
    const double d = nu[i] - nu[i - 1];
    if (!(d > 0.0)) fail(ErrorKind::Config, path + ": detuning grid not strictly increasing");
    if (std::abs(d - step) > 1e-6 * step) {
      fail(ErrorKind::Config, path + ": detuning grid is not uniform");
    }
  }
  try {
    return TabulatedSpectrum(nu.front(), step, std::move(amp));
  } catch (const Error& e) {
    fail(ErrorKind::Config, path + ": " + e.what());
  }
}

TabulatedSpectrum TabulatedSpectrum::sample(const std::function<Complex(double)>& s,
                                            double first_detuning, double step,
                                            std::size_t count) {
  std::vector<Complex> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = s(first_detuning + step * static_cast<double>(i));
  }
  return TabulatedSpectrum(first_detuning, step, std::move(v));
}

Complex TabulatedSpectrum::operator()(double nu) const {
  if (nu < first_ || nu > last()) return {};
  return splines_->value(nu);
}

Complex TabulatedSpectrum::derivative(double nu) const {
  if (nu < first_ || nu > last()) return {};
  return splines_->prime(nu);
}

PumpSpectrum::PumpSpectrum(GaussianChirped g) : repr_(g) {
  require_positive(g.fwhm_sigma_nu, "pump fwhm_sigma_nu");
  if (!std::isfinite(g.phi1) || !std::isfinite(g.phi2)) {
    fail(ErrorKind::InvalidArgument, "pump chirp coefficients must be finite");
  }
}

PumpSpectrum::PumpSpectrum(TabulatedSpectrum t) : repr_(std::move(t)) {}

Complex PumpSpectrum::amplitude(double nu) const {
  if (const auto* g = gaussian()) {
    const double s = g->fwhm_sigma_nu;
    return std::exp(Complex(-4.0 * kLn2 * nu * nu / (s * s),
                            g->phi1 * nu + g->phi2 * nu * nu));
  }
  return (*tabulated())(nu);
}

Complex PumpSpectrum::amplitude_derivative(double nu) const {
  if (const auto* g = gaussian()) {
    const double s = g->fwhm_sigma_nu;
    const Complex log_prime(-8.0 * kLn2 * nu / (s * s), g->phi1 + 2.0 * g->phi2 * nu);
    return log_prime * amplitude(nu);
  }
  return tabulated()->derivative(nu);
}

std::pair<double, double> PumpSpectrum::support(const IntegrationSpec& spec) const {
  if (const auto* g = gaussian()) {
    const double half = spec.truncation_sigmas * g->fwhm_sigma_nu / std::sqrt(8.0 * kLn2);
    return {-half, half};
  }
  return {tabulated()->first(), tabulated()->last()};
}

Axis PumpSpectrum::time_axis(const IntegrationSpec& spec) const {
  if (const auto* g = gaussian()) {
    return {g->phi1, 1.0 / std::sqrt(2.0 * g->gamma().real())};
  }
  const double norm = integrate_spectrum(
      *this, [&](double nu) { return Complex(std::norm(amplitude(nu))); }, spec).real();
  const double first = integrate_spectrum(
      *this,
      [&](double nu) {
        return Complex(0.0, -1.0) * std::conj(amplitude(nu)) * amplitude_derivative(nu);
      },
      spec).real() / norm;
  const double second = integrate_spectrum(
      *this, [&](double nu) { return Complex(std::norm(amplitude_derivative(nu))); },
      spec).real() / norm;
  const double var = second - first * first;
  if (!(var > 0.0)) fail(ErrorKind::NumericalFailure, "pump duration is not positive");
  return {first, std::sqrt(2.0 * var)};
}

PumpSpectrum PumpSpectrum::conjugated() const {
  if (const auto* g = gaussian()) {
    return GaussianChirped{g->fwhm_sigma_nu, -g->phi1, -g->phi2};
  }
  const auto* t = tabulated();
  std::vector<Complex> v(t->samples());
  for (Complex& z : v) z = std::conj(z);
  return TabulatedSpectrum(t->first(), t->step(), std::move(v));
}

DetectionFilter::DetectionFilter(double center_wavelength_nm, double fwhm_sigma)
    : center_nm_(center_wavelength_nm),
      fwhm_(fwhm_sigma),
      delta0_sq_(fwhm_sigma * fwhm_sigma / (32.0 * kLn2)) {
  require_positive(center_nm_, "filter center wavelength (nm)");
  require_positive(fwhm_, "filter fwhm_sigma");
}

DetectionFilter DetectionFilter::from_nm(double center_wavelength_nm, double fwhm_nm) {
  return DetectionFilter(center_wavelength_nm,
                         nm_fwhm_to_angular(fwhm_nm, center_wavelength_nm));
}

double DetectionFilter::delta0() const { return std::sqrt(delta0_sq_); }

double DetectionFilter::amplitude(double detuning) const {
  return std::exp(-4.0 * kLn2 * detuning * detuning / (fwhm_ * fwhm_));
}

BeamSplitter BeamSplitter::from_transmittance(double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    fail(ErrorKind::NonPhysical, "beam-splitter transmittance must lie in [0, 1]");
  }
  return {Complex(std::sqrt(transmittance)), Complex(std::sqrt(1.0 - transmittance))};
}

void BeamSplitter::validate() const {
  const double sum = std::norm(t) + std::norm(r);
  if (!(std::abs(sum - 1.0) <= 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "beam splitter is not lossless: |t|^2 + |r|^2 = " << sum;
    fail(ErrorKind::NonPhysical, msg.str());
  }
}

double BeamSplitter::prefactor() const {
  const double tt = std::norm(t);
  const double rr = std::norm(r);
  return 2.0 * tt * rr / (tt * tt + rr * rr);
}

bool BeamSplitter::is_gate_splitter(double tol) const {
  return std::abs(std::norm(t) - 1.0 / 3.0) <= tol;
}

void SourceConfig::validate() const {
  beamsplitter.validate();
  require_positive(pump_center_wavelength_nm, "pump center wavelength (nm)");
  const double expected = 2.0 * pump_center_wavelength_nm;
  if (std::abs(filter.center_wavelength_nm() - expected) > 1e-9 * expected) {
    std::ostringstream msg;
    msg << "filter center " << filter.center_wavelength_nm()
        << " nm must be twice the pump center (" << expected << " nm)";
    fail(ErrorKind::NonPhysical, msg.str());
  }
}

Complex pump_time_profile(const PumpSpectrum& p, double t, const IntegrationSpec& spec) {
  if (const auto* g = p.gaussian()) {
    const Complex gam = g->gamma();
    const double dt = t - g->phi1;
    return std::sqrt(4.0 * kPi * gam) * std::exp(-gam * dt * dt);
  }
  auto f = [&](double nu) { return p.amplitude(nu) * std::exp(Complex(0.0, -nu * t)); };
  return integrate_spectrum(p, f, spec);
}

Complex filtered_profile_F(const PumpSpectrum& p, const DetectionFilter& f, double t,
                           const IntegrationSpec& spec) {
  const double b = 4.0 * f.delta0_sq();
  if (const auto* g = p.gaussian()) {
    const Complex gam = g->gamma();
    const double dt = t - g->phi1;
    return std::exp(-b * gam * dt * dt / (gam + b)) / std::sqrt(gam + b);
  }
  return slow_path_F(p, b, t, slow_path_norm(p, spec), spec);
}

struct FilteredProfile::Sampled : ComplexSpline {
  Sampled(const std::vector<Complex>& v, double first, double step)
      : ComplexSpline(v, first, step),
        first(first),
        last(first + step * static_cast<double>(v.size() - 1)) {}
  double first;
  double last;
};

FilteredProfile FilteredProfile::gaussian(Complex amplitude, Complex exponent,
                                          double center) {
  if (!(exponent.real() > 0.0)) {
    fail(ErrorKind::InvalidArgument, "Gaussian profile needs Re(exponent) > 0");
  }
  const Axis axis{center, 1.0 / std::sqrt(2.0 * exponent.real())};
  return FilteredProfile(Gaussian{amplitude, exponent, center}, axis);
}

FilteredProfile FilteredProfile::from_function(std::function<Complex(double)> f,
                                               Axis axis) {
  if (!f) fail(ErrorKind::InvalidArgument, "empty profile function");
  if (!(axis.width > 0.0)) fail(ErrorKind::InvalidArgument, "profile width must be > 0");
  return FilteredProfile(std::move(f), axis);
}

FilteredProfile FilteredProfile::sampled(std::vector<Complex> values, double first_time,
                                         double step, Axis axis) {
  if (values.size() < 4 || !(step > 0.0)) {
    fail(ErrorKind::InvalidArgument, "sampled profile needs >= 4 points and step > 0");
  }
  if (!(axis.width > 0.0)) fail(ErrorKind::InvalidArgument, "profile width must be > 0");
  return FilteredProfile(std::make_shared<const Sampled>(values, first_time, step), axis);
}

Complex FilteredProfile::eval_unshifted(double t) const {
  if (const auto* g = std::get_if<Gaussian>(&repr_)) {
    const double dt = t - g->center;
    return g->amplitude * std::exp(-g->exponent * dt * dt);
  }
  if (const auto* f = std::get_if<std::function<Complex(double)>>(&repr_)) {
    return (*f)(t);
  }
  const auto& s = *std::get<std::shared_ptr<const Sampled>>(repr_);
  if (t < s.first || t > s.last) return {};
  return s.value(t);
}

Complex FilteredProfile::operator()(double t) const {
  return scale_ * eval_unshifted(t - shift_);
}

Axis FilteredProfile::axis() const { return {axis_.center + shift_, axis_.width}; }

FilteredProfile FilteredProfile::shifted(double dt) const {
  FilteredProfile out = *this;
  out.shift_ += dt;
  return out;
}

FilteredProfile FilteredProfile::scaled(Complex k) const {
  FilteredProfile out = *this;
  out.scale_ *= k;
  return out;
}

FilteredProfile make_filtered_profile(const PumpSpectrum& p, const DetectionFilter& f,
                                      const IntegrationSpec& spec) {
  const double b = 4.0 * f.delta0_sq();
  if (const auto* g = p.gaussian()) {
    const Complex gam = g->gamma();
    return FilteredProfile::gaussian(1.0 / std::sqrt(gam + b), b * gam / (gam + b),
                                     g->phi1);
  }
  const Axis pump = p.time_axis(spec);
  const double kernel = 1.0 / std::sqrt(2.0 * b);
  const Axis axis{pump.center, std::hypot(pump.width, kernel)};
  const SlowPathNorm norm = slow_path_norm(p, spec);

  const double half = 12.0 * axis.width;
  const double step = axis.width / 32.0;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / step)) + 1;
  const double first = axis.center - half;
  std::vector<Complex> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = slow_path_F(p, b, first + step * static_cast<double>(i), norm, spec);
  }
  return FilteredProfile::sampled(std::move(values), first, step, axis);
}

}  // namespace homsim
