#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rydar/constants.hpp"
#include "rydar/errors.hpp"

namespace rydar {

enum class UnitMode { Normalized, Si };

// Laser drive and scan parameters of the vapor-cell receiver.
struct AtomicParams {
  double probe_rabi = 1.0;      // rad/s
  double coupling_rabi = 1.0;   // rad/s
  double dipole_moment = 1.0;   // C*m in Si mode, dimensionless in Normalized
  UnitMode units = UnitMode::Normalized;
  double scan_ratio = 1.0;      // splitting-per-Rabi scale factor
  double center_freq = 0.0;     // Hz, scan origin of the tracked peak
  double linewidth = 1e6;       // Hz, FWHM of one transmission peak

  double hbar() const { return units == UnitMode::Si ? hbar_si : 1.0; }
  double dipole_over_hbar() const { return dipole_moment / hbar(); }

  void validate() const {
    if (!(probe_rabi > 0.0) || !std::isfinite(probe_rabi))
      throw DomainError("probe_rabi must be positive");
    if (coupling_rabi < 0.0 || !std::isfinite(coupling_rabi))
      throw DomainError("coupling_rabi must be non-negative");
    if (!(dipole_moment > 0.0) || !std::isfinite(dipole_moment))
      throw DomainError("dipole_moment must be positive");
    if (!(scan_ratio > 0.0) || !std::isfinite(scan_ratio))
      throw DomainError("scan_ratio must be positive");
    if (!(linewidth > 0.0) || !std::isfinite(linewidth))
      throw DomainError("linewidth must be positive");
    if (!std::isfinite(center_freq))
      throw DomainError("center_freq must be finite");
  }
};

// Rabi frequency of an RF field of amplitude e_field.
inline double rabi_from_field(double e_field, const AtomicParams& p) {
  p.validate();
  if (e_field < 0.0 || !std::isfinite(e_field))
    throw DomainError("field amplitude must be non-negative");
  return p.dipole_over_hbar() * e_field;
}

// Peak-to-peak splitting of the transmission doublet for a drive of the
// given Rabi frequency, reduced by the scan ratio.
inline double at_splitting(double rabi, double scan_ratio = 1.0) {
  if (rabi < 0.0 || !std::isfinite(rabi))
    throw DomainError("rabi frequency must be non-negative");
  if (!(scan_ratio > 0.0) || !std::isfinite(scan_ratio))
    throw DomainError("scan ratio must be positive");
  return scan_ratio * rabi / two_pi;
}

// Magnitude of the probe-transmission curvature at the tracked peak,
// k0 = probe^2 / (2 probe^2 + coupling^2)^2.
inline double slope_k0(const AtomicParams& p) {
  p.validate();
  const double op2 = p.probe_rabi * p.probe_rabi;
  const double oc2 = p.coupling_rabi * p.coupling_rabi;
  const double d = 2.0 * op2 + oc2;
  return op2 / (d * d);
}

struct GridSpec {
  double f_min = 0.0;  // Hz
  double f_max = 0.0;  // Hz
  std::size_t n_points = 0;
};

struct SpectrumOptions {
  double peak_separation = 0.0;   // Hz between doublet peaks; 0 = 20 linewidths
  double linear_fraction = 0.01;  // max |peak shift| as a fraction of linewidth
};

// Transmission doublet: two Lorentzian peaks with a common amplitude chosen
// so the total curvature at center_freq equals -k0 when the tracked peak is
// unshifted. evaluate/derivative are exact; the grid arrays are samples.
struct SpectrumProfile {
  double tracked_center = 0.0;   // Hz
  double partner_center = 0.0;   // Hz
  double half_width = 0.0;       // Hz, linewidth / 2
  double amplitude = 0.0;
  double peak_separation = 0.0;  // Hz
  std::vector<double> freq_grid;
  std::vector<double> p_out;

  double evaluate(double f) const {
    const double ut = f - tracked_center;
    const double up = f - partner_center;
    const double h2 = half_width * half_width;
    return amplitude * (h2 / (ut * ut + h2) + h2 / (up * up + h2));
  }

  double derivative(double f) const {
    const double ut = f - tracked_center;
    const double up = f - partner_center;
    const double h2 = half_width * half_width;
    const double dt = ut * ut + h2;
    const double dp = up * up + h2;
    return amplitude * (-2.0 * h2 * ut / (dt * dt) - 2.0 * h2 * up / (dp * dp));
  }
};

namespace detail {

// Second derivative of a unit-peak Lorentzian of half width h at distance d.
inline double lorentzian_curvature(double d, double h) {
  const double h2 = h * h;
  const double q = d * d + h2;
  return -2.0 * h2 * (h2 - 3.0 * d * d) / (q * q * q);
}

}  // namespace detail

// Models the transmission spectrum with the tracked peak displaced by
// peak_shift from its rest position at center_freq.
inline SpectrumProfile model_spectrum(const AtomicParams& p, double peak_shift,
                                      const GridSpec& grid,
                                      const SpectrumOptions& opts = {}) {
  p.validate();
  if (!std::isfinite(peak_shift))
    throw DomainError("peak_shift must be finite");
  if (opts.peak_separation < 0.0)
    throw DomainError("peak_separation must be non-negative");
  if (!(opts.linear_fraction > 0.0))
    throw DomainError("linear_fraction must be positive");
  if (std::abs(peak_shift) > opts.linear_fraction * p.linewidth)
    throw SaturationError("peak shift exceeds the linear readout range");
  if (!(grid.f_min < grid.f_max) || grid.n_points < 2)
    throw ConfigError("grid must be increasing with at least two points");
  if (grid.f_min > p.center_freq - 3.0 * p.linewidth ||
      grid.f_max < p.center_freq + 3.0 * p.linewidth)
    throw ConfigError("grid must cover center_freq plus/minus 3 linewidths");

  SpectrumProfile prof;
  prof.half_width = 0.5 * p.linewidth;
  prof.peak_separation =
      opts.peak_separation > 0.0 ? opts.peak_separation : 20.0 * p.linewidth;
  prof.tracked_center = p.center_freq + peak_shift;
  prof.partner_center = p.center_freq - prof.peak_separation;

  // Calibrate the common amplitude against the rest geometry so that the
  // unshifted curvature at center_freq is exactly -k0, partner tail included.
  const double h = prof.half_width;
  const double denom = 2.0 / (h * h) -
                       detail::lorentzian_curvature(prof.peak_separation, h);
  prof.amplitude = slope_k0(p) / denom;

  prof.freq_grid.resize(grid.n_points);
  prof.p_out.resize(grid.n_points);
  const double df = (grid.f_max - grid.f_min) /
                    static_cast<double>(grid.n_points - 1);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double f = grid.f_min + df * static_cast<double>(i);
    prof.freq_grid[i] = f;
    prof.p_out[i] = prof.evaluate(f);
  }
  return prof;
}

// First-harmonic synchronous detection of a sinusoidal probe-frequency
// dither: converges to dP/df at probe_freq as the dither shrinks.
inline double lia_gradient_readout(const SpectrumProfile& prof,
                                   double probe_freq, double dither_amplitude,
                                   std::size_t samples_per_period = 64) {
  if (!std::isfinite(probe_freq))
    throw DomainError("probe_freq must be finite");
  if (!(dither_amplitude > 0.0))
    throw PrecisionError("dither amplitude must be positive");
  if (dither_amplitude > 0.2 * prof.half_width)
    throw PrecisionError("dither amplitude above a tenth of the linewidth");
  if (samples_per_period < 64)
    throw PrecisionError("synchronous detection needs >= 64 samples/period");

  double acc = 0.0;
  const double n = static_cast<double>(samples_per_period);
  for (std::size_t i = 0; i < samples_per_period; ++i) {
    const double s = std::sin(two_pi * static_cast<double>(i) / n);
    acc += prof.evaluate(probe_freq + dither_amplitude * s) * s;
  }
  return 2.0 * acc / (n * dither_amplitude);
}

}  // namespace rydar
