#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "rydar/atomic.hpp"
#include "rydar/constants.hpp"
#include "rydar/errors.hpp"
#include "rydar/rng.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

// One RF field: amplitude, phase, angular carrier frequency.
struct RfTone {
  double amplitude = 0.0;  // field units (V/m in Si mode)
  double phase = 0.0;      // rad, normalized to (-pi, pi]
  double omega = 0.0;      // rad/s

  RfTone() = default;
  RfTone(double amp, double ph, double w) : amplitude(amp), phase(ph),
                                            omega(w) {
    if (amplitude < 0.0 || !std::isfinite(amplitude))
      throw DomainError("tone amplitude must be non-negative");
    if (!std::isfinite(phase)) throw DomainError("tone phase must be finite");
    if (omega < 0.0 || !std::isfinite(omega))
      throw DomainError("tone frequency must be non-negative");
    phase = std::remainder(phase, two_pi);
    if (phase <= -pi) phase += two_pi;
  }
};

// Gaussian noise levels of the receiver chain. sigma_psn scales the readout
// slope (multiplicative); sigma_bgn and sigma_qpn add to the sensed field.
struct NoiseParams {
  double sigma_psn = 0.0;  // dimensionless slope jitter
  double sigma_bgn = 0.0;  // field units
  double sigma_qpn = 0.0;  // field units
  std::uint64_t seed = 0;

  void validate() const {
    if (sigma_psn < 0.0 || sigma_bgn < 0.0 || sigma_qpn < 0.0)
      throw DomainError("noise sigmas must be non-negative");
  }
};

// Identifies which draw-stream and sample a measurement consumes, so that
// repeated calls are reproducible and order-independent.
struct NoiseContext {
  std::uint64_t stream = 0;
  std::uint64_t sample_index = 0;
};

struct FrontendOptions {
  double ratio_min = 10.0;              // min LO/RF amplitude ratio
  double linear_fraction = 0.01;        // max peak shift vs linewidth
  double inst_bandwidth_limit = 10e6;   // Hz
  double retune_latency = 1e-3;         // s of blanking after a retune
  double field_scale = 1.0;             // field units per unit sample
};

// Coherent LO + RF superposition. With the LO much stronger than the RF,
// the envelope reduces to lo.amplitude + rf.amplitude*cos(phase difference).
inline double superpose_lo(const RfTone& rf, const RfTone& lo,
                           double ratio_min = 10.0) {
  if (!(ratio_min > 0.0)) throw DomainError("ratio_min must be positive");
  const double scale = std::max(rf.omega, lo.omega);
  if (std::abs(rf.omega - lo.omega) > 1e-12 * std::max(scale, 1.0))
    throw HomodyneError("LO and RF must share the carrier frequency");
  if (lo.amplitude < ratio_min * rf.amplitude)
    throw LoRatioError("LO amplitude below ratio_min times the RF amplitude");
  return lo.amplitude + rf.amplitude * std::cos(rf.phase - lo.phase);
}

namespace detail {

inline constexpr std::uint64_t psn_component = 1;
inline constexpr std::uint64_t bgn_component = 2;
inline constexpr std::uint64_t qpn_component = 3;

inline std::uint64_t noise_stream(std::uint64_t base, std::uint64_t branch,
                                  std::uint64_t component) {
  return hash_combine(hash_combine(base, branch), component);
}

// Shared linear-readout checks; returns the output scale
// (1/2pi)(dipole/hbar) paired with k0.
struct ReadoutScale {
  double k0 = 0.0;
  double field_to_shift = 0.0;  // Hz of peak shift per field unit
  double front = 0.0;           // output units per (field * slope)
};

inline ReadoutScale readout_scale(const AtomicParams& p) {
  ReadoutScale s;
  s.k0 = slope_k0(p);
  s.field_to_shift = p.scan_ratio * p.dipole_over_hbar() / two_pi;
  s.front = p.dipole_over_hbar() / two_pi;
  return s;
}

inline void check_linear_range(double max_field, const AtomicParams& p,
                               const FrontendOptions& opt) {
  const double shift =
      p.scan_ratio * p.dipole_over_hbar() * max_field / two_pi;
  if (shift > opt.linear_fraction * p.linewidth)
    throw SaturationError("RF drive shifts the peak beyond the linear range");
}

// One quadrature of the dithered slope readout.
inline double measure_branch(double rf_amp, double phase_diff, double k0,
                             double front, const NoiseParams& noise,
                             std::uint64_t branch, const NoiseContext& ctx) {
  double slope = k0;
  double field = rf_amp * std::cos(phase_diff);
  if (noise.sigma_psn > 0.0)
    slope += noise.sigma_psn *
             gaussian(noise.seed, noise_stream(ctx.stream, branch,
                                               psn_component),
                      ctx.sample_index);
  if (noise.sigma_bgn > 0.0)
    field += noise.sigma_bgn *
             gaussian(noise.seed, noise_stream(ctx.stream, branch,
                                               bgn_component),
                      ctx.sample_index);
  if (noise.sigma_qpn > 0.0)
    field += noise.sigma_qpn *
             gaussian(noise.seed, noise_stream(ctx.stream, branch,
                                               qpn_component),
                      ctx.sample_index);
  return front * slope * field;
}

}  // namespace detail

// Scalar readout of the dithered transmission slope for one RF tone against
// the LO: y = (1/2pi)(slope + slope noise)(dipole/hbar)
//             (amplitude*cos(phase difference) + field noise).
inline double atomic_measure(const RfTone& rf, const RfTone& lo,
                             const AtomicParams& p, const NoiseParams& noise,
                             const NoiseContext& ctx = {},
                             const FrontendOptions& opt = {}) {
  p.validate();
  noise.validate();
  superpose_lo(rf, lo, opt.ratio_min);
  detail::check_linear_range(rf.amplitude, p, opt);
  const auto scale = detail::readout_scale(p);
  return detail::measure_branch(rf.amplitude, rf.phase - lo.phase, scale.k0,
                                scale.front, noise, 0, ctx);
}

// Complex readout: the in-phase branch uses the LO as given, the quadrature
// branch an LO shifted by +pi/2, with independent noise draws per branch.
inline std::complex<double> measure_iq(const RfTone& rf, const RfTone& lo,
                                       const AtomicParams& p,
                                       const NoiseParams& noise,
                                       const NoiseContext& ctx = {},
                                       const FrontendOptions& opt = {}) {
  p.validate();
  noise.validate();
  superpose_lo(rf, lo, opt.ratio_min);
  detail::check_linear_range(rf.amplitude, p, opt);
  const auto scale = detail::readout_scale(p);
  const double dphi = rf.phase - lo.phase;
  const double i_part = detail::measure_branch(
      rf.amplitude, dphi, scale.k0, scale.front, noise, 0, ctx);
  const double q_part = detail::measure_branch(
      rf.amplitude, dphi - pi / 2.0, scale.k0, scale.front, noise, 1, ctx);
  return {i_part, q_part};
}

namespace detail {

// Sliding-mean instantaneous-frequency guard: flags sustained content
// outside the tuning window. Windowed means keep sample noise from
// triggering it; windows that straddle a retune are skipped.
inline void check_resonance(const Waveform& rx, double window_halfwidth,
                            const std::vector<std::uint8_t>& valid) {
  const std::size_t n = rx.samples.size();
  const std::size_t win = 128;
  if (n < win + 1) return;
  const double limit = window_halfwidth * 1.10;
  const double mag_floor = [&] {
    double peak = 0.0;
    for (const auto& s : rx.samples) peak = std::max(peak, std::abs(s));
    return 1e-9 * peak;
  }();
  std::size_t count = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i + win + 1 <= n; i += win / 2) {
    count = 0;
    acc = 0.0;
    for (std::size_t k = i; k < i + win; ++k) {
      if (!valid.empty() && (valid[k] == 0 || valid[k + 1] == 0)) {
        count = 0;
        break;
      }
      const std::complex<double> a = rx.samples[k];
      const std::complex<double> b = rx.samples[k + 1];
      if (std::abs(a) < mag_floor || std::abs(b) < mag_floor) continue;
      acc += std::arg(b * std::conj(a));
      ++count;
    }
    if (count < win / 2) continue;
    const double f_mean =
        acc / static_cast<double>(count) * rx.sample_rate / two_pi;
    if (std::abs(f_mean) > limit)
      throw ResonanceError(
          "sustained content outside the tuning window (missing retune)");
  }
}

}  // namespace detail

// Streams a received waveform through the readout, one I/Q sample per input
// sample. Samples inside a retune blanking window are kept (noise only in
// the field term they report is meaningless) but flagged invalid.
inline IqTrace measure_waveform(const Waveform& rx, const RfTone& lo,
                                const AtomicParams& p,
                                const NoiseParams& noise,
                                const NoiseContext& ctx = {},
                                const FrontendOptions& opt = {}) {
  rx.validate();
  p.validate();
  noise.validate();
  if (rx.inst_bandwidth > opt.inst_bandwidth_limit)
    throw BandwidthError(
        "waveform exceeds the instantaneous bandwidth limit");

  double peak = 0.0;
  for (const auto& s : rx.samples) peak = std::max(peak, std::abs(s));
  const double max_field = opt.field_scale * peak;
  const RfTone strongest(max_field, 0.0, lo.omega);
  superpose_lo(strongest, lo, opt.ratio_min);
  detail::check_linear_range(max_field, p, opt);

  const std::size_t n = rx.samples.size();
  std::vector<std::uint8_t> valid(n, 1);
  const std::size_t latency_samples = static_cast<std::size_t>(
      std::round(opt.retune_latency * rx.sample_rate));
  for (const auto& ev : rx.retune_schedule) {
    const auto start =
        static_cast<std::size_t>(std::llround(ev.time * rx.sample_rate));
    for (std::size_t k = start; k < std::min(n, start + latency_samples); ++k)
      valid[k] = 0;
  }

  detail::check_resonance(rx, 0.5 * opt.inst_bandwidth_limit, valid);

  const auto scale = detail::readout_scale(p);
  IqTrace trace;
  trace.sample_rate = rx.sample_rate;
  trace.samples.resize(n);
  trace.valid = std::move(valid);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> x = rx.samples[i];
    const double amp = opt.field_scale * std::abs(x);
    const double dphi = std::arg(x) - lo.phase;
    const NoiseContext sample_ctx{ctx.stream, ctx.sample_index + i};
    const double i_part = detail::measure_branch(
        amp, dphi, scale.k0, scale.front, noise, 0, sample_ctx);
    const double q_part = detail::measure_branch(
        amp, dphi - pi / 2.0, scale.k0, scale.front, noise, 1, sample_ctx);
    trace.samples[i] = {i_part, q_part};
  }
  return trace;
}

}  // namespace rydar
