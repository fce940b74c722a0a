#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "rydar/constants.hpp"
#include "rydar/errors.hpp"
#include "rydar/rng.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

struct Path {
  double delay = 0.0;    // s, non-negative
  double doppler = 0.0;  // Hz
  double gain = 1.0;     // linear amplitude
  double phase = 0.0;    // rad, extra carrier phase
};

struct PathSet {
  std::vector<Path> paths;

  void validate() const {
    if (paths.empty()) throw ConfigError("path set must not be empty");
    for (const auto& p : paths) {
      if (p.delay < 0.0 || !std::isfinite(p.delay))
        throw DomainError("path delay must be non-negative");
      if (!std::isfinite(p.doppler) || !std::isfinite(p.gain) ||
          !std::isfinite(p.phase))
        throw DomainError("path parameters must be finite");
    }
  }

  double max_delay() const {
    double d = 0.0;
    for (const auto& p : paths) d = std::max(d, p.delay);
    return d;
  }

  auto begin() const { return paths.begin(); }
  auto end() const { return paths.end(); }
};

// Receiver gain versus tuning-center offset, piecewise linear between
// knots and clamped beyond the first/last knot.
struct SelectivityProfile {
  std::vector<std::pair<double, double>> knots;  // (offset Hz, gain)

  void validate() const {
    if (knots.empty()) throw ConfigError("selectivity needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (knots[i].second < 0.0 || !std::isfinite(knots[i].second))
        throw DomainError("selectivity gain must be non-negative");
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw ConfigError("selectivity knots must be strictly increasing");
    }
  }

  double evaluate(double offset) const {
    if (offset <= knots.front().first) return knots.front().second;
    if (offset >= knots.back().first) return knots.back().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (offset <= knots[i].first) {
        const double x0 = knots[i - 1].first, x1 = knots[i].first;
        const double y0 = knots[i - 1].second, y1 = knots[i].second;
        return y0 + (y1 - y0) * (offset - x0) / (x1 - x0);
      }
    }
    return knots.back().second;
  }
};

namespace detail {

inline constexpr std::size_t interp_taps = 64;
inline constexpr std::uint64_t awgn_component = 7;

inline double bessel_i0(double x) {
  // Power series; converges quickly for the beta values used here.
  double sum = 1.0, term = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = pi * x;
  return std::sin(px) / px;
}

// Kaiser-windowed sinc kernel for a fractional advance mu in [0, 1);
// tap k applies to input index n - dint - (k - taps/2 + 1).
inline std::array<double, interp_taps> frac_delay_taps(double mu,
                                                       double beta = 14.0) {
  std::array<double, interp_taps> h{};
  const double half = static_cast<double>(interp_taps) / 2.0;
  const double inv_i0 = 1.0 / bessel_i0(beta);
  for (std::size_t i = 0; i < interp_taps; ++i) {
    const double k = static_cast<double>(i) - (half - 1.0);  // -31 .. 32
    const double u = (k - mu) / half;
    const double w =
        std::abs(u) <= 1.0
            ? bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) * inv_i0
            : 0.0;
    h[i] = sinc(k - mu) * w;
  }
  return h;
}

// Absolute tuning center as a step function of the emission time, expressed
// in output-sample indices for one fixed path delay.
struct CenterWalk {
  std::vector<std::pair<std::size_t, double>> steps;  // (first index, center)

  CenterWalk(const Waveform& tx, double delay, std::size_t out_len) {
    steps.emplace_back(0, tx.carrier_freq);
    for (const auto& ev : tx.retune_schedule) {
      const double t_out = ev.time + delay;
      const auto idx = static_cast<std::size_t>(
          std::max(0.0, std::ceil(t_out * tx.sample_rate - 1e-9)));
      if (idx >= out_len) break;
      if (!steps.empty() && steps.back().first == idx)
        steps.back().second = ev.center_freq;
      else
        steps.emplace_back(idx, ev.center_freq);
    }
  }
};

}  // namespace detail

// Linear multipath propagation at complex baseband: per path, a windowed-
// sinc fractional delay, the carrier phase rotation exp(-j 2 pi c(t) tau)
// for the tuning center c active at emission time, a Doppler ramp, and the
// path gain/phase. Complex white Gaussian noise (sigma per component) is
// added last. Output is padded past the input end so delayed energy and the
// interpolator tail are kept.
inline Waveform propagate(const Waveform& tx, const PathSet& paths,
                          double awgn_sigma, std::uint64_t noise_seed = 0,
                          std::uint64_t noise_stream = 0) {
  tx.validate();
  paths.validate();
  if (awgn_sigma < 0.0 || !std::isfinite(awgn_sigma))
    throw DomainError("awgn_sigma must be non-negative");

  const double fs = tx.sample_rate;
  const std::size_t n = tx.samples.size();
  const double max_delay_samples = paths.max_delay() * fs;
  bool integer_only = true;
  for (const auto& p : paths) {
    const double d = p.delay * fs;
    if (std::abs(d - std::round(d)) > 1e-9) integer_only = false;
  }
  const std::size_t pad = integer_only ? 0 : detail::interp_taps / 2 + 1;
  const std::size_t out_len =
      n + static_cast<std::size_t>(
              std::max(0.0, std::ceil(max_delay_samples - 1e-9))) +
      pad;

  std::vector<std::complex<double>> acc(out_len, {0.0, 0.0});
  for (const auto& path : paths.paths) {
    // Snap to the nearest integer sample with the same tolerance the
    // integer-only detection uses, so a delay that rounds to an integer
    // never takes the interpolation branch (whose support would need the
    // fractional padding).
    const double d = path.delay * fs;
    double dfloor = std::floor(d);
    double mu = d - dfloor;
    if (mu > 1.0 - 1e-9) {
      dfloor += 1.0;
      mu = 0.0;
    } else if (mu < 1e-9) {
      mu = 0.0;
    }
    const auto dint = static_cast<std::ptrdiff_t>(dfloor);
    const std::complex<double> base =
        path.gain * std::complex<double>(std::cos(path.phase),
                                         std::sin(path.phase));
    const detail::CenterWalk walk(tx, path.delay, out_len);

    std::vector<std::complex<double>> shifted(out_len, {0.0, 0.0});
    if (mu == 0.0) {
      for (std::size_t m = 0; m < out_len; ++m) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(m) - dint;
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(n))
          shifted[m] = tx.samples[static_cast<std::size_t>(src)];
      }
    } else {
      const auto taps = detail::frac_delay_taps(mu);
      const auto half = static_cast<std::ptrdiff_t>(detail::interp_taps / 2);
      for (std::size_t m = 0; m < out_len; ++m) {
        std::complex<double> s{0.0, 0.0};
        const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(m) - dint;
        for (std::size_t i = 0; i < detail::interp_taps; ++i) {
          const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - (half - 1);
          const std::ptrdiff_t src = center - k;
          if (src >= 0 && src < static_cast<std::ptrdiff_t>(n))
            s += taps[i] * tx.samples[static_cast<std::size_t>(src)];
        }
        shifted[m] = s;
      }
    }

    std::size_t seg = 0;
    const bool ramp = path.doppler != 0.0;
    const std::complex<double> w =
        ramp ? std::complex<double>(std::cos(two_pi * path.doppler / fs),
                                    std::sin(two_pi * path.doppler / fs))
             : std::complex<double>(1.0, 0.0);
    std::complex<double> rot(1.0, 0.0);
    for (std::size_t m = 0; m < out_len; ++m) {
      while (seg + 1 < walk.steps.size() && walk.steps[seg + 1].first <= m)
        ++seg;
      const double carrier_phase = -two_pi * walk.steps[seg].second *
                                   path.delay;
      const std::complex<double> cp(std::cos(carrier_phase),
                                    std::sin(carrier_phase));
      acc[m] += base * cp * rot * shifted[m];
      if (ramp) {
        rot *= w;
        if ((m & 0xfff) == 0xfff)
          rot /= std::abs(rot);
      }
    }
  }

  if (awgn_sigma > 0.0) {
    const std::uint64_t stream =
        hash_combine(noise_stream, detail::awgn_component);
    for (std::size_t m = 0; m < out_len; ++m)
      acc[m] += awgn_sigma * complex_gaussian(noise_seed, stream, m);
  }

  Waveform out;
  out.sample_rate = tx.sample_rate;
  out.carrier_freq = tx.carrier_freq;
  out.inst_bandwidth = tx.inst_bandwidth;
  out.kind = tx.kind;
  out.retune_schedule = tx.retune_schedule;
  out.samples = std::move(acc);
  return out;
}

// Round-trip echo from a point target: delay 2*range/c with the given
// reflection gain.
inline Waveform monostatic_echo(const Waveform& tx, double range_m,
                                double rcs_gain, double awgn_sigma,
                                std::uint64_t noise_seed = 0,
                                std::uint64_t noise_stream = 0) {
  if (range_m < 0.0 || !std::isfinite(range_m))
    throw DomainError("range must be non-negative");
  PathSet ps;
  ps.paths.push_back({2.0 * range_m / speed_of_light, 0.0, rcs_gain, 0.0});
  return propagate(tx, ps, awgn_sigma, noise_seed, noise_stream);
}

// Applies the tuning-dependent receiver gain: each sample is scaled by the
// profile at the offset of the active tuning center from the carrier.
inline Waveform apply_selectivity(const Waveform& w,
                                  const SelectivityProfile& prof) {
  w.validate();
  prof.validate();
  Waveform out = w;
  if (w.retune_schedule.empty()) {
    const double g = prof.evaluate(0.0);
    for (auto& s : out.samples) s *= g;
    return out;
  }
  std::size_t seg = 0;
  double gain = prof.evaluate(0.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double t = static_cast<double>(i) / w.sample_rate;
    while (seg < w.retune_schedule.size() &&
           w.retune_schedule[seg].time <= t) {
      gain = prof.evaluate(w.retune_schedule[seg].center_freq -
                           w.carrier_freq);
      ++seg;
    }
    out.samples[i] *= gain;
  }
  return out;
}

}  // namespace rydar
