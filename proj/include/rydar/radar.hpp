#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rydar/channel.hpp"
#include "rydar/constants.hpp"
#include "rydar/errors.hpp"
#include "rydar/fft.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

enum class RangeMethod { MatchedFilter, BeatFft, SteppedSynth };

inline const char* range_method_name(RangeMethod m) {
  switch (m) {
    case RangeMethod::MatchedFilter: return "MATCHED_FILTER";
    case RangeMethod::BeatFft: return "BEAT_FFT";
    case RangeMethod::SteppedSynth: return "STEPPED_SYNTH";
  }
  return "UNKNOWN";
}

struct RangeEstimate {
  double range_m = 0.0;
  double peak_metric = 0.0;  // peak over median detection statistic
  RangeMethod method = RangeMethod::MatchedFilter;
  double unambiguous_window_m = std::numeric_limits<double>::infinity();
};

// Theoretical range resolution of a synthesized bandwidth.
inline double range_resolution(double bandwidth) {
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  return speed_of_light / (2.0 * bandwidth);
}

inline double radar_rmse(const std::vector<double>& truths,
                         const std::vector<double>& estimates) {
  if (truths.empty() || truths.size() != estimates.size())
    throw DomainError("truth/estimate vectors must be equal and non-empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = estimates[i] - truths[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(truths.size()));
}

namespace detail {

// |DFT-interpolated correlation|^2 at fractional lag u, using symmetric
// (negative and positive) frequency indexing of the length-n spectrum.
inline double spectrum_mag2_at(const std::vector<std::complex<double>>& spec,
                               double u) {
  const std::size_t n = spec.size();
  const double step = two_pi * u / static_cast<double>(n);
  std::complex<double> sum{0.0, 0.0};
  const std::complex<double> wp(std::cos(step), std::sin(step));
  std::complex<double> rp(1.0, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k <= half; ++k) {
    sum += spec[k] * rp;
    rp *= wp;
  }
  const std::complex<double> wn = std::conj(wp);
  std::complex<double> rn = wn;
  for (std::size_t k = n - 1; k > half; --k) {
    sum += spec[k] * rn;
    rn *= wn;
  }
  return std::norm(sum) / (static_cast<double>(n) * static_cast<double>(n));
}

inline double median_magnitude(const std::vector<double>& mags) {
  if (mags.empty()) return 0.0;
  std::vector<double> copy = mags;
  const std::size_t mid = copy.size() / 2;
  std::nth_element(copy.begin(), copy.begin() + mid, copy.end());
  return copy[mid];
}

// Parabolic vertex offset from three magnitudes around a discrete peak.
inline double parabolic_offset(double ym, double y0, double yp) {
  const double denom = ym - 2.0 * y0 + yp;
  if (denom == 0.0) return 0.0;
  return std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
}

template <typename F>
double ternary_max(F&& f, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2))
      lo = m1;
    else
      hi = m2;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Magnitude of the cross-correlation of a received trace against the
// transmitted reference, per integer lag, plus the spectrum it came from.
struct CorrelationProfile {
  double sample_rate = 0.0;
  std::vector<double> magnitude;               // per lag 0..n_lags-1
  std::vector<std::complex<double>> spectrum;  // product spectrum, fft order
};

inline CorrelationProfile matched_filter_profile(const IqTrace& rx,
                                                 const Waveform& ref) {
  rx.validate();
  ref.validate();
  if (ref.samples.empty()) throw DomainError("reference must be non-empty");
  if (rx.samples.size() <= ref.samples.size())
    throw DomainError("trace must be longer than the reference");

  const std::size_t n = rx.samples.size();
  const std::size_t l = ref.samples.size();
  const std::size_t nfft = next_pow2(n + l);
  std::vector<std::complex<double>> a(nfft, {0.0, 0.0});
  std::vector<std::complex<double>> b(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    if (rx.is_valid(i)) a[i] = rx.samples[i];
  for (std::size_t i = 0; i < l; ++i) b[i] = ref.samples[i];
  fft_inplace(a, false);
  fft_inplace(b, false);
  for (std::size_t k = 0; k < nfft; ++k) a[k] *= std::conj(b[k]);

  CorrelationProfile prof;
  prof.sample_rate = rx.sample_rate;
  prof.spectrum = a;
  fft_inplace(a, true);
  const std::size_t n_lags = n - l + 1;
  prof.magnitude.resize(n_lags);
  for (std::size_t m = 0; m < n_lags; ++m)
    prof.magnitude[m] = std::abs(a[m]);
  return prof;
}

// Peak of the matched-filter output with continuous sub-sample refinement;
// empty when no lag clears detection_threshold times the median magnitude.
inline std::optional<RangeEstimate> matched_filter_range(
    const IqTrace& rx, const Waveform& ref, double detection_threshold = 8.0) {
  if (!(detection_threshold > 0.0))
    throw DomainError("detection threshold must be positive");
  const CorrelationProfile prof = matched_filter_profile(rx, ref);
  const std::size_t n_lags = prof.magnitude.size();
  std::size_t peak = 0;
  for (std::size_t m = 1; m < n_lags; ++m)
    if (prof.magnitude[m] > prof.magnitude[peak]) peak = m;
  const double med = detail::median_magnitude(prof.magnitude);
  const double metric =
      med > 0.0 ? prof.magnitude[peak] / med
                : (prof.magnitude[peak] > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 0.0);
  if (!(metric >= detection_threshold)) return std::nullopt;

  const double ym = peak > 0 ? prof.magnitude[peak - 1] : prof.magnitude[peak];
  const double yp = peak + 1 < n_lags ? prof.magnitude[peak + 1]
                                      : prof.magnitude[peak];
  const double seed = static_cast<double>(peak) +
                      detail::parabolic_offset(ym, prof.magnitude[peak], yp);
  const double u = detail::ternary_max(
      [&](double x) { return detail::spectrum_mag2_at(prof.spectrum, x); },
      seed - 1.0, seed + 1.0, 1e-6);

  RangeEstimate est;
  est.method = RangeMethod::MatchedFilter;
  est.peak_metric = metric;
  est.range_m =
      std::max(0.0, speed_of_light * u / (2.0 * prof.sample_rate));
  return est;
}

// Mixes the reference chirp against the conjugated return, turning a
// delayed up-chirp into a constant beat tone at +chirp_rate * delay so
// longer delays map to higher (positive) beat frequencies.
inline IqTrace dechirp(const IqTrace& rx, const Waveform& ref) {
  rx.validate();
  ref.validate();
  if (ref.samples.empty()) throw DomainError("reference must be non-empty");
  IqTrace out;
  out.sample_rate = rx.sample_rate;
  const std::size_t n = std::min(rx.samples.size(), ref.samples.size());
  out.samples.resize(n);
  out.valid.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = std::conj(rx.samples[i]) * ref.samples[i];
    out.valid[i] = rx.is_valid(i) ? 1 : 0;
  }
  return out;
}

// Beat-tone frequency estimate of a dechirped trace mapped to range via
// tau = f_beat / chirp_rate. Small negative refinements clamp to zero.
inline std::optional<RangeEstimate> beat_fft_range(
    const IqTrace& rx, double chirp_rate, double detection_threshold = 8.0) {
  rx.validate();
  if (!(chirp_rate > 0.0)) throw DomainError("chirp_rate must be positive");
  if (!(detection_threshold > 0.0))
    throw DomainError("detection threshold must be positive");
  const std::size_t n = rx.samples.size();
  if (n < 16) throw FramingError("trace too short for a beat estimate");

  const std::size_t nfft = next_pow2(n) * 4;
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    if (rx.is_valid(i)) buf[i] = rx.samples[i];
  fft_inplace(buf, false);
  std::vector<double> mag(nfft);
  for (std::size_t k = 0; k < nfft; ++k) mag[k] = std::abs(buf[k]);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < nfft; ++k)
    if (mag[k] > mag[peak]) peak = k;
  const double med = detail::median_magnitude(mag);
  const double metric =
      med > 0.0 ? mag[peak] / med
                : (mag[peak] > 0.0 ? std::numeric_limits<double>::infinity()
                                   : 0.0);
  if (!(metric >= detection_threshold)) return std::nullopt;

  const double fs = rx.sample_rate;
  const double bin = fs / static_cast<double>(nfft);
  const double f_peak =
      (peak <= nfft / 2 ? static_cast<double>(peak)
                        : static_cast<double>(peak) -
                              static_cast<double>(nfft)) *
      bin;
  const auto beat_power = [&](double f) {
    const double step = -two_pi * f / fs;
    const std::complex<double> w(std::cos(step), std::sin(step));
    std::complex<double> rot(1.0, 0.0), sum{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      if (rx.is_valid(i)) sum += rx.samples[i] * rot;
      rot *= w;
    }
    return std::norm(sum);
  };
  const double f_hat = detail::ternary_max(beat_power, f_peak - bin,
                                           f_peak + bin, 1e-9 * fs);

  RangeEstimate est;
  est.method = RangeMethod::BeatFft;
  est.peak_metric = metric;
  est.range_m =
      std::max(0.0, speed_of_light * (f_hat / chirp_rate) / 2.0);
  return est;
}

// Range profile magnitude across one unambiguous window synthesized from
// one coherent sample per hop step.
struct SyntheticRangeProfile {
  double window_m = 0.0;  // unambiguous extent
  std::vector<double> range_m;
  std::vector<double> magnitude;
};

inline SyntheticRangeProfile stepped_range_profile(
    const std::vector<std::complex<double>>& per_step, const HopPlan& plan,
    std::size_t grid_points = 8192) {
  plan.validate();
  if (per_step.size() != plan.n_steps)
    throw ConfigError("per-step sample count must match the hop plan");
  if (plan.n_steps < 2)
    throw DomainError("synthesis needs at least two steps");
  if (grid_points < 2 * plan.n_steps) grid_points = 2 * plan.n_steps;

  const double window = speed_of_light / (2.0 * plan.step_spacing);
  const double dr = window / static_cast<double>(grid_points);
  SyntheticRangeProfile prof;
  prof.window_m = window;
  prof.range_m.resize(grid_points);
  prof.magnitude.assign(grid_points, 0.0);
  std::vector<std::complex<double>> acc(grid_points, {0.0, 0.0});
  for (std::size_t i = 0; i < plan.n_steps; ++i) {
    const double f = plan.step_offset(i);
    const double step = two_pi * f * 2.0 * dr / speed_of_light;
    const std::complex<double> w(std::cos(step), std::sin(step));
    std::complex<double> rot(1.0, 0.0);
    for (std::size_t g = 0; g < grid_points; ++g) {
      acc[g] += per_step[i] * rot;
      rot *= w;
    }
  }
  for (std::size_t g = 0; g < grid_points; ++g) {
    prof.range_m[g] = dr * static_cast<double>(g);
    prof.magnitude[g] =
        std::abs(acc[g]) / static_cast<double>(plan.n_steps);
  }
  return prof;
}

// Peak of the synthetic range profile with continuous refinement. Targets
// beyond the unambiguous window fold back into it; callers that know the
// truth compare against unambiguous_window_m to flag ambiguity.
inline std::optional<RangeEstimate> stepped_synthesis_range(
    const std::vector<std::complex<double>>& per_step, const HopPlan& plan,
    double detection_threshold = 8.0, std::size_t grid_points = 8192) {
  if (!(detection_threshold > 0.0))
    throw DomainError("detection threshold must be positive");
  const SyntheticRangeProfile prof =
      stepped_range_profile(per_step, plan, grid_points);
  const std::size_t g_pts = prof.magnitude.size();
  std::size_t peak = 0;
  for (std::size_t g = 1; g < g_pts; ++g)
    if (prof.magnitude[g] > prof.magnitude[peak]) peak = g;
  const double med = detail::median_magnitude(prof.magnitude);
  const double metric =
      med > 0.0 ? prof.magnitude[peak] / med
                : (prof.magnitude[peak] > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 0.0);
  if (!(metric >= detection_threshold)) return std::nullopt;

  const double dr = prof.window_m / static_cast<double>(g_pts);
  const auto power = [&](double r) {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < plan.n_steps; ++i) {
      const double ph = two_pi * plan.step_offset(i) * 2.0 * r /
                        speed_of_light;
      sum += per_step[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return std::norm(sum);
  };
  const double r0 = prof.range_m[peak];
  double r_hat =
      detail::ternary_max(power, r0 - dr, r0 + dr, 1e-12 * prof.window_m);
  if (r_hat < 0.0) r_hat += prof.window_m;
  if (r_hat >= prof.window_m) r_hat -= prof.window_m;

  RangeEstimate est;
  est.method = RangeMethod::SteppedSynth;
  est.peak_metric = metric;
  est.range_m = std::max(0.0, r_hat);
  est.unambiguous_window_m = prof.window_m;
  return est;
}

// Brute-force two-target separability: the matched-filter power profile is
// averaged over n_phases relative phases of the second target (killing the
// coherent cross term), then local maxima above rel_floor of the peak are
// counted inside the two-target neighborhood.
struct ResolvabilityResult {
  std::size_t n_peaks = 0;
  bool resolved = false;
  std::vector<double> peak_ranges_m;
};

inline ResolvabilityResult two_target_resolvability(
    const Waveform& ref, double range1_m, double range2_m,
    std::size_t n_phases = 8, double rel_floor = 0.5) {
  if (range1_m < 0.0 || range2_m < 0.0)
    throw DomainError("ranges must be non-negative");
  if (n_phases < 2) throw DomainError("need at least two phase trials");
  ref.validate();

  const double fs = ref.sample_rate;
  std::vector<double> acc;
  for (std::size_t p = 0; p < n_phases; ++p) {
    PathSet ps;
    ps.paths.push_back({2.0 * range1_m / speed_of_light, 0.0, 1.0, 0.0});
    ps.paths.push_back({2.0 * range2_m / speed_of_light, 0.0, 1.0,
                        two_pi * static_cast<double>(p) /
                            static_cast<double>(n_phases)});
    const Waveform rx = propagate(ref, ps, 0.0);
    const CorrelationProfile prof =
        matched_filter_profile(trace_from(rx), ref);
    if (acc.empty()) acc.assign(prof.magnitude.size(), 0.0);
    for (std::size_t m = 0; m < prof.magnitude.size(); ++m)
      acc[m] += prof.magnitude[m] * prof.magnitude[m];
  }

  const double d_lo = 2.0 * std::min(range1_m, range2_m) / speed_of_light * fs;
  const double d_hi = 2.0 * std::max(range1_m, range2_m) / speed_of_light * fs;
  const std::size_t lo =
      static_cast<std::size_t>(std::max(1.0, std::floor(d_lo) - 8.0));
  const std::size_t hi = std::min(
      acc.size() - 2, static_cast<std::size_t>(std::ceil(d_hi) + 8.0));
  double peak = 0.0;
  for (std::size_t m = lo; m <= hi; ++m) peak = std::max(peak, acc[m]);

  ResolvabilityResult res;
  for (std::size_t m = lo; m <= hi; ++m) {
    if (acc[m] > acc[m - 1] && acc[m] >= acc[m + 1] &&
        acc[m] > rel_floor * peak) {
      ++res.n_peaks;
      res.peak_ranges_m.push_back(speed_of_light *
                                  static_cast<double>(m) / (2.0 * fs));
    }
  }
  res.resolved = res.n_peaks >= 2;
  return res;
}

}  // namespace rydar
