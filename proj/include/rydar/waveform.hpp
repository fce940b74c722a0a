#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "rydar/constants.hpp"
#include "rydar/errors.hpp"
#include "rydar/fft.hpp"

namespace rydar {

enum class WaveformKind : std::uint32_t {
  Tone = 0,
  Lfm = 1,
  Fsk = 2,
  PskLfm = 3,
  FreqHop = 4,
};

inline const char* waveform_kind_name(WaveformKind k) {
  switch (k) {
    case WaveformKind::Tone: return "TONE";
    case WaveformKind::Lfm: return "LFM";
    case WaveformKind::Fsk: return "FSK";
    case WaveformKind::PskLfm: return "PSK_LFM";
    case WaveformKind::FreqHop: return "FREQ_HOP";
  }
  return "UNKNOWN";
}

struct RetuneEvent {
  double time = 0.0;         // s, start of the retune
  double center_freq = 0.0;  // Hz, absolute center once settled
};

// Complex baseband samples stored relative to the receiver's instantaneous
// tuning center. Wideband hop plans keep per-step content near DC while the
// retune schedule carries the absolute center per step, so the sample rate
// only has to cover one tuning window.
struct Waveform {
  double sample_rate = 0.0;     // Hz
  double carrier_freq = 0.0;    // Hz, absolute center at t = 0
  double inst_bandwidth = 0.0;  // Hz, declared occupancy within one window
  WaveformKind kind = WaveformKind::Tone;
  std::vector<std::complex<double>> samples;
  std::vector<RetuneEvent> retune_schedule;

  std::size_t size() const { return samples.size(); }

  double duration() const {
    return sample_rate > 0.0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }

  double center_at(double t) const {
    double c = carrier_freq;
    for (const auto& ev : retune_schedule) {
      if (ev.time <= t)
        c = ev.center_freq;
      else
        break;
    }
    return c;
  }

  void validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
      throw DomainError("sample_rate must be positive");
    if (inst_bandwidth < 0.0 || !std::isfinite(inst_bandwidth))
      throw DomainError("inst_bandwidth must be non-negative");
    if (sample_rate < 2.5 * inst_bandwidth)
      throw SamplingError(
          "sample_rate below 2.5x the instantaneous bandwidth");
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& ev : retune_schedule) {
      if (!(ev.time > prev) || ev.time < 0.0 || !std::isfinite(ev.center_freq))
        throw ConfigError("retune schedule must be strictly increasing");
      prev = ev.time;
    }
    for (const auto& s : samples) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw DomainError("waveform contains non-finite samples");
    }
  }
};

// Complex receiver output: one I/Q sample per input sample, with samples
// recorded during retunes flagged invalid.
struct IqTrace {
  double sample_rate = 0.0;  // Hz
  std::vector<std::complex<double>> samples;
  std::vector<std::uint8_t> valid;  // 1 usable, 0 inside a retune window

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (!(sample_rate > 0.0)) throw DomainError("sample_rate must be positive");
    if (!valid.empty() && valid.size() != samples.size())
      throw DomainError("validity mask length mismatch");
    for (const auto& s : samples) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw DomainError("trace contains non-finite samples");
    }
  }

  bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }
};

inline IqTrace trace_from(const Waveform& w) {
  IqTrace t;
  t.sample_rate = w.sample_rate;
  t.samples = w.samples;
  return t;
}

inline std::uint32_t gray_encode(std::uint32_t v) { return v ^ (v >> 1); }

inline std::uint32_t gray_decode(std::uint32_t g) {
  std::uint32_t v = g;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) v ^= v >> shift;
  return v;
}

namespace detail {

inline std::size_t checked_sample_count(double duration, double fs) {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw DomainError("duration must be positive");
  if (!(fs > 0.0) || !std::isfinite(fs))
    throw DomainError("sample_rate must be positive");
  const double n = std::round(duration * fs);
  if (n < 2.0) throw ConfigError("duration shorter than two samples");
  return static_cast<std::size_t>(n);
}

}  // namespace detail

// Constant tone at a fixed offset from the tuning center.
inline Waveform gen_tone(double offset, double duration, double fs,
                         double fc = 0.0) {
  const std::size_t n = detail::checked_sample_count(duration, fs);
  if (!std::isfinite(offset)) throw DomainError("offset must be finite");
  Waveform w;
  w.sample_rate = fs;
  w.carrier_freq = fc;
  w.kind = WaveformKind::Tone;
  w.inst_bandwidth = 2.0 * std::abs(offset);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = two_pi * offset * static_cast<double>(i) / fs;
    w.samples[i] = {std::cos(ph), std::sin(ph)};
  }
  w.validate();
  return w;
}

// Linear chirp sweeping -bandwidth/2 .. +bandwidth/2 over the duration.
inline Waveform gen_lfm(double bandwidth, double duration, double fs,
                        double fc = 0.0) {
  if (bandwidth < 0.0 || !std::isfinite(bandwidth))
    throw DomainError("bandwidth must be non-negative");
  const std::size_t n = detail::checked_sample_count(duration, fs);
  Waveform w;
  w.sample_rate = fs;
  w.carrier_freq = fc;
  w.kind = WaveformKind::Lfm;
  w.inst_bandwidth = bandwidth;
  w.samples.resize(n);
  const double rate = bandwidth / duration;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double ph = pi * rate * t * t - pi * bandwidth * t;
    w.samples[i] = {std::cos(ph), std::sin(ph)};
  }
  w.validate();
  return w;
}

// M-ary FSK with Gray-coded tone assignment. Tones sit at
// (m - (M-1)/2) * tone_spacing; each symbol restarts the tone phase so the
// per-symbol correlations between distinct tones vanish exactly.
inline Waveform gen_fsk(const std::vector<std::uint8_t>& bits,
                        std::uint32_t m_ary, double symbol_rate,
                        double tone_spacing, double fs, double fc = 0.0,
                        bool allow_nonorthogonal = false) {
  if (m_ary < 2 || (m_ary & (m_ary - 1)) != 0)
    throw ConfigError("m_ary must be a power of two, at least 2");
  if (!(symbol_rate > 0.0) || !(tone_spacing > 0.0))
    throw DomainError("symbol_rate and tone_spacing must be positive");
  if (!(fs > 0.0)) throw DomainError("sample_rate must be positive");
  if (tone_spacing < symbol_rate && !allow_nonorthogonal)
    throw ConfigError("tone_spacing below symbol_rate breaks orthogonality");
  std::uint32_t bits_per_symbol = 0;
  for (std::uint32_t v = m_ary; v > 1; v >>= 1) ++bits_per_symbol;
  if (bits.empty() || bits.size() % bits_per_symbol != 0)
    throw ConfigError("bit count must be a positive multiple of log2(m_ary)");
  for (std::uint8_t b : bits)
    if (b > 1) throw DomainError("bits must be 0 or 1");
  const double sps_f = fs / symbol_rate;
  const double sps_r = std::round(sps_f);
  if (std::abs(sps_f - sps_r) > 1e-9 * sps_f || sps_r < 1.0)
    throw ConfigError("sample_rate must be an integer multiple of symbol_rate");
  const std::size_t sps = static_cast<std::size_t>(sps_r);
  const std::size_t n_sym = bits.size() / bits_per_symbol;

  Waveform w;
  w.sample_rate = fs;
  w.carrier_freq = fc;
  w.kind = WaveformKind::Fsk;
  w.inst_bandwidth =
      static_cast<double>(m_ary - 1) * tone_spacing + 2.0 * symbol_rate;
  w.samples.resize(n_sym * sps);
  for (std::size_t s = 0; s < n_sym; ++s) {
    std::uint32_t value = 0;
    for (std::uint32_t b = 0; b < bits_per_symbol; ++b)
      value = (value << 1) | bits[s * bits_per_symbol + b];
    const std::uint32_t tone = gray_decode(value);
    const double offset =
        (static_cast<double>(tone) - 0.5 * static_cast<double>(m_ary - 1)) *
        tone_spacing;
    for (std::size_t i = 0; i < sps; ++i) {
      const double ph = two_pi * offset * static_cast<double>(i) / fs;
      w.samples[s * sps + i] = {std::cos(ph), std::sin(ph)};
    }
  }
  w.validate();
  return w;
}

// Chirp multiplied by +/-1 chips, one chip per bit, boundaries at equal
// sample fractions. All-zero bits reduce to gen_lfm exactly.
inline Waveform gen_psk_lfm(const std::vector<std::uint8_t>& bits,
                            double bandwidth, double duration, double fs,
                            double fc = 0.0) {
  if (bits.empty()) throw ConfigError("at least one chip bit required");
  for (std::uint8_t b : bits)
    if (b > 1) throw DomainError("bits must be 0 or 1");
  Waveform w = gen_lfm(bandwidth, duration, fs, fc);
  w.kind = WaveformKind::PskLfm;
  const std::size_t n = w.samples.size();
  const std::size_t n_chips = bits.size();
  for (std::size_t c = 0; c < n_chips; ++c) {
    if (bits[c] == 0) continue;
    const std::size_t lo = c * n / n_chips;
    const std::size_t hi = (c + 1) * n / n_chips;
    for (std::size_t i = lo; i < hi; ++i) w.samples[i] = -w.samples[i];
  }
  w.inst_bandwidth =
      bandwidth + 2.0 * static_cast<double>(n_chips) / duration;
  w.validate();
  return w;
}

// Stepped-frequency hop plan: n_steps dwell slots whose centers are spaced
// step_spacing apart, symmetric about the carrier.
struct HopPlan {
  std::size_t n_steps = 0;
  double step_spacing = 0.0;        // Hz
  double dwell = 0.0;               // s per step
  double per_step_bandwidth = 0.0;  // Hz occupied within one step

  double synthesized_bandwidth() const {
    return static_cast<double>(n_steps) * step_spacing;
  }

  double step_offset(std::size_t i) const {
    return (static_cast<double>(i) -
            0.5 * static_cast<double>(n_steps - 1)) *
           step_spacing;
  }

  void validate() const {
    if (n_steps < 1) throw ConfigError("hop plan needs at least one step");
    if (!(step_spacing > 0.0) || !std::isfinite(step_spacing))
      throw ConfigError("step_spacing must be positive");
    if (!(dwell > 0.0) || !std::isfinite(dwell))
      throw ConfigError("dwell must be positive");
    if (per_step_bandwidth < 0.0 || !std::isfinite(per_step_bandwidth))
      throw ConfigError("per_step_bandwidth must be non-negative");
  }
};

// Constant-envelope hop waveform: per-step content is a DC tone relative to
// that step's center; a retune event is emitted whenever the next step's
// band no longer fits inside the current tuning window.
inline Waveform gen_freq_hop(const HopPlan& plan, double fs, double fc = 0.0,
                             double tuning_window = 10e6) {
  plan.validate();
  if (!(fs > 0.0)) throw DomainError("sample_rate must be positive");
  if (!(tuning_window > 0.0))
    throw DomainError("tuning_window must be positive");
  if (plan.per_step_bandwidth > tuning_window)
    throw ConfigError("per-step bandwidth exceeds the tuning window");
  const double n_per_f = std::round(plan.dwell * fs);
  if (n_per_f < 1.0) throw ConfigError("dwell shorter than one sample");
  const std::size_t n_per = static_cast<std::size_t>(n_per_f);

  Waveform w;
  w.sample_rate = fs;
  w.carrier_freq = fc;
  w.kind = WaveformKind::FreqHop;
  w.inst_bandwidth = plan.per_step_bandwidth;
  w.samples.assign(plan.n_steps * n_per, {1.0, 0.0});
  double current = fc;
  for (std::size_t i = 0; i < plan.n_steps; ++i) {
    const double center = fc + plan.step_offset(i);
    if (std::abs(center - current) + 0.5 * plan.per_step_bandwidth >
        0.5 * tuning_window) {
      w.retune_schedule.push_back(
          {static_cast<double>(i * n_per) / fs, center});
      current = center;
    }
  }
  w.validate();
  return w;
}

struct BandwidthCheckOptions {
  std::size_t window = 64;      // samples per analysis window
  std::size_t stride = 32;      // samples between window starts
  double occupancy = 0.99;      // power fraction defining the occupied band
  double retune_latency = 0.0;  // s skipped after each retune event
  std::size_t zero_pad = 8;     // spectral interpolation factor
};

struct SegmentOccupancy {
  double t_begin = 0.0;      // s
  double t_end = 0.0;        // s
  double occupied_bw = 0.0;  // Hz, window-width-corrected
  bool pass = true;
};

struct BandwidthReport {
  bool pass = true;
  double limit = 0.0;           // Hz
  double worst_occupied = 0.0;  // Hz
  std::vector<SegmentOccupancy> segments;
};

namespace detail {

// Occupied band of one windowed block: central `occupancy` power fraction,
// equal tails discarded on both sides. Returns {f_lo, f_hi} in Hz.
inline std::pair<double, double> occupied_band(
    const std::vector<std::complex<double>>& block, double fs,
    double occupancy, std::size_t zero_pad) {
  const std::size_t nw = block.size();
  const std::size_t nfft = next_pow2(nw * zero_pad);
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < nw; ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) /
                             static_cast<double>(nw - 1));
    buf[i] = block[i] * hann;
  }
  fft_inplace(buf, false);
  std::vector<double> power(nfft);
  double total = 0.0;
  for (std::size_t k = 0; k < nfft; ++k) {
    // Reorder so index 0 is the most negative frequency.
    const std::size_t src = (k + nfft / 2) % nfft;
    power[k] = std::norm(buf[src]);
    total += power[k];
  }
  const double tail = 0.5 * (1.0 - occupancy) * total;
  double cum = 0.0;
  std::size_t lo = 0;
  for (std::size_t k = 0; k < nfft; ++k) {
    cum += power[k];
    if (cum > tail) {
      lo = k;
      break;
    }
  }
  cum = 0.0;
  std::size_t hi = nfft - 1;
  for (std::size_t k = nfft; k-- > 0;) {
    cum += power[k];
    if (cum > tail) {
      hi = k;
      break;
    }
  }
  const double bin = fs / static_cast<double>(nfft);
  const double f0 = -0.5 * fs;
  return {f0 + bin * static_cast<double>(lo),
          f0 + bin * static_cast<double>(hi)};
}

}  // namespace detail

// Measures the occupied bandwidth of each between-retunes segment as the
// union of per-window occupied bands, less the analyzer's own window width
// (so a pure tone measures ~0 regardless of the limit).
inline BandwidthReport check_instantaneous_bandwidth(
    const Waveform& w, double limit, const BandwidthCheckOptions& opts = {}) {
  w.validate();
  if (!(limit > 0.0)) throw DomainError("bandwidth limit must be positive");
  if (opts.window < 16 || opts.stride < 1 || opts.zero_pad < 1)
    throw ConfigError("analysis window too small");
  if (!(opts.occupancy > 0.0) || !(opts.occupancy < 1.0))
    throw ConfigError("occupancy must be in (0, 1)");

  const double fs = w.sample_rate;
  const std::size_t n = w.samples.size();
  const std::size_t latency_samples =
      static_cast<std::size_t>(std::round(opts.retune_latency * fs));

  // Intrinsic width of the analyzer itself, measured on a windowed DC block.
  const std::vector<std::complex<double>> dc(opts.window, {1.0, 0.0});
  const auto base = detail::occupied_band(dc, fs, opts.occupancy,
                                          opts.zero_pad);
  const double intrinsic = base.second - base.first;

  std::vector<std::size_t> bounds{0};
  for (const auto& ev : w.retune_schedule) {
    const auto idx =
        static_cast<std::size_t>(std::llround(ev.time * fs));
    if (idx > bounds.back() && idx < n) bounds.push_back(idx);
  }
  bounds.push_back(n);

  double peak = 0.0;
  for (const auto& s : w.samples) peak = std::max(peak, std::norm(s));
  const double silence = 1e-24 * peak * static_cast<double>(opts.window);

  BandwidthReport report;
  report.limit = limit;
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    std::size_t start = bounds[b];
    const std::size_t end = bounds[b + 1];
    if (b > 0 || (!w.retune_schedule.empty() &&
                  w.retune_schedule.front().time == 0.0))
      start = std::min(end, start + latency_samples);
    SegmentOccupancy seg;
    seg.t_begin = static_cast<double>(start) / fs;
    seg.t_end = static_cast<double>(end) / fs;
    if (end - start >= 16) {
      const std::size_t win = std::min(opts.window, end - start);
      double lo_min = std::numeric_limits<double>::infinity();
      double hi_max = -std::numeric_limits<double>::infinity();
      bool any = false;
      std::vector<std::size_t> positions;
      for (std::size_t pos = start; pos + win <= end; pos += opts.stride)
        positions.push_back(pos);
      if (positions.empty() || positions.back() + win < end)
        positions.push_back(end - win);
      for (const std::size_t pos : positions) {
        std::vector<std::complex<double>> block(
            w.samples.begin() + static_cast<std::ptrdiff_t>(pos),
            w.samples.begin() + static_cast<std::ptrdiff_t>(pos + win));
        double p = 0.0;
        for (const auto& s : block) p += std::norm(s);
        if (p <= silence) continue;
        const auto band =
            detail::occupied_band(block, fs, opts.occupancy, opts.zero_pad);
        lo_min = std::min(lo_min, band.first);
        hi_max = std::max(hi_max, band.second);
        any = true;
      }
      if (any)
        seg.occupied_bw = std::max(0.0, (hi_max - lo_min) - intrinsic);
    }
    seg.pass = seg.occupied_bw <= limit;
    report.worst_occupied = std::max(report.worst_occupied, seg.occupied_bw);
    report.pass = report.pass && seg.pass;
    report.segments.push_back(seg);
  }
  return report;
}

}  // namespace rydar
