#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "rydar/constants.hpp"
#include "rydar/errors.hpp"
#include "rydar/rng.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

// Deterministic bit stream: bit i comes from word i/64 of the counter RNG.
inline std::vector<std::uint8_t> random_bits(std::size_t n,
                                             std::uint64_t seed,
                                             std::uint64_t stream = 0) {
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i)
    bits[i] = static_cast<std::uint8_t>(
        (random_word(seed, stream, i >> 6) >> (i & 63)) & 1u);
  return bits;
}

struct FskDemodResult {
  std::vector<std::uint8_t> bits;           // MSB-first per symbol
  std::vector<std::uint8_t> symbol_erased;  // 1 if any sample was invalid
  std::size_t n_symbols = 0;
  std::uint32_t bits_per_symbol = 0;
};

// Noncoherent M-ary FSK demodulation: per symbol, correlate against each
// tone template (phase reset at symbol start, matching the modulator) and
// pick the largest magnitude. Symbols touching invalid samples are still
// decided but flagged erased.
inline FskDemodResult demod_fsk(const IqTrace& rx, std::uint32_t m_ary,
                                double symbol_rate, double tone_spacing) {
  rx.validate();
  if (m_ary < 2 || (m_ary & (m_ary - 1)) != 0)
    throw ConfigError("m_ary must be a power of two, at least 2");
  if (!(symbol_rate > 0.0) || !(tone_spacing > 0.0))
    throw DomainError("symbol_rate and tone_spacing must be positive");
  const double fs = rx.sample_rate;
  const double sps_f = fs / symbol_rate;
  const double sps_r = std::round(sps_f);
  if (std::abs(sps_f - sps_r) > 1e-9 * sps_f || sps_r < 1.0)
    throw ConfigError("sample_rate must be an integer multiple of symbol_rate");
  const std::size_t sps = static_cast<std::size_t>(sps_r);
  const std::size_t n_sym = rx.samples.size() / sps;
  if (n_sym == 0)
    throw FramingError("trace shorter than one symbol");

  std::uint32_t bits_per_symbol = 0;
  for (std::uint32_t v = m_ary; v > 1; v >>= 1) ++bits_per_symbol;

  // Conjugated tone templates, one per tone index.
  std::vector<std::vector<std::complex<double>>> tmpl(m_ary);
  for (std::uint32_t m = 0; m < m_ary; ++m) {
    const double offset =
        (static_cast<double>(m) - 0.5 * static_cast<double>(m_ary - 1)) *
        tone_spacing;
    tmpl[m].resize(sps);
    for (std::size_t i = 0; i < sps; ++i) {
      const double ph = two_pi * offset * static_cast<double>(i) / fs;
      tmpl[m][i] = {std::cos(ph), -std::sin(ph)};
    }
  }

  FskDemodResult out;
  out.n_symbols = n_sym;
  out.bits_per_symbol = bits_per_symbol;
  out.bits.resize(n_sym * bits_per_symbol);
  out.symbol_erased.assign(n_sym, 0);
  for (std::size_t s = 0; s < n_sym; ++s) {
    const std::size_t base = s * sps;
    bool erased = false;
    for (std::size_t i = 0; i < sps && !erased; ++i)
      if (!rx.is_valid(base + i)) erased = true;
    out.symbol_erased[s] = erased ? 1 : 0;

    std::uint32_t best = 0;
    double best_mag = -1.0;
    for (std::uint32_t m = 0; m < m_ary; ++m) {
      std::complex<double> corr{0.0, 0.0};
      for (std::size_t i = 0; i < sps; ++i)
        corr += rx.samples[base + i] * tmpl[m][i];
      const double mag = std::norm(corr);
      if (mag > best_mag) {
        best_mag = mag;
        best = m;
      }
    }
    const std::uint32_t value = gray_encode(best);
    for (std::uint32_t b = 0; b < bits_per_symbol; ++b)
      out.bits[s * bits_per_symbol + b] = static_cast<std::uint8_t>(
          (value >> (bits_per_symbol - 1 - b)) & 1u);
  }
  return out;
}

// Adds a power-scaled interferer on top of a signal. The interference to
// signal ratio is set against the clean signal power; the interferer is
// tiled (or truncated) to cover the signal length.
inline Waveform inject_interference(const Waveform& signal,
                                    const Waveform& interferer,
                                    double isr_db) {
  signal.validate();
  interferer.validate();
  if (signal.samples.empty() || interferer.samples.empty())
    throw ConfigError("signal and interferer must be non-empty");
  if (signal.sample_rate != interferer.sample_rate)
    throw ConfigError("signal and interferer sample rates must match");
  if (signal.carrier_freq != interferer.carrier_freq)
    throw ConfigError("signal and interferer carriers must match");
  if (!interferer.retune_schedule.empty())
    throw ConfigError("interferer must not carry a retune schedule");
  if (std::isnan(isr_db)) throw DomainError("isr_db must not be NaN");
  if (isr_db == -std::numeric_limits<double>::infinity()) return signal;
  if (!std::isfinite(isr_db)) throw DomainError("isr_db must be finite");

  const std::size_t n = signal.samples.size();
  const std::size_t ni = interferer.samples.size();
  double p_s = 0.0;
  for (const auto& s : signal.samples) p_s += std::norm(s);
  p_s /= static_cast<double>(n);
  if (p_s == 0.0)
    throw DomainError("zero-power signal: interference ratio is undefined");
  double p_i = 0.0;
  for (std::size_t i = 0; i < n; ++i) p_i += std::norm(interferer.samples[i % ni]);
  p_i /= static_cast<double>(n);
  if (p_i == 0.0)
    throw DomainError("zero-power interferer: cannot realize the ratio");

  const double alpha = std::sqrt(std::pow(10.0, isr_db / 10.0) * p_s / p_i);
  Waveform out = signal;
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] += alpha * interferer.samples[i % ni];
  out.inst_bandwidth =
      std::max(signal.inst_bandwidth, interferer.inst_bandwidth);
  return out;
}

struct BerReport {
  std::size_t n_bits = 0;
  std::size_t n_errors = 0;
  double ber = 0.0;
  double snr_db = 0.0;
  double isr_db = -std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

// Straight bit comparison; the rate/ratio fields are stamped from the
// arguments so reports stay self-describing.
inline BerReport measure_ber(
    const std::vector<std::uint8_t>& tx_bits,
    const std::vector<std::uint8_t>& rx_bits, double snr_db = 0.0,
    double isr_db = -std::numeric_limits<double>::infinity(),
    std::uint64_t seed = 0) {
  if (tx_bits.size() != rx_bits.size())
    throw ConfigError("bit vectors must have equal length");
  if (tx_bits.empty()) throw ConfigError("bit vectors must be non-empty");
  BerReport r;
  r.n_bits = tx_bits.size();
  for (std::size_t i = 0; i < tx_bits.size(); ++i)
    if (tx_bits[i] != rx_bits[i]) ++r.n_errors;
  r.ber = static_cast<double>(r.n_errors) / static_cast<double>(r.n_bits);
  r.snr_db = snr_db;
  r.isr_db = isr_db;
  r.seed = seed;
  return r;
}

enum class ErasurePolicy { Drop, CountAsError };

// BER against transmitted bits honoring the erasure policy: Drop removes
// erased symbols from both counts, CountAsError charges every bit of an
// erased symbol as wrong.
inline BerReport ber_with_erasures(
    const std::vector<std::uint8_t>& tx_bits, const FskDemodResult& demod,
    ErasurePolicy policy = ErasurePolicy::Drop, double snr_db = 0.0,
    double isr_db = -std::numeric_limits<double>::infinity(),
    std::uint64_t seed = 0) {
  if (tx_bits.size() != demod.bits.size())
    throw ConfigError("transmitted bit count must match demodulated bits");
  const std::uint32_t bps = demod.bits_per_symbol;
  BerReport r;
  r.snr_db = snr_db;
  r.isr_db = isr_db;
  r.seed = seed;
  for (std::size_t s = 0; s < demod.n_symbols; ++s) {
    if (demod.symbol_erased[s]) {
      if (policy == ErasurePolicy::CountAsError) {
        r.n_bits += bps;
        r.n_errors += bps;
      }
      continue;
    }
    for (std::uint32_t b = 0; b < bps; ++b) {
      const std::size_t i = s * bps + b;
      ++r.n_bits;
      if (tx_bits[i] != demod.bits[i]) ++r.n_errors;
    }
  }
  if (r.n_bits == 0)
    throw FramingError("every symbol was erased: no bits to compare");
  r.ber = static_cast<double>(r.n_errors) / static_cast<double>(r.n_bits);
  return r;
}

// Symbol energy to noise density ratio for a unit template: Es/N0 =
// n_sps A^2 / (2 sigma^2) with sigma the per-component noise deviation.
inline double fsk_esn0_linear(double amplitude, double sigma_per_component,
                              std::size_t samples_per_symbol) {
  if (!(sigma_per_component > 0.0))
    throw DomainError("sigma must be positive");
  return static_cast<double>(samples_per_symbol) * amplitude * amplitude /
         (2.0 * sigma_per_component * sigma_per_component);
}

// Exact symbol error rate of noncoherent orthogonal M-ary FSK in white
// noise: the alternating binomial sum over pairwise error unions.
inline double fsk_noncoherent_ser(std::uint32_t m_ary, double esn0_linear) {
  if (m_ary < 2 || (m_ary & (m_ary - 1)) != 0)
    throw ConfigError("m_ary must be a power of two, at least 2");
  if (esn0_linear < 0.0) throw DomainError("Es/N0 must be non-negative");
  double ser = 0.0;
  double binom = 1.0;  // C(M-1, k), updated incrementally
  const double mm1 = static_cast<double>(m_ary - 1);
  for (std::uint32_t k = 1; k < m_ary; ++k) {
    binom *= (mm1 - static_cast<double>(k - 1)) / static_cast<double>(k);
    const double kk = static_cast<double>(k);
    const double term =
        binom / (kk + 1.0) * std::exp(-kk / (kk + 1.0) * esn0_linear);
    ser += (k % 2 == 1) ? term : -term;
  }
  return ser;
}

// Orthogonal-signalling bit error rate: each symbol error picks uniformly
// among the other tones, flipping M/2 of M-1 bits on average per bit.
inline double fsk_noncoherent_ber(std::uint32_t m_ary, double esn0_linear) {
  const double ser = fsk_noncoherent_ser(m_ary, esn0_linear);
  return ser * 0.5 * static_cast<double>(m_ary) /
         static_cast<double>(m_ary - 1);
}

}  // namespace rydar
