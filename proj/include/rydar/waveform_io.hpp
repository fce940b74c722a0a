#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "rydar/errors.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

static_assert(std::endian::native == std::endian::little,
              "waveform container assumes a little-endian host");

inline constexpr char waveform_magic[4] = {'R', 'Y', 'W', 'F'};
inline constexpr std::uint32_t waveform_container_version = 1;

namespace detail {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw SchemaError("waveform container truncated");
}

}  // namespace detail

// Little-endian container: magic, format version, then the header
// (sample_rate f64, carrier_freq f64, inst_bandwidth f64, kind u32,
// sample count u64, retune count u64), the retune events as (time f64,
// center f64) pairs, and finally interleaved I/Q float64 pairs.
inline void save_waveform(const Waveform& w, const std::string& path) {
  w.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(waveform_magic, 4);
  detail::write_pod(out, waveform_container_version);
  detail::write_pod(out, w.sample_rate);
  detail::write_pod(out, w.carrier_freq);
  detail::write_pod(out, w.inst_bandwidth);
  detail::write_pod(out, static_cast<std::uint32_t>(w.kind));
  detail::write_pod(out, static_cast<std::uint64_t>(w.samples.size()));
  detail::write_pod(out,
                    static_cast<std::uint64_t>(w.retune_schedule.size()));
  for (const auto& ev : w.retune_schedule) {
    detail::write_pod(out, ev.time);
    detail::write_pod(out, ev.center_freq);
  }
  for (const auto& s : w.samples) {
    detail::write_pod(out, s.real());
    detail::write_pod(out, s.imag());
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

// Inverse of save_waveform.
inline Waveform load_waveform(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(waveform_magic, 4))
    throw SchemaError("not a waveform container: bad magic");
  std::uint32_t version = 0;
  detail::read_pod(in, version);
  if (version != waveform_container_version)
    throw SchemaError("unsupported waveform container version");
  Waveform w;
  std::uint32_t kind = 0;
  std::uint64_t length = 0;
  std::uint64_t n_events = 0;
  detail::read_pod(in, w.sample_rate);
  detail::read_pod(in, w.carrier_freq);
  detail::read_pod(in, w.inst_bandwidth);
  detail::read_pod(in, kind);
  detail::read_pod(in, length);
  detail::read_pod(in, n_events);
  if (kind > static_cast<std::uint32_t>(WaveformKind::FreqHop))
    throw SchemaError("unknown waveform kind in container");
  w.kind = static_cast<WaveformKind>(kind);
  w.retune_schedule.resize(n_events);
  for (auto& ev : w.retune_schedule) {
    detail::read_pod(in, ev.time);
    detail::read_pod(in, ev.center_freq);
  }
  w.samples.resize(length);
  for (auto& s : w.samples) {
    double re = 0.0, im = 0.0;
    detail::read_pod(in, re);
    detail::read_pod(in, im);
    s = {re, im};
  }
  w.validate();
  return w;
}

// Text form: one "t_s,i,q" row per sample with full float64 round-trip
// precision.
inline void export_waveform_csv(const Waveform& w, const std::string& path) {
  w.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "t_s,i,q\n";
  char buf[96];
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double t = static_cast<double>(i) / w.sample_rate;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t,
                  w.samples[i].real(), w.samples[i].imag());
    out << buf;
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace rydar
