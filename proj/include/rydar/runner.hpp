#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rydar/channel.hpp"
#include "rydar/comms.hpp"
#include "rydar/csv.hpp"
#include "rydar/frontend.hpp"
#include "rydar/radar.hpp"
#include "rydar/scenario.hpp"
#include "rydar/version.hpp"
#include "rydar/waveform.hpp"

namespace rydar {

namespace detail {
constexpr std::uint64_t tag_trial = 0x747269616cull;  // ascii "trial"
constexpr std::uint64_t tag_sweep = 0x7377656570ull;  // ascii "sweep"
}  // namespace detail

// Per-trial stream root: hash of (master seed, scenario id, trial index),
// so execution order and trial subsets never change a trial's draws.
inline std::uint64_t trial_seed(std::uint64_t master_seed, ScenarioKind kind,
                                std::uint64_t trial_index) {
  return hash_combine(
      hash_combine(hash_combine(master_seed, detail::tag_trial),
                   static_cast<std::uint64_t>(kind)),
      trial_index);
}

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  bool quiet = false;
  bool write_outputs = true;
  std::vector<std::size_t> trial_order;  // empty: natural order
};

namespace detail {

inline void apply_overrides(ScenarioConfig& cfg, const RunOptions& opt) {
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.trials) {
    if (*opt.trials == 0) throw ConfigError("trials must be at least 1");
    cfg.trials = *opt.trials;
  }
}

inline std::vector<std::size_t> resolve_order(std::size_t trials,
                                              const RunOptions& opt) {
  if (opt.trial_order.empty()) {
    std::vector<std::size_t> order(trials);
    for (std::size_t i = 0; i < trials; ++i) order[i] = i;
    return order;
  }
  if (opt.trial_order.size() != trials)
    throw ConfigError("trial_order must be a permutation of all trials");
  std::vector<std::uint8_t> seen(trials, 0);
  for (std::size_t i : opt.trial_order) {
    if (i >= trials || seen[i])
      throw ConfigError("trial_order must be a permutation of all trials");
    seen[i] = 1;
  }
  return opt.trial_order;
}

// Guards an output directory against mixing results from different configs.
inline void prepare_out_dir(const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path snap = fs::path(cfg.out_dir) / "config.json";
  if (fs::exists(snap)) {
    const nlohmann::json old = load_json_file(snap.string());
    if (fnv1a64(old.dump()) != cfg.config_hash)
      throw ConfigError(
          "output directory holds results for a different config: " +
          cfg.out_dir);
  }
  std::ofstream out(snap, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + snap.string());
  out << cfg.snapshot.dump(2) << '\n';
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Radar ranging scenario
// ---------------------------------------------------------------------------

struct RadarTrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double truth_m = 0.0;
  bool detected = false;
  double est_m = 0.0;
  double err_m = 0.0;
  bool ambiguous = false;  // truth beyond the unambiguous window
};

struct RadarReport {
  std::uint64_t config_hash = 0;
  std::vector<RadarTrialRecord> trials;
  std::size_t n_detected = 0;
  double rmse_m = 0.0;
  double max_abs_err_m = 0.0;
  double unambiguous_window_m = 0.0;
  double wall_s = 0.0;
  std::string out_dir;
  bool threshold_failed = false;
};

namespace detail {

struct RadarGeometry {
  HopPlan plan;
  std::size_t n_per = 0;
  std::size_t latency = 0;
  std::size_t valid_per_step = 0;
};

inline RadarGeometry radar_geometry(const ScenarioConfig& cfg) {
  const RadarScenario& r = cfg.radar;
  RadarGeometry g;
  g.plan.n_steps = r.n_steps;
  g.plan.step_spacing = r.step_spacing_hz;
  g.plan.dwell = r.dwell_s;
  g.plan.per_step_bandwidth = 2.0 / r.dwell_s;
  const double n_per_f = std::round(r.dwell_s * r.sample_rate_hz);
  if (n_per_f < 2.0) throw ConfigError("dwell shorter than two samples");
  g.n_per = static_cast<std::size_t>(n_per_f);
  g.latency = static_cast<std::size_t>(
      std::round(cfg.frontend.retune_latency * r.sample_rate_hz));
  if (g.latency + 2 * r.guard_samples + 1 >= g.n_per)
    throw ConfigError(
        "retune latency and guards leave no valid samples per dwell");
  g.valid_per_step = g.n_per - g.latency - 2 * r.guard_samples;
  return g;
}

inline double radar_awgn_sigma(const ScenarioConfig& cfg,
                               const RadarGeometry& g) {
  if (!cfg.radar.per_step_snr_db) return 0.0;
  const double snr = std::pow(10.0, *cfg.radar.per_step_snr_db / 10.0);
  return cfg.radar.rcs_gain *
         std::sqrt(static_cast<double>(g.valid_per_step) / (2.0 * snr));
}

}  // namespace detail

// One ranging trial: hop transmit, point-target echo at a truth range drawn
// uniformly, atomic readout, per-dwell coherent averages, synthesis.
inline RadarTrialRecord run_radar_trial(const ScenarioConfig& cfg,
                                        std::size_t trial_index) {
  const RadarScenario& r = cfg.radar;
  const detail::RadarGeometry g = detail::radar_geometry(cfg);
  RadarTrialRecord rec;
  rec.trial = trial_index;
  rec.seed = trial_seed(cfg.seed, ScenarioKind::RadarRanging, trial_index);
  rec.truth_m = r.range_min_m +
                (r.range_max_m - r.range_min_m) * uniform01(rec.seed, 1, 0);

  const Waveform tx = gen_freq_hop(g.plan, r.sample_rate_hz, 0.0,
                                   r.tuning_window_hz);
  const double sigma = detail::radar_awgn_sigma(cfg, g);
  const Waveform rx =
      monostatic_echo(tx, rec.truth_m, r.rcs_gain, sigma, rec.seed, 2);

  const RfTone lo(cfg.lo_amplitude, 0.0, 0.0);
  NoiseParams noise = cfg.noise;
  noise.seed = rec.seed;
  const IqTrace trace =
      measure_waveform(rx, lo, cfg.atomic, noise, NoiseContext{3, 0},
                       cfg.frontend);

  std::vector<std::complex<double>> per_step(r.n_steps);
  for (std::size_t i = 0; i < r.n_steps; ++i) {
    const std::size_t lo_idx = i * g.n_per + g.latency + r.guard_samples;
    const std::size_t hi_idx = (i + 1) * g.n_per - r.guard_samples;
    std::complex<double> acc{0.0, 0.0};
    std::size_t count = 0;
    for (std::size_t k = lo_idx; k < hi_idx && k < trace.size(); ++k) {
      if (!trace.is_valid(k)) continue;
      acc += trace.samples[k];
      ++count;
    }
    if (count == 0)
      throw ConfigError("dwell window contains no valid samples");
    per_step[i] = acc / static_cast<double>(count);
  }

  const auto est = stepped_synthesis_range(per_step, g.plan,
                                           r.detection_threshold,
                                           r.grid_points);
  const double window = speed_of_light / (2.0 * r.step_spacing_hz);
  rec.ambiguous = rec.truth_m >= window;
  if (est) {
    rec.detected = true;
    rec.est_m = est->range_m;
    rec.err_m = est->range_m - rec.truth_m;
  }
  return rec;
}

inline RadarReport run_radar(const ScenarioConfig& cfg_in,
                             const RunOptions& opt = {}) {
  ScenarioConfig cfg = cfg_in;
  detail::apply_overrides(cfg, opt);
  if (cfg.kind != ScenarioKind::RadarRanging)
    throw ConfigError("scenario kind is not RADAR_RANGING");
  const detail::WallClock clock;

  RadarReport rep;
  rep.config_hash = cfg.config_hash;
  rep.out_dir = cfg.out_dir;
  rep.unambiguous_window_m =
      speed_of_light / (2.0 * cfg.radar.step_spacing_hz);
  rep.trials.resize(cfg.trials);
  for (std::size_t i : detail::resolve_order(cfg.trials, opt))
    rep.trials[i] = run_radar_trial(cfg, i);

  double acc = 0.0;
  for (const auto& t : rep.trials) {
    if (!t.detected) continue;
    ++rep.n_detected;
    acc += t.err_m * t.err_m;
    rep.max_abs_err_m = std::max(rep.max_abs_err_m, std::abs(t.err_m));
  }
  rep.rmse_m = rep.n_detected > 0
                   ? std::sqrt(acc / static_cast<double>(rep.n_detected))
                   : std::numeric_limits<double>::quiet_NaN();
  rep.threshold_failed =
      cfg.radar.max_rmse_m &&
      !(rep.n_detected == cfg.trials && rep.rmse_m <= *cfg.radar.max_rmse_m);
  rep.wall_s = clock.seconds();

  if (opt.write_outputs) {
    detail::prepare_out_dir(cfg);
    CsvWriter csv(cfg.out_dir + "/trials.csv");
    csv.row({"trial", "seed", "truth_m", "est_m", "err_m", "method"});
    for (const auto& t : rep.trials) {
      csv.row({format_u64(t.trial), format_u64(t.seed), format_g17(t.truth_m),
               t.detected ? format_g17(t.est_m) : "",
               t.detected ? format_g17(t.err_m) : "",
               t.detected ? range_method_name(RangeMethod::SteppedSynth)
                          : ""});
    }
    csv.row({"RMSE", "", "", "", format_g17(rep.rmse_m), ""});

    std::ofstream sum(cfg.out_dir + "/summary.txt",
                      std::ios::binary | std::ios::trunc);
    sum << "version: " << version_string << '\n'
        << "kind: " << scenario_kind_name(cfg.kind) << '\n'
        << "config_hash: " << detail::hash_hex(rep.config_hash) << '\n'
        << "trials: " << cfg.trials << '\n'
        << "detected: " << rep.n_detected << '\n'
        << "rmse_m: " << format_g17(rep.rmse_m) << '\n'
        << "max_abs_err_m: " << format_g17(rep.max_abs_err_m) << '\n'
        << "unambiguous_window_m: " << format_g17(rep.unambiguous_window_m)
        << '\n'
        << "wall_s: " << format_g17(rep.wall_s) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Communication BER scenario
// ---------------------------------------------------------------------------

struct CommsReport {
  std::uint64_t config_hash = 0;
  std::vector<BerReport> trials;
  BerReport total;
  std::size_t n_erased_symbols = 0;
  double wall_s = 0.0;
  std::string out_dir;
  bool threshold_failed = false;
};

// One interference period: a linear chirp burst followed by silence; the
// injection step tiles it across the whole message.
inline Waveform make_interferer(const InterfererSpec& spec, double fs,
                                double fc = 0.0) {
  Waveform burst = gen_lfm(spec.bandwidth_hz, spec.pulse_s, fs, fc);
  const auto period_n =
      static_cast<std::size_t>(std::llround(spec.period_s * fs));
  if (period_n < burst.samples.size())
    throw ConfigError("interferer period shorter than its pulse");
  burst.samples.resize(period_n, {0.0, 0.0});
  return burst;
}

inline IqTrace slice_trace(const IqTrace& t, std::size_t start,
                           std::size_t count) {
  if (start + count > t.samples.size())
    throw FramingError("trace shorter than the requested slice");
  IqTrace out;
  out.sample_rate = t.sample_rate;
  out.samples.assign(t.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     t.samples.begin() +
                         static_cast<std::ptrdiff_t>(start + count));
  if (!t.valid.empty())
    out.valid.assign(t.valid.begin() + static_cast<std::ptrdiff_t>(start),
                     t.valid.begin() +
                         static_cast<std::ptrdiff_t>(start + count));
  return out;
}

inline std::uint32_t bits_per_fsk_symbol(std::uint32_t m_ary) {
  std::uint32_t b = 0;
  for (std::uint32_t v = m_ary; v > 1; v >>= 1) ++b;
  return b;
}

inline BerReport run_comms_trial(const ScenarioConfig& cfg,
                                 std::size_t trial_index,
                                 std::size_t* erased_out = nullptr) {
  const CommsScenario& c = cfg.comms;
  const std::uint64_t seed =
      trial_seed(cfg.seed, ScenarioKind::CommsBer, trial_index);
  const std::uint32_t bps = bits_per_fsk_symbol(c.m_ary);
  const std::vector<std::uint8_t> bits =
      random_bits(c.n_symbols * bps, seed, 10);

  Waveform tx = gen_fsk(bits, c.m_ary, c.symbol_rate_hz, c.tone_spacing_hz,
                        c.sample_rate_hz);
  if (c.isr_db) {
    const Waveform interferer = make_interferer(c.interferer,
                                                c.sample_rate_hz);
    tx = inject_interference(tx, interferer, *c.isr_db);
  }

  const double esn0 = std::pow(10.0, c.esn0_db / 10.0);
  const auto sps = static_cast<std::size_t>(
      std::llround(c.sample_rate_hz / c.symbol_rate_hz));
  const double sigma =
      std::sqrt(static_cast<double>(sps) / (2.0 * esn0));
  PathSet ps;
  ps.paths.push_back({c.path_delay_s, 0.0, 1.0, 0.0});
  const Waveform rx = propagate(tx, ps, sigma, seed, 11);

  const RfTone lo(cfg.lo_amplitude, 0.0, 0.0);
  NoiseParams noise = cfg.noise;
  noise.seed = seed;
  const IqTrace trace =
      measure_waveform(rx, lo, cfg.atomic, noise, NoiseContext{12, 0},
                       cfg.frontend);

  // Genie timing: symbol boundaries are aligned to the known path delay.
  const auto offset = static_cast<std::size_t>(
      std::llround(c.path_delay_s * c.sample_rate_hz));
  const IqTrace aligned = slice_trace(trace, offset, c.n_symbols * sps);
  const FskDemodResult dem =
      demod_fsk(aligned, c.m_ary, c.symbol_rate_hz, c.tone_spacing_hz);
  if (erased_out) {
    *erased_out = 0;
    for (std::uint8_t e : dem.symbol_erased)
      if (e) ++*erased_out;
  }
  return ber_with_erasures(bits, dem, c.erasure_policy, c.esn0_db,
                           c.isr_db ? *c.isr_db
                                    : -std::numeric_limits<double>::infinity(),
                           seed);
}

inline CommsReport run_comms(const ScenarioConfig& cfg_in,
                             const RunOptions& opt = {}) {
  ScenarioConfig cfg = cfg_in;
  detail::apply_overrides(cfg, opt);
  if (cfg.kind != ScenarioKind::CommsBer)
    throw ConfigError("scenario kind is not COMMS_BER");
  const detail::WallClock clock;

  CommsReport rep;
  rep.config_hash = cfg.config_hash;
  rep.out_dir = cfg.out_dir;
  rep.trials.resize(cfg.trials);
  std::vector<std::size_t> erased(cfg.trials, 0);
  for (std::size_t i : detail::resolve_order(cfg.trials, opt))
    rep.trials[i] = run_comms_trial(cfg, i, &erased[i]);

  rep.total.snr_db = cfg.comms.esn0_db;
  rep.total.isr_db = cfg.comms.isr_db
                         ? *cfg.comms.isr_db
                         : -std::numeric_limits<double>::infinity();
  rep.total.seed = cfg.seed;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    rep.total.n_bits += rep.trials[i].n_bits;
    rep.total.n_errors += rep.trials[i].n_errors;
    rep.n_erased_symbols += erased[i];
  }
  rep.total.ber = static_cast<double>(rep.total.n_errors) /
                  static_cast<double>(rep.total.n_bits);
  rep.threshold_failed =
      cfg.comms.max_ber && !(rep.total.ber <= *cfg.comms.max_ber);
  rep.wall_s = clock.seconds();

  if (opt.write_outputs) {
    detail::prepare_out_dir(cfg);
    CsvWriter csv(cfg.out_dir + "/ber.csv");
    csv.row({"trial", "seed", "snr_db", "isr_db", "n_bits", "n_errors",
             "ber"});
    const std::string isr_cell =
        cfg.comms.isr_db ? format_g17(*cfg.comms.isr_db) : "";
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const BerReport& t = rep.trials[i];
      csv.row({format_u64(i), format_u64(t.seed), format_g17(t.snr_db),
               isr_cell, format_u64(t.n_bits), format_u64(t.n_errors),
               format_g17(t.ber)});
    }
    csv.row({"TOTAL", "", format_g17(rep.total.snr_db), isr_cell,
             format_u64(rep.total.n_bits), format_u64(rep.total.n_errors),
             format_g17(rep.total.ber)});

    std::ofstream sum(cfg.out_dir + "/summary.txt",
                      std::ios::binary | std::ios::trunc);
    sum << "version: " << version_string << '\n'
        << "kind: " << scenario_kind_name(cfg.kind) << '\n'
        << "config_hash: " << detail::hash_hex(rep.config_hash) << '\n'
        << "trials: " << cfg.trials << '\n'
        << "n_bits: " << rep.total.n_bits << '\n'
        << "n_errors: " << rep.total.n_errors << '\n'
        << "ber: " << format_g17(rep.total.ber) << '\n'
        << "erased_symbols: " << rep.n_erased_symbols << '\n'
        << "wall_s: " << format_g17(rep.wall_s) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Spectrum demo scenario
// ---------------------------------------------------------------------------

struct SpectrumReport {
  std::uint64_t config_hash = 0;
  double k0 = 0.0;
  double shift_hz = 0.0;  // analytic tracked-peak displacement
  double gradient_center_baseline = 0.0;
  double gradient_center_shifted = 0.0;
  double wall_s = 0.0;
  std::string out_dir;
  bool threshold_failed = false;  // spectrum demo has no gate
};

inline SpectrumReport run_spectrum(const ScenarioConfig& cfg_in,
                                   const RunOptions& opt = {}) {
  ScenarioConfig cfg = cfg_in;
  detail::apply_overrides(cfg, opt);
  if (cfg.kind != ScenarioKind::SpectrumDemo)
    throw ConfigError("scenario kind is not SPECTRUM_DEMO");
  const detail::WallClock clock;
  const SpectrumScenario& s = cfg.spectrum;
  const AtomicParams& p = cfg.atomic;

  const double span = s.grid_span_linewidths * p.linewidth;
  const GridSpec grid{p.center_freq - 0.5 * span, p.center_freq + 0.5 * span,
                      s.grid_points};
  const SpectrumProfile baseline = model_spectrum(p, 0.0, grid);

  SpectrumReport rep;
  rep.config_hash = cfg.config_hash;
  rep.out_dir = cfg.out_dir;
  rep.k0 = slope_k0(p);
  rep.shift_hz = detail::readout_scale(p).field_to_shift * s.rf_amplitude *
                 std::cos(s.rf_phase_rad);
  const SpectrumProfile shifted =
      s.rf_amplitude > 0.0 ? model_spectrum(p, rep.shift_hz, grid) : baseline;

  const double dither = s.dither_fraction * p.linewidth;
  rep.gradient_center_baseline =
      lia_gradient_readout(baseline, p.center_freq, dither);
  rep.gradient_center_shifted =
      lia_gradient_readout(shifted, p.center_freq, dither);
  rep.wall_s = clock.seconds();

  if (opt.write_outputs) {
    detail::prepare_out_dir(cfg);
    CsvWriter spec_csv(cfg.out_dir + "/spectrum.csv");
    spec_csv.row({"detuning_hz", "p_out_lo", "p_out_lo_rf"});
    for (std::size_t i = 0; i < baseline.freq_grid.size(); ++i)
      spec_csv.row({format_g17(baseline.freq_grid[i] - p.center_freq),
                    format_g17(baseline.p_out[i]),
                    format_g17(shifted.p_out[i])});

    CsvWriter grad_csv(cfg.out_dir + "/gradient.csv");
    grad_csv.row({"detuning_hz", "gradient_lo", "gradient_lo_rf"});
    const double probe_span = s.probe_span_linewidths * p.linewidth;
    for (std::size_t i = 0; i < s.probe_points; ++i) {
      const double f =
          p.center_freq - 0.5 * probe_span +
          probe_span * static_cast<double>(i) /
              static_cast<double>(s.probe_points - 1);
      grad_csv.row({format_g17(f - p.center_freq),
                    format_g17(lia_gradient_readout(baseline, f, dither)),
                    format_g17(lia_gradient_readout(shifted, f, dither))});
    }

    std::ofstream sum(cfg.out_dir + "/summary.txt",
                      std::ios::binary | std::ios::trunc);
    sum << "version: " << version_string << '\n'
        << "kind: " << scenario_kind_name(cfg.kind) << '\n'
        << "config_hash: " << detail::hash_hex(rep.config_hash) << '\n'
        << "k0: " << format_g17(rep.k0) << '\n'
        << "shift_hz: " << format_g17(rep.shift_hz) << '\n'
        << "gradient_center_lo: "
        << format_g17(rep.gradient_center_baseline) << '\n'
        << "gradient_center_lo_rf: "
        << format_g17(rep.gradient_center_shifted) << '\n'
        << "wall_s: " << format_g17(rep.wall_s) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Bandwidth gate scenario
// ---------------------------------------------------------------------------

struct GateReport {
  std::uint64_t config_hash = 0;
  bool pass = false;
  double worst_occupied_hz = 0.0;
  double limit_hz = 0.0;
  std::size_t n_segments = 0;
  double wall_s = 0.0;
  std::string out_dir;
  bool threshold_failed = false;
};

inline Waveform build_gate_waveform(const GateScenario& g) {
  if (g.waveform == "LFM")
    return gen_lfm(g.bandwidth_hz, g.duration_s, g.sample_rate_hz);
  if (g.waveform == "TONE")
    return gen_tone(g.tone_offset_hz, g.duration_s, g.sample_rate_hz);
  HopPlan plan;
  plan.n_steps = g.n_steps;
  plan.step_spacing = g.step_spacing_hz;
  plan.dwell = g.dwell_s;
  plan.per_step_bandwidth =
      g.per_step_bandwidth_hz > 0.0 ? g.per_step_bandwidth_hz : 2.0 / g.dwell_s;
  return gen_freq_hop(plan, g.sample_rate_hz, 0.0, g.tuning_window_hz);
}

inline GateReport run_gate(const ScenarioConfig& cfg_in,
                           const RunOptions& opt = {}) {
  ScenarioConfig cfg = cfg_in;
  detail::apply_overrides(cfg, opt);
  if (cfg.kind != ScenarioKind::BandwidthGate)
    throw ConfigError("scenario kind is not BANDWIDTH_GATE");
  const detail::WallClock clock;

  const Waveform w = build_gate_waveform(cfg.gate);
  BandwidthCheckOptions bopt;
  bopt.retune_latency = cfg.frontend.retune_latency;
  const BandwidthReport bw =
      check_instantaneous_bandwidth(w, cfg.gate.limit_hz, bopt);

  GateReport rep;
  rep.config_hash = cfg.config_hash;
  rep.out_dir = cfg.out_dir;
  rep.pass = bw.pass;
  rep.worst_occupied_hz = bw.worst_occupied;
  rep.limit_hz = bw.limit;
  rep.n_segments = bw.segments.size();
  rep.threshold_failed = !bw.pass;
  rep.wall_s = clock.seconds();

  if (opt.write_outputs) {
    detail::prepare_out_dir(cfg);
    CsvWriter csv(cfg.out_dir + "/gate.csv");
    csv.row({"segment", "t_begin_s", "t_end_s", "occupied_hz", "limit_hz",
             "pass"});
    for (std::size_t i = 0; i < bw.segments.size(); ++i) {
      const SegmentOccupancy& seg = bw.segments[i];
      csv.row({format_u64(i), format_g17(seg.t_begin), format_g17(seg.t_end),
               format_g17(seg.occupied_bw), format_g17(bw.limit),
               seg.pass ? "1" : "0"});
    }

    std::ofstream sum(cfg.out_dir + "/summary.txt",
                      std::ios::binary | std::ios::trunc);
    sum << "version: " << version_string << '\n'
        << "kind: " << scenario_kind_name(cfg.kind) << '\n'
        << "config_hash: " << detail::hash_hex(rep.config_hash) << '\n'
        << "waveform: " << cfg.gate.waveform << '\n'
        << "pass: " << (rep.pass ? 1 : 0) << '\n'
        << "worst_occupied_hz: " << format_g17(rep.worst_occupied_hz) << '\n'
        << "limit_hz: " << format_g17(rep.limit_hz) << '\n'
        << "wall_s: " << format_g17(rep.wall_s) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Dispatch and sweeps
// ---------------------------------------------------------------------------

struct ScenarioOutcome {
  ScenarioKind kind = ScenarioKind::SpectrumDemo;
  std::uint64_t config_hash = 0;
  double metric = 0.0;  // RMSE (radar), BER (comms), occupancy (gate), k0
  bool threshold_failed = false;
  std::string out_dir;
};

inline ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                                    const RunOptions& opt = {}) {
  ScenarioOutcome out;
  out.kind = cfg.kind;
  switch (cfg.kind) {
    case ScenarioKind::RadarRanging: {
      const RadarReport r = run_radar(cfg, opt);
      out.config_hash = r.config_hash;
      out.metric = r.rmse_m;
      out.threshold_failed = r.threshold_failed;
      out.out_dir = r.out_dir;
      break;
    }
    case ScenarioKind::CommsBer: {
      const CommsReport r = run_comms(cfg, opt);
      out.config_hash = r.config_hash;
      out.metric = r.total.ber;
      out.threshold_failed = r.threshold_failed;
      out.out_dir = r.out_dir;
      break;
    }
    case ScenarioKind::SpectrumDemo: {
      const SpectrumReport r = run_spectrum(cfg, opt);
      out.config_hash = r.config_hash;
      out.metric = r.k0;
      out.threshold_failed = false;
      out.out_dir = r.out_dir;
      break;
    }
    case ScenarioKind::BandwidthGate: {
      const GateReport r = run_gate(cfg, opt);
      out.config_hash = r.config_hash;
      out.metric = r.worst_occupied_hz;
      out.threshold_failed = r.threshold_failed;
      out.out_dir = r.out_dir;
      break;
    }
  }
  return out;
}

struct SweepPoint {
  std::size_t index = 0;
  double value = 0.0;
  ScenarioOutcome outcome;
};

// Independent scenario runs along one numeric config axis ("comms.isr_db"
// or "/comms/isr_db"). Seeds are decorrelated per point; each point gets
// its own output subdirectory and the aggregate keys rows by config hash.
inline std::vector<SweepPoint> run_sweep(const nlohmann::json& base_config,
                                         const std::string& axis,
                                         const std::vector<double>& values,
                                         const RunOptions& opt = {}) {
  if (values.empty()) return {};
  std::string ptr_text = axis;
  if (ptr_text.empty()) throw ConfigError("sweep axis must be non-empty");
  if (ptr_text[0] != '/') {
    ptr_text = "/" + ptr_text;
    for (auto& ch : ptr_text)
      if (ch == '.') ch = '/';
  }
  const nlohmann::json::json_pointer ptr(ptr_text);

  nlohmann::json base = base_config;
  if (opt.seed) base["seed"] = *opt.seed;
  if (opt.trials) base["trials"] = *opt.trials;
  if (opt.out_dir) base["out_dir"] = *opt.out_dir;
  if (!base.contains(ptr))
    throw ConfigError("sweep axis does not resolve to a config field: " +
                      axis);
  if (!base.at(ptr).is_number() && !base.at(ptr).is_null())
    throw ConfigError("sweep axis is not a numeric config field: " + axis);
  const auto master_seed =
      base.contains("seed") ? base["seed"].get<std::uint64_t>() : 1ull;
  const std::string base_out =
      base.contains("out_dir") ? base["out_dir"].get<std::string>() : "out";

  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    nlohmann::json j = base;
    j[ptr] = values[i];
    j["seed"] = hash_combine(hash_combine(master_seed, detail::tag_sweep), i);
    char sub[32];
    std::snprintf(sub, sizeof sub, "/point_%02zu", i);
    j["out_dir"] = base_out + sub;
    const ScenarioConfig cfg = parse_scenario(j);
    RunOptions point_opt = opt;
    point_opt.seed.reset();
    point_opt.trials.reset();
    point_opt.out_dir.reset();
    SweepPoint pt;
    pt.index = i;
    pt.value = values[i];
    pt.outcome = run_scenario(cfg, point_opt);
    points.push_back(pt);
  }

  if (opt.write_outputs) {
    std::filesystem::create_directories(base_out);
    CsvWriter csv(base_out + "/sweep_summary.csv");
    csv.row({"point", "axis", "value", "config_hash", "metric", "out_dir"});
    for (const auto& pt : points)
      csv.row({format_u64(pt.index), axis, format_g17(pt.value),
               detail::hash_hex(pt.outcome.config_hash),
               format_g17(pt.outcome.metric), pt.outcome.out_dir});
  }
  return points;
}

}  // namespace rydar
