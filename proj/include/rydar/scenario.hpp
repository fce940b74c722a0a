#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rydar/atomic.hpp"
#include "rydar/comms.hpp"
#include "rydar/errors.hpp"
#include "rydar/frontend.hpp"

extern "C" {
extern char** environ;
}

namespace rydar {

enum class ScenarioKind { RadarRanging, CommsBer, SpectrumDemo, BandwidthGate };

inline const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::RadarRanging: return "RADAR_RANGING";
    case ScenarioKind::CommsBer: return "COMMS_BER";
    case ScenarioKind::SpectrumDemo: return "SPECTRUM_DEMO";
    case ScenarioKind::BandwidthGate: return "BANDWIDTH_GATE";
  }
  return "UNKNOWN";
}

inline const char* kind_section_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::RadarRanging: return "radar";
    case ScenarioKind::CommsBer: return "comms";
    case ScenarioKind::SpectrumDemo: return "spectrum";
    case ScenarioKind::BandwidthGate: return "gate";
  }
  return "unknown";
}

struct RadarScenario {
  std::size_t n_steps = 128;
  double step_spacing_hz = 8e6;
  double dwell_s = 1e-5;
  double sample_rate_hz = 2.56e7;
  double tuning_window_hz = 10e6;
  double range_min_m = 1.6;
  double range_max_m = 1.9;
  double rcs_gain = 1.0;
  std::optional<double> per_step_snr_db;  // absent: noise-free
  std::size_t guard_samples = 4;
  double detection_threshold = 8.0;
  std::size_t grid_points = 8192;
  std::optional<double> max_rmse_m;  // absent: no exit gate
};

struct InterfererSpec {
  double bandwidth_hz = 4e5;
  double pulse_s = 2.5e-4;
  double period_s = 5e-3;
};

struct CommsScenario {
  std::uint32_t m_ary = 4;
  double symbol_rate_hz = 8e4;
  double tone_spacing_hz = 8e4;
  double sample_rate_hz = 5.12e6;
  std::size_t n_symbols = 100000;
  double esn0_db = 8.2;
  std::optional<double> isr_db;  // absent: no interferer
  InterfererSpec interferer;
  ErasurePolicy erasure_policy = ErasurePolicy::Drop;
  double path_delay_s = 0.0;
  std::optional<double> max_ber;  // absent: no exit gate
};

struct SpectrumScenario {
  double rf_amplitude = 0.0;  // field units; 0 emits the baseline only
  double rf_phase_rad = 0.0;
  std::size_t grid_points = 2001;
  double grid_span_linewidths = 8.0;
  double dither_fraction = 0.005;  // dither amplitude / linewidth
  std::size_t probe_points = 41;
  double probe_span_linewidths = 0.2;
};

struct GateScenario {
  std::string waveform = "LFM";  // LFM, TONE, or HOP
  double sample_rate_hz = 1.25e8;
  double limit_hz = 10e6;
  // LFM and TONE
  double duration_s = 1e-4;
  double bandwidth_hz = 5e7;     // LFM sweep width
  double tone_offset_hz = 0.0;   // TONE offset from the carrier
  // HOP
  std::size_t n_steps = 128;
  double step_spacing_hz = 8e6;
  double dwell_s = 1e-5;
  double per_step_bandwidth_hz = 0.0;
  double tuning_window_hz = 10e6;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::SpectrumDemo;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::string out_dir = "out";
  AtomicParams atomic;
  NoiseParams noise;
  double lo_amplitude = 1e-2;  // field units
  FrontendOptions frontend;
  RadarScenario radar;
  CommsScenario comms;
  SpectrumScenario spectrum;
  GateScenario gate;
  nlohmann::json snapshot;  // normalized config the hash covers
  std::uint64_t config_hash = 0;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

// Object view that records consumed keys; finish() rejects leftovers so
// unknown or misplaced keys fail with their full path.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path)
      : j_(&j), path_(std::move(path)) {
    if (!j.is_object())
      throw SchemaError(label() + ": expected an object");
  }

  bool has(const std::string& k) const { return j_->contains(k); }

  const nlohmann::json& raw(const std::string& k) {
    seen_.insert(k);
    const auto it = j_->find(k);
    if (it == j_->end())
      throw SchemaError(path_ + "/" + k + ": missing required key");
    return *it;
  }

  double num(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_number())
      throw SchemaError(path_ + "/" + k + ": expected a number");
    return v.get<double>();
  }

  double num_or(const std::string& k, double dflt) {
    return has(k) ? num(k) : dflt;
  }

  std::optional<double> num_or_null(const std::string& k) {
    if (!has(k)) return std::nullopt;
    const auto& v = raw(k);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number())
      throw SchemaError(path_ + "/" + k + ": expected a number or null");
    return v.get<double>();
  }

  std::uint64_t uint(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_number_integer() ||
        (v.is_number_integer() && !v.is_number_unsigned() &&
         v.get<std::int64_t>() < 0))
      throw SchemaError(path_ + "/" + k + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::uint64_t uint_or(const std::string& k, std::uint64_t dflt) {
    return has(k) ? uint(k) : dflt;
  }

  std::string str(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_string())
      throw SchemaError(path_ + "/" + k + ": expected a string");
    return v.get<std::string>();
  }

  std::string str_or(const std::string& k, const std::string& dflt) {
    return has(k) ? str(k) : dflt;
  }

  Section sub(const std::string& k) {
    return Section(raw(k), path_ + "/" + k);
  }

  void finish() {
    for (const auto& item : j_->items())
      if (seen_.find(item.key()) == seen_.end())
        throw SchemaError("unknown key: " + path_ + "/" + item.key());
  }

  const std::string& path() const { return path_; }

 private:
  std::string label() const { return path_.empty() ? "/" : path_; }

  const nlohmann::json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "RADAR_RANGING") return ScenarioKind::RadarRanging;
  if (s == "COMMS_BER") return ScenarioKind::CommsBer;
  if (s == "SPECTRUM_DEMO") return ScenarioKind::SpectrumDemo;
  if (s == "BANDWIDTH_GATE") return ScenarioKind::BandwidthGate;
  throw SchemaError("/kind: unknown scenario kind '" + s + "'");
}

inline void parse_atomic(Section& root, ScenarioConfig& cfg) {
  if (!root.has("atomic")) return;
  Section a = root.sub("atomic");
  const std::string units = a.str_or("units", "NORMALIZED");
  if (units == "SI")
    cfg.atomic.units = UnitMode::Si;
  else if (units == "NORMALIZED")
    cfg.atomic.units = UnitMode::Normalized;
  else
    throw SchemaError("/atomic/units: expected SI or NORMALIZED");
  cfg.atomic.probe_rabi = a.num_or("probe_rabi_rad_s", 1.0);
  cfg.atomic.coupling_rabi = a.num_or("coupling_rabi_rad_s", 1.0);
  if (cfg.atomic.units == UnitMode::Si)
    cfg.atomic.dipole_moment = a.num("dipole_moment_c_m");
  else
    cfg.atomic.dipole_moment = a.num_or("dipole_moment", 1.0);
  cfg.atomic.scan_ratio = a.num_or("scan_ratio", 1.0);
  cfg.atomic.center_freq = a.num_or("center_freq_hz", 0.0);
  cfg.atomic.linewidth = a.num_or("linewidth_hz", 1e6);
  a.finish();
  try {
    cfg.atomic.validate();
  } catch (const Error& e) {
    throw SchemaError(std::string("/atomic: ") + e.what());
  }
}

inline void parse_noise(Section& root, ScenarioConfig& cfg) {
  if (!root.has("noise")) return;
  Section n = root.sub("noise");
  cfg.noise.sigma_psn = n.num_or("sigma_psn", 0.0);
  cfg.noise.sigma_bgn = n.num_or("sigma_bgn_field", 0.0);
  cfg.noise.sigma_qpn = n.num_or("sigma_qpn_field", 0.0);
  n.finish();
  try {
    cfg.noise.validate();
  } catch (const Error& e) {
    throw SchemaError(std::string("/noise: ") + e.what());
  }
}

inline void parse_frontend(Section& root, ScenarioConfig& cfg) {
  // Scenario-level defaults differ from the bare library struct: scenario
  // waveforms are unit-amplitude samples, so the field scale maps them well
  // inside the linear range, and hop dwells are microseconds, not
  // milliseconds.
  cfg.frontend.field_scale = 1e-6;
  cfg.frontend.retune_latency = 1e-6;
  if (!root.has("frontend")) return;
  Section f = root.sub("frontend");
  cfg.lo_amplitude = f.num_or("lo_amplitude", cfg.lo_amplitude);
  cfg.frontend.ratio_min = f.num_or("ratio_min", cfg.frontend.ratio_min);
  cfg.frontend.linear_fraction =
      f.num_or("linear_fraction", cfg.frontend.linear_fraction);
  cfg.frontend.inst_bandwidth_limit =
      f.num_or("inst_bandwidth_limit_hz", cfg.frontend.inst_bandwidth_limit);
  cfg.frontend.retune_latency =
      f.num_or("retune_latency_s", cfg.frontend.retune_latency);
  cfg.frontend.field_scale = f.num_or("field_scale", cfg.frontend.field_scale);
  f.finish();
  if (!(cfg.lo_amplitude > 0.0))
    throw SchemaError("/frontend/lo_amplitude: must be positive");
  if (!(cfg.frontend.field_scale > 0.0))
    throw SchemaError("/frontend/field_scale: must be positive");
}

inline void parse_radar(Section& root, ScenarioConfig& cfg) {
  Section r = root.sub("radar");
  RadarScenario& d = cfg.radar;
  d.n_steps = r.uint_or("n_steps", d.n_steps);
  d.step_spacing_hz = r.num_or("step_spacing_hz", d.step_spacing_hz);
  d.dwell_s = r.num_or("dwell_s", d.dwell_s);
  d.sample_rate_hz = r.num_or("sample_rate_hz", d.sample_rate_hz);
  d.tuning_window_hz = r.num_or("tuning_window_hz", d.tuning_window_hz);
  d.range_min_m = r.num_or("range_min_m", d.range_min_m);
  d.range_max_m = r.num_or("range_max_m", d.range_max_m);
  d.rcs_gain = r.num_or("rcs_gain", d.rcs_gain);
  d.per_step_snr_db = r.num_or_null("per_step_snr_db");
  d.guard_samples = r.uint_or("guard_samples", d.guard_samples);
  d.detection_threshold =
      r.num_or("detection_threshold", d.detection_threshold);
  d.grid_points = r.uint_or("grid_points", d.grid_points);
  d.max_rmse_m = r.num_or_null("max_rmse_m");
  r.finish();
  if (d.n_steps < 2) throw SchemaError("/radar/n_steps: need at least 2");
  if (!(d.step_spacing_hz > 0.0))
    throw SchemaError("/radar/step_spacing_hz: must be positive");
  if (!(d.dwell_s > 0.0)) throw SchemaError("/radar/dwell_s: must be positive");
  if (!(d.sample_rate_hz > 0.0))
    throw SchemaError("/radar/sample_rate_hz: must be positive");
  if (d.range_min_m < 0.0 || d.range_max_m < d.range_min_m)
    throw SchemaError("/radar/range_min_m..range_max_m: need 0 <= min <= max");
}

inline void parse_comms(Section& root, ScenarioConfig& cfg) {
  Section c = root.sub("comms");
  CommsScenario& d = cfg.comms;
  d.m_ary = static_cast<std::uint32_t>(c.uint_or("m_ary", d.m_ary));
  d.symbol_rate_hz = c.num_or("symbol_rate_hz", d.symbol_rate_hz);
  d.tone_spacing_hz = c.num_or("tone_spacing_hz", d.tone_spacing_hz);
  d.sample_rate_hz = c.num_or("sample_rate_hz", d.sample_rate_hz);
  d.n_symbols = c.uint_or("n_symbols", d.n_symbols);
  d.esn0_db = c.num_or("esn0_db", d.esn0_db);
  d.isr_db = c.num_or_null("isr_db");
  if (c.has("interferer")) {
    Section i = c.sub("interferer");
    d.interferer.bandwidth_hz =
        i.num_or("bandwidth_hz", d.interferer.bandwidth_hz);
    d.interferer.pulse_s = i.num_or("pulse_s", d.interferer.pulse_s);
    d.interferer.period_s = i.num_or("period_s", d.interferer.period_s);
    i.finish();
    if (!(d.interferer.bandwidth_hz > 0.0) || !(d.interferer.pulse_s > 0.0) ||
        !(d.interferer.period_s >= d.interferer.pulse_s))
      throw SchemaError("/comms/interferer: need bandwidth_hz > 0, "
                        "0 < pulse_s <= period_s");
  }
  const std::string policy = c.str_or("erasure_policy", "DROP");
  if (policy == "DROP")
    d.erasure_policy = ErasurePolicy::Drop;
  else if (policy == "COUNT_AS_ERROR")
    d.erasure_policy = ErasurePolicy::CountAsError;
  else
    throw SchemaError("/comms/erasure_policy: expected DROP or COUNT_AS_ERROR");
  d.path_delay_s = c.num_or("path_delay_s", d.path_delay_s);
  d.max_ber = c.num_or_null("max_ber");
  c.finish();
  if (d.m_ary < 2 || (d.m_ary & (d.m_ary - 1)) != 0)
    throw SchemaError("/comms/m_ary: must be a power of two, at least 2");
  if (!(d.symbol_rate_hz > 0.0) || !(d.tone_spacing_hz > 0.0) ||
      !(d.sample_rate_hz > 0.0))
    throw SchemaError("/comms: rates must be positive");
  if (d.n_symbols == 0)
    throw SchemaError("/comms/n_symbols: must be at least 1");
  if (d.path_delay_s < 0.0)
    throw SchemaError("/comms/path_delay_s: must be non-negative");
}

inline void parse_spectrum(Section& root, ScenarioConfig& cfg) {
  Section s = root.sub("spectrum");
  SpectrumScenario& d = cfg.spectrum;
  d.rf_amplitude = s.num_or("rf_amplitude", d.rf_amplitude);
  d.rf_phase_rad = s.num_or("rf_phase_rad", d.rf_phase_rad);
  d.grid_points = s.uint_or("grid_points", d.grid_points);
  d.grid_span_linewidths =
      s.num_or("grid_span_linewidths", d.grid_span_linewidths);
  d.dither_fraction = s.num_or("dither_fraction", d.dither_fraction);
  d.probe_points = s.uint_or("probe_points", d.probe_points);
  d.probe_span_linewidths =
      s.num_or("probe_span_linewidths", d.probe_span_linewidths);
  s.finish();
  if (d.rf_amplitude < 0.0)
    throw SchemaError("/spectrum/rf_amplitude: must be non-negative");
  if (d.grid_points < 2)
    throw SchemaError("/spectrum/grid_points: need at least 2");
  if (!(d.grid_span_linewidths > 0.0))
    throw SchemaError("/spectrum/grid_span_linewidths: must be positive");
  if (!(d.dither_fraction > 0.0))
    throw SchemaError("/spectrum/dither_fraction: must be positive");
  if (d.probe_points < 3)
    throw SchemaError("/spectrum/probe_points: need at least 3");
}

inline void parse_gate(Section& root, ScenarioConfig& cfg) {
  Section g = root.sub("gate");
  GateScenario& d = cfg.gate;
  d.waveform = g.str_or("waveform", d.waveform);
  d.sample_rate_hz = g.num_or("sample_rate_hz", d.sample_rate_hz);
  d.limit_hz = g.num_or("limit_hz", d.limit_hz);
  if (d.waveform == "LFM") {
    d.duration_s = g.num_or("duration_s", d.duration_s);
    d.bandwidth_hz = g.num_or("bandwidth_hz", d.bandwidth_hz);
  } else if (d.waveform == "TONE") {
    d.duration_s = g.num_or("duration_s", d.duration_s);
    d.tone_offset_hz = g.num_or("tone_offset_hz", d.tone_offset_hz);
  } else if (d.waveform == "HOP") {
    d.n_steps = g.uint_or("n_steps", d.n_steps);
    d.step_spacing_hz = g.num_or("step_spacing_hz", d.step_spacing_hz);
    d.dwell_s = g.num_or("dwell_s", d.dwell_s);
    d.per_step_bandwidth_hz =
        g.num_or("per_step_bandwidth_hz", d.per_step_bandwidth_hz);
    d.tuning_window_hz = g.num_or("tuning_window_hz", d.tuning_window_hz);
  } else {
    throw SchemaError("/gate/waveform: expected LFM, TONE, or HOP");
  }
  g.finish();
  if (!(d.sample_rate_hz > 0.0))
    throw SchemaError("/gate/sample_rate_hz: must be positive");
  if (!(d.limit_hz > 0.0))
    throw SchemaError("/gate/limit_hz: must be positive");
}

}  // namespace detail

// Parses and validates a scenario object. Unknown keys anywhere fail with
// their path; the section matching the kind is required and sections of
// other kinds are rejected.
inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  detail::Section root(j, "");
  ScenarioConfig cfg;
  cfg.kind = detail::parse_kind(root.str("kind"));
  cfg.seed = root.uint_or("seed", 1);
  if (root.has("trials")) {
    cfg.trials = root.uint("trials");
    if (cfg.trials == 0)
      throw SchemaError("/trials: must be at least 1");
  }
  cfg.out_dir = root.str_or("out_dir", "out");
  detail::parse_atomic(root, cfg);
  detail::parse_noise(root, cfg);
  detail::parse_frontend(root, cfg);

  const std::string section = kind_section_name(cfg.kind);
  if (!root.has(section))
    throw SchemaError("/" + section + ": required for kind " +
                      scenario_kind_name(cfg.kind));
  switch (cfg.kind) {
    case ScenarioKind::RadarRanging: detail::parse_radar(root, cfg); break;
    case ScenarioKind::CommsBer: detail::parse_comms(root, cfg); break;
    case ScenarioKind::SpectrumDemo: detail::parse_spectrum(root, cfg); break;
    case ScenarioKind::BandwidthGate: detail::parse_gate(root, cfg); break;
  }
  root.finish();

  cfg.snapshot = j;
  cfg.config_hash = fnv1a64(j.dump());
  return cfg;
}

// Environment overrides: RYDAR_<KEY>[__<SUBKEY>...]=<value> replaces the
// value at /key/subkey. Values parse as JSON when possible, else as strings.
inline void apply_env_overrides(nlohmann::json& j,
                                const std::string& prefix = "RYDAR_") {
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    if (kv.rfind(prefix, 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq <= prefix.size()) continue;
    const std::string key = kv.substr(prefix.size(), eq - prefix.size());
    const std::string val = kv.substr(eq + 1);
    std::string ptr;
    std::size_t pos = 0;
    bool ok = true;
    while (pos <= key.size()) {
      const auto sep = key.find("__", pos);
      const std::string seg =
          key.substr(pos, sep == std::string::npos ? std::string::npos
                                                   : sep - pos);
      if (seg.empty()) {
        ok = false;
        break;
      }
      std::string lower;
      for (char c : seg)
        lower.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      ptr += "/" + lower;
      if (sep == std::string::npos) break;
      pos = sep + 2;
    }
    if (!ok) continue;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(val);
    } catch (...) {
      parsed = val;
    }
    j[nlohmann::json::json_pointer(ptr)] = parsed;
  }
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path,
                                    bool apply_env = true) {
  nlohmann::json j = load_json_file(path);
  if (apply_env) apply_env_overrides(j);
  return parse_scenario(j);
}

}  // namespace rydar
