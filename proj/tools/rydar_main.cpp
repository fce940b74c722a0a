// Command-line front end: scenario validation, single runs, and sweeps.
// Exit codes: 0 success, 1 threshold failure, 2 config error, 3 runtime
// error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rydar/rydar.hpp>

namespace {

struct CliState {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t trials = 0;
  bool quiet = false;
  std::string axis;
  std::vector<double> values;
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "Scenario config file (JSON)")
      ->required();
  sub->add_option("--seed", st.seed, "Override the master seed");
  sub->add_option("--out", st.out_dir, "Override the output directory");
  sub->add_option("--trials", st.trials, "Override the trial count");
  sub->add_flag("--quiet", st.quiet, "Suppress the one-line result");
}

rydar::RunOptions make_options(const CLI::App* sub, const CliState& st) {
  rydar::RunOptions opt;
  if (sub->count("--seed")) opt.seed = st.seed;
  if (sub->count("--out")) opt.out_dir = st.out_dir;
  if (sub->count("--trials")) opt.trials = st.trials;
  opt.quiet = st.quiet;
  return opt;
}

void require_kind(const rydar::ScenarioConfig& cfg, rydar::ScenarioKind want,
                  const char* sub_name) {
  if (cfg.kind != want)
    throw rydar::ConfigError(
        std::string("subcommand '") + sub_name + "' needs kind " +
        rydar::scenario_kind_name(want) + ", config has " +
        rydar::scenario_kind_name(cfg.kind));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale atomic-receiver sensing and communication "
               "simulator"};
  app.set_version_flag("--version", rydar::version_string);
  app.require_subcommand(1);

  CliState st;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Emit transmission-spectrum and gradient demo series");
  CLI::App* radar = app.add_subcommand(
      "radar", "Run the stepped-frequency ranging experiment");
  CLI::App* comms = app.add_subcommand(
      "comms", "Run the FSK bit-error-rate experiment");
  CLI::App* gate = app.add_subcommand(
      "gate", "Check a waveform against the instantaneous bandwidth limit");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run a scenario repeatedly along one numeric config axis");
  CLI::App* validate = app.add_subcommand(
      "validate", "Schema-check a scenario config and exit");
  for (CLI::App* sub : {spectrum, radar, comms, gate, sweep, validate})
    add_common(sub, st);
  sweep->add_option("--axis", st.axis,
                    "Config field to sweep, e.g. comms.isr_db")
      ->required();
  sweep->add_option("--values", st.values, "Values to sweep over")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const rydar::RunOptions opt = make_options(sub, st);

    if (sub == validate) {
      const rydar::ScenarioConfig cfg = rydar::load_scenario(st.config_path);
      if (!st.quiet)
        std::printf("ok kind=%s hash=%016llx\n",
                    rydar::scenario_kind_name(cfg.kind),
                    static_cast<unsigned long long>(cfg.config_hash));
      return 0;
    }

    if (sub == sweep) {
      nlohmann::json base = rydar::load_json_file(st.config_path);
      rydar::apply_env_overrides(base);
      const auto points = rydar::run_sweep(base, st.axis, st.values, opt);
      bool failed = false;
      for (const auto& pt : points) {
        failed = failed || pt.outcome.threshold_failed;
        if (!st.quiet)
          std::printf("point=%zu value=%.6g metric=%.6g out=%s\n", pt.index,
                      pt.value, pt.outcome.metric,
                      pt.outcome.out_dir.c_str());
      }
      return failed ? 1 : 0;
    }

    const rydar::ScenarioConfig cfg = rydar::load_scenario(st.config_path);
    if (sub == spectrum) {
      require_kind(cfg, rydar::ScenarioKind::SpectrumDemo, "spectrum");
      const auto rep = rydar::run_spectrum(cfg, opt);
      if (!st.quiet)
        std::printf("k0=%.17g shift_hz=%.17g out=%s\n", rep.k0, rep.shift_hz,
                    rep.out_dir.c_str());
      return 0;
    }
    if (sub == radar) {
      require_kind(cfg, rydar::ScenarioKind::RadarRanging, "radar");
      const auto rep = rydar::run_radar(cfg, opt);
      if (!st.quiet)
        std::printf("trials=%zu detected=%zu rmse_m=%.17g out=%s\n",
                    rep.trials.size(), rep.n_detected, rep.rmse_m,
                    rep.out_dir.c_str());
      return rep.threshold_failed ? 1 : 0;
    }
    if (sub == comms) {
      require_kind(cfg, rydar::ScenarioKind::CommsBer, "comms");
      const auto rep = rydar::run_comms(cfg, opt);
      if (!st.quiet)
        std::printf("n_bits=%zu n_errors=%zu ber=%.17g out=%s\n",
                    rep.total.n_bits, rep.total.n_errors, rep.total.ber,
                    rep.out_dir.c_str());
      return rep.threshold_failed ? 1 : 0;
    }
    require_kind(cfg, rydar::ScenarioKind::BandwidthGate, "gate");
    const auto rep = rydar::run_gate(cfg, opt);
    if (!st.quiet)
      std::printf("pass=%d worst_occupied_hz=%.17g limit_hz=%.17g out=%s\n",
                  rep.pass ? 1 : 0, rep.worst_occupied_hz, rep.limit_hz,
                  rep.out_dir.c_str());
    return rep.threshold_failed ? 1 : 0;
  } catch (const rydar::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
