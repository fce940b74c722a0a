#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include <rydar/channel.hpp>
#include <rydar/radar.hpp>
#include <rydar/rng.hpp>
#include <rydar/waveform.hpp>

using namespace rydar;

namespace {

IqTrace padded_trace(const Waveform& w, std::size_t extra) {
  IqTrace t = trace_from(w);
  t.samples.resize(t.samples.size() + extra, {0.0, 0.0});
  return t;
}

std::vector<std::complex<double>> step_returns(const HopPlan& plan,
                                               double range_m) {
  std::vector<std::complex<double>> z(plan.n_steps);
  for (std::size_t i = 0; i < plan.n_steps; ++i) {
    const double ph =
        -two_pi * plan.step_offset(i) * 2.0 * range_m / speed_of_light;
    z[i] = {std::cos(ph), std::sin(ph)};
  }
  return z;
}

}  // namespace

TEST_CASE("range resolution values are frozen") {
  CHECK(range_resolution(1e9) == Catch::Approx(0.149896229).margin(1e-9));
  CHECK(range_resolution(1e7) == Catch::Approx(14.9896229).margin(1e-7));
  CHECK_THROWS_AS(range_resolution(0.0), DomainError);
  CHECK_THROWS_AS(range_resolution(-1e6), DomainError);
}

TEST_CASE("rmse helper") {
  CHECK(radar_rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(radar_rmse({1.0, 2.0, 3.0}, {2.0, 2.0, 3.0}) ==
        Catch::Approx(std::sqrt(1.0 / 3.0)));
  CHECK_THROWS_AS(radar_rmse({}, {}), DomainError);
  CHECK_THROWS_AS(radar_rmse({1.0}, {1.0, 2.0}), DomainError);
}

TEST_CASE("method names") {
  CHECK(std::strcmp(range_method_name(RangeMethod::MatchedFilter),
                    "MATCHED_FILTER") == 0);
  CHECK(std::strcmp(range_method_name(RangeMethod::BeatFft), "BEAT_FFT") ==
        0);
  CHECK(std::strcmp(range_method_name(RangeMethod::SteppedSynth),
                    "STEPPED_SYNTH") == 0);
}

TEST_CASE("matched filter pins a zero-delay return at zero range") {
  const Waveform ref = gen_lfm(5e7, 2e-5, 1.25e8);
  const auto est = matched_filter_range(padded_trace(ref, 64), ref);
  REQUIRE(est.has_value());
  CHECK(est->method == RangeMethod::MatchedFilter);
  CHECK(est->range_m < 1.5e-3);
}

TEST_CASE("matched filter finds a noise-free target within budget") {
  const Waveform ref = gen_lfm(1e9, 1e-5, 2.5e9);
  const Waveform rx = monostatic_echo(ref, 1.75, 1.0, 0.0);
  const auto est = matched_filter_range(trace_from(rx), ref);
  REQUIRE(est.has_value());
  CHECK(est->range_m == Catch::Approx(1.75).margin(1.5e-3));
  CHECK(est->peak_metric > 8.0);
}

TEST_CASE("matched filter reports nothing on pure noise") {
  const Waveform ref = gen_lfm(1e6, 1e-4, 1e7);
  IqTrace rx;
  rx.sample_rate = 1e7;
  rx.samples.resize(4096);
  for (std::size_t i = 0; i < rx.samples.size(); ++i)
    rx.samples[i] = complex_gaussian(42, 9, i);
  CHECK_FALSE(matched_filter_range(rx, ref, 8.0).has_value());
}

TEST_CASE("integer sample shifts move the estimate by exact bins") {
  const Waveform ref = gen_lfm(5e7, 1e-4, 1.25e8);
  const double fs = ref.sample_rate;
  PathSet p10, p17;
  p10.paths.push_back({10.0 / fs, 0.0, 1.0, 0.0});
  p17.paths.push_back({17.0 / fs, 0.0, 1.0, 0.0});
  // Pad well past the delays: the peak/median detection metric needs lags
  // away from the correlation mainlobe to represent the floor.
  Waveform w10 = propagate(ref, p10, 0.0);
  Waveform w17 = propagate(ref, p17, 0.0);
  w10.samples.resize(w10.samples.size() + 246, {0.0, 0.0});
  w17.samples.resize(w17.samples.size() + 246, {0.0, 0.0});
  const auto a = matched_filter_range(trace_from(w10), ref);
  const auto b = matched_filter_range(trace_from(w17), ref);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  const double bin = speed_of_light / (2.0 * fs);
  CHECK(b->range_m - a->range_m == Catch::Approx(7.0 * bin).margin(1e-5));
}

TEST_CASE("matched filter input validation") {
  const Waveform ref = gen_lfm(1e6, 1e-4, 1e7);
  CHECK_THROWS_AS(matched_filter_range(trace_from(ref), ref),
                  DomainError);  // not longer than the reference
  Waveform empty;
  empty.sample_rate = 1e7;
  CHECK_THROWS_AS(matched_filter_range(padded_trace(ref, 64), empty),
                  DomainError);
  CHECK_THROWS_AS(matched_filter_range(padded_trace(ref, 64), ref, 0.0),
                  DomainError);
}

TEST_CASE("dechirped returns beat at the delay-proportional tone") {
  const Waveform ref = gen_lfm(5e7, 2e-4, 1.25e8);
  const double rate = 5e7 / 2e-4;

  const Waveform rx0 = monostatic_echo(ref, 0.0, 1.0, 0.0);
  const auto est0 = beat_fft_range(dechirp(trace_from(rx0), ref), rate);
  REQUIRE(est0.has_value());
  CHECK(est0->range_m < 1e-3);
  CHECK(est0->method == RangeMethod::BeatFft);

  const Waveform rx = monostatic_echo(ref, 1.79875, 1.0, 0.0);
  const auto est = beat_fft_range(dechirp(trace_from(rx), ref), rate);
  REQUIRE(est.has_value());
  CHECK(est->range_m == Catch::Approx(1.79875).margin(2e-3));
}

TEST_CASE("beat estimator rejects short traces") {
  IqTrace rx;
  rx.sample_rate = 1e6;
  rx.samples.resize(8, {1.0, 0.0});
  CHECK_THROWS_AS(beat_fft_range(rx, 1e11), FramingError);
  rx.samples.resize(64, {1.0, 0.0});
  CHECK_THROWS_AS(beat_fft_range(rx, 0.0), DomainError);
}

TEST_CASE("equal step returns synthesize a zero-range peak") {
  HopPlan plan;
  plan.n_steps = 128;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const std::vector<std::complex<double>> z(plan.n_steps, {1.0, 0.0});
  const auto est = stepped_synthesis_range(z, plan, 4.0);
  REQUIRE(est.has_value());
  const double window = speed_of_light / (2.0 * plan.step_spacing);
  CHECK(est->unambiguous_window_m == Catch::Approx(window).epsilon(1e-12));
  // Zero range may legally come back as ~0 or ~window (same point mod
  // window), so measure the circular distance.
  const double d = std::min(est->range_m, window - est->range_m);
  CHECK(d < 1e-6);
}

TEST_CASE("stepped synthesis recovers an in-window target exactly") {
  HopPlan plan;
  plan.n_steps = 128;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const auto est = stepped_synthesis_range(step_returns(plan, 7.3), plan,
                                           4.0);
  REQUIRE(est.has_value());
  CHECK(est->range_m == Catch::Approx(7.3).margin(1e-6));
  CHECK(est->method == RangeMethod::SteppedSynth);
}

TEST_CASE("stepped synthesis matches a dense grid search") {
  HopPlan plan;
  plan.n_steps = 16;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const double truth = 5.2;
  const auto z = step_returns(plan, truth);
  const auto est = stepped_synthesis_range(z, plan, 4.0);
  REQUIRE(est.has_value());

  const double window = speed_of_light / (2.0 * plan.step_spacing);
  const auto power = [&](double r) {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < plan.n_steps; ++i) {
      const double ph =
          two_pi * plan.step_offset(i) * 2.0 * r / speed_of_light;
      sum += z[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return std::norm(sum);
  };
  const std::size_t dense = 200000;
  double best = 0.0, best_r = 0.0;
  for (std::size_t g = 0; g < dense; ++g) {
    const double r = window * static_cast<double>(g) /
                     static_cast<double>(dense);
    const double p = power(r);
    if (p > best) {
      best = p;
      best_r = r;
    }
  }
  const double res = range_resolution(plan.synthesized_bandwidth());
  CHECK(std::abs(est->range_m - best_r) < res / 1e3);
  CHECK(std::abs(est->range_m - truth) < res / 1e4);
}

TEST_CASE("noise-free synthesis is unbiased across the window") {
  HopPlan plan;
  plan.n_steps = 32;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const double window = speed_of_light / (2.0 * plan.step_spacing);
  double sum_abs = 0.0;
  const std::size_t trials = 500;
  for (std::size_t t = 0; t < trials; ++t) {
    const double truth = 1.0 + (window - 2.0) * uniform01(77, 5, t);
    const auto est =
        stepped_synthesis_range(step_returns(plan, truth), plan, 4.0, 1024);
    REQUIRE(est.has_value());
    sum_abs += std::abs(est->range_m - truth);
  }
  const double res = range_resolution(plan.synthesized_bandwidth());
  CHECK(sum_abs / static_cast<double>(trials) < res / 100.0);
}

TEST_CASE("synthesis error grows with per-step noise") {
  HopPlan plan;
  plan.n_steps = 128;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const double truth = 9.4;
  const auto clean = step_returns(plan, truth);
  std::vector<double> rmse;
  std::uint64_t stream = 100;
  for (const double sigma : {0.05, 0.1, 0.2, 0.4}) {
    double acc = 0.0;
    std::size_t n_det = 0;
    const std::size_t trials = 60;
    for (std::size_t t = 0; t < trials; ++t) {
      auto z = clean;
      for (std::size_t i = 0; i < z.size(); ++i)
        z[i] += sigma * complex_gaussian(2026, stream + t, i);
      const auto est = stepped_synthesis_range(z, plan, 4.0, 2048);
      REQUIRE(est.has_value());
      acc += (est->range_m - truth) * (est->range_m - truth);
      ++n_det;
    }
    stream += 1000;
    rmse.push_back(std::sqrt(acc / static_cast<double>(n_det)));
  }
  for (std::size_t k = 0; k + 1 < rmse.size(); ++k)
    CHECK(rmse[k] < rmse[k + 1]);
}

TEST_CASE("stepped synthesis rejects pure noise and bad input") {
  HopPlan plan;
  plan.n_steps = 128;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  std::vector<std::complex<double>> noise(plan.n_steps);
  for (std::size_t i = 0; i < noise.size(); ++i)
    noise[i] = complex_gaussian(5150, 1, i);
  CHECK_FALSE(stepped_synthesis_range(noise, plan, 8.0).has_value());

  CHECK_THROWS_AS(stepped_range_profile({{1.0, 0.0}}, plan), ConfigError);
  HopPlan one = plan;
  one.n_steps = 1;
  CHECK_THROWS_AS(stepped_range_profile({{1.0, 0.0}}, one), DomainError);
}

TEST_CASE("two targets separate at the resolution limit but not below") {
  const Waveform ref = gen_lfm(1e9, 1e-5, 2.5e9);
  const ResolvabilityResult apart =
      two_target_resolvability(ref, 2.0, 2.15);
  CHECK(apart.resolved);
  CHECK(apart.n_peaks >= 2);
  const ResolvabilityResult close =
      two_target_resolvability(ref, 2.0, 2.10);
  CHECK_FALSE(close.resolved);
  CHECK_THROWS_AS(two_target_resolvability(ref, -1.0, 2.0), DomainError);
}
