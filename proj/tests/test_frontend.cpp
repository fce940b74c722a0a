#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <rydar/frontend.hpp>
#include <rydar/rng.hpp>
#include <rydar/waveform.hpp>

using namespace rydar;

namespace {

AtomicParams unit_params() {
  AtomicParams p;  // normalized, equal drives: k0 = 1/9
  p.linewidth = 1e9;  // generous linear range for unit-field tests
  return p;
}

FrontendOptions loose_options() {
  FrontendOptions o;
  o.field_scale = 1.0;
  o.retune_latency = 1e-3;
  return o;
}

}  // namespace

TEST_CASE("coherent superposition of LO and RF envelopes") {
  const RfTone lo(1.0, 0.0, 0.0);
  CHECK(superpose_lo(RfTone(0.01, 0.0, 0.0), lo) ==
        Catch::Approx(1.01).epsilon(1e-15));
  CHECK(superpose_lo(RfTone(0.01, pi, 0.0), lo) ==
        Catch::Approx(0.99).epsilon(1e-15));
  CHECK(superpose_lo(RfTone(0.01, pi / 2.0, 0.0), lo) ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("superposition guards: shared carrier and LO dominance") {
  const RfTone lo(1.0, 0.0, 2.0 * pi * 1e9);
  CHECK_THROWS_AS(superpose_lo(RfTone(0.01, 0.0, 2.0 * pi * 1.1e9), lo),
                  HomodyneError);
  CHECK_THROWS_AS(superpose_lo(RfTone(0.2, 0.0, 2.0 * pi * 1e9), lo),
                  LoRatioError);
  CHECK_NOTHROW(superpose_lo(RfTone(0.1, 0.0, 2.0 * pi * 1e9), lo));
}

TEST_CASE("noise-free scalar readout matches the closed form") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.0, 0.0);
  const FrontendOptions opt = loose_options();
  // y = (1/2pi) k0 A cos(dphi) with k0 = 1/9, A = 1: 1/(18 pi).
  const double y0 = atomic_measure(RfTone(1.0, 0.0, 0.0), lo, p, quiet, {},
                                   opt);
  CHECK(y0 == Catch::Approx(1.0 / (18.0 * pi)).epsilon(1e-14));
  CHECK(y0 == Catch::Approx(0.017683882565766).margin(1e-14));
  const double yq = atomic_measure(RfTone(1.0, pi / 2.0, 0.0), lo, p, quiet,
                                   {}, opt);
  CHECK(std::abs(yq) < 1e-17);
  const double ypi = atomic_measure(RfTone(1.0, pi, 0.0), lo, p, quiet, {},
                                    opt);
  CHECK(ypi == Catch::Approx(-1.0 / (18.0 * pi)).epsilon(1e-14));
}

TEST_CASE("readout scales linearly with the RF amplitude") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.0, 0.0);
  const FrontendOptions opt = loose_options();
  const double y1 = atomic_measure(RfTone(1.0, 0.0, 0.0), lo, p, quiet, {},
                                   opt);
  const double y2 = atomic_measure(RfTone(2.0, 0.0, 0.0), lo, p, quiet, {},
                                   opt);
  CHECK(y2 == Catch::Approx(2.0 * y1).epsilon(1e-14));
}

TEST_CASE("noisy readout matches the closed-form mean and variance") {
  const AtomicParams p = unit_params();
  NoiseParams noise;
  noise.sigma_psn = 0.05;
  noise.sigma_bgn = 0.2;
  noise.sigma_qpn = 0.1;
  noise.seed = 321;
  const RfTone rf(1.0, 0.0, 0.0);
  const RfTone lo(100.0, 0.0, 0.0);
  const FrontendOptions opt = loose_options();

  const std::size_t n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = atomic_measure(rf, lo, p, noise, NoiseContext{0, i},
                                    opt);
    sum += y;
    sum2 += y * y;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = sum2 / nn - mean * mean;

  const double front = 1.0 / two_pi;
  const double k0 = slope_k0(p);
  const double s = rf.amplitude;  // cos(0) = 1
  const double sig_n2 = noise.sigma_bgn * noise.sigma_bgn +
                        noise.sigma_qpn * noise.sigma_qpn;
  const double mean_true = front * k0 * s;
  const double var_true =
      front * front *
      (k0 * k0 * sig_n2 + noise.sigma_psn * noise.sigma_psn * s * s +
       noise.sigma_psn * noise.sigma_psn * sig_n2);
  CHECK(mean == Catch::Approx(mean_true)
                    .margin(4.0 * std::sqrt(var_true / nn)));
  CHECK(var == Catch::Approx(var_true).epsilon(0.03));
}

TEST_CASE("quadrature readout recovers the RF phase") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.3, 0.0);
  const FrontendOptions opt = loose_options();
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const double dphi = -pi + two_pi * uniform01(5, 0, t) * 0.999;
    const RfTone rf(1.0, lo.phase + dphi, 0.0);
    const std::complex<double> iq = measure_iq(rf, lo, p, quiet, {}, opt);
    const double rec = std::atan2(iq.imag(), iq.real());
    CHECK(std::abs(std::remainder(rec - dphi, two_pi)) < 1e-9);
  }
}

TEST_CASE("I and Q noise draws are independent") {
  const AtomicParams p = unit_params();
  NoiseParams noise;
  noise.sigma_bgn = 1.0;
  noise.seed = 77;
  const RfTone rf(0.0, 0.0, 0.0);
  const RfTone lo(100.0, 0.0, 0.0);
  const FrontendOptions opt = loose_options();
  const std::size_t n = 50000;
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> iq = measure_iq(rf, lo, p, noise,
                                               NoiseContext{0, i}, opt);
    dot += iq.real() * iq.imag();
  }
  const double front = 1.0 / two_pi;
  const double unit = front * slope_k0(p);  // per-branch noise deviation
  CHECK(std::abs(dot / static_cast<double>(n)) <
        4.0 * unit * unit / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("identical context reproduces identical noisy readouts") {
  const AtomicParams p = unit_params();
  NoiseParams noise;
  noise.sigma_psn = 0.1;
  noise.sigma_bgn = 0.4;
  noise.sigma_qpn = 0.2;
  noise.seed = 9;
  const RfTone rf(1.0, 0.2, 0.0);
  const RfTone lo(100.0, 0.0, 0.0);
  const FrontendOptions opt = loose_options();
  const double a = atomic_measure(rf, lo, p, noise, NoiseContext{4, 17}, opt);
  const double b = atomic_measure(rf, lo, p, noise, NoiseContext{4, 17}, opt);
  const double c = atomic_measure(rf, lo, p, noise, NoiseContext{4, 18}, opt);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("waveform readout equals per-sample scalar readouts") {
  const AtomicParams p = unit_params();
  NoiseParams noise;
  noise.sigma_psn = 0.02;
  noise.sigma_bgn = 0.05;
  noise.seed = 13;
  const RfTone lo(100.0, 0.0, 0.0);
  FrontendOptions opt = loose_options();
  opt.field_scale = 0.5;

  const Waveform w = gen_tone(1e3, 64e-6, 1e6);
  const NoiseContext base{2, 0};
  const IqTrace trace = measure_waveform(w, lo, p, noise, base, opt);
  REQUIRE(trace.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); i += 7) {
    const double amp = opt.field_scale * std::abs(w.samples[i]);
    const double ph = std::arg(w.samples[i]);
    const std::complex<double> one =
        measure_iq(RfTone(amp, ph, 0.0), lo, p, noise,
                   NoiseContext{base.stream, base.sample_index + i}, opt);
    CHECK(trace.samples[i] == one);  // bit-identical draws
  }
}

TEST_CASE("waveform readout rejects a declared bandwidth above the limit") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.0, 0.0);
  FrontendOptions opt = loose_options();
  opt.inst_bandwidth_limit = 1e6;
  const Waveform w = gen_lfm(5e6, 1e-4, 2e7);
  CHECK_THROWS_AS(measure_waveform(w, lo, p, quiet, {}, opt),
                  BandwidthError);
}

TEST_CASE("sustained off-window content without a retune is flagged") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.0, 0.0);
  FrontendOptions opt = loose_options();
  opt.inst_bandwidth_limit = 1e7;  // window half-width 5 MHz

  // An 8 MHz tone that lies about its declared bandwidth.
  Waveform w = gen_tone(8e6, 1e-4, 6.4e7);
  w.inst_bandwidth = 1e6;
  CHECK_THROWS_AS(measure_waveform(w, lo, p, quiet, {}, opt),
                  ResonanceError);

  // The same tone inside the window is fine.
  const Waveform ok = gen_tone(4e6, 1e-4, 6.4e7);
  CHECK_NOTHROW(measure_waveform(ok, lo, p, quiet, {}, opt));
}

TEST_CASE("retune events blank the configured latency window") {
  const AtomicParams p = unit_params();
  const NoiseParams quiet;
  const RfTone lo(100.0, 0.0, 0.0);
  FrontendOptions opt = loose_options();
  opt.retune_latency = 1e-6;

  HopPlan plan;
  plan.n_steps = 4;
  plan.step_spacing = 8e6;
  plan.dwell = 1e-5;
  plan.per_step_bandwidth = 2e5;
  const Waveform w = gen_freq_hop(plan, 2.56e7, 0.0, 1e7);
  REQUIRE(w.retune_schedule.size() == 4);

  const IqTrace trace = measure_waveform(w, lo, p, quiet, {}, opt);
  const std::size_t latency = 26;  // round(1e-6 * 2.56e7)
  const std::size_t n_per = 256;
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (!trace.is_valid(i)) ++invalid;
  CHECK(invalid == 4 * latency);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK_FALSE(trace.is_valid(s * n_per));
    CHECK_FALSE(trace.is_valid(s * n_per + latency - 1));
    CHECK(trace.is_valid(s * n_per + latency));
  }
}
