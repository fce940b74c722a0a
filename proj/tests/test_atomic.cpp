#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <rydar/atomic.hpp>
#include <rydar/constants.hpp>
#include <rydar/errors.hpp>
#include <rydar/rng.hpp>

using namespace rydar;

namespace {

AtomicParams normalized_unit() {
  AtomicParams p;
  p.probe_rabi = 1.0;
  p.coupling_rabi = 1.0;
  p.linewidth = 1e6;
  return p;
}

GridSpec grid_for(const AtomicParams& p, double span_linewidths = 8.0,
                  std::size_t n = 2001) {
  return {p.center_freq - 0.5 * span_linewidths * p.linewidth,
          p.center_freq + 0.5 * span_linewidths * p.linewidth, n};
}

// Five-point central second difference of the exact profile.
double fd_curvature(const SpectrumProfile& prof, double f, double h) {
  const double pm2 = prof.evaluate(f - 2.0 * h);
  const double pm1 = prof.evaluate(f - h);
  const double p0 = prof.evaluate(f);
  const double pp1 = prof.evaluate(f + h);
  const double pp2 = prof.evaluate(f + 2.0 * h);
  return (-pm2 + 16.0 * pm1 - 30.0 * p0 + 16.0 * pp1 - pp2) / (12.0 * h * h);
}

}  // namespace

TEST_CASE("slope magnitude for frozen drive ratios") {
  AtomicParams p = normalized_unit();
  CHECK(slope_k0(p) == Catch::Approx(1.0 / 9.0).epsilon(1e-15));
  p.probe_rabi = 2.0;
  p.coupling_rabi = 2.0;
  CHECK(slope_k0(p) == Catch::Approx(1.0 / 36.0).epsilon(1e-15));
  p.probe_rabi = 1.0;
  p.coupling_rabi = 0.0;
  CHECK(slope_k0(p) == Catch::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("splitting is linear in the drive and scaled by the scan ratio") {
  CHECK(at_splitting(two_pi * 1e6) == Catch::Approx(1e6).epsilon(1e-12));
  CHECK(at_splitting(two_pi * 1e6, 0.5) ==
        Catch::Approx(5e5).epsilon(1e-12));
  CHECK(at_splitting(0.0) == 0.0);
  CHECK_THROWS_AS(at_splitting(-1.0), DomainError);
}

TEST_CASE("field to Rabi conversion in SI units") {
  AtomicParams p;
  p.units = UnitMode::Si;
  p.dipole_moment = 2e-26;
  const double rabi = rabi_from_field(1.0, p);
  CHECK(rabi == Catch::Approx(2e-26 / hbar_si).epsilon(1e-12));
  CHECK(rabi == Catch::Approx(1.8965e8).epsilon(1e-4));
  CHECK(rabi_from_field(0.0, p) == 0.0);
  CHECK_THROWS_AS(rabi_from_field(-1.0, p), DomainError);
}

TEST_CASE("modeled curvature at the tracked peak equals the slope exactly") {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    AtomicParams p;
    p.probe_rabi = 0.5 + uniform01(100, 0, trial);
    p.coupling_rabi = 0.5 + uniform01(100, 1, trial);
    p.linewidth = 1e6 * (0.5 + uniform01(100, 2, trial));
    const SpectrumProfile prof = model_spectrum(p, 0.0, grid_for(p));
    const double h = p.linewidth / 1000.0;
    const double fd = fd_curvature(prof, p.center_freq, h);
    CHECK(std::abs(fd) ==
          Catch::Approx(slope_k0(p)).epsilon(1e-6));
    CHECK(fd < 0.0);  // the tracked point is a transmission maximum
  }
}

TEST_CASE("unshifted profile is symmetric about the tracked peak") {
  const AtomicParams p = normalized_unit();
  const SpectrumProfile prof = model_spectrum(p, 0.0, grid_for(p));
  // The partner peak breaks exact symmetry; compare against its tail.
  for (double d : {0.1, 0.5, 1.0}) {
    const double f = d * p.linewidth;
    const double left = prof.evaluate(p.center_freq - f);
    const double right = prof.evaluate(p.center_freq + f);
    CHECK(left == Catch::Approx(right).epsilon(1e-3));
  }
}

TEST_CASE("profile has maxima at the tracked and partner centers") {
  const AtomicParams p = normalized_unit();
  SpectrumOptions opts;
  opts.peak_separation = 6.0 * p.linewidth;
  const GridSpec g{p.center_freq - 3.0 * p.linewidth,
                   p.center_freq + 9.0 * p.linewidth, 4001};
  const SpectrumProfile prof = model_spectrum(p, 0.0, g, opts);
  const double eps = p.linewidth / 100.0;
  CHECK(prof.evaluate(prof.tracked_center) >
        prof.evaluate(prof.tracked_center + eps));
  CHECK(prof.evaluate(prof.tracked_center) >
        prof.evaluate(prof.tracked_center - eps));
  CHECK(prof.evaluate(prof.partner_center) >
        prof.evaluate(prof.partner_center + eps));
  CHECK(prof.evaluate(prof.partner_center) >
        prof.evaluate(prof.partner_center - eps));
  // The partner peak sits below the tracked one on the frequency axis.
  CHECK(prof.tracked_center - prof.partner_center ==
        Catch::Approx(6.0 * p.linewidth));
}

TEST_CASE("peak shift beyond the linear range is refused") {
  const AtomicParams p = normalized_unit();
  CHECK_NOTHROW(model_spectrum(p, 0.009 * p.linewidth, grid_for(p)));
  CHECK_THROWS_AS(model_spectrum(p, 0.02 * p.linewidth, grid_for(p)),
                  SaturationError);
  CHECK_THROWS_AS(model_spectrum(p, -0.02 * p.linewidth, grid_for(p)),
                  SaturationError);
}

TEST_CASE("grid must cover the tracked peak neighborhood") {
  const AtomicParams p = normalized_unit();
  const GridSpec narrow{p.center_freq + 1e6, p.center_freq + 2e6, 101};
  CHECK_THROWS_AS(model_spectrum(p, 0.0, narrow), ConfigError);
  const GridSpec degenerate{p.center_freq - 4e6, p.center_freq + 4e6, 1};
  CHECK_THROWS_AS(model_spectrum(p, 0.0, degenerate), ConfigError);
}

TEST_CASE("synchronous gradient readout converges to the true derivative") {
  const AtomicParams p = normalized_unit();
  const double shift = 0.005 * p.linewidth;
  const SpectrumProfile prof = model_spectrum(p, shift, grid_for(p));
  const double dither = p.linewidth / 200.0;
  for (double off : {-0.1, -0.05, 0.0, 0.05, 0.1}) {
    const double f = p.center_freq + off * p.linewidth;
    const double truth = prof.derivative(f);
    const double est = lia_gradient_readout(prof, f, dither, 128);
    if (std::abs(truth) > 1e-12)
      CHECK(est == Catch::Approx(truth).epsilon(2e-3));
  }
}

TEST_CASE("gradient readout rejects unusable dither settings") {
  const AtomicParams p = normalized_unit();
  const SpectrumProfile prof = model_spectrum(p, 0.0, grid_for(p));
  CHECK_THROWS_AS(lia_gradient_readout(prof, 0.0, 0.0), PrecisionError);
  CHECK_THROWS_AS(lia_gradient_readout(prof, 0.0, 0.5 * p.linewidth),
                  PrecisionError);
  CHECK_THROWS_AS(lia_gradient_readout(prof, 0.0, p.linewidth / 200.0, 8),
                  PrecisionError);
}

TEST_CASE("atomic parameter validation") {
  AtomicParams p;
  p.probe_rabi = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = AtomicParams{};
  p.linewidth = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = AtomicParams{};
  p.dipole_moment = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}
