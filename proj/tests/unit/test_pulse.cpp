#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holo/errors.hpp"
#include "holo/pulse.hpp"

using namespace holo::pulse;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMHz = 2.0 * kPi;
}  // namespace

TEST_CASE("alpha runs from 0 to pi in each half") {
    const double T = 2.0;
    CHECK(alpha(0.0, T) == doctest::Approx(0.0));
    CHECK(alpha(0.5 * T, T) == doctest::Approx(kPi));
    CHECK(alpha(0.5 * T + 1e-12, T) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(alpha(T, T) == doctest::Approx(kPi));
    CHECK_THROWS_AS(alpha(1.1 * T, T), holo::ModelError);
}

TEST_CASE("derivatives match finite differences") {
    const double T = 3.0, h = 1e-6;
    for (double t : {0.1, 0.4, 0.9, 1.2}) {
        const double fd = (alpha(t + h, T) - alpha(t - h, T)) / (2 * h);
        CHECK(alpha_dot(t, T) == doctest::Approx(fd).epsilon(1e-7));
    }
    for (double a : {0.2, 1.0, 2.5}) {
        const double fd = (lambda(a + h, 0.28, -0.12) - lambda(a - h, 0.28, -0.12)) / (2 * h);
        CHECK(lambda_prime(a, 0.28, -0.12) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("dynamical phase closes after each half loop") {
    CHECK(dynamical_phase_ansatz(kPi, 0.28, -0.12) == doctest::Approx(2 * kPi));
    const auto p = OhqcParams::from_peak(0.28, -0.12, kMHz);
    CHECK(std::abs(std::remainder(dynamical_phase(p), 2 * kPi)) < 1e-8);
    const double t = 0.3 * p.duration;
    CHECK(dynamical_phase(p, t) ==
          doctest::Approx(dynamical_phase_ansatz(alpha(t, p.duration), 0.28, -0.12)).epsilon(1e-8));
}

TEST_CASE("peak Rabi frequency and gate time") {
    const auto p = OhqcParams::from_peak(0.28, -0.12, kMHz);
    const OhqcWaveform w(p);
    double peak = 0.0;
    for (int i = 0; i <= 20000; ++i) peak = std::max(peak, w.omega(p.duration * i / 20000.0));
    CHECK(peak == doctest::Approx(kMHz).epsilon(1e-6));
    CHECK(p.duration * kMHz == doctest::Approx(area_product(0.28, -0.12)));
    CHECK(w.omega(0.0) == doctest::Approx(0.0));
    CHECK(waveform_consistency_check(p, 2000) < 1e-10);
}

TEST_CASE("rectangular pulse has total area 2 pi") {
    const auto n = nhqc_waveform(kMHz, kPi, 0.0);
    CHECK(n.waveform.amplitude() * n.waveform.duration() == doctest::Approx(2 * kPi));
    CHECK(n.waveform.delta(0.3) == 0.0);
}

TEST_CASE("phase schedule") {
    const auto s = PhaseSchedule::for_gate(2.0, 0.4, 1.3);
    CHECK(s.at(0.5).phi0 == doctest::Approx(0.0));
    CHECK(s.at(0.5).phi1 == doctest::Approx(kPi + 0.4));
    CHECK(s.at(1.0).phi0 == doctest::Approx(0.0));
    CHECK(s.at(1.5).phi0 == doctest::Approx(kPi + 1.3));
    CHECK(s.at(1.5).phi1 == doctest::Approx(1.3 + 0.4));
}

TEST_CASE("sensitivity quadratures agree") {
    for (auto [a1, a2] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.1}, std::pair{-0.3, -0.4}}) {
        CHECK(sensitivity(a1, a2) == doctest::Approx(sensitivity_composite(a1, a2, 4096)).epsilon(1e-6));
    }
}

TEST_CASE("landscape flags") {
    const auto cells = scan_landscape({-0.5, 0.7, 3}, {-0.5, 0.3, 2});
    REQUIRE(cells.size() == 6);
    CHECK(cells[1].a1 == doctest::Approx(0.1));
    CHECK(cells[3].a2 == doctest::Approx(0.3));
    for (const auto& c : cells) CHECK(c.low_sensitivity == (c.sensitivity < 0.5));
}
