#include "holo/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "holo/errors.hpp"
#include "holo/parallel.hpp"
#include "holo/quadrature.hpp"

namespace holo::pulse {

namespace {

constexpr double kPi = std::numbers::pi;

double local_time(double t, double T) {
    const double slack = 1e-12 * T;
    if (!(T > 0.0)) throw ModelError("gate time must be positive");
    if (t < -slack || t > T + slack) {
        throw ModelError("time " + std::to_string(t) + " outside gate [0, " + std::to_string(T) + "]");
    }
    t = std::clamp(t, 0.0, T);
    return t <= 0.5 * T ? t : t - 0.5 * T;
}

template <class Num>
Num alpha_poly(Num tl, double T) {
    return 12.0 * kPi * tl * tl / (T * T) - 16.0 * kPi * tl * tl * tl / (T * T * T);
}

template <class Num>
Num lambda_of(Num a, double a1, double a2) {
    using std::cos;
    return 2.0 + 2.0 * a1 * cos(2.0 * a) + 4.0 * a2 * cos(4.0 * a);
}

// beta as an analytic function of local time; used with a complex step.
std::complex<double> beta_of(std::complex<double> tl, double T, double a1, double a2) {
    const auto a = alpha_poly(tl, T);
    const auto lam = lambda_of(a, a1, a2);
    const auto s = std::sin(a);
    const auto u = lam * s / std::sqrt(1.0 + lam * lam * s * s);
    return std::acos(u);
}

double golden_max(auto&& f, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

}  // namespace

double alpha(double t, double T) { return alpha_poly(local_time(t, T), T); }

double alpha_dot(double t, double T) {
    const double tl = local_time(t, T);
    return 24.0 * kPi * tl / (T * T) - 48.0 * kPi * tl * tl / (T * T * T);
}

double lambda(double a, double a1, double a2) { return lambda_of(a, a1, a2); }

double lambda_prime(double a, double a1, double a2) {
    return -4.0 * a1 * std::sin(2.0 * a) - 16.0 * a2 * std::sin(4.0 * a);
}

double area_product(double a1, double a2) {
    // T = 1, so T * max Omega = max Omega.
    const OhqcWaveform w(OhqcParams{a1, a2, 1.0, 1.0});
    constexpr std::size_t samples = 4000;
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = 0.5 * static_cast<double>(i) / samples;
        const double v = w.omega(t);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    const double h = 0.5 / samples;
    const double lo = std::max(0.0, (static_cast<double>(best_i) - 1.0) * h);
    const double hi = std::min(0.5, (static_cast<double>(best_i) + 1.0) * h);
    return std::max(best, golden_max([&](double t) { return w.omega(t); }, lo, hi));
}

OhqcParams OhqcParams::from_peak(double a1, double a2, double peak_omega) {
    if (!(peak_omega > 0.0)) throw ModelError("peak_omega must be positive");
    return OhqcParams{a1, a2, area_product(a1, a2) / peak_omega, peak_omega};
}

// ---------------------------------------------------------------------------

OhqcWaveform::OhqcWaveform(OhqcParams params) : params_(params) {
    if (!(params_.duration > 0.0)) throw ModelError("OHQC gate time must be positive");
    if (!(params_.peak_omega > 0.0)) throw ModelError("OHQC peak_omega must be positive");
}

double OhqcWaveform::omega(double t) const {
    const double T = params_.duration;
    const double a = alpha(t, T);
    const double ad = alpha_dot(t, T);
    const double lam = lambda(a, params_.a1, params_.a2);
    const double s = std::sin(a);
    return ad * std::sqrt(1.0 + lam * lam * s * s);
}

double OhqcWaveform::delta(double t) const {
    const double T = params_.duration;
    const double a = alpha(t, T);
    const double ad = alpha_dot(t, T);
    const double lam = lambda(a, params_.a1, params_.a2);
    const double lam_dot = lambda_prime(a, params_.a1, params_.a2) * ad;
    const double s = std::sin(a);
    const double c = std::cos(a);
    return -lam * ad * c - (lam_dot * s + lam * ad * c) / (1.0 + lam * lam * s * s);
}

OhqcWaveform ohqc_waveform(const OhqcParams& params) { return OhqcWaveform(params); }

RectangularWaveform::RectangularWaveform(double omega, double duration)
    : omega_(omega), duration_(duration) {
    if (!(omega > 0.0)) throw ModelError("rectangular pulse amplitude must be positive");
    if (!(duration > 0.0)) throw ModelError("rectangular pulse duration must be positive");
}

double RectangularWaveform::omega(double t) const {
    local_time(t, duration_);
    return omega_;
}

double RectangularWaveform::delta(double t) const {
    local_time(t, duration_);
    return 0.0;
}

double TargetWaveform::duration() const {
    return std::visit([](const auto& w) { return w.duration(); }, impl_);
}
double TargetWaveform::omega(double t) const {
    return std::visit([t](const auto& w) { return w.omega(t); }, impl_);
}
double TargetWaveform::delta(double t) const {
    return std::visit([t](const auto& w) { return w.delta(t); }, impl_);
}

// ---------------------------------------------------------------------------

PhaseSchedule PhaseSchedule::for_gate(double duration, double phi, double gamma) {
    if (!(duration > 0.0)) throw ModelError("gate time must be positive");
    PhaseSchedule s;
    s.segments_[0] = {0.0, 0.5 * duration, 0.0, kPi + phi};
    s.segments_[1] = {0.5 * duration, duration, kPi + gamma, gamma + phi};
    return s;
}

const PhaseSegment& PhaseSchedule::at(double t) const {
    return t <= segments_[0].t_end ? segments_[0] : segments_[1];
}

NhqcPulse nhqc_waveform(double omega, double gamma, double phi) {
    const double T = 2.0 * kPi / omega;
    return NhqcPulse{RectangularWaveform(omega, T), PhaseSchedule::for_gate(T, phi, gamma)};
}

// ---------------------------------------------------------------------------

double waveform_consistency_check(const OhqcParams& params, std::size_t points) {
    const OhqcWaveform w(params);
    const double T = params.duration;
    const double h = 1e-20 * T;
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(points - 1);
        const double tl = local_time(t, T);
        const double a = alpha(t, T);
        const double ad = alpha_dot(t, T);
        const double beta = beta_of({tl, 0.0}, T, params.a1, params.a2).real();
        const double beta_dot = beta_of({tl, h}, T, params.a1, params.a2).imag() / h;
        double cot_product;
        if (std::abs(std::sin(a)) < 1e-6) {
            cot_product = lambda(a, params.a1, params.a2) * std::cos(a);
        } else {
            cot_product = (std::cos(a) / std::sin(a)) * (std::cos(beta) / std::sin(beta));
        }
        const double omega_ab = ad / std::sin(beta);
        const double delta_ab = beta_dot - ad * cot_product;
        worst = std::max({worst, std::abs(omega_ab - w.omega(t)), std::abs(delta_ab - w.delta(t))});
    }
    return worst;
}

double dynamical_phase_ansatz(double a, double a1, double a2) {
    return 2.0 * a + a1 * std::sin(2.0 * a) + a2 * std::sin(4.0 * a);
}

double dynamical_phase(const OhqcParams& params, double t) {
    const double T = params.duration;
    if (t < 0.0 || t > 0.5 * T * (1.0 + 1e-12)) {
        throw ModelError("dynamical_phase is defined on the first half loop [0, T/2]");
    }
    auto integrand = [&](double tt) {
        const double a = alpha(tt, T);
        const double ad = alpha_dot(tt, T);
        const double lam = lambda(a, params.a1, params.a2);
        const double s = std::sin(a);
        if (std::abs(s) < 1e-8) return ad * lam;
        const double beta = std::acos(lam * s / std::sqrt(1.0 + lam * lam * s * s));
        return ad * (std::cos(beta) / std::sin(beta)) / s;
    };
    return quad::adaptive_gauss_kronrod(integrand, 0.0, std::min(t, 0.5 * T), 1e-12);
}

double dynamical_phase(const OhqcParams& params) { return dynamical_phase(params, 0.5 * params.duration); }

namespace {

// Integrand of the sensitivity functional over local time tl in [0, T/2].
std::complex<double> sensitivity_integrand(double tl, double T, double a1, double a2) {
    const double a = alpha_poly(tl, T);
    const double lam = lambda_of(a, a1, a2);
    const double s = std::sin(a);
    const double sin_beta = 1.0 / std::sqrt(1.0 + lam * lam * s * s);
    const double cos_beta = lam * s * sin_beta;
    const double eta = dynamical_phase_ansatz(a, a1, a2);
    return std::exp(std::complex<double>(0.0, -eta)) *
           std::complex<double>(std::cos(a) * cos_beta, sin_beta);
}

}  // namespace

double sensitivity(const OhqcParams& params, double tol) {
    const double half = 0.5 * params.duration;
    auto f = [&](double tl) { return sensitivity_integrand(tl, params.duration, params.a1, params.a2); };
    const std::complex<double> integral = quad::adaptive_gauss_kronrod(f, 0.0, half, tol * half);
    return 0.25 * std::norm(integral) / (half * half);
}

double sensitivity(double a1, double a2, double tol) {
    return sensitivity(OhqcParams{a1, a2, 2.0, 1.0}, tol);
}

double sensitivity_composite(double a1, double a2, std::size_t intervals) {
    auto f = [&](double s) { return sensitivity_integrand(s, 2.0, a1, a2); };
    return 0.25 * std::norm(quad::composite_simpson(f, 0.0, 1.0, intervals));
}

// ---------------------------------------------------------------------------

double Range::at(std::size_t i) const {
    if (points <= 1) return start;
    return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
}

std::vector<LandscapeCell> scan_landscape(const Range& a1, const Range& a2, std::size_t threads) {
    if (a1.points < 2 || a2.points < 2) throw ModelError("landscape grid must be at least 2 x 2");
    std::vector<LandscapeCell> cells(a1.points * a2.points);
    parallel_for(cells.size(), threads, [&](std::size_t k) {
        const double x = a1.at(k % a1.points);
        const double y = a2.at(k / a1.points);
        const double s = sensitivity(x, y);
        const double half_area = 0.5 * area_product(x, y);
        cells[k] = LandscapeCell{x, y, s, half_area, s < 0.5, half_area < 10.0};
    });
    return cells;
}

// ---------------------------------------------------------------------------

PulseSampleTable sample_waveform(const TargetWaveform& w, std::size_t points) {
    if (points < 2) throw ModelError("need at least two waveform samples");
    PulseSampleTable table;
    const double T = w.duration();
    for (std::size_t i = 0; i < points; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(points - 1);
        table.times.push_back(t);
        table.omega.push_back(w.omega(t));
        table.delta.push_back(w.delta(t));
    }
    return table;
}

double PulseSampleTable::interpolation_error(const TargetWaveform& w) const {
    double peak = 0.0;
    for (double v : omega) peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double mid = 0.5 * (times[i] + times[i + 1]);
        const double om = 0.5 * (omega[i] + omega[i + 1]);
        const double de = 0.5 * (delta[i] + delta[i + 1]);
        worst = std::max({worst, std::abs(om - w.omega(mid)), std::abs(de - w.delta(mid))});
    }
    return peak > 0.0 ? worst / peak : worst;
}

void PulseSampleTable::write_csv(std::ostream& out) const {
    out << "t_us,omega_MHz,delta_MHz\n";
    char buf[128];
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", times[i], omega[i] / (2.0 * kPi),
                      delta[i] / (2.0 * kPi));
        out << buf;
    }
}

}  // namespace holo::pulse
