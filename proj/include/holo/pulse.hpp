#pragma once

// Target-atom waveforms for single-loop holonomic gates.
//
// Time is in microseconds and frequencies are angular (rad/us, i.e. 2*pi*MHz)
// everywhere in this module. The gate runs over [0, T]; the first half loop
// transfers |B> -> |r>, the second brings the population back, and the drive
// phases switch at T/2.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <variant>
#include <vector>

namespace holo::pulse {

/// Optimized pulse shape coefficients and scale.
struct OhqcParams {
    double a1 = 0.28;
    double a2 = -0.12;
    double duration = 0.0;    // gate time T (us)
    double peak_omega = 0.0;  // max Omega_t(t) (rad/us)

    /// Fixes the peak Rabi frequency and derives T from the dimensionless
    /// product T * max Omega_t, which depends only on (a1, a2).
    static OhqcParams from_peak(double a1, double a2, double peak_omega);
};

/// alpha(t) = 12 pi t'^2/T^2 - 16 pi t'^3/T^3 with t' the time since the
/// start of the current half. Throws ModelError outside [0, T].
double alpha(double t, double T);
double alpha_dot(double t, double T);

double lambda(double alpha, double a1, double a2);
/// d lambda / d alpha
double lambda_prime(double alpha, double a1, double a2);

/// T * max Omega_t(t) for the given shape; independent of the time scale.
double area_product(double a1, double a2);

class OhqcWaveform {
public:
    explicit OhqcWaveform(OhqcParams params);

    const OhqcParams& params() const { return params_; }
    double duration() const { return params_.duration; }
    double omega(double t) const;
    double delta(double t) const;

private:
    OhqcParams params_;
};

OhqcWaveform ohqc_waveform(const OhqcParams& params);

/// Rectangular pulse: constant Omega over [0, T], zero detuning.
class RectangularWaveform {
public:
    RectangularWaveform(double omega, double duration);

    double duration() const { return duration_; }
    double omega(double t) const;
    double delta(double t) const;
    double amplitude() const { return omega_; }

private:
    double omega_;
    double duration_;
};

/// Either pulse family behind one interface.
class TargetWaveform {
public:
    TargetWaveform(OhqcWaveform w) : impl_(std::move(w)) {}
    TargetWaveform(RectangularWaveform w) : impl_(std::move(w)) {}

    double duration() const;
    double omega(double t) const;
    double delta(double t) const;
    bool optimized() const { return std::holds_alternative<OhqcWaveform>(impl_); }

private:
    std::variant<OhqcWaveform, RectangularWaveform> impl_;
};

/// Drive phases (phi_0 on |0>-|r>, phi_1 on |1>-|r>) per half of the gate.
struct PhaseSegment {
    double t_begin;
    double t_end;
    double phi0;
    double phi1;
};

class PhaseSchedule {
public:
    /// First half: (0, pi + phi). Second half: (pi + gamma, gamma + phi).
    static PhaseSchedule for_gate(double duration, double phi, double gamma);

    const std::array<PhaseSegment, 2>& segments() const { return segments_; }
    /// Segment containing t; t == T/2 belongs to the first one.
    const PhaseSegment& at(double t) const;

private:
    std::array<PhaseSegment, 2> segments_{};
};

struct NhqcPulse {
    RectangularWaveform waveform;
    PhaseSchedule schedule;
};

/// Rectangular pulse of total area 2 pi (a pi pulse per half loop).
NhqcPulse nhqc_waveform(double omega, double gamma, double phi);

/// Max absolute difference between the closed-form waveform and the one
/// obtained from the (alpha, beta) parametrization, over `points` samples of
/// the whole gate.
double waveform_consistency_check(const OhqcParams& params, std::size_t points = 10000);

/// eta(t) accumulated since the start of the first half, by quadrature of
/// alpha_dot * cot(beta) / sin(alpha). Requires t in [0, T/2].
double dynamical_phase(const OhqcParams& params, double t);
/// eta at the end of a half loop.
double dynamical_phase(const OhqcParams& params);
/// Closed form 2 alpha + a1 sin(2 alpha) + a2 sin(4 alpha).
double dynamical_phase_ansatz(double alpha, double a1, double a2);

/// Systematic Rabi-error sensitivity, computed in the dimensionless time
/// s = 2t/T of one half loop. Adaptive Gauss-Kronrod to `tol`.
double sensitivity(const OhqcParams& params, double tol = 1e-10);
double sensitivity(double a1, double a2, double tol = 1e-10);
/// Same quantity via fixed composite Simpson on `intervals` panels.
double sensitivity_composite(double a1, double a2, std::size_t intervals = 2048);

struct LandscapeCell {
    double a1;
    double a2;
    double sensitivity;
    double half_area;  // T * max Omega_t / 2
    bool low_sensitivity;  // S < 0.5
    bool short_gate;       // T * max Omega_t / 2 < 10
};

struct Range {
    double start;
    double stop;
    std::size_t points;
    double at(std::size_t i) const;
};

/// Row-major over a2 (outer) then a1 (inner). Requires at least 2 x 2.
std::vector<LandscapeCell> scan_landscape(const Range& a1, const Range& a2, std::size_t threads = 1);

struct PulseSampleTable {
    std::vector<double> times;
    std::vector<double> omega;
    std::vector<double> delta;

    /// Max deviation of linear interpolation from the waveform at interval
    /// midpoints, relative to the peak |Omega|.
    double interpolation_error(const TargetWaveform& w) const;
    /// Columns t_us, omega_MHz, delta_MHz (ordinary frequency, /2pi).
    void write_csv(std::ostream& out) const;
};

PulseSampleTable sample_waveform(const TargetWaveform& w, std::size_t points);

}  // namespace holo::pulse
