#pragma once

// Error models: systematic offsets, random interaction jitter, Doppler
// detunings, and the Lindblad channels of a finite Rydberg lifetime.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "holo/dynamics.hpp"
#include "holo/model.hpp"

namespace holo {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kRb87Mass = 1.44316060e-25;  // kg
/// Counter-propagating 420 nm + 1013 nm two-photon excitation, rad/um.
inline constexpr double kDefaultKeff = kTwoPi / 0.420 - kTwoPi / 1.013;

struct NoiseSpec {
    double delta_t_rel = 0.0;       // gate duration
    double delta_omega_t_rel = 0.0;
    double delta_omega_t_abs = 0.0;   // rad/us
    double delta_omega0_abs = 0.0;    // rad/us, |0>-|r> leg only
    double delta_delta_rel = 0.0;
    double delta_omega_mod = 0.0;     // rad/us
    double delta_v_bound = 0.0;       // relative
    double temperature_uk = 0.0;
    double k_eff = kDefaultKeff;      // rad/um
    double atom_mass = kRb87Mass;     // kg
    double tau_rydberg = std::numeric_limits<double>::infinity();  // us
    double gamma_phi = 0.0;           // rad/us
    bool spin_echo = false;
    std::size_t realizations = 1;
    std::uint64_t seed = 0;

    /// Throws ModelError on negative bounds or zero realizations.
    void validate() const;
    /// True when realizations differ from one another.
    bool stochastic() const { return delta_v_bound > 0.0 || temperature_uk > 0.0; }
};

struct NoiseRealization {
    DriveErrors errors;
    double delta_omega_mod = 0.0;
    Eigen::MatrixXd interaction_offsets;  // relative, symmetric, zero diagonal
    std::vector<double> doppler;          // rad/us per atom
    bool spin_echo = false;
};

/// Standard deviation of the Doppler detuning, rad/us.
double doppler_sigma(const NoiseSpec& spec);

/// 64-bit key of (seed, scenario, point, realization); streams with
/// different keys are independent.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t scenario, std::uint64_t point, std::uint64_t realization);

NoiseRealization sample_noise(const NoiseSpec& spec, std::size_t n_atoms, std::size_t realization,
                              std::uint64_t scenario = 0, std::uint64_t point = 0);

SystemModel apply_noise(const SystemModel& model, const NoiseRealization& r);

/// Model frozen for time t: past the half time of an echoed model the static
/// detunings and the detuning error change sign. Echo is then switched off.
SystemModel spin_echo_transform(const SystemModel& model, double t);

/// sqrt(G/8)|0><r|, sqrt(G/8)|1><r|, sqrt(3G/4)|2><r| per atom, G = 1/tau.
/// Requires a scheme with level "2".
std::vector<LindbladChannel> decay_channels(const SystemModel& model, double tau);

/// sqrt(gamma)(|r><r| - |B><B|) on the target (B the drive bright state) and sqrt(gamma)(|r><r| - |0><0|) on controls.
std::vector<LindbladChannel> dephasing_channels(const SystemModel& model, double gamma_phi);

/// Decay (when tau is finite) plus dephasing (when gamma_phi > 0).
std::vector<LindbladChannel> lindblad_channels(const SystemModel& model, const NoiseSpec& spec);

}  // namespace holo
