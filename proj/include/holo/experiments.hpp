#pragma once

// Scenario runner: JSON configs in, CSV tables out.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holo/dynamics.hpp"
#include "holo/metrics.hpp"
#include "holo/model.hpp"
#include "holo/noise.hpp"
#include "holo/pulse.hpp"

namespace holo {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Gate simulations shared by the scenarios, the tests and the bindings.

enum class Propagation { Full, Effective };

/// Benchmark-state fidelity against the ideal final state at `points`
/// uniform times over the gate (points >= 2).
FidelityCurve cnot_fidelity_curve(const SystemModel& model, Propagation kind, std::size_t points,
                                  const IntegratorSettings& settings = {}, double* norm_drift = nullptr);

/// Final benchmark-state fidelity.
double gate_fidelity(const SystemModel& model, const IntegratorSettings& settings = {},
                     Propagation kind = Propagation::Full);

struct PopulationTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> populations;  // p_k(t), k = 0..sites, in |r>
    std::vector<double> target_rydberg;            // <|r><r|_target>
};

/// Rydberg excitation-number populations along the gate on the benchmark state.
PopulationTrace excitation_trace(const SystemModel& model, std::size_t points, const IntegratorSettings& settings = {});

/// Benchmark-state fidelity <ideal|rho(T)|ideal> under the master equation.
double lindblad_gate_fidelity(const SystemModel& model, const std::vector<LindbladChannel>& channels,
                              const IntegratorSettings& settings = {});

/// Average gate fidelity of the full model under the master equation at the
/// given times (the last must be the gate time); the final-time ideal gate
/// is the comparator throughout.
std::vector<double> lindblad_average_fidelity(const SystemModel& model, const std::vector<LindbladChannel>& channels,
                                              const std::vector<double>& times,
                                              const IntegratorSettings& settings = {});

/// Mean and standard error of the final fidelity over sampled realizations.
MonteCarloEstimate noisy_gate_fidelity(const SystemModel& model, const NoiseSpec& noise,
                                       const IntegratorSettings& settings, std::uint64_t scenario,
                                       std::uint64_t point, std::size_t threads = 1,
                                       std::vector<double>* samples = nullptr);

/// Two-photon CNOT fidelity curve on the benchmark state of the computational levels.
FidelityCurve two_photon_fidelity_curve(const TwoPhotonModel& model, std::size_t points,
                                        const IntegratorSettings& settings = {});

// ---------------------------------------------------------------------------
// Configs.

enum class Scenario {
    FullVsEffective,
    ExcitationPopulations,
    NhqcVsOhqcGrid,
    LifetimeSweep,
    Omega0Error,
    DeltaErrorEcho,
    OmegaModError,
    NScaling,
    RriFluctuation,
    Thermal,
    TwoPhotonCnot,
    PulseLandscape,
    AvgFidelity,
};

struct ScenarioInfo {
    Scenario scenario;
    const char* name;
    const char* summary;
};

const std::vector<ScenarioInfo>& scenario_catalog();
std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

struct SweepRange {
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 1;

    std::vector<double> values() const;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::FullVsEffective;
    GateModelConfig model;
    NoiseSpec noise;
    IntegratorSettings integrator;
    TwoPhotonParams two_photon;
    std::optional<SweepRange> sweep;
    std::optional<SweepRange> sweep2;
    std::vector<double> series;
    std::size_t time_points = 101;
    std::string output;
    std::size_t threads = 1;
    std::string canonical;  // normalized JSON of the resolved config

    std::vector<std::string> warnings;
};

/// Parses a JSON document, applies defaults and checks it. Throws ConfigError
/// listing every problem. Warnings about the scale hierarchy are collected.
ScenarioConfig validate_config(std::string_view text);

/// FNV-1a 64 of the canonical config, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;

    /// '#'-prefixed metadata lines, then the header and the rows.
    void write_csv(std::ostream& out) const;
};

ResultTable run_scenario(const ScenarioConfig& config);

}  // namespace holo
