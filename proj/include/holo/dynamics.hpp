#pragma once

// Adaptive RK4 propagation of state vectors and density matrices.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "holo/hamiltonian.hpp"
#include "holo/hilbert.hpp"

namespace holo {

struct IntegratorSettings {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.01;      // us
    double min_step = 1e-12;     // us
    double initial_step = 1e-4;  // us

    /// Throws ModelError if the invariants do not hold.
    void validate() const;
    /// Tolerances multiplied by `factor`, step bounds unchanged.
    IntegratorSettings scaled(double factor) const;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

/// Evolution window plus the times at which states are recorded. Empty
/// `samples` records only the final state.
struct TimeSpan {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> samples;

    static TimeSpan uniform(double t_begin, double t_end, std::size_t points);
};

struct StateTrajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    IntegrationStats stats;
    /// max | |psi(t)| - |psi(0)| | over the samples and a uniform 257-point grid.
    double max_norm_drift = 0.0;

    const StateVector& final_state() const { return states.back(); }
};

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    IntegrationStats stats;
    double max_trace_drift = 0.0;

    const DensityMatrix& final_state() const { return states.back(); }
};

/// Jump operator with its rate folded in.
struct LindbladChannel {
    Operator op;
    std::string label;
};

StateTrajectory evolve_schrodinger(const TimeDependentHamiltonian& h, const StateVector& psi0,
                                   const TimeSpan& span, const IntegratorSettings& settings = {});

DensityTrajectory evolve_lindblad(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels,
                                  const DensityMatrix& rho0, const TimeSpan& span,
                                  const IntegratorSettings& settings = {});

/// Evolves the columns of `columns` (states in the space of `h`) together over
/// [t_begin, t_end].
Matrix evolve_schrodinger_batch(const TimeDependentHamiltonian& h, const Matrix& columns, double t_begin,
                                double t_end, const IntegratorSettings& settings = {},
                                IntegrationStats* stats = nullptr);

/// Evolves several (arbitrary, not necessarily physical) matrices as one
/// coupled system over [t_begin, t_end] and returns their final values.
std::vector<Matrix> evolve_lindblad_batch(const TimeDependentHamiltonian& h,
                                          const std::vector<LindbladChannel>& channels,
                                          const std::vector<Matrix>& inputs, double t_begin, double t_end,
                                          const IntegratorSettings& settings = {},
                                          IntegrationStats* stats = nullptr);

/// As evolve_lindblad_batch, calling `observe(t, outputs)` at each of the
/// sorted `samples` in [t_begin, t_end].
void evolve_lindblad_batch_sampled(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels,
                                   const std::vector<Matrix>& inputs, double t_begin,
                                   const std::vector<double>& samples,
                                   const std::function<void(double, const std::vector<Matrix>&)>& observe,
                                   const IntegratorSettings& settings = {}, IntegrationStats* stats = nullptr);

/// Columns t_us then one column per observable (real part of the expectation).
void write_trajectory_csv(std::ostream& out, const StateTrajectory& trajectory,
                          const std::vector<std::pair<std::string, Operator>>& observables);

}  // namespace holo
