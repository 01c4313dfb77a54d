#pragma once

// Gate-quality measures on top of the propagators.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "holo/hilbert.hpp"
#include "holo/model.hpp"

namespace holo {

/// |<ideal|psi>|^2
double overlap_fidelity(const StateVector& ideal, const StateVector& psi);

/// D x 2^n isometry taking qubit basis states (qubit 0 slowest) to the
/// physical levels |0>, |1> of each site.
Matrix computational_embedding(const SiteDims& dims, std::size_t level0 = 0, std::size_t level1 = 1);

/// prod_j (|0> - |1>)/sqrt(2) over all sites of `dims`, zero elsewhere.
StateVector benchmark_initial_state(const SiteDims& dims);
StateVector benchmark_initial_state(std::size_t n_controls, const LevelScheme& scheme = LevelScheme::three_level());

/// Ideal gate applied to a state of the physical space (computational part only).
StateVector apply_ideal_gate(const GateSpec& gate, const StateVector& psi);

/// p_k = <P_k> for k = 0..sites, P_k projecting on k sites in `level`.
std::vector<double> excitation_populations(const StateVector& state, std::size_t level);

struct PauliString {
    std::string labels;  // one of I, X, Y, Z per qubit, qubit 0 first

    Matrix matrix() const;
    /// All 4^n strings in lexicographic order over I, X, Y, Z.
    static std::vector<PauliString> all(std::size_t n_qubits);
};

/// Linear map on physical-space matrices, evaluated for a batch of inputs.
using ChannelEvaluator = std::function<std::vector<Matrix>(const std::vector<Matrix>&)>;

/// X -> U X U^dagger for a fixed physical-space matrix U.
ChannelEvaluator unitary_channel(const Matrix& u);

/// Trace-preserving-operator average fidelity over all Pauli strings.
/// Each string is embedded by `embedding`, mapped, projected back and
/// compared with the ideal qubit-space unitary; leakage counts as loss.
/// `batch` strings are mapped per channel call.
double average_gate_fidelity(const ChannelEvaluator& channel, const Matrix& u_ideal, const Matrix& embedding,
                             std::size_t batch = 0);

/// Mean of <psi|U^dag E(|psi><psi|) U|psi> over Haar-random qubit states.
struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};
MonteCarloEstimate haar_average_fidelity(const ChannelEvaluator& channel, const Matrix& u_ideal,
                                         const Matrix& embedding, std::size_t samples, std::uint64_t seed);

/// Worst per-column fidelity of `columns` (final qubit-space states of each
/// computational input) against U_ideal with one fitted global phase.
/// Relative phases between columns reduce the score.
double truth_table_check(const Matrix& columns, const Operator& u_ideal);

struct FidelityCurve {
    std::vector<double> times;
    std::vector<double> values;

    double final_value() const { return values.back(); }
    /// max_k |values_k - other.values_k|; throws unless the times match.
    double max_difference(const FidelityCurve& other) const;
    /// Columns t_us,fidelity.
    void write_csv(std::ostream& out) const;
};

}  // namespace holo
