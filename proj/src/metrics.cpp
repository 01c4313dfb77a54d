#include "holo/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "holo/errors.hpp"

namespace holo {

double overlap_fidelity(const StateVector& ideal, const StateVector& psi) {
    if (!(ideal.dims() == psi.dims())) throw DimensionError("fidelity of states with different dimensions");
    return std::norm(ideal.amps().dot(psi.amps()));
}

Matrix computational_embedding(const SiteDims& dims, std::size_t level0, std::size_t level1) {
    const std::size_t n = dims.sites();
    const std::size_t cols = std::size_t{1} << n;
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(dims.total()), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> digits(n);
    for (std::size_t q = 0; q < cols; ++q) {
        for (std::size_t j = 0; j < n; ++j) digits[j] = ((q >> (n - 1 - j)) & 1U) ? level1 : level0;
        w(static_cast<Eigen::Index>(dims.index(digits)), static_cast<Eigen::Index>(q)) = 1.0;
    }
    return w;
}

StateVector benchmark_initial_state(const SiteDims& dims) {
    const std::size_t n = dims.sites();
    const auto cols = static_cast<Eigen::Index>(std::size_t{1} << n);
    Vector q(cols);
    const double a = std::pow(2.0, -0.5 * static_cast<double>(n));
    for (Eigen::Index k = 0; k < cols; ++k) {
        q(k) = (std::popcount(static_cast<std::uint64_t>(k)) % 2 == 0) ? a : -a;
    }
    return StateVector(dims, computational_embedding(dims) * q);
}

StateVector benchmark_initial_state(std::size_t n_controls, const LevelScheme& scheme) {
    return benchmark_initial_state(SiteDims::uniform(n_controls + 1, scheme.size()));
}

StateVector apply_ideal_gate(const GateSpec& gate, const StateVector& psi) {
    const Matrix w = computational_embedding(psi.dims());
    if (w.cols() != static_cast<Eigen::Index>(std::size_t{1} << (gate.n_controls + 1))) {
        throw DimensionError("state does not have N + 1 sites");
    }
    const Matrix u = ideal_gate_unitary(gate).matrix();
    return StateVector(psi.dims(), w * (u * (w.adjoint() * psi.amps())));
}

std::vector<double> excitation_populations(const StateVector& state, std::size_t level) {
    const SiteDims& dims = state.dims();
    std::vector<double> p(dims.sites() + 1, 0.0);
    for (std::size_t i = 0; i < dims.total(); ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < dims.sites(); ++j) k += dims.digit(i, j) == level;
        p[k] += std::norm(state.amps()(static_cast<Eigen::Index>(i)));
    }
    return p;
}

Matrix PauliString::matrix() const {
    Matrix m = Matrix::Ones(1, 1);
    const cplx i(0.0, 1.0);
    for (char c : labels) {
        Matrix s(2, 2);
        switch (c) {
            case 'I': s << 1, 0, 0, 1; break;
            case 'X': s << 0, 1, 1, 0; break;
            case 'Y': s << 0, -i, i, 0; break;
            case 'Z': s << 1, 0, 0, -1; break;
            default: throw ModelError(std::string("unknown Pauli label '") + c + "'");
        }
        Matrix next(m.rows() * 2, m.cols() * 2);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index col = 0; col < m.cols(); ++col) next.block(2 * r, 2 * col, 2, 2) = m(r, col) * s;
        }
        m = std::move(next);
    }
    return m;
}

std::vector<PauliString> PauliString::all(std::size_t n_qubits) {
    static constexpr char kLabels[] = {'I', 'X', 'Y', 'Z'};
    const std::size_t count = std::size_t{1} << (2 * n_qubits);
    std::vector<PauliString> out;
    out.reserve(count);
    for (std::size_t v = 0; v < count; ++v) {
        std::string s(n_qubits, 'I');
        for (std::size_t q = 0; q < n_qubits; ++q) s[q] = kLabels[(v >> (2 * (n_qubits - 1 - q))) & 3U];
        out.push_back({std::move(s)});
    }
    return out;
}

ChannelEvaluator unitary_channel(const Matrix& u) {
    return [u](const std::vector<Matrix>& in) {
        std::vector<Matrix> out;
        out.reserve(in.size());
        for (const auto& x : in) out.push_back(u * x * u.adjoint());
        return out;
    };
}

double average_gate_fidelity(const ChannelEvaluator& channel, const Matrix& u_ideal, const Matrix& embedding,
                             std::size_t batch) {
    const auto l = u_ideal.rows();
    if (embedding.cols() != l) throw DimensionError("embedding and ideal unitary disagree");
    const auto n_qubits = static_cast<std::size_t>(std::lround(std::log2(static_cast<double>(l))));
    const auto strings = PauliString::all(n_qubits);
    if (batch == 0) batch = strings.size();
    double sum = 0.0;
    for (std::size_t start = 0; start < strings.size(); start += batch) {
        const std::size_t stop = std::min(strings.size(), start + batch);
        std::vector<Matrix> inputs;
        std::vector<Matrix> pauli;
        for (std::size_t v = start; v < stop; ++v) {
            pauli.push_back(strings[v].matrix());
            inputs.push_back(embedding * pauli.back() * embedding.adjoint());
        }
        const auto outputs = channel(inputs);
        if (outputs.size() != inputs.size()) throw ModelError("channel returned the wrong number of outputs");
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            const Matrix projected = embedding.adjoint() * outputs[k] * embedding;
            sum += (u_ideal * pauli[k].adjoint() * u_ideal.adjoint() * projected).trace().real();
        }
    }
    const double ld = static_cast<double>(l);
    return (sum + ld * ld) / (ld * ld * (ld + 1.0));
}

MonteCarloEstimate haar_average_fidelity(const ChannelEvaluator& channel, const Matrix& u_ideal,
                                         const Matrix& embedding, std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw ModelError("Monte Carlo needs at least two samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto l = u_ideal.rows();
    std::vector<Vector> states;
    std::vector<Matrix> inputs;
    for (std::size_t s = 0; s < samples; ++s) {
        Vector psi(l);
        for (Eigen::Index k = 0; k < l; ++k) psi(k) = cplx(gauss(rng), gauss(rng));
        psi.normalize();
        const Vector phys = embedding * psi;
        inputs.push_back(phys * phys.adjoint());
        states.push_back(u_ideal * psi);
    }
    const auto outputs = channel(inputs);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Matrix projected = embedding.adjoint() * outputs[s] * embedding;
        const double f = states[s].dot(projected * states[s]).real();
        sum += f;
        sum2 += f * f;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

double truth_table_check(const Matrix& columns, const Operator& u_ideal) {
    const Matrix& u = u_ideal.matrix();
    if (columns.rows() != u.rows() || columns.cols() != u.cols()) {
        throw DimensionError("truth table needs one final state per computational input");
    }
    cplx total(0.0);
    for (Eigen::Index k = 0; k < u.cols(); ++k) total += u.col(k).dot(columns.col(k));
    const cplx phase = std::abs(total) > 0.0 ? total / std::abs(total) : cplx(1.0);
    double worst = 1.0;
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        const double re = std::max(0.0, (std::conj(phase) * u.col(k).dot(columns.col(k))).real());
        worst = std::min(worst, re * re);
    }
    return worst;
}

double FidelityCurve::max_difference(const FidelityCurve& other) const {
    if (times != other.times) throw ModelError("fidelity curves are sampled at different times");
    double d = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) d = std::max(d, std::abs(values[k] - other.values[k]));
    return d;
}

void FidelityCurve::write_csv(std::ostream& out) const {
    out << "t_us,fidelity\n";
    char buf[64];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", times[k], values[k]);
        out << buf;
    }
}

}  // namespace holo
