#include "holo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <Eigen/Sparse>

#include "holo/errors.hpp"

namespace holo {

namespace {

using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct GenEntry {
    Eigen::Index row;
    Eigen::Index col;
    cplx value;
    std::size_t slot;  // kStaticSlot, a coefficient slot, or slots + k for conj(c_k)
};

using Triplets = std::vector<Eigen::Triplet<cplx>>;

Triplets nonzeros(const Matrix& m) {
    Triplets out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) != cplx(0.0)) out.emplace_back(r, c, m(r, c));
        }
    }
    return out;
}

// Linear generator G(t) on a fixed sparsity pattern, dy/dt = G(t) y, with
// values = static part + sum_k c_k(t) G_k + conj(c_k(t)) G'_k.
class Generator {
public:
    Generator(double a, double b, Eigen::Index n, std::vector<GenEntry> entries, std::size_t slots,
              CoefficientFn coefficients)
        : t_begin(a), t_end(b), coefficients_(std::move(coefficients)), coeffs_(slots), table_(2 * slots) {
        Triplets pattern;
        pattern.reserve(entries.size());
        for (const auto& e : entries) pattern.emplace_back(e.row, e.col, cplx(1.0));
        matrix_.resize(n, n);
        matrix_.setFromTriplets(pattern.begin(), pattern.end());
        matrix_.makeCompressed();
        static_values_.assign(static_cast<std::size_t>(matrix_.nonZeros()), cplx(0.0));
        for (const auto& e : entries) {
            const std::size_t pos = position(e.row, e.col);
            if (e.slot == kStaticSlot) {
                static_values_[pos] += e.value;
            } else {
                dynamic_.push_back({pos, e.slot, e.value});
            }
        }
        std::sort(dynamic_.begin(), dynamic_.end(),
                  [](const Entry& x, const Entry& y) { return std::tie(x.index, x.slot) < std::tie(y.index, y.slot); });
        std::vector<Entry> merged;
        for (const auto& e : dynamic_) {
            if (!merged.empty() && merged.back().index == e.index && merged.back().slot == e.slot) {
                merged.back().value += e.value;
            } else {
                merged.push_back(e);
            }
        }
        dynamic_ = std::move(merged);
    }

    const Sparse& at(double t) {
        cplx* values = matrix_.valuePtr();
        std::copy(static_values_.begin(), static_values_.end(), values);
        if (dynamic_.empty()) return matrix_;
        coefficients_(t, coeffs_);
        const std::size_t slots = coeffs_.size();
        for (std::size_t k = 0; k < slots; ++k) {
            table_[k] = coeffs_[k];
            table_[slots + k] = std::conj(coeffs_[k]);
        }
        for (const auto& e : dynamic_) {
            const cplx c = table_[e.slot];
            const double re = c.real() * e.value.real() - c.imag() * e.value.imag();
            const double im = c.real() * e.value.imag() + c.imag() * e.value.real();
            values[e.index] += cplx(re, im);
        }
        return matrix_;
    }

    double t_begin;
    double t_end;

private:
    struct Entry {
        std::size_t index;
        std::size_t slot;
        cplx value;
    };

    std::size_t position(Eigen::Index row, Eigen::Index col) const {
        const auto* outer = matrix_.outerIndexPtr();
        const auto* inner = matrix_.innerIndexPtr();
        const auto* first = inner + outer[row];
        const auto* last = inner + outer[row + 1];
        const auto* it = std::lower_bound(first, last, static_cast<Sparse::StorageIndex>(col));
        return static_cast<std::size_t>(it - inner);
    }

    CoefficientFn coefficients_;
    std::vector<cplx> coeffs_;
    std::vector<cplx> table_;
    Sparse matrix_;
    std::vector<cplx> static_values_;
    std::vector<Entry> dynamic_;
};

// -i H(t) restricted to `subset` (all states when null).
Generator schrodinger_generator(const HamiltonianSegment& seg, Eigen::Index full,
                                const std::vector<Eigen::Index>* subset) {
    const cplx mi(0.0, -1.0);
    const Eigen::Index n = subset ? static_cast<Eigen::Index>(subset->size()) : full;
    std::vector<GenEntry> entries;
    auto add = [&](const Matrix& m, std::size_t slot) {
        for (const auto& t : nonzeros(m)) entries.push_back({t.row(), t.col(), mi * t.value(), slot});
    };
    for (const auto& term : seg.terms) {
        const Matrix op = subset ? Matrix(term.op.matrix()(*subset, *subset)) : term.op.matrix();
        const bool fixed = term.slot == kStaticSlot;
        add(op, term.slot);
        if (term.add_adjoint) add(op.adjoint(), fixed ? kStaticSlot : seg.slots + term.slot);
    }
    return Generator(seg.t_begin, seg.t_end, n, std::move(entries), seg.slots, seg.coefficients);
}

// Liouvillian acting on column-stacked vec(rho), index a + n b for rho(a, b):
// vec(X rho Y^T) = (Y kron X) vec(rho).
std::vector<GenEntry> lindblad_entries(const HamiltonianSegment& seg, Eigen::Index n,
                                       const std::vector<Triplets>& jumps, const Matrix& jump_static) {
    const cplx i1(0.0, 1.0);
    std::vector<GenEntry> entries;
    // H rho - rho H^dag pieces for X with coefficient slot `slot` and its conjugate slot `cslot`.
    auto commutator = [&](const Matrix& x, std::size_t slot, std::size_t cslot) {
        for (const auto& t : nonzeros(x)) {
            for (Eigen::Index b = 0; b < n; ++b) {
                entries.push_back({t.row() + n * b, t.col() + n * b, -i1 * t.value(), slot});
                entries.push_back({b + n * t.row(), b + n * t.col(), i1 * std::conj(t.value()), cslot});
            }
        }
    };
    Matrix a0 = jump_static;
    for (const auto& term : seg.terms) {
        if (term.slot == kStaticSlot) {
            a0 += term.op.matrix();
            if (term.add_adjoint) a0 += term.op.matrix().adjoint();
            continue;
        }
        const std::size_t cs = seg.slots + term.slot;
        commutator(term.op.matrix(), term.slot, cs);
        if (term.add_adjoint) commutator(term.op.matrix().adjoint(), cs, term.slot);
    }
    // Static non-Hermitian part: -i (A0 rho - rho A0^dag).
    for (const auto& t : nonzeros(a0)) {
        for (Eigen::Index b = 0; b < n; ++b) {
            entries.push_back({t.row() + n * b, t.col() + n * b, -i1 * t.value(), kStaticSlot});
            entries.push_back({b + n * t.row(), b + n * t.col(), i1 * std::conj(t.value()), kStaticSlot});
        }
    }
    for (const auto& l : jumps) {
        for (const auto& u : l) {
            for (const auto& v : l) {
                entries.push_back({v.row() + n * u.row(), v.col() + n * u.col(), std::conj(u.value()) * v.value(),
                                   kStaticSlot});
            }
        }
    }
    return entries;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Breakpoints: segment boundaries and sample times inside [a, b], sorted.
std::vector<double> breakpoints(const TimeDependentHamiltonian& h, double a, double b,
                                const std::vector<double>& samples) {
    std::vector<double> pts{a, b};
    for (const auto& s : h.segments()) {
        if (s.t_begin > a && s.t_begin < b) pts.push_back(s.t_begin);
    }
    for (double s : samples) {
        if (s > a && s < b) pts.push_back(s);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

void check_window(const TimeDependentHamiltonian& h, double a, double b) {
    const double slack = 1e-12 * (1.0 + std::abs(h.t_end()));
    if (!(b >= a)) throw ModelError("evolution window must have t_end >= t_begin");
    if (a < h.t_begin() - slack || b > h.t_end() + slack) {
        throw ModelError("evolution window exceeds the Hamiltonian's time range");
    }
}

// Classic RK4 with step doubling on [a, b]. `rhs(t, y, dy)` evaluates dy/dt.
// `on_accept(y)` runs after each accepted step.
template <class State, class Rhs, class OnAccept>
void integrate_interval(Rhs& rhs, State& y, double a, double b, double& h, const IntegratorSettings& s,
                        IntegrationStats& stats, OnAccept&& on_accept) {
    State k1 = State::Zero(y.rows(), y.cols());
    State k2 = k1, k3 = k1, k4 = k1, tmp = k1, y1 = k1, ymid = k1, y2 = k1;

    auto rk4_from_k1 = [&](double t, const State& y0, const State& d1, double step, State& out) {
        tmp = y0 + (0.5 * step) * d1;
        rhs(t + 0.5 * step, tmp, k2);
        tmp = y0 + (0.5 * step) * k2;
        rhs(t + 0.5 * step, tmp, k3);
        tmp = y0 + step * k3;
        rhs(t + step, tmp, k4);
        out = y0 + (step / 6.0) * (d1 + 2.0 * k2 + 2.0 * k3 + k4);
        stats.evaluations += 3;
    };

    double t = a;
    bool after_reject = false;
    while (b - t > 1e-15 * std::max(1.0, std::abs(b))) {
        const double remaining = b - t;
        double step = std::min({h, s.max_step, remaining});
        const bool clipped = step == remaining && remaining < h;
        rhs(t, y, k1);
        stats.evaluations += 1;
        rk4_from_k1(t, y, k1, step, y1);
        rk4_from_k1(t, y, k1, 0.5 * step, ymid);
        rhs(t + 0.5 * step, ymid, k1);
        stats.evaluations += 1;
        rk4_from_k1(t + 0.5 * step, ymid, k1, 0.5 * step, y2);

        const double err = max_abs(y2 - y1) / 15.0;
        const double scale = s.abs_tol + s.rel_tol * std::max(max_abs(y), max_abs(y2));
        const double ratio = err / scale;
        const double factor = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 4.0;
        if (ratio <= 1.0) {
            y.swap(y2);
            t = clipped ? b : t + step;
            ++stats.accepted;
            on_accept(t, y);
            if (!clipped) h = std::min(step * std::clamp(factor, 0.2, after_reject ? 1.0 : 4.0), s.max_step);
            after_reject = false;
        } else {
            ++stats.rejected;
            after_reject = true;
            h = step * std::clamp(factor, 0.1, 0.9);
            if (h < s.min_step) {
                char msg[200];
                std::snprintf(msg, sizeof msg,
                              "step size underflow (%.3g us) at t = %.9g us; an unresolved fast scale "
                              "(e.g. GHz detuning) makes the problem stiff",
                              h, t);
                throw IntegrationError(msg);
            }
        }
    }
}

// Drives the per-segment integration between breakpoints. `make_rhs(seg)`
// returns the derivative functor for a segment; `record(t, y)` is called at
// every sample time and at t_end.
template <class State, class MakeRhs, class OnAccept, class Record>
void integrate_piecewise(const TimeDependentHamiltonian& h, State& y, double a, double b,
                         const std::vector<double>& samples, const IntegratorSettings& s,
                         IntegrationStats& stats, MakeRhs&& make_rhs, OnAccept&& on_accept, Record&& record) {
    const auto pts = breakpoints(h, a, b, samples);
    double step = s.initial_step;
    std::size_t sample_idx = 0;
    auto emit = [&](double t) {
        while (sample_idx < samples.size() && std::abs(samples[sample_idx] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
            record(samples[sample_idx], y);
            ++sample_idx;
        }
    };
    emit(a);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i];
        const double hi = pts[i + 1];
        const std::size_t seg = h.segment_index(0.5 * (lo + hi));
        auto& rhs = make_rhs(seg);
        integrate_interval(rhs, y, lo, hi, step, s, stats, on_accept);
        emit(hi);
    }
}

std::vector<double> normalized_samples(const TimeSpan& span) {
    std::vector<double> samples = span.samples;
    if (samples.empty()) samples.push_back(span.t_end);
    for (double t : samples) {
        if (t < span.t_begin - 1e-12 || t > span.t_end + 1e-12) throw ModelError("sample time outside span");
    }
    if (!std::is_sorted(samples.begin(), samples.end())) throw ModelError("sample times must be sorted");
    return samples;
}

struct GeneratorRhs {
    Generator* gen;
    template <class State>
    void operator()(double t, const State& y, State& dy) const {
        dy.noalias() = gen->at(t) * y;
    }
};

Matrix lindblad_static(const std::vector<LindbladChannel>& channels, Eigen::Index n) {
    Matrix m = Matrix::Zero(n, n);
    for (const auto& c : channels) m += c.op.matrix().adjoint() * c.op.matrix();
    return cplx(0.0, -0.5) * m;
}

// Connected components of the union coupling graph of all terms; H(t) is
// block diagonal over them at every t.
std::vector<std::vector<Eigen::Index>> invariant_blocks(const TimeDependentHamiltonian& h) {
    const auto n = static_cast<Eigen::Index>(h.dims().total());
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    auto find = [&](Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
            i = parent[static_cast<std::size_t>(i)];
        }
        return i;
    };
    for (const auto& seg : h.segments()) {
        for (const auto& term : seg.terms) {
            const Matrix& m = term.op.matrix();
            for (Eigen::Index c = 0; c < n; ++c) {
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r == c || m(r, c) == cplx(0.0)) continue;
                    const Eigen::Index a = find(r), b = find(c);
                    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
                }
            }
        }
    }
    std::vector<std::vector<Eigen::Index>> blocks;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index root = find(i);
        auto& s = slot[static_cast<std::size_t>(root)];
        if (s < 0) {
            s = static_cast<Eigen::Index>(blocks.size());
            blocks.emplace_back();
        }
        blocks[static_cast<std::size_t>(s)].push_back(i);
    }
    return blocks;
}

constexpr std::size_t kDriftGrid = 256;

// Schrodinger integration of one invariant block.
struct BlockSystem {
    std::vector<Eigen::Index> indices;
    std::vector<Generator> compiled;
    std::vector<GeneratorRhs> rhs;

    BlockSystem(const TimeDependentHamiltonian& h, std::vector<Eigen::Index> idx) : indices(std::move(idx)) {
        const auto full = static_cast<Eigen::Index>(h.dims().total());
        compiled.reserve(h.segments().size());
        for (const auto& seg : h.segments()) compiled.push_back(schrodinger_generator(seg, full, &indices));
        for (auto& c : compiled) rhs.push_back({&c});
    }
};

}  // namespace

// ---------------------------------------------------------------------------

void IntegratorSettings::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ModelError("integrator tolerances must be positive");
    if (!(min_step > 0.0) || !(min_step <= initial_step) || !(initial_step <= max_step)) {
        throw ModelError("integrator steps must satisfy 0 < min_step <= initial_step <= max_step");
    }
}

IntegratorSettings IntegratorSettings::scaled(double factor) const {
    if (!(factor > 0.0)) throw ModelError("tolerance scale must be positive");
    IntegratorSettings s = *this;
    s.rel_tol *= factor;
    s.abs_tol *= factor;
    return s;
}

TimeSpan TimeSpan::uniform(double t_begin, double t_end, std::size_t points) {
    if (points < 2) throw ModelError("uniform span needs at least two points");
    TimeSpan s{t_begin, t_end, {}};
    for (std::size_t i = 0; i < points; ++i) {
        s.samples.push_back(i + 1 == points ? t_end
                                            : t_begin + (t_end - t_begin) * static_cast<double>(i) /
                                                            static_cast<double>(points - 1));
    }
    return s;
}

StateTrajectory evolve_schrodinger(const TimeDependentHamiltonian& h, const StateVector& psi0, const TimeSpan& span,
                                   const IntegratorSettings& settings) {
    settings.validate();
    check_window(h, span.t_begin, span.t_end);
    if (!(psi0.dims() == h.dims())) throw DimensionError("initial state does not match Hamiltonian dimensions");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ModelError("initial state must be normalized");

    const auto samples = normalized_samples(span);
    // Norm diagnostics on a fixed grid merged with the requested samples.
    std::vector<double> grid = samples;
    for (std::size_t k = 0; k <= kDriftGrid; ++k) {
        grid.push_back(span.t_begin + (span.t_end - span.t_begin) * static_cast<double>(k) / kDriftGrid);
    }
    std::sort(grid.begin(), grid.end());
    const auto n = static_cast<Eigen::Index>(h.dims().total());
    Matrix recorded = Matrix::Zero(n, static_cast<Eigen::Index>(samples.size()));
    std::vector<double> norms(grid.size(), 0.0);
    StateTrajectory out;
    for (auto& idx : invariant_blocks(h)) {
        Vector y = psi0.amps()(idx);
        if (y.squaredNorm() == 0.0) continue;
        BlockSystem block(h, std::move(idx));
        std::size_t k = 0, column = 0;
        integrate_piecewise(
            h, y, span.t_begin, span.t_end, grid, settings, out.stats,
            [&](std::size_t seg) -> GeneratorRhs& { return block.rhs[seg]; }, [](double, const Vector&) {},
            [&](double t, const Vector& v) {
                norms[k++] += v.squaredNorm();
                if (column < samples.size() && t == samples[column]) {
                    while (column < samples.size() && t == samples[column]) recorded.col(column++)(block.indices) = v;
                }
            });
    }
    const double norm0 = psi0.norm();
    for (double sq : norms) out.max_norm_drift = std::max(out.max_norm_drift, std::abs(std::sqrt(sq) - norm0));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        out.times.push_back(samples[k]);
        out.states.emplace_back(h.dims(), recorded.col(static_cast<Eigen::Index>(k)));
    }
    return out;
}

Matrix evolve_schrodinger_batch(const TimeDependentHamiltonian& h, const Matrix& columns, double t_begin,
                                double t_end, const IntegratorSettings& settings, IntegrationStats* stats) {
    settings.validate();
    check_window(h, t_begin, t_end);
    if (columns.rows() != static_cast<Eigen::Index>(h.dims().total())) {
        throw DimensionError("batch states do not match Hamiltonian dimensions");
    }
    IntegrationStats local;
    Matrix result = Matrix::Zero(columns.rows(), columns.cols());
    for (auto& idx : invariant_blocks(h)) {
        Matrix y = columns(idx, Eigen::all);
        if (y.norm() == 0.0) continue;
        BlockSystem block(h, std::move(idx));
        integrate_piecewise(
            h, y, t_begin, t_end, {}, settings, local,
            [&](std::size_t seg) -> GeneratorRhs& { return block.rhs[seg]; }, [](double, const Matrix&) {},
            [](double, const Matrix&) {});
        result(block.indices, Eigen::all) = y;
    }
    if (stats) *stats = local;
    return result;
}

namespace {

// Liouvillian entries per segment plus the dependency graph of vec(rho)
// components: reach[j] lists every i with G_ij != 0 in some segment.
struct LindbladSetup {
    Eigen::Index n = 0;
    std::vector<std::vector<GenEntry>> entries;
    std::vector<std::vector<Eigen::Index>> reach;

    LindbladSetup(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels)
        : n(static_cast<Eigen::Index>(h.dims().total())) {
        std::vector<Triplets> jumps;
        for (const auto& c : channels) {
            if (!(c.op.dims() == h.dims())) {
                throw DimensionError("Lindblad channel '" + c.label + "' has wrong dimensions");
            }
            if (!c.op.matrix().allFinite()) throw ModelError("Lindblad channel '" + c.label + "' is not finite");
            jumps.push_back(nonzeros(c.op.matrix()));
        }
        const Matrix extra = lindblad_static(channels, n);
        reach.resize(static_cast<std::size_t>(n * n));
        for (const auto& seg : h.segments()) {
            entries.push_back(lindblad_entries(seg, n, jumps, extra));
            for (const auto& e : entries.back()) {
                if (e.row != e.col) reach[static_cast<std::size_t>(e.col)].push_back(e.row);
            }
        }
        for (auto& r : reach) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
        }
    }

    // Sorted closure of `seeds` under the dependency graph.
    std::vector<Eigen::Index> closure(const std::vector<Eigen::Index>& seeds) const {
        std::vector<char> seen(reach.size(), 0);
        std::vector<Eigen::Index> stack = seeds, out;
        for (auto i : seeds) seen[static_cast<std::size_t>(i)] = 1;
        while (!stack.empty()) {
            const auto j = stack.back();
            stack.pop_back();
            out.push_back(j);
            for (auto i : reach[static_cast<std::size_t>(j)]) {
                if (!seen[static_cast<std::size_t>(i)]) {
                    seen[static_cast<std::size_t>(i)] = 1;
                    stack.push_back(i);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

// Liouvillian restricted to a closed set of vec(rho) components.
struct LindbladSystem {
    std::vector<Eigen::Index> indices;
    std::vector<Generator> compiled;
    std::vector<GeneratorRhs> rhs;

    LindbladSystem(const TimeDependentHamiltonian& h, const LindbladSetup& setup, std::vector<Eigen::Index> idx)
        : indices(std::move(idx)) {
        std::vector<Eigen::Index> local(static_cast<std::size_t>(setup.n * setup.n), -1);
        for (std::size_t k = 0; k < indices.size(); ++k) local[static_cast<std::size_t>(indices[k])] = static_cast<Eigen::Index>(k);
        const auto m = static_cast<Eigen::Index>(indices.size());
        compiled.reserve(h.segments().size());
        for (std::size_t s = 0; s < h.segments().size(); ++s) {
            const auto& seg = h.segments()[s];
            std::vector<GenEntry> restricted;
            for (const auto& e : setup.entries[s]) {
                const auto c = local[static_cast<std::size_t>(e.col)];
                if (c < 0) continue;
                restricted.push_back({local[static_cast<std::size_t>(e.row)], c, e.value, e.slot});
            }
            compiled.emplace_back(seg.t_begin, seg.t_end, m, std::move(restricted), seg.slots, seg.coefficients);
        }
        for (auto& c : compiled) rhs.push_back({&c});
    }
};

std::vector<Eigen::Index> support(const Vector& v) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != cplx(0.0)) out.push_back(i);
    }
    return out;
}

}  // namespace

DensityTrajectory evolve_lindblad(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels,
                                  const DensityMatrix& rho0, const TimeSpan& span, const IntegratorSettings& settings) {
    settings.validate();
    check_window(h, span.t_begin, span.t_end);
    if (!(rho0.dims() == h.dims())) throw DimensionError("initial density matrix does not match Hamiltonian");
    const auto samples = normalized_samples(span);
    const LindbladSetup setup(h, channels);
    const auto n = setup.n;
    const Vector full = rho0.matrix().reshaped();
    LindbladSystem system(h, setup, setup.closure(support(full)));
    std::vector<Eigen::Index> diagonal;
    for (std::size_t k = 0; k < system.indices.size(); ++k) {
        if (system.indices[k] % (n + 1) == 0) diagonal.push_back(static_cast<Eigen::Index>(k));
    }

    DensityTrajectory out;
    const cplx trace0 = rho0.trace();
    Vector y = full(system.indices);
    integrate_piecewise(
        h, y, span.t_begin, span.t_end, samples, settings, out.stats,
        [&](std::size_t seg) -> GeneratorRhs& { return system.rhs[seg]; },
        [&](double, const Vector& v) {
            out.max_trace_drift = std::max(out.max_trace_drift, std::abs(v(diagonal).sum() - trace0));
        },
        [&](double t, const Vector& v) {
            Vector rho = Vector::Zero(n * n);
            rho(system.indices) = v;
            out.times.push_back(t);
            out.states.emplace_back(h.dims(), rho.reshaped(n, n));
        });
    return out;
}

namespace {

// One column vec(rho_k) per input.
Matrix stack_inputs(const std::vector<Matrix>& inputs, Eigen::Index n) {
    Matrix y(n * n, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (inputs[k].rows() != n || inputs[k].cols() != n) throw DimensionError("batch input has wrong dimensions");
        y.col(static_cast<Eigen::Index>(k)) = inputs[k].reshaped();
    }
    return y;
}

std::vector<Matrix> unstack(const Matrix& y, Eigen::Index n) {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(y.cols()));
    for (Eigen::Index k = 0; k < y.cols(); ++k) out.emplace_back(y.col(k).reshaped(n, n));
    return out;
}

}  // namespace

std::vector<Matrix> evolve_lindblad_batch(const TimeDependentHamiltonian& h,
                                          const std::vector<LindbladChannel>& channels,
                                          const std::vector<Matrix>& inputs, double t_begin, double t_end,
                                          const IntegratorSettings& settings, IntegrationStats* stats) {
    std::vector<Matrix> out;
    evolve_lindblad_batch_sampled(
        h, channels, inputs, t_begin, {t_end}, [&](double, const std::vector<Matrix>& m) { out = m; }, settings,
        stats);
    return out;
}

void evolve_lindblad_batch_sampled(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels,
                                   const std::vector<Matrix>& inputs, double t_begin,
                                   const std::vector<double>& samples,
                                   const std::function<void(double, const std::vector<Matrix>&)>& observe,
                                   const IntegratorSettings& settings, IntegrationStats* stats) {
    settings.validate();
    if (samples.empty()) throw ModelError("no sample times");
    if (!std::is_sorted(samples.begin(), samples.end()) || samples.front() < t_begin) {
        throw ModelError("sample times must be sorted and not precede t_begin");
    }
    const double t_end = samples.back();
    check_window(h, t_begin, t_end);
    const auto n = static_cast<Eigen::Index>(h.dims().total());
    if (inputs.empty()) return;
    const Matrix y = stack_inputs(inputs, n);
    const LindbladSetup setup(h, channels);
    const auto m = y.cols();

    // Outputs are sum_s evolve(seed_s) * weights(s, :). Seeds are the matrix
    // units in the joint support when there are few of them, else the inputs.
    std::vector<Eigen::Index> units;
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto sk = support(y.col(k));
        units.insert(units.end(), sk.begin(), sk.end());
    }
    std::sort(units.begin(), units.end());
    units.erase(std::unique(units.begin(), units.end()), units.end());
    const bool by_unit = static_cast<Eigen::Index>(units.size()) <= m;
    const auto seeds = by_unit ? static_cast<Eigen::Index>(units.size()) : m;
    Matrix weights = by_unit ? Matrix(y(units, Eigen::all)) : Matrix(Matrix::Identity(m, m));
    auto seed_support = [&](Eigen::Index s) {
        return by_unit ? std::vector<Eigen::Index>{units[static_cast<std::size_t>(s)]} : support(y.col(s));
    };

    std::map<std::vector<Eigen::Index>, std::vector<Eigen::Index>> groups;
    for (Eigen::Index s = 0; s < seeds; ++s) groups[setup.closure(seed_support(s))].push_back(s);

    std::vector<Matrix> outputs(samples.size(), Matrix::Zero(n * n, m));
    IntegrationStats local;
    for (const auto& [closure, members] : groups) {
        LindbladSystem system(h, setup, closure);
        Matrix z = Matrix::Zero(static_cast<Eigen::Index>(closure.size()), static_cast<Eigen::Index>(members.size()));
        std::vector<Eigen::Index> local_index(static_cast<std::size_t>(n * n), -1);
        for (std::size_t k = 0; k < closure.size(); ++k) local_index[static_cast<std::size_t>(closure[k])] = static_cast<Eigen::Index>(k);
        for (std::size_t c = 0; c < members.size(); ++c) {
            const auto s = members[c];
            const auto col = static_cast<Eigen::Index>(c);
            if (by_unit) {
                z(local_index[static_cast<std::size_t>(units[static_cast<std::size_t>(s)])], col) = 1.0;
            } else {
                z.col(col) = y.col(s)(closure);
            }
        }
        const Matrix w = weights(members, Eigen::all);
        std::size_t next = 0;
        IntegrationStats part;
        integrate_piecewise(
            h, z, t_begin, t_end, samples, settings, part,
            [&](std::size_t seg) -> GeneratorRhs& { return system.rhs[seg]; }, [](double, const Matrix&) {},
            [&](double, const Matrix& v) { outputs[next++](closure, Eigen::all) += v * w; });
        local.accepted += part.accepted;
        local.rejected += part.rejected;
        local.evaluations += part.evaluations;
    }
    for (std::size_t k = 0; k < samples.size(); ++k) observe(samples[k], unstack(outputs[k], n));
    if (stats) *stats = local;
}

void write_trajectory_csv(std::ostream& out, const StateTrajectory& trajectory,
                          const std::vector<std::pair<std::string, Operator>>& observables) {
    out << "t_us";
    for (const auto& [name, op] : observables) out << ',' << name;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", trajectory.times[i]);
        out << buf;
        for (const auto& [name, op] : observables) {
            std::snprintf(buf, sizeof buf, "%.12g", expectation(trajectory.states[i], op).real());
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace holo
