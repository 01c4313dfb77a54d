#include "holo/hamiltonian.hpp"

#include <string>

#include "holo/errors.hpp"

namespace holo {

TimeDependentHamiltonian::TimeDependentHamiltonian(SiteDims dims, std::vector<HamiltonianSegment> segments)
    : dims_(std::move(dims)), segments_(std::move(segments)) {
    if (segments_.empty()) throw ModelError("Hamiltonian needs at least one segment");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.t_end > s.t_begin)) throw ModelError("Hamiltonian segment has non-positive length");
        if (i > 0 && s.t_begin != segments_[i - 1].t_end) {
            throw ModelError("Hamiltonian segments must be contiguous");
        }
        for (const auto& term : s.terms) {
            if (!(term.op.dims() == dims_)) throw DimensionError("Hamiltonian term has wrong dimensions");
            if (term.slot != kStaticSlot && term.slot >= s.slots) throw ModelError("Hamiltonian term slot out of range");
        }
        if (s.slots > 0 && !s.coefficients) throw ModelError("Hamiltonian segment lacks a coefficient function");
    }
}

TimeDependentHamiltonian TimeDependentHamiltonian::constant(const Operator& h, double t_begin, double t_end) {
    HamiltonianSegment seg{t_begin, t_end, {}, 0, {}};
    seg.terms.push_back({h, kStaticSlot, false});
    return TimeDependentHamiltonian(h.dims(), {std::move(seg)});
}

std::size_t TimeDependentHamiltonian::segment_index(double t) const {
    const double slack = 1e-12 * (1.0 + std::abs(t_end()));
    if (t < t_begin() - slack || t > t_end() + slack) {
        throw ModelError("time " + std::to_string(t) + " outside Hamiltonian window");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (t <= segments_[i].t_end) return i;
    }
    return segments_.size() - 1;
}

Operator TimeDependentHamiltonian::at(double t) const { return at(t, segment_index(t)); }

Operator TimeDependentHamiltonian::at(double t, std::size_t segment) const {
    const auto n = static_cast<Eigen::Index>(dims_.total());
    Matrix h = Matrix::Zero(n, n);
    const auto& seg = segments_.at(segment);
    std::vector<cplx> coeffs(seg.slots);
    if (seg.slots > 0) seg.coefficients(t, coeffs);
    for (const auto& term : seg.terms) {
        const cplx c = term.slot == kStaticSlot ? cplx(1.0) : coeffs[term.slot];
        h += c * term.op.matrix();
        if (term.add_adjoint) h += std::conj(c) * term.op.matrix().adjoint();
    }
    return Operator(dims_, std::move(h), true);
}

}  // namespace holo
