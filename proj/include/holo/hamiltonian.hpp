#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "holo/hilbert.hpp"

namespace holo {

/// Fills one coefficient per slot at time t.
using CoefficientFn = std::function<void(double t, std::span<cplx> out)>;

inline constexpr std::size_t kStaticSlot = std::numeric_limits<std::size_t>::max();

/// c_slot(t) * op, plus conj(c_slot(t)) * op^dagger when `add_adjoint` is set.
/// Terms in kStaticSlot have coefficient 1.
struct HamiltonianTerm {
    Operator op;
    std::size_t slot = kStaticSlot;
    bool add_adjoint = false;
};

/// Terms valid on [t_begin, t_end]. Segments partition the evolution window;
/// drive phases are constant inside each one.
struct HamiltonianSegment {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<HamiltonianTerm> terms;
    std::size_t slots = 0;
    CoefficientFn coefficients;
};

class TimeDependentHamiltonian {
public:
    TimeDependentHamiltonian(SiteDims dims, std::vector<HamiltonianSegment> segments);

    /// A single static operator over [t_begin, t_end].
    static TimeDependentHamiltonian constant(const Operator& h, double t_begin, double t_end);

    const SiteDims& dims() const { return dims_; }
    const std::vector<HamiltonianSegment>& segments() const { return segments_; }
    double t_begin() const { return segments_.front().t_begin; }
    double t_end() const { return segments_.back().t_end; }

    /// Index of the segment containing t; a shared boundary belongs to the
    /// earlier segment. Throws ModelError outside the window.
    std::size_t segment_index(double t) const;

    Operator at(double t) const;
    Operator at(double t, std::size_t segment) const;

private:
    SiteDims dims_;
    std::vector<HamiltonianSegment> segments_;
};

}  // namespace holo
