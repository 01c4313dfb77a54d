#pragma once

// Dense tensor-product linear algebra over heterogeneous per-site level counts.
//
// Basis ordering: site 0 is the slowest-varying digit of the flattened index
// (big-endian in the site list). For gate models site 0..N-1 are the control
// atoms and site N is the target, so |c_0 c_1 ... c_{N-1} t> maps to
//   index = ((c_0 * d_1 + c_1) * d_2 + ...) * d_N + t.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace holo {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultDimensionCap = 16384;  // 4^7
inline constexpr double kHermitianTolerance = 1e-12;

class SiteDims {
public:
    SiteDims() = default;
    SiteDims(std::vector<std::size_t> levels, std::size_t cap = kDefaultDimensionCap);
    SiteDims(std::initializer_list<std::size_t> levels);

    static SiteDims uniform(std::size_t sites, std::size_t levels,
                            std::size_t cap = kDefaultDimensionCap);

    std::size_t sites() const { return levels_.size(); }
    std::size_t total() const { return total_; }
    std::size_t cap() const { return cap_; }
    std::size_t operator[](std::size_t site) const { return levels_.at(site); }
    const std::vector<std::size_t>& levels() const { return levels_; }

    /// Distance in the flattened index between neighbouring levels of `site`.
    std::size_t stride(std::size_t site) const;

    /// Level of `site` in basis state `index`.
    std::size_t digit(std::size_t index, std::size_t site) const;
    std::vector<std::size_t> digits(std::size_t index) const;
    std::size_t index(std::span<const std::size_t> digits) const;

    SiteDims concat(const SiteDims& other) const;

    bool operator==(const SiteDims& other) const { return levels_ == other.levels_; }

private:
    std::vector<std::size_t> levels_;
    std::size_t total_ = 1;
    std::size_t cap_ = kDefaultDimensionCap;
};

/// Dense complex square matrix tagged with its tensor structure.
class Operator {
public:
    Operator() = default;
    Operator(SiteDims dims, Matrix entries, bool hermitian_hint = false);

    static Operator identity(const SiteDims& dims);
    static Operator zero(const SiteDims& dims);

    const SiteDims& dims() const { return dims_; }
    const Matrix& matrix() const { return entries_; }
    bool hermitian_hint() const { return hermitian_; }
    std::size_t dim() const { return dims_.total(); }

    cplx operator()(std::size_t row, std::size_t col) const { return entries_(row, col); }

    /// max |A - A^dagger|
    double hermiticity_error() const;

    Operator adjoint() const;
    Operator operator+(const Operator& other) const;
    Operator operator-(const Operator& other) const;
    Operator operator*(const Operator& other) const;
    Operator scaled(cplx factor) const;
    Operator scaled(double factor) const;

private:
    SiteDims dims_;
    Matrix entries_;
    bool hermitian_ = false;
};

class StateVector {
public:
    StateVector() = default;
    StateVector(SiteDims dims, Vector amps);

    /// Product state |levels[0]> (x) |levels[1]> (x) ...
    static StateVector basis(const SiteDims& dims, std::span<const std::size_t> levels);

    const SiteDims& dims() const { return dims_; }
    const Vector& amps() const { return amps_; }
    double norm() const { return amps_.norm(); }

private:
    SiteDims dims_;
    Vector amps_;
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    DensityMatrix(SiteDims dims, Matrix entries);

    static DensityMatrix pure(const StateVector& psi);

    const SiteDims& dims() const { return dims_; }
    const Matrix& matrix() const { return entries_; }
    cplx trace() const { return entries_.trace(); }

private:
    SiteDims dims_;
    Matrix entries_;
};

// Single-site helpers. `d` is the level count of the site.
Operator transition(std::size_t d, std::size_t to, std::size_t from);  // |to><from|
Operator projector(std::size_t d, std::size_t level);

Operator tensor_product(const Operator& a, const Operator& b);

/// op on `site`, identity everywhere else.
Operator embed_site_operator(const Operator& op, std::size_t site, const SiteDims& dims);

/// op_a on site j and op_b on site k (j != k), identity elsewhere.
Operator embed_pair_operator(const Operator& op_a, const Operator& op_b,
                             std::pair<std::size_t, std::size_t> sites, const SiteDims& dims);

/// General product embedding; sites must be distinct.
Operator embed_product(std::span<const std::pair<std::size_t, Operator>> factors,
                       const SiteDims& dims);

/// Projector onto basis states with exactly `k` sites in `level`.
Operator excitation_number_projector(const SiteDims& dims, std::size_t level, std::size_t k);

cplx expectation(const StateVector& state, const Operator& op);
cplx expectation(const DensityMatrix& state, const Operator& op);

}  // namespace holo
