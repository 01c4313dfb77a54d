#include "holo/hilbert.hpp"

#include <algorithm>
#include <string>

#include "holo/errors.hpp"

namespace holo {

namespace {

void require_same_dims(const SiteDims& a, const SiteDims& b, const char* what) {
    if (!(a == b)) {
        throw DimensionError(std::string(what) + ": site dimensions do not match");
    }
}

}  // namespace

SiteDims::SiteDims(std::vector<std::size_t> levels, std::size_t cap)
    : levels_(std::move(levels)), cap_(cap) {
    total_ = 1;
    for (std::size_t d : levels_) {
        if (d < 2) throw DimensionError("every site needs at least two levels");
        if (total_ > cap_ / d) {
            throw DimensionError("Hilbert-space dimension exceeds cap of " + std::to_string(cap_));
        }
        total_ *= d;
    }
}

SiteDims::SiteDims(std::initializer_list<std::size_t> levels)
    : SiteDims(std::vector<std::size_t>(levels)) {}

SiteDims SiteDims::uniform(std::size_t sites, std::size_t levels, std::size_t cap) {
    return SiteDims(std::vector<std::size_t>(sites, levels), cap);
}

std::size_t SiteDims::stride(std::size_t site) const {
    if (site >= levels_.size()) throw DimensionError("site index out of range");
    std::size_t s = 1;
    for (std::size_t j = site + 1; j < levels_.size(); ++j) s *= levels_[j];
    return s;
}

std::size_t SiteDims::digit(std::size_t index, std::size_t site) const {
    return (index / stride(site)) % levels_[site];
}

std::vector<std::size_t> SiteDims::digits(std::size_t index) const {
    std::vector<std::size_t> out(levels_.size());
    for (std::size_t j = levels_.size(); j-- > 0;) {
        out[j] = index % levels_[j];
        index /= levels_[j];
    }
    return out;
}

std::size_t SiteDims::index(std::span<const std::size_t> digits) const {
    if (digits.size() != levels_.size()) throw DimensionError("digit count does not match sites");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        if (digits[j] >= levels_[j]) throw DimensionError("level out of range for site");
        idx = idx * levels_[j] + digits[j];
    }
    return idx;
}

SiteDims SiteDims::concat(const SiteDims& other) const {
    std::vector<std::size_t> joined = levels_;
    joined.insert(joined.end(), other.levels_.begin(), other.levels_.end());
    return SiteDims(std::move(joined), std::max(cap_, other.cap_));
}

// ---------------------------------------------------------------------------

Operator::Operator(SiteDims dims, Matrix entries, bool hermitian_hint)
    : dims_(std::move(dims)), entries_(std::move(entries)), hermitian_(hermitian_hint) {
    const auto n = static_cast<Eigen::Index>(dims_.total());
    if (entries_.rows() != n || entries_.cols() != n) {
        throw DimensionError("operator matrix size does not match site dimensions");
    }
    if (hermitian_ && hermiticity_error() > kHermitianTolerance) {
        throw DimensionError("operator flagged Hermitian but max|A - A^dagger| = " +
                             std::to_string(hermiticity_error()));
    }
}

Operator Operator::identity(const SiteDims& dims) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    return Operator(dims, Matrix::Identity(n, n), true);
}

Operator Operator::zero(const SiteDims& dims) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    return Operator(dims, Matrix::Zero(n, n), true);
}

double Operator::hermiticity_error() const {
    if (entries_.size() == 0) return 0.0;
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

Operator Operator::adjoint() const { return Operator(dims_, entries_.adjoint(), hermitian_); }

Operator Operator::operator+(const Operator& other) const {
    require_same_dims(dims_, other.dims_, "operator sum");
    return Operator(dims_, entries_ + other.entries_, hermitian_ && other.hermitian_);
}

Operator Operator::operator-(const Operator& other) const {
    require_same_dims(dims_, other.dims_, "operator difference");
    return Operator(dims_, entries_ - other.entries_, hermitian_ && other.hermitian_);
}

Operator Operator::operator*(const Operator& other) const {
    require_same_dims(dims_, other.dims_, "operator product");
    return Operator(dims_, entries_ * other.entries_, false);
}

Operator Operator::scaled(cplx factor) const {
    return Operator(dims_, entries_ * factor, hermitian_ && factor.imag() == 0.0);
}

Operator Operator::scaled(double factor) const {
    return Operator(dims_, entries_ * factor, hermitian_);
}

// ---------------------------------------------------------------------------

StateVector::StateVector(SiteDims dims, Vector amps) : dims_(std::move(dims)), amps_(std::move(amps)) {
    if (amps_.size() != static_cast<Eigen::Index>(dims_.total())) {
        throw DimensionError("state vector length does not match site dimensions");
    }
}

StateVector StateVector::basis(const SiteDims& dims, std::span<const std::size_t> levels) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
    v(static_cast<Eigen::Index>(dims.index(levels))) = 1.0;
    return StateVector(dims, std::move(v));
}

DensityMatrix::DensityMatrix(SiteDims dims, Matrix entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(dims_.total());
    if (entries_.rows() != n || entries_.cols() != n) {
        throw DimensionError("density matrix size does not match site dimensions");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(psi.dims(), psi.amps() * psi.amps().adjoint());
}

// ---------------------------------------------------------------------------

Operator transition(std::size_t d, std::size_t to, std::size_t from) {
    if (to >= d || from >= d) throw DimensionError("transition level out of range");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    return Operator(SiteDims{d}, std::move(m), to == from);
}

Operator projector(std::size_t d, std::size_t level) { return transition(d, level, level); }

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

Operator tensor_product(const Operator& a, const Operator& b) {
    SiteDims dims = a.dims().concat(b.dims());
    return Operator(std::move(dims), kron(a.matrix(), b.matrix()),
                    a.hermitian_hint() && b.hermitian_hint());
}

Operator embed_product(std::span<const std::pair<std::size_t, Operator>> factors,
                       const SiteDims& dims) {
    std::vector<const Operator*> per_site(dims.sites(), nullptr);
    bool hermitian = true;
    for (const auto& [site, op] : factors) {
        if (site >= dims.sites()) throw DimensionError("embedding site out of range");
        if (per_site[site] != nullptr) throw DimensionError("embedding sites must be distinct");
        if (op.dims().sites() != 1 || op.dim() != dims[site]) {
            throw DimensionError("single-site operator does not match site " + std::to_string(site));
        }
        per_site[site] = &op;
        hermitian = hermitian && op.hermitian_hint();
    }
    Matrix acc = Matrix::Identity(1, 1);
    for (std::size_t j = 0; j < dims.sites(); ++j) {
        const auto d = static_cast<Eigen::Index>(dims[j]);
        acc = per_site[j] ? kron(acc, per_site[j]->matrix()) : kron(acc, Matrix::Identity(d, d));
    }
    return Operator(dims, std::move(acc), hermitian);
}

Operator embed_site_operator(const Operator& op, std::size_t site, const SiteDims& dims) {
    if (site >= dims.sites()) throw DimensionError("site index out of range");
    const std::pair<std::size_t, Operator> f[] = {{site, op}};
    return embed_product(f, dims);
}

Operator embed_pair_operator(const Operator& op_a, const Operator& op_b,
                             std::pair<std::size_t, std::size_t> sites, const SiteDims& dims) {
    if (sites.first == sites.second) throw DimensionError("pair operator needs two distinct sites");
    const std::pair<std::size_t, Operator> f[] = {{sites.first, op_a}, {sites.second, op_b}};
    return embed_product(f, dims);
}

Operator excitation_number_projector(const SiteDims& dims, std::size_t level, std::size_t k) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t idx = 0; idx < dims.total(); ++idx) {
        std::size_t count = 0;
        for (std::size_t lv : dims.digits(idx)) count += (lv == level) ? 1 : 0;
        if (count == k) m(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) = 1.0;
    }
    return Operator(dims, std::move(m), true);
}

cplx expectation(const StateVector& state, const Operator& op) {
    require_same_dims(state.dims(), op.dims(), "expectation");
    return state.amps().dot(op.matrix() * state.amps());
}

cplx expectation(const DensityMatrix& state, const Operator& op) {
    require_same_dims(state.dims(), op.dims(), "expectation");
    return (state.matrix() * op.matrix()).trace();
}

}  // namespace holo
