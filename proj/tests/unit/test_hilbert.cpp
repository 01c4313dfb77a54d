#include <doctest.h>

#include <array>
#include <vector>

#include "holo/errors.hpp"
#include "holo/hilbert.hpp"

using namespace holo;

TEST_CASE("site 0 is the slowest digit") {
    const SiteDims dims{2, 3, 4};
    CHECK(dims.total() == 24);
    const std::array<std::size_t, 3> d{1, 2, 3};
    CHECK(dims.index(d) == (1 * 3 + 2) * 4 + 3);
    CHECK(dims.digits(23) == std::vector<std::size_t>{1, 2, 3});
    for (std::size_t i = 0; i < dims.total(); ++i) CHECK(dims.index(dims.digits(i)) == i);
}

TEST_CASE("dimension cap is enforced") {
    CHECK_THROWS_AS(SiteDims::uniform(8, 4), DimensionError);
    CHECK_NOTHROW(SiteDims::uniform(7, 4));
}

TEST_CASE("site embedding equals the Kronecker product") {
    const SiteDims dims{2, 3};
    const Operator a = transition(2, 1, 0);
    const Operator b = transition(3, 2, 1);
    const Operator ab = tensor_product(a, b);
    const Operator pair = embed_pair_operator(a, b, {0, 1}, dims);
    CHECK((ab.matrix() - pair.matrix()).norm() < 1e-15);
    const Operator ai = embed_site_operator(a, 0, dims);
    const Operator ib = embed_site_operator(b, 1, dims);
    CHECK(((ai * ib).matrix() - ab.matrix()).norm() < 1e-15);
}

TEST_CASE("excitation-number projectors resolve the identity") {
    const SiteDims dims = SiteDims::uniform(3, 3);
    Matrix sum = Matrix::Zero(27, 27);
    for (std::size_t k = 0; k <= 3; ++k) sum += excitation_number_projector(dims, 2, k).matrix();
    CHECK((sum - Matrix::Identity(27, 27)).norm() < 1e-15);
}

TEST_CASE("expectation values") {
    const SiteDims dims{2};
    const std::array<std::size_t, 1> one{1};
    const StateVector psi = StateVector::basis(dims, one);
    CHECK(std::abs(expectation(psi, projector(2, 1)) - 1.0) < 1e-15);
    CHECK(std::abs(expectation(DensityMatrix::pure(psi), projector(2, 0))) < 1e-15);
}

TEST_CASE("hermiticity error") {
    Matrix m(2, 2);
    m << 1.0, cplx(0.0, 1.0), cplx(0.0, -1.0), 2.0;
    CHECK(Operator(SiteDims{2}, m).hermiticity_error() < 1e-15);
    m(0, 1) = 3.0;
    CHECK(Operator(SiteDims{2}, m).hermiticity_error() > 1.0);
}
