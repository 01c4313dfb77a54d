#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "holo/dynamics.hpp"
#include "holo/errors.hpp"

using namespace holo;

namespace {

constexpr double kPi = std::numbers::pi;

Operator pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return Operator(SiteDims{2}, m, true);
}

Operator pauli_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return Operator(SiteDims{2}, m, true);
}

StateVector ground() {
    const std::array<std::size_t, 1> z{0};
    return StateVector::basis(SiteDims{2}, z);
}

}  // namespace

TEST_CASE("Rabi pi pulse") {
    const double omega = 2.0 * kPi;
    const double t = kPi / omega;
    const auto h = TimeDependentHamiltonian::constant(pauli_x().scaled(0.5 * omega), 0.0, t);
    const auto tr = evolve_schrodinger(h, ground(), TimeSpan::uniform(0.0, t, 5));
    CHECK(std::norm(tr.final_state().amps()(1)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::norm(tr.states[2].amps()(1)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(tr.max_norm_drift < 1e-7);
}

TEST_CASE("blockaded pair oscillates sqrt(2) faster") {
    const double omega = 2.0 * kPi, v = 2.0 * kPi * 5000.0;
    const SiteDims dims{2, 2};
    Operator h = embed_site_operator(pauli_x().scaled(0.5 * omega), 0, dims) +
                 embed_site_operator(pauli_x().scaled(0.5 * omega), 1, dims) +
                 embed_pair_operator(projector(2, 1), projector(2, 1), {0, 1}, dims).scaled(v);
    const double t = kPi / (std::sqrt(2.0) * omega);
    const std::array<std::size_t, 2> z{0, 0};
    IntegratorSettings tight;
    tight.rel_tol = 1e-10;
    tight.abs_tol = 1e-12;
    tight.max_step = 1e-4;
    const auto tr = evolve_schrodinger(TimeDependentHamiltonian::constant(h, 0.0, t), StateVector::basis(dims, z),
                                       {0.0, t, {}}, tight);
    CHECK(std::norm(tr.final_state().amps()(0)) < 1e-3);
}

TEST_CASE("segment switch with echoed detuning cancels the phase") {
    const double delta = 2.0 * kPi * 0.7, T = 1.3;
    HamiltonianSegment a{0.0, 0.5 * T, {{pauli_z().scaled(0.5 * delta), kStaticSlot, false}}, 0, nullptr};
    HamiltonianSegment b{0.5 * T, T, {{pauli_z().scaled(-0.5 * delta), kStaticSlot, false}}, 0, nullptr};
    const TimeDependentHamiltonian h(SiteDims{2}, {a, b});
    Vector plus(2);
    plus << 1.0, 1.0;
    plus /= std::sqrt(2.0);
    const StateVector psi(SiteDims{2}, plus);
    const auto tr = evolve_schrodinger(h, psi, TimeSpan::uniform(0.0, T, 3));
    CHECK((tr.final_state().amps() - plus).norm() < 1e-8);
    // Halfway the relative phase is delta T / 2.
    const cplx ratio = tr.states[1].amps()(1) / tr.states[1].amps()(0);
    CHECK(std::arg(ratio) == doctest::Approx(-0.5 * delta * T).epsilon(1e-7));
}

TEST_CASE("spontaneous decay is exponential") {
    const double gamma = 0.8, t = 2.0;
    Matrix l = Matrix::Zero(2, 2);
    l(0, 1) = std::sqrt(gamma);
    const std::vector<LindbladChannel> ch{{Operator(SiteDims{2}, l), "decay"}};
    const std::array<std::size_t, 1> one{1};
    const auto rho0 = DensityMatrix::pure(StateVector::basis(SiteDims{2}, one));
    const auto h = TimeDependentHamiltonian::constant(Operator::zero(SiteDims{2}), 0.0, t);
    const auto tr = evolve_lindblad(h, ch, rho0, TimeSpan::uniform(0.0, t, 5));
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(tr.states[k].matrix()(1, 1).real() == doctest::Approx(std::exp(-gamma * tr.times[k])).epsilon(1e-8));
    }
    CHECK(tr.max_trace_drift < 1e-9);
}

TEST_CASE("pure dephasing damps coherence at twice the rate") {
    const double gamma = 0.3, t = 1.5;
    const std::vector<LindbladChannel> ch{{pauli_z().scaled(std::sqrt(gamma)), "dephasing"}};
    Vector plus(2);
    plus << 1.0, 1.0;
    plus /= std::sqrt(2.0);
    const auto rho0 = DensityMatrix::pure(StateVector(SiteDims{2}, plus));
    const auto h = TimeDependentHamiltonian::constant(Operator::zero(SiteDims{2}), 0.0, t);
    const auto tr = evolve_lindblad(h, ch, rho0, {0.0, t, {}});
    CHECK(std::abs(tr.final_state().matrix()(0, 1)) == doctest::Approx(0.5 * std::exp(-2.0 * gamma * t)).epsilon(1e-8));
    CHECK(tr.final_state().matrix()(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("batched master equation matches single evolutions") {
    const double t = 0.9;
    Matrix l = Matrix::Zero(2, 2);
    l(0, 1) = 0.5;
    const std::vector<LindbladChannel> ch{{Operator(SiteDims{2}, l), "decay"}};
    const auto h = TimeDependentHamiltonian::constant(pauli_x().scaled(2.0), 0.0, t);
    Matrix a(2, 2);
    a << 0.3, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.7;
    Matrix b(2, 2);
    b << 0.0, 1.0, 0.0, 0.0;
    const auto out = evolve_lindblad_batch(h, ch, {a, b}, 0.0, t);
    const auto single = evolve_lindblad(h, ch, DensityMatrix(SiteDims{2}, a), {0.0, t, {}});
    CHECK((out[0] - single.final_state().matrix()).norm() < 1e-8);
    CHECK(std::abs(out[1].trace()) < 1e-8);
}

TEST_CASE("batched Schrodinger columns match single evolutions") {
    const double t = 0.4;
    const auto h = TimeDependentHamiltonian::constant(pauli_x().scaled(3.0) + pauli_z().scaled(1.0), 0.0, t);
    const Matrix cols = Matrix::Identity(2, 2);
    const Matrix out = evolve_schrodinger_batch(h, cols, 0.0, t);
    const auto single = evolve_schrodinger(h, ground(), {0.0, t, {}});
    CHECK((out.col(0) - single.final_state().amps()).norm() < 1e-8);
    CHECK((out.adjoint() * out - Matrix::Identity(2, 2)).norm() < 1e-7);
}

TEST_CASE("integrator settings are validated") {
    IntegratorSettings s;
    s.rel_tol = -1.0;
    CHECK_THROWS_AS(s.validate(), ModelError);
    CHECK(IntegratorSettings{}.scaled(0.1).rel_tol == doctest::Approx(1e-9));
}
