#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holo/errors.hpp"
#include "holo/metrics.hpp"
#include "holo/noise.hpp"

using namespace holo;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("Doppler width") {
    NoiseSpec s;
    s.temperature_uk = 10.0;
    const double v = std::sqrt(kBoltzmann * 10e-6 / kRb87Mass);  // m/s = um/us
    CHECK(doppler_sigma(s) == doctest::Approx(kDefaultKeff * v));
    CHECK(doppler_sigma(s) == doctest::Approx(0.271).epsilon(0.01));
}

TEST_CASE("noise sampling is reproducible and keyed") {
    NoiseSpec s;
    s.temperature_uk = 20.0;
    s.delta_v_bound = 0.1;
    s.seed = 42;
    const auto a = sample_noise(s, 3, 5, 1, 2);
    const auto b = sample_noise(s, 3, 5, 1, 2);
    const auto c = sample_noise(s, 3, 6, 1, 2);
    CHECK(a.doppler == b.doppler);
    CHECK(a.doppler != c.doppler);
    CHECK((a.interaction_offsets - a.interaction_offsets.transpose()).norm() == 0.0);
    CHECK(a.interaction_offsets.cwiseAbs().maxCoeff() <= 0.1);
    CHECK(stream_key(1, 2, 3, 4) != stream_key(1, 2, 4, 3));
}

TEST_CASE("noise spec validation") {
    NoiseSpec s;
    s.delta_v_bound = -0.1;
    CHECK_THROWS_AS(s.validate(), ModelError);
    NoiseSpec z;
    z.realizations = 0;
    CHECK_THROWS_AS(z.validate(), ModelError);
}

TEST_CASE("decay channels carry the branching ratios") {
    GateModelConfig g;
    g.levels = LevelVariant::FourLevelLoss;
    const SystemModel m = make_gate_model(g);
    const double tau = 400.0;
    const auto ch = decay_channels(m, tau);
    CHECK(ch.size() == 6);
    Matrix sum = Matrix::Zero(16, 16);
    for (const auto& c : ch) sum += c.op.matrix().adjoint() * c.op.matrix();
    Matrix expected = Matrix::Zero(16, 16);
    for (std::size_t site = 0; site < 2; ++site) expected += embed_site_operator(projector(4, 3), site, m.dims()).matrix();
    CHECK((sum - expected / tau).norm() < 1e-15);
    CHECK_THROWS_AS(decay_channels(make_gate_model(GateModelConfig{}), tau), ModelError);
}

TEST_CASE("spin echo flips static detunings at the half time") {
    GateModelConfig g;
    SystemModel m = make_gate_model(g);
    m.static_detunings = {0.3, -0.2};
    m.spin_echo = true;
    const double T = m.drive.gate_time();
    const auto early = spin_echo_transform(m, 0.25 * T);
    const auto late = spin_echo_transform(m, 0.75 * T);
    CHECK(early.static_detunings[0] == doctest::Approx(0.3));
    CHECK(late.static_detunings[0] == doctest::Approx(-0.3));
    CHECK(!late.spin_echo);
}

TEST_CASE("Pauli strings") {
    const auto all = PauliString::all(2);
    CHECK(all.size() == 16);
    CHECK(all.front().labels == "II");
    CHECK(all.back().labels == "ZZ");
    const Matrix xz = PauliString{"XZ"}.matrix();
    CHECK((xz * xz - Matrix::Identity(4, 4)).norm() < 1e-15);
}

TEST_CASE("average fidelity of unitary and depolarizing channels") {
    const Matrix w = Matrix::Identity(2, 2);
    const Matrix id = Matrix::Identity(2, 2);
    CHECK(average_gate_fidelity(unitary_channel(id), id, w) == doctest::Approx(1.0));

    // Rotation exp(-i eps X): F = (|Tr U|^2 + d) / (d (d + 1)).
    const double eps = 0.2;
    Matrix u(2, 2);
    u << std::cos(eps), cplx(0.0, -std::sin(eps)), cplx(0.0, -std::sin(eps)), std::cos(eps);
    const double expected = (std::norm(u.trace()) + 2.0) / 6.0;
    CHECK(average_gate_fidelity(unitary_channel(u), id, w) == doctest::Approx(expected));

    // Depolarizing: rho -> (1 - p) rho + p Tr(rho) I / 2 gives 1 - p / 2.
    const double p = 0.12;
    const ChannelEvaluator depol = [p](const std::vector<Matrix>& in) {
        std::vector<Matrix> out;
        for (const auto& x : in) out.push_back((1.0 - p) * x + p * x.trace() * Matrix::Identity(2, 2) / 2.0);
        return out;
    };
    CHECK(average_gate_fidelity(depol, id, w) == doctest::Approx(1.0 - p / 2.0));
    const auto mc = haar_average_fidelity(depol, id, w, 4000, 3);
    CHECK(std::abs(mc.mean - (1.0 - p / 2.0)) < 5.0 * mc.standard_error + 1e-12);
}

TEST_CASE("leakage counts as loss") {
    const Matrix w = Matrix::Identity(3, 2);
    Matrix u = Matrix::Identity(3, 3);
    // Swap |1> and an auxiliary level.
    u(1, 1) = u(2, 2) = 0.0;
    u(1, 2) = u(2, 1) = 1.0;
    const double f = average_gate_fidelity(unitary_channel(u), Matrix::Identity(2, 2), w);
    CHECK(f == doctest::Approx((1.0 + 2.0) / 6.0));
}

TEST_CASE("benchmark state and excitation populations") {
    const SiteDims dims = SiteDims::uniform(3, 3);
    const auto psi = benchmark_initial_state(dims);
    CHECK(psi.norm() == doctest::Approx(1.0));
    const auto p = excitation_populations(psi, 2);
    CHECK(p[0] == doctest::Approx(1.0));
    const auto ideal = apply_ideal_gate(GateSpec::cnot(2), psi);
    CHECK(overlap_fidelity(ideal, ideal) == doctest::Approx(1.0));
    CHECK(ideal.norm() == doctest::Approx(1.0));
    (void)kPi;
}
