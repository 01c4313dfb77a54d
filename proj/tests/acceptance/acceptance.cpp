// Acceptance checks. Usage: holo_acceptance [--smoke] <name>... | all
// Prints one PASS/FAIL line per check; exit status 1 if any check fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "holo/experiments.hpp"

using namespace holo;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMHz = kTwoPi;

bool g_smoke = false;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

ResultTable run_json(const std::string& text) { return run_scenario(validate_config(text)); }

std::string csv_text(const ResultTable& t) {
    std::ostringstream s;
    t.write_csv(s);
    return s.str();
}

std::size_t column(const ResultTable& t, const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - t.columns.begin());
}

// ---------------------------------------------------------------------------

Outcome interaction_strength() {
    const auto g = build_interactions(build_geometry(1, 3.8), kRb70sC6);
    const double v = g.v_ct(0) / kMHz;
    return {std::abs(v - 285.1) <= 0.1, fmt("V/2pi = %.4f MHz at R = 3.8 um (expected 285.1 +- 0.1)", v)};
}

Outcome pulse_optimum() {
    const double s = pulse::sensitivity(0.28, -0.12);
    const double s_simpson = pulse::sensitivity_composite(0.28, -0.12, 8192);
    const double area = pulse::area_product(0.28, -0.12);
    const bool ok = std::abs(s - 0.30) <= 0.02 && std::abs(area - 17.9) <= 0.1 &&
                    std::abs(area / kTwoPi - 2.85) <= 0.02;
    return {ok, fmt("S = %.6g (Simpson %.6g; expected 0.30 +- 0.02), T max Omega = %.5f (expected 17.9 +- 0.1), "
                    "max Omega T / 2pi = %.5f",
                    s, s_simpson, area, area / kTwoPi)};
}

// Closed-form (alpha, beta) parametrization evaluated independently.
struct AlphaBeta {
    double omega;
    double delta;
};

AlphaBeta from_alpha_beta(double t, double T, double a1, double a2) {
    const double half = 0.5 * T;
    const double tp = t <= half ? t : t - half;
    const double x = tp / half;
    const double alpha = kPi * (3.0 * x * x - 2.0 * x * x * x);
    const double alpha_dot = kPi * (6.0 * x - 6.0 * x * x) / half;
    const double s = std::sin(alpha), c = std::cos(alpha);
    const double lam = 2.0 + 2.0 * a1 * std::cos(2.0 * alpha) + 4.0 * a2 * std::cos(4.0 * alpha);
    const double lam_p = -4.0 * a1 * std::sin(2.0 * alpha) - 16.0 * a2 * std::sin(4.0 * alpha);
    const double f = lam * s;
    return {alpha_dot * std::sqrt(1.0 + f * f), -alpha_dot * ((lam_p * s + lam * c) / (1.0 + f * f) + lam * c)};
}

Outcome waveform_identity() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u1(-0.5, 0.7), u2(-0.5, 0.3);
    double worst_form = 0.0, worst_lib = 0.0, worst_phase = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double a1 = u1(rng), a2 = u2(rng);
        const auto p = pulse::OhqcParams::from_peak(a1, a2, kMHz);
        const pulse::OhqcWaveform w(p);
        const double T = p.duration;
        for (std::size_t i = 0; i <= 10000; ++i) {
            const double t = T * static_cast<double>(i) / 10000.0;
            const auto ref = from_alpha_beta(t, T, a1, a2);
            worst_form = std::max({worst_form, std::abs(w.omega(t) - ref.omega), std::abs(w.delta(t) - ref.delta)});
        }
        worst_lib = std::max(worst_lib, pulse::waveform_consistency_check(p, 10000));
        // eta(T/2) = int_0^{T/2} alpha_dot lambda dt by composite Simpson.
        const std::size_t m = 20000;
        const double h = 0.5 * T / static_cast<double>(m);
        double eta = 0.0;
        for (std::size_t i = 0; i <= m; ++i) {
            const double t = h * static_cast<double>(i);
            const double x = t / (0.5 * T);
            const double alpha = kPi * (3.0 * x * x - 2.0 * x * x * x);
            const double alpha_dot = kPi * (6.0 * x - 6.0 * x * x) / (0.5 * T);
            const double lam = 2.0 + 2.0 * a1 * std::cos(2.0 * alpha) + 4.0 * a2 * std::cos(4.0 * alpha);
            const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            eta += wgt * alpha_dot * lam;
        }
        eta *= h / 3.0;
        for (double e : {eta, pulse::dynamical_phase(p)}) {
            const double r = std::remainder(e, kTwoPi);
            worst_phase = std::max(worst_phase, std::abs(r));
        }
    }
    const double worst = std::max(worst_form, worst_lib);
    return {worst <= 1e-8 && worst_phase <= 1e-6,
            fmt("max waveform mismatch %.3g rad/us (library check %.3g), max |eta mod 2pi| %.3g over 20 shapes",
                worst_form, worst_lib, worst_phase)};
}

// Fixed-step RK4 on the {B, r} pair with H = Omega/2 X + Delta/2 (|r><r| - |B><B|).
std::array<cplx, 2> two_level(const pulse::OhqcWaveform& w, double a, double b, std::array<cplx, 2> y, std::size_t steps) {
    auto f = [&](double t, const std::array<cplx, 2>& v) {
        const double om = w.omega(t), de = w.delta(t);
        const cplx mi(0.0, -1.0);
        return std::array<cplx, 2>{mi * (-0.5 * de * v[0] + 0.5 * om * v[1]), mi * (0.5 * om * v[0] + 0.5 * de * v[1])};
    };
    const double h = (b - a) / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = a + h * static_cast<double>(i);
        auto add = [](const std::array<cplx, 2>& v, const std::array<cplx, 2>& k, double s) {
            return std::array<cplx, 2>{v[0] + s * k[0], v[1] + s * k[1]};
        };
        const auto k1 = f(t, y);
        const auto k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
        const auto k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
        const auto k4 = f(t + h, add(y, k3, h));
        for (int j = 0; j < 2; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
}

Outcome single_qubit_transfer() {
    const auto p = pulse::OhqcParams::from_peak(0.28, -0.12, kMHz);
    const pulse::OhqcWaveform w(p);
    const double half = 0.5 * p.duration;
    const auto first = two_level(w, 0.0, half, {1.0, 0.0}, 200000);
    const auto second = two_level(w, half, p.duration, {0.0, 1.0}, 200000);
    const double e1 = 1.0 - std::norm(first[1]);
    const double e2 = 1.0 - std::norm(second[0]);
    double worst = 1.0;
    std::string fids;
    for (double rel : {-0.1, 0.1}) {
        GateModelConfig g;
        SystemModel m = make_gate_model(g);
        DriveErrors e;
        e.omega_t_abs = rel * g.omega_max;
        m.drive.set_errors(e);
        const double f = gate_fidelity(m);
        worst = std::min(worst, f);
        fids += fmt(" F(dOmega/Omega_max = %+.1f) = %.6f", rel, f);
    }
    return {e1 <= 1e-4 && e2 <= 1e-4 && worst >= 0.99,
            fmt("transfer error %.3g (B->r), %.3g (r->B); CNOT with a constant amplitude offset:", e1, e2) + fids};
}

Outcome full_vs_effective() {
    bool ok = true;
    std::string detail;
    for (std::size_t n = 2; n <= 5; ++n) {
        const auto t = run_json(fmt(R"({"scenario":"full_vs_effective","n_controls":%zu,"time_points":1001})", n));
        const auto cf = column(t, "fidelity_full"), ce = column(t, "fidelity_effective");
        double diff = 0.0;
        for (const auto& row : t.rows) diff = std::max(diff, std::abs(row[cf] - row[ce]));
        const double final_full = t.rows.back()[cf];
        ok = ok && diff <= 0.02 && final_full >= 0.98;
        detail += fmt("N=%zu max|dF| %.4f final %.5f; ", n, diff, final_full);
    }
    return {ok, detail};
}

Outcome blockade() {
    const auto t = run_json(R"({"scenario":"excitation_populations","n_controls":3,"time_points":801})");
    double worst = 0.0;
    for (const auto& row : t.rows) {
        double multi = 0.0;
        for (std::size_t k = 2; k <= 4; ++k) multi += row[column(t, "p" + std::to_string(k))];
        worst = std::max(worst, multi);
    }
    return {worst <= 1e-2, fmt("max population with >= 2 Rydberg excitations %.4g over 801 times", worst)};
}

Outcome dicke_oracle() {
    double worst_state = 0.0, worst_factor = 0.0, worst_fit = 0.0;
    IntegratorSettings tight;
    tight.rel_tol = 1e-11;
    tight.abs_tol = 1e-13;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (std::size_t n = 1; n <= 3; ++n) {
        GateModelConfig g;
        g.n_controls = n;
        g.modulation = kMHz * 285.1;
        SystemModel m = make_gate_model(g);
        const double j_c = kMHz * 150.0, j_t = kMHz * 285.1;
        m.interactions = InteractionGraph::uniform(n, j_c, j_t);
        const auto dims = m.dims();
        Vector d = Vector::Zero(3), b = Vector::Zero(3), a = Vector::Zero(3), tb = Vector::Zero(3), ta = Vector::Zero(3);
        d(1) = 1.0;
        b(0) = 1.0;
        a(2) = 1.0;
        // Target bright state coupled by the legs with phases (0, pi).
        tb(0) = std::sin(0.5 * m.drive.theta());
        tb(1) = -std::cos(0.5 * m.drive.theta());
        ta(2) = 1.0;
        const DickeBasis basis(n);
        const Matrix w = dicke_isometry(basis, dims, d, b, a, tb, ta);

        // Coupling factors from the product-basis control term.
        const Operator hc_full = build_full_hamiltonian(m, 0.0) - [&] {
            SystemModel z = m;
            z.drive.set_control_amp(0.0);
            return build_full_hamiltonian(z, 0.0);
        }();
        const Matrix proj = w.adjoint() * hc_full.matrix() * w / (0.5 * m.drive.control_amp());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const auto& l = basis.labels()[i];
            if (l.k == 0) continue;
            const auto lower = *basis.find(l.m, l.k - 1, l.target_excited);
            const double expected = std::sqrt(static_cast<double>(l.k * (l.m - l.k + 1)));
            worst_factor = std::max(worst_factor, std::abs(std::abs(proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(lower))) - expected));
        }

        // Evolution of a random collective state both ways.
        Vector c0(static_cast<Eigen::Index>(basis.size()));
        for (auto& x : c0) x = cplx(gauss(rng), gauss(rng));
        c0.normalize();
        const StateVector psi0(dims, w * c0);
        const double T = m.drive.gate_time();
        const auto span = TimeSpan::uniform(0.0, T, 41);
        const auto full = evolve_schrodinger(full_hamiltonian(m), psi0, span, tight);
        const DriveSpec drive = m.drive;
        const auto hd = dicke_hamiltonian(
            basis, j_c, j_t,
            [drive](double t) { return DickeDrives{drive.control_field(t), drive.omega_t(t), drive.delta(t)}; },
            0.0, T);
        const auto coll = evolve_schrodinger(hd, StateVector(basis.dims(), c0), span, tight);
        for (std::size_t k = 0; k < span.samples.size(); ++k) {
            const Vector mapped = w * coll.states[k].amps();
            worst_state = std::max(worst_state, (full.states[k].amps() - mapped).cwiseAbs().maxCoeff());
        }
    }

    // Rabi fit: all M controls in |B> under a constant drive with strong blockade.
    std::string fits;
    for (std::size_t mm = 1; mm <= 3; ++mm) {
        const double omega = kMHz * 2.0;
        const double jc = kMHz * 20000.0;
        const SiteDims dims = SiteDims::uniform(mm, 2);
        Matrix hm = Matrix::Zero(static_cast<Eigen::Index>(dims.total()), static_cast<Eigen::Index>(dims.total()));
        for (std::size_t j = 0; j < mm; ++j) {
            Matrix x = Matrix::Zero(2, 2);
            x(0, 1) = x(1, 0) = 0.5 * omega;
            hm += embed_site_operator(Operator(SiteDims{2}, x, true), j, dims).matrix();
            for (std::size_t k = j + 1; k < mm; ++k) {
                Matrix nn = Matrix::Zero(2, 2);
                nn(1, 1) = 1.0;
                hm += jc * embed_pair_operator(Operator(SiteDims{2}, nn, true), Operator(SiteDims{2}, nn, true), {j, k}, dims).matrix();
            }
        }
        const double expected = std::sqrt(static_cast<double>(mm));
        const double t_guess = kPi / (expected * omega);
        const std::size_t pts = 2001;
        const auto span = TimeSpan::uniform(0.0, 1.5 * t_guess, pts);
        const std::vector<std::size_t> zeros(mm, 0);
        const auto tr = evolve_schrodinger(TimeDependentHamiltonian::constant(Operator(dims, hm, true), 0.0, 1.5 * t_guess),
                                           StateVector::basis(dims, zeros), span, tight);
        std::vector<double> p;
        for (const auto& s : tr.states) p.push_back(std::norm(s.amps()(0)));
        const auto it = std::min_element(p.begin(), p.end());
        const auto i = static_cast<std::size_t>(it - p.begin());
        // Parabolic refinement of the first minimum of P(t) = cos^2(Omega_eff t / 2).
        const double dt = span.samples[1] - span.samples[0];
        const double denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
        const double t_min = span.samples[i] + 0.5 * dt * (p[i - 1] - p[i + 1]) / denom;
        const double factor = kPi / (t_min * omega);
        worst_fit = std::max(worst_fit, std::abs(factor - expected));
        fits += fmt(" M=%zu %.5f", mm, factor);
    }
    return {worst_state <= 1e-6 && worst_factor <= 1e-12 && worst_fit <= 1e-3,
            fmt("max state mismatch %.3g (N <= 3), coupling-factor error %.3g, fitted factors:", worst_state,
                worst_factor) +
                fits};
}

Outcome open_system() {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {1, 2}) {
        const auto t = run_json(fmt(R"({"scenario":"avg_fidelity","n_controls":%zu,"time_points":2,"series":[1.5707963267948966,3.141592653589793]})", n));
        const auto cg = column(t, "gamma_rad"), cf = column(t, "avg_fidelity"), ct = column(t, "t_us");
        for (const auto& row : t.rows) {
            if (row[ct] == 0.0) continue;
            ok = ok && row[cf] >= 0.99;
            detail += fmt("%zu qubits gamma %.4f: %.6f; ", n + 1, row[cg], row[cf]);
        }
    }
    return {ok, detail + "(threshold 0.99)"};
}

Outcome error_sweeps() {
    bool ok = true;
    std::string detail;
    {
        const auto t = run_json(R"({"scenario":"omega0_error","series":[2,3],"sweep":{"start":-0.1,"stop":0.1,"points":11}})");
        const auto cn = column(t, "n_controls"), cf = column(t, "fidelity");
        for (double n : {2.0, 3.0}) {
            double worst = 1.0;
            for (const auto& row : t.rows) {
                if (row[cn] == n) worst = std::min(worst, row[cf]);
            }
            ok = ok && worst >= 0.994;
            detail += fmt("N=%g min F over |dOmega0|/2pi <= 0.1 MHz: %.5f (>= 0.994); ", n, worst);
        }
    }
    {
        const auto t = run_json(R"({"scenario":"omega_mod_error","series":[2,3],"sweep":{"start":-4.9,"stop":4.9,"points":29}})");
        const auto cn = column(t, "n_controls"), cf = column(t, "fidelity");
        for (double n : {2.0, 3.0}) {
            double worst = 1.0;
            for (const auto& row : t.rows) {
                if (row[cn] == n) worst = std::min(worst, row[cf]);
            }
            ok = ok && worst >= 0.99;
            detail += fmt("N=%g min F over |domega|/2pi < 5 MHz: %.5f (>= 0.99); ", n, worst);
        }
    }
    return {ok, detail};
}

Outcome two_photon() {
    const auto t = run_json(R"({"scenario":"two_photon_cnot","time_points":201})");
    const double f = t.rows.back()[column(t, "fidelity")];
    double late = 0.0;
    for (const auto& row : t.rows) {
        if (row[0] >= 0.95 * t.rows.back()[0]) late = std::max(late, row[1]);
    }
    return {f >= 0.99, fmt("final fidelity %.5f (>= 0.99); max over the last 5%% of the gate %.5f", f, late)};
}

Outcome thermal() {
    const std::size_t reps = g_smoke ? 21 : 201;
    const auto t = run_json(fmt(R"({"scenario":"thermal","noise":{"spin_echo":true,"realizations":%zu}})", reps));
    const auto ca = column(t, "omega_max_MHz"), cm = column(t, "fidelity_mean"), cs = column(t, "fidelity_sem");
    bool monotone = true;
    std::string detail;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        const auto& a = t.rows[i - 1];
        const auto& b = t.rows[i];
        if (a[ca] != b[ca]) continue;
        const double slack = 2.0 * std::hypot(a[cs], b[cs]) + 1e-9;
        if (b[cm] > a[cm] + slack) monotone = false;
    }
    for (const auto& row : t.rows) detail += fmt("(%g MHz, %g uK) %.5f; ", row[0], row[1], row[cm]);
    const auto five = run_json(fmt(
        R"({"scenario":"thermal","n_controls":5,"series":[1],"sweep":{"start":10,"stop":10,"points":1},"noise":{"spin_echo":true,"realizations":%zu}})",
        reps));
    const double f5 = five.rows.front()[column(five, "fidelity_mean")];
    const double s5 = five.rows.front()[column(five, "fidelity_sem")];
    return {monotone && f5 >= 0.98, fmt("%zu realizations; monotone in temperature: %s; N=5 at 10 uK with echo: %.5f +- %.2g; ",
                                        reps, monotone ? "yes" : "no", f5, s5) +
                                        detail};
}

// Channel of the master equation as a cached linear map on matrix units.
ChannelEvaluator lindblad_map(const TimeDependentHamiltonian& h, const std::vector<LindbladChannel>& channels,
                              const Matrix& w, double t_end) {
    const auto n = static_cast<Eigen::Index>(h.dims().total());
    std::vector<Matrix> units;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.cols(); ++i) units.push_back(w.col(i) * w.col(j).adjoint());
    }
    const auto images = std::make_shared<std::vector<Matrix>>(evolve_lindblad_batch(h, channels, units, 0.0, t_end));
    const Matrix wc = w;
    return [images, wc, n](const std::vector<Matrix>& inputs) {
        std::vector<Matrix> out;
        for (const auto& x : inputs) {
            const Matrix q = wc.adjoint() * x * wc;
            Matrix y = Matrix::Zero(n, n);
            for (Eigen::Index j = 0; j < q.cols(); ++j) {
                for (Eigen::Index i = 0; i < q.rows(); ++i) y += q(i, j) * (*images)[static_cast<std::size_t>(i + q.rows() * j)];
            }
            out.push_back(y);
        }
        return out;
    };
}

Outcome properties() {
    std::string detail;
    bool ok = true;

    // Hermiticity of every builder.
    double herm = 0.0;
    for (std::size_t n = 1; n <= 3; ++n) {
        for (auto lv : {LevelVariant::ThreeLevel, LevelVariant::FourLevelLoss, LevelVariant::FourLevelPump}) {
            GateModelConfig g;
            g.n_controls = n;
            g.levels = lv;
            g.theta = 1.1;
            g.phi = 0.7;
            g.gamma = 2.3;
            SystemModel m = make_gate_model(g);
            NoiseSpec spec;
            spec.temperature_uk = 20.0;
            spec.delta_v_bound = 0.2;
            spec.spin_echo = true;
            const SystemModel noisy = apply_noise(m, sample_noise(spec, n + 1, 3));
            for (double f : {0.0, 0.13, 0.5, 0.77, 1.0}) {
                const double t = f * m.drive.gate_time();
                for (const SystemModel* mm : std::array<const SystemModel*, 2>{&m, &noisy}) {
                    herm = std::max({herm, build_full_hamiltonian(*mm, t).hermiticity_error(),
                                     build_effective_hamiltonian(*mm, t).hermiticity_error()});
                }
            }
        }
        const DickeBasis basis(n);
        herm = std::max(herm, build_dicke_hamiltonian(basis, 1.3, 2.1, {0.4, 0.9, -0.3}).hermiticity_error());
    }
    {
        TwoPhotonParams q;
        q.compensate_stark_shifts = true;
        const auto tp = make_two_photon_model(q, build_interactions(build_geometry(1, 3.8)), kMHz * 285.1);
        for (double f : {0.0, 0.3, 0.6, 0.9}) herm = std::max(herm, build_two_photon_hamiltonian(tp, f * tp.gate_time()).hermiticity_error());
    }
    ok = ok && herm <= 1e-12;
    detail += fmt("hermiticity error %.3g; ", herm);

    // Schrodinger norm drift.
    const IntegratorSettings settings;
    double drift = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        GateModelConfig g;
        g.n_controls = n;
        double d = 0.0;
        cnot_fidelity_curve(make_gate_model(g), Propagation::Full, 11, settings, &d);
        drift = std::max(drift, d);
    }
    ok = ok && drift <= 10.0 * settings.rel_tol;
    detail += fmt("norm drift %.3g (rel_tol %.0e); ", drift, settings.rel_tol);

    // Master equation: trace drift and linearity.
    GateModelConfig g;
    g.levels = LevelVariant::FourLevelLoss;
    const SystemModel m = make_gate_model(g);
    NoiseSpec spec;
    spec.tau_rydberg = 5.0;
    spec.gamma_phi = kMHz * 0.05;
    const auto channels = lindblad_channels(m, spec);
    const auto h = full_hamiltonian(m);
    const double T = m.drive.gate_time();
    const DensityMatrix rho1 = DensityMatrix::pure(benchmark_initial_state(m.dims()));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    const auto dim = static_cast<Eigen::Index>(m.dims().total());
    Matrix a(dim, dim);
    for (auto& x : a.reshaped()) x = cplx(gauss(rng), gauss(rng));
    Matrix r2 = a * a.adjoint();
    r2 /= r2.trace();
    const DensityMatrix rho2(m.dims(), r2);
    const double c1 = 0.3, c2 = 0.7;
    const DensityMatrix mix(m.dims(), c1 * rho1.matrix() + c2 * r2);
    double trace_drift = 0.0;
    for (const auto* rho : {&rho1, &rho2, &mix}) {
        trace_drift = std::max(trace_drift, evolve_lindblad(h, channels, *rho, {0.0, T, {}}).max_trace_drift);
    }
    // Adaptive step sequences depend on the input, so linearity is checked at tight tolerance.
    IntegratorSettings tight;
    tight.rel_tol = 1e-12;
    tight.abs_tol = 1e-14;
    const Matrix e1 = evolve_lindblad(h, channels, rho1, {0.0, T, {}}, tight).final_state().matrix();
    const Matrix e2 = evolve_lindblad(h, channels, rho2, {0.0, T, {}}, tight).final_state().matrix();
    const Matrix em = evolve_lindblad(h, channels, mix, {0.0, T, {}}, tight).final_state().matrix();
    const double lin = (em - c1 * e1 - c2 * e2).cwiseAbs().maxCoeff();
    ok = ok && trace_drift <= 1e-6 && lin <= 1e-8;
    detail += fmt("trace drift %.3g; linearity defect %.3g; ", trace_drift, lin);

    // Pauli-sum average fidelity against Haar Monte Carlo on the same channel:
    // a random two-qubit master equation (trace preserving on the qubits) and
    // the lifetime-limited gate.
    {
        const SiteDims qd{2, 2};
        Matrix hr(4, 4), l1(4, 4), l2(4, 4);
        for (auto* x : {&hr, &l1, &l2}) {
            for (auto& v : x->reshaped()) v = cplx(gauss(rng), gauss(rng));
        }
        hr = 0.5 * (hr + hr.adjoint()).eval();
        const std::vector<LindbladChannel> random_ch{{Operator(qd, 0.3 * l1), "a"}, {Operator(qd, 0.2 * l2), "b"}};
        const auto hq = TimeDependentHamiltonian::constant(Operator(qd, hr, true), 0.0, 1.0);
        Matrix uq(4, 4);
        for (auto& v : uq.reshaped()) v = cplx(gauss(rng), gauss(rng));
        uq = Eigen::HouseholderQR<Matrix>(uq).householderQ();
        const Matrix iq = Matrix::Identity(4, 4);
        const auto random_channel = lindblad_map(hq, random_ch, iq, 1.0);

        NoiseSpec paper;
        paper.tau_rydberg = 400.0;
        paper.gamma_phi = kMHz * 1e-3;
        const Matrix w = computational_embedding(m.dims(), m.scheme.index("0"), m.scheme.index("1"));
        const Matrix u = ideal_gate_unitary(m.gate()).matrix();
        const auto gate_channel = lindblad_map(h, lindblad_channels(m, paper), w, T);

        for (const auto& [channel, emb, target] :
             {std::tuple{random_channel, iq, uq}, std::tuple{gate_channel, w, u}}) {
            const double formula = average_gate_fidelity(channel, target, emb);
            const auto mc = haar_average_fidelity(channel, target, emb, 20000, 5);
            ok = ok && std::abs(formula - mc.mean) <= 1e-3;
            detail += fmt("average fidelity %.6f vs Haar %.6f +- %.2g; ", formula, mc.mean, mc.standard_error);
        }
    }

    // Bit-identical reruns of every scenario.
    const std::vector<std::string> configs = {
        R"({"scenario":"full_vs_effective","time_points":11})",
        R"({"scenario":"excitation_populations","n_controls":2,"time_points":11})",
        R"({"scenario":"nhqc_vs_ohqc_grid","sweep":{"start":-0.1,"stop":0.1,"points":2},"sweep2":{"start":-0.1,"stop":0.1,"points":2}})",
        R"({"scenario":"lifetime_sweep","series":[100],"sweep":{"start":0,"stop":50,"points":2}})",
        R"({"scenario":"omega0_error","series":[1],"sweep":{"start":-0.1,"stop":0.1,"points":3}})",
        R"({"scenario":"delta_error_echo","series":[1],"sweep":{"start":-0.1,"stop":0.1,"points":3}})",
        R"({"scenario":"omega_mod_error","series":[1],"sweep":{"start":-2,"stop":2,"points":3}})",
        R"({"scenario":"n_scaling","series":[1,2]})",
        R"({"scenario":"rri_fluctuation","series":[40],"sweep":{"start":0,"stop":0.3,"points":2},"noise":{"realizations":4},"seed":9})",
        R"({"scenario":"thermal","series":[2],"sweep":{"start":0,"stop":30,"points":2},"noise":{"realizations":4,"spin_echo":true},"seed":9})",
        R"({"scenario":"two_photon_cnot","time_points":5})",
        R"({"scenario":"pulse_landscape","sweep":{"start":-0.5,"stop":0.7,"points":5},"sweep2":{"start":-0.5,"stop":0.3,"points":4}})",
        R"({"scenario":"avg_fidelity","series":[3.141592653589793],"time_points":3})",
    };
    std::size_t same = 0;
    for (const auto& text : configs) {
        const std::string first = csv_text(run_json(text));
        const std::string second = csv_text(run_json(text));
        same += first == second;
    }
    // Thread count must not change stochastic results.
    const std::string base = R"({"scenario":"thermal","series":[1],"sweep":{"start":20,"stop":20,"points":1},"noise":{"realizations":6},"seed":3,"threads":)";
    const bool threads_ok = run_json(base + "1}").rows == run_json(base + "3}").rows;
    ok = ok && same == configs.size() && threads_ok;
    detail += fmt("identical reruns %zu/%zu scenarios, thread-count invariant: %s", same, configs.size(),
                  threads_ok ? "yes" : "no");
    return {ok, detail};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& checks() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
        {"interaction_strength", interaction_strength},
        {"pulse_optimum", pulse_optimum},
        {"waveform_identity", waveform_identity},
        {"single_qubit_transfer", single_qubit_transfer},
        {"full_vs_effective", full_vs_effective},
        {"blockade", blockade},
        {"dicke_oracle", dicke_oracle},
        {"open_system", open_system},
        {"error_sweeps", error_sweeps},
        {"two_photon", two_photon},
        {"thermal", thermal},
        {"properties", properties},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> names;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--smoke") == 0) {
            g_smoke = true;
        } else if (std::strcmp(argv[i], "all") == 0) {
            for (const auto& [name, fn] : checks()) names.push_back(name);
        } else {
            names.emplace_back(argv[i]);
        }
    }
    if (names.empty()) {
        std::fprintf(stderr, "usage: holo_acceptance [--smoke] <name>... | all\n");
        for (const auto& [name, fn] : checks()) std::fprintf(stderr, "  %s\n", name.c_str());
        return 2;
    }
    int failures = 0;
    for (const auto& name : names) {
        const auto it = std::find_if(checks().begin(), checks().end(), [&](const auto& c) { return c.first == name; });
        if (it == checks().end()) {
            std::printf("FAIL %s: unknown check\n", name.c_str());
            ++failures;
            continue;
        }
        Outcome o;
        try {
            o = it->second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
