#include "holo/noise.hpp"

#include <cmath>
#include <random>

#include "holo/errors.hpp"

namespace holo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

void NoiseSpec::validate() const {
    if (realizations < 1) throw ModelError("noise needs at least one realization");
    for (double v : {delta_v_bound, temperature_uk, gamma_phi}) {
        if (!(v >= 0.0)) throw ModelError("noise bounds, temperature and dephasing must be >= 0");
    }
    if (!(tau_rydberg > 0.0)) throw ModelError("Rydberg lifetime must be positive");
    if (!(k_eff >= 0.0) || !(atom_mass > 0.0)) throw ModelError("k_eff must be >= 0 and the mass positive");
    if (!(delta_t_rel > -1.0)) throw ModelError("duration error must exceed -1");
}

double doppler_sigma(const NoiseSpec& spec) {
    // m/s equals um/us.
    return spec.k_eff * std::sqrt(kBoltzmann * spec.temperature_uk * 1e-6 / spec.atom_mass);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t scenario, std::uint64_t point, std::uint64_t realization) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ scenario);
    k = splitmix64(k ^ point);
    return splitmix64(k ^ realization);
}

NoiseRealization sample_noise(const NoiseSpec& spec, std::size_t n_atoms, std::size_t realization,
                              std::uint64_t scenario, std::uint64_t point) {
    spec.validate();
    NoiseRealization r;
    r.errors = {spec.delta_omega_t_rel, spec.delta_omega_t_abs, spec.delta_omega0_abs, spec.delta_delta_rel,
                spec.delta_t_rel};
    r.delta_omega_mod = spec.delta_omega_mod;
    r.spin_echo = spec.spin_echo;
    const auto n = static_cast<Eigen::Index>(n_atoms);
    r.interaction_offsets = Eigen::MatrixXd::Zero(n, n);
    r.doppler.assign(n_atoms, 0.0);

    std::mt19937_64 rng(stream_key(spec.seed, scenario, point, realization));
    // Fixed draw order: pairs (row-major upper triangle), then atoms.
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double u = spec.delta_v_bound > 0.0 ? spec.delta_v_bound * uniform(rng) : 0.0;
            r.interaction_offsets(a, b) = u;
            r.interaction_offsets(b, a) = u;
        }
    }
    const double sigma = doppler_sigma(spec);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t j = 0; j < n_atoms; ++j) r.doppler[j] = sigma > 0.0 ? sigma * gauss(rng) : 0.0;
    return r;
}

SystemModel apply_noise(const SystemModel& model, const NoiseRealization& r) {
    const std::size_t atoms = model.interactions.n_atoms();
    if (static_cast<std::size_t>(r.interaction_offsets.rows()) != atoms || r.doppler.size() != atoms) {
        throw DimensionError("noise realization does not match the number of atoms");
    }
    SystemModel out = model;
    const Eigen::MatrixXd v = model.interactions.matrix().cwiseProduct(
        (Eigen::MatrixXd::Ones(r.interaction_offsets.rows(), r.interaction_offsets.cols()) + r.interaction_offsets));
    out.interactions = InteractionGraph(v, model.interactions.c6());
    out.drive.set_modulation(model.drive.modulation() + r.delta_omega_mod);
    out.drive.set_errors(r.errors);
    if (out.static_detunings.empty()) out.static_detunings.assign(atoms, 0.0);
    for (std::size_t j = 0; j < atoms; ++j) out.static_detunings[j] += r.doppler[j];
    out.spin_echo = model.spin_echo || r.spin_echo;
    return out;
}

SystemModel spin_echo_transform(const SystemModel& model, double t) {
    SystemModel out = model;
    out.spin_echo = false;
    if (!model.spin_echo || t <= model.drive.half_time()) return out;
    for (double& d : out.static_detunings) d = -d;
    DriveErrors e = model.drive.errors();
    e.delta_rel = -e.delta_rel;
    out.drive.set_errors(e);
    return out;
}

std::vector<LindbladChannel> decay_channels(const SystemModel& model, double tau) {
    if (!(tau > 0.0)) throw ModelError("Rydberg lifetime must be positive");
    if (!model.scheme.has("2")) {
        throw ModelError("decay channels need the level scheme with the sink level |2>");
    }
    const std::size_t d = model.scheme.size();
    const std::size_t r = model.scheme.rydberg();
    const double gamma = 1.0 / tau;
    const SiteDims dims = model.dims();
    std::vector<LindbladChannel> out;
    const std::pair<const char*, double> branches[] = {{"0", gamma / 8.0}, {"1", gamma / 8.0}, {"2", 0.75 * gamma}};
    for (std::size_t j = 0; j < dims.sites(); ++j) {
        for (const auto& [level, rate] : branches) {
            const Operator jump = transition(d, model.scheme.index(level), r).scaled(std::sqrt(rate));
            out.push_back({embed_site_operator(jump, j, dims), "decay_" + std::to_string(j) + "_r" + level});
        }
    }
    return out;
}

std::vector<LindbladChannel> dephasing_channels(const SystemModel& model, double gamma_phi) {
    if (!(gamma_phi >= 0.0)) throw ModelError("dephasing rate must be >= 0");
    const std::size_t d = model.scheme.size();
    const std::size_t r = model.scheme.rydberg();
    const SiteDims dims = model.dims();
    const Operator b2 = bright_projector(model.drive.theta(), model.drive.phi(), 2);
    const std::size_t g[2] = {model.scheme.index("0"), model.scheme.index("1")};
    Matrix target = projector(d, r).matrix();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) target(g[a], g[b]) -= b2(a, b);
    }
    Matrix control = projector(d, r).matrix();
    control(g[0], g[0]) -= 1.0;
    std::vector<LindbladChannel> out;
    for (std::size_t j = 0; j < dims.sites(); ++j) {
        const Matrix& z = j == model.target_site() ? target : control;
        const Operator site_op(SiteDims({d}), z * std::sqrt(gamma_phi));
        out.push_back({embed_site_operator(site_op, j, dims), "dephasing_" + std::to_string(j)});
    }
    return out;
}

std::vector<LindbladChannel> lindblad_channels(const SystemModel& model, const NoiseSpec& spec) {
    std::vector<LindbladChannel> out;
    if (std::isfinite(spec.tau_rydberg)) out = decay_channels(model, spec.tau_rydberg);
    if (spec.gamma_phi > 0.0) {
        auto deph = dephasing_channels(model, spec.gamma_phi);
        out.insert(out.end(), deph.begin(), deph.end());
    }
    return out;
}

}  // namespace holo
