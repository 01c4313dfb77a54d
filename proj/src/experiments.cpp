#include "holo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "holo/errors.hpp"
#include "holo/parallel.hpp"

namespace holo {

namespace {

constexpr double kPi = std::numbers::pi;

TimeDependentHamiltonian hamiltonian_for(const SystemModel& model, Propagation kind) {
    return kind == Propagation::Full ? full_hamiltonian(model) : effective_hamiltonian(model);
}

std::vector<double> uniform_times(double t_end, std::size_t points) {
    if (points < 2) throw ModelError("a curve needs at least two points");
    return TimeSpan::uniform(0.0, t_end, points).samples;
}

}  // namespace

FidelityCurve cnot_fidelity_curve(const SystemModel& model, Propagation kind, std::size_t points,
                                  const IntegratorSettings& settings, double* norm_drift) {
    const auto h = hamiltonian_for(model, kind);
    const StateVector psi0 = benchmark_initial_state(model.dims());
    const StateVector ideal = apply_ideal_gate(model.gate(), psi0);
    const double t_end = model.drive.gate_time();
    const auto traj = evolve_schrodinger(h, psi0, {0.0, t_end, uniform_times(t_end, points)}, settings);
    FidelityCurve curve;
    curve.times = traj.times;
    for (const auto& s : traj.states) curve.values.push_back(overlap_fidelity(ideal, s));
    if (norm_drift) *norm_drift = traj.max_norm_drift;
    return curve;
}

double gate_fidelity(const SystemModel& model, const IntegratorSettings& settings, Propagation kind) {
    const auto h = hamiltonian_for(model, kind);
    const StateVector psi0 = benchmark_initial_state(model.dims());
    const StateVector ideal = apply_ideal_gate(model.gate(), psi0);
    const auto traj = evolve_schrodinger(h, psi0, {0.0, model.drive.gate_time(), {}}, settings);
    return overlap_fidelity(ideal, traj.final_state());
}

PopulationTrace excitation_trace(const SystemModel& model, std::size_t points, const IntegratorSettings& settings) {
    const auto h = full_hamiltonian(model);
    const StateVector psi0 = benchmark_initial_state(model.dims());
    const double t_end = model.drive.gate_time();
    const auto traj = evolve_schrodinger(h, psi0, {0.0, t_end, uniform_times(t_end, points)}, settings);
    const std::size_t r = model.scheme.rydberg();
    const Operator target_r =
        embed_site_operator(projector(model.scheme.size(), r), model.target_site(), model.dims());
    PopulationTrace out;
    out.times = traj.times;
    for (const auto& s : traj.states) {
        out.populations.push_back(excitation_populations(s, r));
        out.target_rydberg.push_back(expectation(s, target_r).real());
    }
    return out;
}

double lindblad_gate_fidelity(const SystemModel& model, const std::vector<LindbladChannel>& channels,
                              const IntegratorSettings& settings) {
    const auto h = full_hamiltonian(model);
    const StateVector psi0 = benchmark_initial_state(model.dims());
    const StateVector ideal = apply_ideal_gate(model.gate(), psi0);
    const auto traj =
        evolve_lindblad(h, channels, DensityMatrix::pure(psi0), {0.0, model.drive.gate_time(), {}}, settings);
    const Vector& v = ideal.amps();
    return v.dot(traj.final_state().matrix() * v).real();
}

std::vector<double> lindblad_average_fidelity(const SystemModel& model, const std::vector<LindbladChannel>& channels,
                                              const std::vector<double>& times, const IntegratorSettings& settings) {
    const auto h = full_hamiltonian(model);
    const Matrix w = computational_embedding(model.dims(), model.scheme.index("0"), model.scheme.index("1"));
    const Matrix u = ideal_gate_unitary(model.gate()).matrix();
    const auto strings = PauliString::all(model.n_controls() + 1);
    std::vector<Matrix> inputs;
    inputs.reserve(strings.size());
    for (const auto& p : strings) inputs.push_back(w * p.matrix() * w.adjoint());
    std::vector<double> out;
    evolve_lindblad_batch_sampled(
        h, channels, inputs, 0.0, times,
        [&](double, const std::vector<Matrix>& outputs) {
            const ChannelEvaluator cached = [&outputs](const std::vector<Matrix>&) { return outputs; };
            out.push_back(average_gate_fidelity(cached, u, w));
        },
        settings);
    return out;
}

MonteCarloEstimate noisy_gate_fidelity(const SystemModel& model, const NoiseSpec& noise,
                                       const IntegratorSettings& settings, std::uint64_t scenario,
                                       std::uint64_t point, std::size_t threads, std::vector<double>* samples) {
    noise.validate();
    const std::size_t count = noise.realizations;
    std::vector<double> values(count, 0.0);
    const auto channels = lindblad_channels(model, noise);
    parallel_for(count, threads, [&](std::size_t k) {
        const auto r = sample_noise(noise, model.interactions.n_atoms(), k, scenario, point);
        const SystemModel m = apply_noise(model, r);
        values[k] = channels.empty() ? gate_fidelity(m, settings) : lindblad_gate_fidelity(m, channels, settings);
    });
    MonteCarloEstimate e;
    for (double v : values) e.mean += v;
    e.mean /= static_cast<double>(count);
    if (count > 1) {
        double var = 0.0;
        for (double v : values) var += (v - e.mean) * (v - e.mean);
        var /= static_cast<double>(count - 1);
        e.standard_error = std::sqrt(var / static_cast<double>(count));
    }
    if (samples) *samples = std::move(values);
    return e;
}

FidelityCurve two_photon_fidelity_curve(const TwoPhotonModel& model, std::size_t points,
                                        const IntegratorSettings& settings) {
    const auto h = two_photon_hamiltonian(model);
    const StateVector psi0 = benchmark_initial_state(model.dims());
    const GateSpec gate{model.n_controls(), model.theta(), model.phi, model.gamma};
    const StateVector ideal = apply_ideal_gate(gate, psi0);
    const double t_end = model.gate_time();
    const auto traj = evolve_schrodinger(h, psi0, {0.0, t_end, uniform_times(t_end, points)}, settings);
    FidelityCurve curve;
    curve.times = traj.times;
    for (const auto& s : traj.states) curve.values.push_back(overlap_fidelity(ideal, s));
    return curve;
}

// ---------------------------------------------------------------------------

const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> catalog = {
        {Scenario::FullVsEffective, "full_vs_effective", "benchmark-state fidelity, full and effective models"},
        {Scenario::ExcitationPopulations, "excitation_populations", "Rydberg excitation-number populations"},
        {Scenario::NhqcVsOhqcGrid, "nhqc_vs_ohqc_grid", "fidelity over duration and amplitude errors"},
        {Scenario::LifetimeSweep, "lifetime_sweep", "fidelity over Rydberg lifetime and amplitude offset"},
        {Scenario::Omega0Error, "omega0_error", "fidelity over an offset on the |0>-|r> leg"},
        {Scenario::DeltaErrorEcho, "delta_error_echo", "fidelity over detuning errors, with and without echo"},
        {Scenario::OmegaModError, "omega_mod_error", "fidelity over modulation-frequency offsets"},
        {Scenario::NScaling, "n_scaling", "fidelity against the number of controls"},
        {Scenario::RriFluctuation, "rri_fluctuation", "mean fidelity under random interaction jitter"},
        {Scenario::Thermal, "thermal", "mean fidelity under Doppler detunings"},
        {Scenario::TwoPhotonCnot, "two_photon_cnot", "CNOT fidelity curve of the four-level model"},
        {Scenario::PulseLandscape, "pulse_landscape", "sensitivity and gate time over (a1, a2)"},
        {Scenario::AvgFidelity, "avg_fidelity", "average gate fidelity under the master equation"},
    };
    return catalog;
}

std::string_view scenario_name(Scenario s) {
    for (const auto& info : scenario_catalog()) {
        if (info.scenario == s) return info.name;
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    for (const auto& info : scenario_catalog()) {
        if (name == info.name) return info.scenario;
    }
    return std::nullopt;
}

std::vector<double> SweepRange::values() const {
    if (points == 1) return {start};
    std::vector<double> v;
    for (std::size_t i = 0; i < points; ++i) {
        v.push_back(i + 1 == points ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    return v;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

constexpr double kMHz = kTwoPi;  // rad/us per MHz

// Reads typed keys out of one JSON object and records every problem.
class Reader {
public:
    Reader(const json& obj, std::string prefix, std::vector<std::string>& errors)
        : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
        if (!obj_.is_object()) errors_.push_back(where("") + "must be an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.is_object() || !obj_.contains(key)) return;
        const json& v = obj_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
                out = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
                out = v.get<std::string>();
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    throw std::invalid_argument("expected a non-negative integer");
                }
                out = v.get<T>();
            } else {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
                out = v.get<double>();
                if (!std::isfinite(out)) throw std::invalid_argument("must be finite");
            }
        } catch (const std::exception& e) {
            errors_.push_back(where(key) + e.what());
        }
    }

    // Value in ordinary units scaled into angular units.
    void read_scaled(const char* key, double& out, double scale) {
        double v = out / scale;
        read(key, v);
        out = v * scale;
    }

    bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }
    const json& at(const char* key) {
        seen_.insert(key);
        return obj_.at(key);
    }
    void mark(const char* key) { seen_.insert(key); }

    void finish() {
        if (!obj_.is_object()) return;
        for (const auto& [k, v] : obj_.items()) {
            if (!seen_.count(k)) errors_.push_back(where(k.c_str()) + "unknown key");
        }
    }

    std::string where(const char* key) const {
        std::string s = prefix_.empty() ? std::string(key) : prefix_ + "." + key;
        return "'" + s + "': ";
    }

private:
    const json& obj_;
    std::string prefix_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

std::optional<SweepRange> read_sweep(Reader& parent, const char* key, std::vector<std::string>& errors) {
    if (!parent.has(key)) {
        parent.mark(key);
        return std::nullopt;
    }
    Reader r(parent.at(key), key, errors);
    SweepRange s;
    r.read("start", s.start);
    r.read("stop", s.stop);
    r.read("points", s.points);
    r.finish();
    if (s.points < 1) errors.push_back(std::string("'") + key + ".points': must be >= 1");
    return s;
}

json canonical_json(const ScenarioConfig& c) {
    const auto& m = c.model;
    json j;
    j["scenario"] = scenario_name(c.scenario);
    j["n_controls"] = m.n_controls;
    j["ring_radius_um"] = m.ring_radius;
    j["placement"] = m.placement == Placement::UniformRing ? "uniform_ring" : "adjacent_chord";
    j["chord_um"] = m.chord;
    j["c6_ghz_um6"] = m.c6 / kMHz / 1e3;
    j["control_amp_mhz"] = m.control_amp / kMHz;
    j["omega_max_mhz"] = m.omega_max / kMHz;
    j["modulation_mhz"] = m.modulation ? json(*m.modulation / kMHz) : json(nullptr);
    j["pulse"] = m.pulse == PulseKind::Ohqc ? "ohqc" : "nhqc";
    j["a1"] = m.a1;
    j["a2"] = m.a2;
    j["theta"] = m.theta;
    j["phi"] = m.phi;
    j["gamma"] = m.gamma;
    j["levels"] = m.levels == LevelVariant::ThreeLevel      ? "three_level"
                  : m.levels == LevelVariant::FourLevelLoss ? "four_level_loss"
                                                            : "four_level_pump";
    const auto& n = c.noise;
    j["noise"] = {{"delta_t_rel", n.delta_t_rel},
                  {"delta_omega_t_rel", n.delta_omega_t_rel},
                  {"delta_omega_t_mhz", n.delta_omega_t_abs / kMHz},
                  {"delta_omega0_mhz", n.delta_omega0_abs / kMHz},
                  {"delta_delta_rel", n.delta_delta_rel},
                  {"delta_omega_mod_mhz", n.delta_omega_mod / kMHz},
                  {"delta_v_bound", n.delta_v_bound},
                  {"temperature_uk", n.temperature_uk},
                  {"k_eff_per_um", n.k_eff},
                  {"atom_mass_kg", n.atom_mass},
                  {"tau_rydberg_us", std::isfinite(n.tau_rydberg) ? json(n.tau_rydberg) : json(nullptr)},
                  {"gamma_phi_khz", n.gamma_phi / kMHz * 1e3},
                  {"spin_echo", n.spin_echo},
                  {"realizations", n.realizations}};
    const auto& s = c.integrator;
    j["integrator"] = {{"rel_tol", s.rel_tol},
                       {"abs_tol", s.abs_tol},
                       {"max_step_us", s.max_step},
                       {"min_step_us", s.min_step},
                       {"initial_step_us", s.initial_step}};
    const auto& q = c.two_photon;
    j["two_photon"] = {{"omega_cp_mhz", q.omega_cp / kMHz},
                       {"omega_cr_bar_mhz", q.omega_cr_bar / kMHz},
                       {"omega_0p_peak_mhz", q.omega_0p_peak / kMHz},
                       {"omega_1p_peak_mhz", q.omega_1p_peak / kMHz},
                       {"omega_0r_mhz", q.omega_0r / kMHz},
                       {"omega_1r_mhz", q.omega_1r / kMHz},
                       {"delta_c_mhz", q.delta_c / kMHz},
                       {"delta_0_mhz", q.delta_0 / kMHz},
                       {"delta_1_mhz", q.delta_1 / kMHz},
                       {"compensate_stark_shifts", q.compensate_stark_shifts}};
    auto sweep = [](const std::optional<SweepRange>& r) {
        return r ? json{{"start", r->start}, {"stop", r->stop}, {"points", r->points}} : json(nullptr);
    };
    j["sweep"] = sweep(c.sweep);
    j["sweep2"] = sweep(c.sweep2);
    j["series"] = c.series;
    j["time_points"] = c.time_points;
    j["seed"] = c.noise.seed;
    return j;
}

void check_hierarchy(ScenarioConfig& c) {
    const auto& m = c.model;
    const auto geometry = build_geometry(m.n_controls, m.ring_radius, m.placement, m.chord);
    const auto graph = build_interactions(geometry, m.c6);
    const double omega = m.modulation.value_or(graph.v_ct(0));
    const double n = static_cast<double>(m.n_controls);
    char buf[256];
    if (std::abs(omega) < 5.0 * std::sqrt(n) * m.control_amp / 4.0) {
        std::snprintf(buf, sizeof buf, "hierarchy: modulation %.4g MHz is not >> sqrt(N) control_amp/4 = %.4g MHz",
                      omega / kMHz, std::sqrt(n) * m.control_amp / 4.0 / kMHz);
        c.warnings.emplace_back(buf);
    }
    if (m.control_amp / 2.0 < 5.0 * m.omega_max) {
        std::snprintf(buf, sizeof buf, "hierarchy: control_amp/2 = %.4g MHz is not >> omega_max = %.4g MHz",
                      m.control_amp / 2.0 / kMHz, m.omega_max / kMHz);
        c.warnings.emplace_back(buf);
    }
    double v_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.n_controls; ++a) {
        for (std::size_t b = a + 1; b < m.n_controls; ++b) v_min = std::min(v_min, graph.v_cc(a, b));
    }
    if (m.n_controls > 1 && v_min < 5.0 * m.control_amp) {
        std::snprintf(buf, sizeof buf, "hierarchy: weakest control-control coupling %.4g MHz is not >> control_amp = %.4g MHz",
                      v_min / kMHz, m.control_amp / kMHz);
        c.warnings.emplace_back(buf);
    }
}

}  // namespace

ScenarioConfig validate_config(std::string_view text) {
    json doc;
    try {
        doc = text.find_first_not_of(" \t\r\n") == std::string_view::npos ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<std::string> errors;
    ScenarioConfig c;
    c.model.placement = Placement::AdjacentChord;
    Reader top(doc, "", errors);

    std::string name = std::string(scenario_name(c.scenario));
    top.read("scenario", name);
    if (auto s = parse_scenario(name)) {
        c.scenario = *s;
    } else {
        errors.push_back("'scenario': unknown scenario '" + name + "'");
    }

    auto& m = c.model;
    top.read("n_controls", m.n_controls);
    top.read("ring_radius_um", m.ring_radius);
    std::string placement = "adjacent_chord";
    top.read("placement", placement);
    if (placement == "uniform_ring") {
        m.placement = Placement::UniformRing;
    } else if (placement == "adjacent_chord") {
        m.placement = Placement::AdjacentChord;
    } else {
        errors.push_back("'placement': expected uniform_ring or adjacent_chord");
    }
    top.read("chord_um", m.chord);
    top.read_scaled("c6_ghz_um6", m.c6, kMHz * 1e3);
    top.read_scaled("control_amp_mhz", m.control_amp, kMHz);
    top.read_scaled("omega_max_mhz", m.omega_max, kMHz);
    if (top.has("modulation_mhz") && !top.at("modulation_mhz").is_null()) {
        double w = 0.0;
        top.read("modulation_mhz", w);
        m.modulation = w * kMHz;
    }
    top.mark("modulation_mhz");
    // Constant drive by default for the model-comparison runs.
    const bool rectangular = c.scenario == Scenario::FullVsEffective || c.scenario == Scenario::ExcitationPopulations;
    std::string pulse = rectangular ? "nhqc" : "ohqc";
    top.read("pulse", pulse);
    if (pulse == "ohqc") {
        m.pulse = PulseKind::Ohqc;
    } else if (pulse == "nhqc") {
        m.pulse = PulseKind::Nhqc;
    } else {
        errors.push_back("'pulse': expected ohqc or nhqc");
    }
    top.read("a1", m.a1);
    top.read("a2", m.a2);
    top.read("theta", m.theta);
    top.read("phi", m.phi);
    top.read("gamma", m.gamma);
    std::string levels = "three_level";
    top.read("levels", levels);
    if (levels == "three_level") {
        m.levels = LevelVariant::ThreeLevel;
    } else if (levels == "four_level_loss") {
        m.levels = LevelVariant::FourLevelLoss;
    } else if (levels == "four_level_pump") {
        m.levels = LevelVariant::FourLevelPump;
    } else {
        errors.push_back("'levels': expected three_level, four_level_loss or four_level_pump");
    }

    auto& n = c.noise;
    if (c.scenario == Scenario::AvgFidelity || c.scenario == Scenario::LifetimeSweep) {
        n.tau_rydberg = 400.0;
        n.gamma_phi = kMHz * 1e-3;
    }
    if (top.has("noise")) {
        Reader r(top.at("noise"), "noise", errors);
        r.read("delta_t_rel", n.delta_t_rel);
        r.read("delta_omega_t_rel", n.delta_omega_t_rel);
        r.read_scaled("delta_omega_t_mhz", n.delta_omega_t_abs, kMHz);
        r.read_scaled("delta_omega0_mhz", n.delta_omega0_abs, kMHz);
        r.read("delta_delta_rel", n.delta_delta_rel);
        r.read_scaled("delta_omega_mod_mhz", n.delta_omega_mod, kMHz);
        r.read("delta_v_bound", n.delta_v_bound);
        r.read("temperature_uk", n.temperature_uk);
        r.read("k_eff_per_um", n.k_eff);
        r.read("atom_mass_kg", n.atom_mass);
        if (r.has("tau_rydberg_us") && r.at("tau_rydberg_us").is_null()) {
            n.tau_rydberg = std::numeric_limits<double>::infinity();
            r.mark("tau_rydberg_us");
        } else {
            r.read("tau_rydberg_us", n.tau_rydberg);
        }
        r.read_scaled("gamma_phi_khz", n.gamma_phi, kMHz * 1e-3);
        r.read("spin_echo", n.spin_echo);
        r.read("realizations", n.realizations);
        r.finish();
    }
    top.mark("noise");

    auto& s = c.integrator;
    if (top.has("integrator")) {
        Reader r(top.at("integrator"), "integrator", errors);
        r.read("rel_tol", s.rel_tol);
        r.read("abs_tol", s.abs_tol);
        r.read("max_step_us", s.max_step);
        r.read("min_step_us", s.min_step);
        r.read("initial_step_us", s.initial_step);
        r.finish();
    }
    top.mark("integrator");

    auto& q = c.two_photon;
    q.compensate_stark_shifts = c.scenario == Scenario::TwoPhotonCnot;
    if (top.has("two_photon")) {
        Reader r(top.at("two_photon"), "two_photon", errors);
        r.read_scaled("omega_cp_mhz", q.omega_cp, kMHz);
        r.read_scaled("omega_cr_bar_mhz", q.omega_cr_bar, kMHz);
        r.read_scaled("omega_0p_peak_mhz", q.omega_0p_peak, kMHz);
        r.read_scaled("omega_1p_peak_mhz", q.omega_1p_peak, kMHz);
        r.read_scaled("omega_0r_mhz", q.omega_0r, kMHz);
        r.read_scaled("omega_1r_mhz", q.omega_1r, kMHz);
        r.read_scaled("delta_c_mhz", q.delta_c, kMHz);
        r.read_scaled("delta_0_mhz", q.delta_0, kMHz);
        r.read_scaled("delta_1_mhz", q.delta_1, kMHz);
        r.read("compensate_stark_shifts", q.compensate_stark_shifts);
        r.finish();
    }
    top.mark("two_photon");

    c.sweep = read_sweep(top, "sweep", errors);
    c.sweep2 = read_sweep(top, "sweep2", errors);
    if (top.has("series")) {
        const json& v = top.at("series");
        if (!v.is_array()) {
            errors.push_back("'series': expected an array of numbers");
        } else {
            for (const auto& x : v) {
                if (!x.is_number()) {
                    errors.push_back("'series': expected an array of numbers");
                    break;
                }
                c.series.push_back(x.get<double>());
            }
        }
    }
    top.mark("series");
    top.read("time_points", c.time_points);
    top.read("output", c.output);
    top.read("seed", n.seed);
    top.read("threads", c.threads);
    top.finish();

    // Semantic checks, only once the types are sound.
    if (errors.empty()) {
        auto check = [&](bool ok, const char* msg) {
            if (!ok) errors.emplace_back(msg);
        };
        check(m.n_controls >= 1 && m.n_controls <= 6, "'n_controls': must be in 1..6");
        check(m.ring_radius > 0.0, "'ring_radius_um': must be positive");
        check(m.chord > 0.0, "'chord_um': must be positive");
        check(m.c6 > 0.0, "'c6_ghz_um6': must be positive");
        check(m.control_amp >= 0.0, "'control_amp_mhz': must be >= 0");
        check(m.omega_max > 0.0, "'omega_max_mhz': must be positive");
        check(c.time_points >= 2, "'time_points': must be >= 2");
        check(c.threads >= 1, "'threads': must be >= 1");
        try {
            n.validate();
        } catch (const ModelError& e) {
            errors.push_back(std::string("'noise': ") + e.what());
        }
        try {
            s.validate();
        } catch (const ModelError& e) {
            errors.push_back(std::string("'integrator': ") + e.what());
        }
        if (m.placement == Placement::AdjacentChord && m.n_controls > 1 && m.chord >= 2.0 * m.ring_radius) {
            errors.emplace_back("'chord_um': must be shorter than the ring diameter");
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    check_hierarchy(c);
    c.canonical = canonical_json(c).dump();
    return c;
}

std::string config_hash(const ScenarioConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ResultTable::write_csv(std::ostream& out) const {
    for (const auto& [k, v] : metadata) out << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> series_or(const ScenarioConfig& c, std::vector<double> fallback) {
    return c.series.empty() ? std::move(fallback) : c.series;
}

SweepRange sweep_or(const std::optional<SweepRange>& s, SweepRange fallback) { return s.value_or(fallback); }

std::size_t as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(std::string("'series': ") + what + " must be positive integers");
    return static_cast<std::size_t>(v);
}

SystemModel model_for(const ScenarioConfig& c, const std::function<void(GateModelConfig&)>& edit = {}) {
    GateModelConfig g = c.model;
    if (edit) edit(g);
    return make_gate_model(g);
}

// Applies the deterministic part of the noise spec only.
SystemModel with_errors(SystemModel m, DriveErrors e, double delta_omega_mod = 0.0) {
    m.drive.set_errors(e);
    m.drive.set_modulation(m.drive.modulation() + delta_omega_mod);
    return m;
}

DriveErrors spec_errors(const NoiseSpec& n) {
    return {n.delta_omega_t_rel, n.delta_omega_t_abs, n.delta_omega0_abs, n.delta_delta_rel, n.delta_t_rel};
}

// Runs rows(i) for each point; results land in point order.
template <class F>
std::vector<std::vector<double>> run_points(std::size_t count, std::size_t threads, F&& point) {
    std::vector<std::vector<double>> rows(count);
    parallel_for(count, threads, [&](std::size_t i) {
        try {
            rows[i] = point(i);
        } catch (const IntegrationError& e) {
            throw IntegrationError("point " + std::to_string(i) + ": " + e.what());
        }
    });
    return rows;
}

}  // namespace

ResultTable run_scenario(const ScenarioConfig& c) {
    ResultTable t;
    const auto& s = c.integrator;
    const std::size_t threads = c.threads;
    const auto id = static_cast<std::uint64_t>(c.scenario);

    switch (c.scenario) {
        case Scenario::FullVsEffective: {
            const SystemModel m = with_errors(model_for(c), spec_errors(c.noise), c.noise.delta_omega_mod);
            const auto full = cnot_fidelity_curve(m, Propagation::Full, c.time_points, s);
            const auto eff = cnot_fidelity_curve(m, Propagation::Effective, c.time_points, s);
            t.columns = {"t_us", "fidelity_full", "fidelity_effective"};
            for (std::size_t k = 0; k < full.times.size(); ++k) {
                t.rows.push_back({full.times[k], full.values[k], eff.values[k]});
            }
            break;
        }
        case Scenario::ExcitationPopulations: {
            const SystemModel m = model_for(c);
            const auto trace = excitation_trace(m, c.time_points, s);
            t.columns = {"t_us"};
            for (std::size_t k = 0; k < trace.populations.front().size(); ++k) t.columns.push_back("p" + std::to_string(k));
            t.columns.push_back("p_target_r");
            for (std::size_t k = 0; k < trace.times.size(); ++k) {
                std::vector<double> row{trace.times[k]};
                row.insert(row.end(), trace.populations[k].begin(), trace.populations[k].end());
                row.push_back(trace.target_rydberg[k]);
                t.rows.push_back(std::move(row));
            }
            break;
        }
        case Scenario::NhqcVsOhqcGrid: {
            const auto dt = sweep_or(c.sweep, {-0.1, 0.1, 11}).values();
            const auto dw = sweep_or(c.sweep2, {-0.1, 0.1, 11}).values();
            const SystemModel ohqc = model_for(c, [](GateModelConfig& g) { g.pulse = PulseKind::Ohqc; });
            const SystemModel nhqc = model_for(c, [](GateModelConfig& g) { g.pulse = PulseKind::Nhqc; });
            // Amplitude error: constant offset delta_Omega_t = x * Omega_max over the gate.
            t.columns = {"delta_t_rel", "delta_omega_t_over_max", "fidelity_ohqc", "fidelity_nhqc"};
            t.rows = run_points(dt.size() * dw.size(), threads, [&](std::size_t i) {
                DriveErrors e = spec_errors(c.noise);
                e.duration_rel = dt[i / dw.size()];
                e.omega_t_abs = dw[i % dw.size()] * c.model.omega_max;
                return std::vector<double>{e.duration_rel, dw[i % dw.size()], gate_fidelity(with_errors(ohqc, e), s),
                                           gate_fidelity(with_errors(nhqc, e), s)};
            });
            break;
        }
        case Scenario::LifetimeSweep: {
            const auto taus = series_or(c, {50.0, 100.0, 200.0, 400.0});
            const auto offsets = sweep_or(c.sweep, {0.0, 100.0, 11}).values();  // kHz
            auto loss = [](PulseKind p) {
                return [p](GateModelConfig& g) {
                    g.pulse = p;
                    g.levels = LevelVariant::FourLevelLoss;
                };
            };
            const SystemModel ohqc = model_for(c, loss(PulseKind::Ohqc));
            const SystemModel nhqc = model_for(c, loss(PulseKind::Nhqc));
            t.columns = {"tau_us", "delta_omega_t_kHz", "fidelity_ohqc", "fidelity_nhqc"};
            t.rows = run_points(taus.size() * offsets.size(), threads, [&](std::size_t i) {
                NoiseSpec n = c.noise;
                n.tau_rydberg = taus[i / offsets.size()];
                DriveErrors e = spec_errors(n);
                e.omega_t_abs = offsets[i % offsets.size()] * kMHz * 1e-3;
                const SystemModel a = with_errors(ohqc, e), b = with_errors(nhqc, e);
                return std::vector<double>{n.tau_rydberg, offsets[i % offsets.size()],
                                           lindblad_gate_fidelity(a, lindblad_channels(a, n), s),
                                           lindblad_gate_fidelity(b, lindblad_channels(b, n), s)};
            });
            break;
        }
        case Scenario::Omega0Error:
        case Scenario::DeltaErrorEcho:
        case Scenario::OmegaModError: {
            const auto ns = series_or(c, {2.0, 3.0});
            SweepRange fallback{-0.1, 0.1, 11};
            if (c.scenario == Scenario::OmegaModError) fallback = {-5.0, 5.0, 11};
            const auto xs = sweep_or(c.sweep, fallback).values();
            std::vector<SystemModel> models;
            for (double n : ns) {
                const std::size_t count = as_count(n, "control counts");
                models.push_back(model_for(c, [count](GateModelConfig& g) { g.n_controls = count; }));
            }
            if (c.scenario == Scenario::Omega0Error) t.columns = {"n_controls", "delta_omega0_MHz", "fidelity"};
            if (c.scenario == Scenario::DeltaErrorEcho) {
                t.columns = {"n_controls", "delta_delta_rel", "fidelity_no_echo", "fidelity_echo"};
            }
            if (c.scenario == Scenario::OmegaModError) t.columns = {"n_controls", "delta_omega_mod_MHz", "fidelity"};
            t.rows = run_points(ns.size() * xs.size(), threads, [&](std::size_t i) {
                const SystemModel& base = models[i / xs.size()];
                const double x = xs[i % xs.size()];
                DriveErrors e = spec_errors(c.noise);
                std::vector<double> row{ns[i / xs.size()], x};
                if (c.scenario == Scenario::Omega0Error) {
                    e.omega0_abs = x * kMHz;
                    row.push_back(gate_fidelity(with_errors(base, e, c.noise.delta_omega_mod), s));
                } else if (c.scenario == Scenario::DeltaErrorEcho) {
                    e.delta_rel = x;
                    SystemModel m = with_errors(base, e, c.noise.delta_omega_mod);
                    m.spin_echo = false;
                    row.push_back(gate_fidelity(m, s));
                    m.spin_echo = true;
                    row.push_back(gate_fidelity(m, s));
                } else {
                    row.push_back(gate_fidelity(with_errors(base, e, c.noise.delta_omega_mod + x * kMHz), s));
                }
                return row;
            });
            break;
        }
        case Scenario::NScaling: {
            const auto ns = series_or(c, {1.0, 2.0, 3.0, 4.0, 5.0});
            const double err = c.noise.delta_omega_t_rel != 0.0 ? c.noise.delta_omega_t_rel : 0.05;
            t.columns = {"n_controls", "fidelity_ideal", "fidelity_error", "omega_t_rel_error"};
            t.rows = run_points(ns.size(), threads, [&](std::size_t i) {
                const std::size_t count = as_count(ns[i], "control counts");
                const SystemModel m = model_for(c, [count](GateModelConfig& g) { g.n_controls = count; });
                DriveErrors e{};
                e.omega_t_rel = err;
                return std::vector<double>{ns[i], gate_fidelity(m, s), gate_fidelity(with_errors(m, e), s), err};
            });
            break;
        }
        case Scenario::RriFluctuation:
        case Scenario::Thermal: {
            const bool thermal = c.scenario == Scenario::Thermal;
            const auto series = series_or(c, thermal ? std::vector<double>{1.0, 2.0, 4.0} : std::vector<double>{20.0, 40.0, 80.0});
            const auto xs = sweep_or(c.sweep, thermal ? SweepRange{0.0, 50.0, 6} : SweepRange{0.0, 0.5, 6}).values();
            t.columns = {thermal ? "omega_max_MHz" : "control_amp_MHz", thermal ? "temperature_uK" : "delta_v",
                         "fidelity_mean", "fidelity_sem", "realizations"};
            // Realizations run inside each point so the reduction order is fixed.
            for (std::size_t p = 0; p < series.size() * xs.size(); ++p) {
                const double a = series[p / xs.size()];
                const double x = xs[p % xs.size()];
                const SystemModel m = model_for(c, [&](GateModelConfig& g) {
                    (thermal ? g.omega_max : g.control_amp) = a * kMHz;
                });
                NoiseSpec n = c.noise;
                (thermal ? n.temperature_uk : n.delta_v_bound) = x;
                MonteCarloEstimate e;
                try {
                    e = noisy_gate_fidelity(m, n, s, id, p, threads);
                } catch (const IntegrationError& err) {
                    throw IntegrationError("point " + std::to_string(p) + ": " + err.what());
                }
                t.rows.push_back({a, x, e.mean, e.standard_error, static_cast<double>(n.realizations)});
            }
            break;
        }
        case Scenario::TwoPhotonCnot: {
            const auto geometry = build_geometry(c.model.n_controls, c.model.ring_radius, c.model.placement, c.model.chord);
            const auto graph = build_interactions(geometry, c.model.c6);
            const TwoPhotonModel tp = make_two_photon_model(c.two_photon, graph, c.model.modulation.value_or(graph.v_ct(0)),
                                                            c.model.a1, c.model.a2, c.model.phi, c.model.gamma);
            const auto curve = two_photon_fidelity_curve(tp, c.time_points, s);
            t.columns = {"t_us", "fidelity"};
            for (std::size_t k = 0; k < curve.times.size(); ++k) t.rows.push_back({curve.times[k], curve.values[k]});
            for (const auto& w : c.two_photon.validate()) t.metadata["warning_two_photon"] += w + ";";
            break;
        }
        case Scenario::PulseLandscape: {
            const auto a1 = sweep_or(c.sweep, {-0.5, 0.7, 61});
            const auto a2 = sweep_or(c.sweep2, {-0.5, 0.3, 41});
            if (a1.points < 2 || a2.points < 2) throw ConfigError("'sweep': the landscape needs at least 2 x 2 points");
            const auto cells = pulse::scan_landscape({a1.start, a1.stop, a1.points}, {a2.start, a2.stop, a2.points}, threads);
            t.columns = {"a1", "a2", "sensitivity", "half_area", "low_sensitivity", "short_gate"};
            for (const auto& cell : cells) {
                t.rows.push_back({cell.a1, cell.a2, cell.sensitivity, cell.half_area,
                                  cell.low_sensitivity ? 1.0 : 0.0, cell.short_gate ? 1.0 : 0.0});
            }
            break;
        }
        case Scenario::AvgFidelity: {
            const auto gammas = series_or(c, {0.5 * kPi, kPi});
            const NoiseSpec& n = c.noise;
            t.columns = {"gamma_rad", "t_us", "avg_fidelity"};
            t.metadata["comparator"] = "final-time ideal gate at every sample";
            const auto rows = run_points(gammas.size(), threads, [&](std::size_t i) {
                const SystemModel m = with_errors(model_for(c, [&](GateModelConfig& g) {
                                                      g.gamma = gammas[i];
                                                      g.levels = LevelVariant::FourLevelLoss;
                                                  }),
                                                  spec_errors(n), n.delta_omega_mod);
                const auto times = uniform_times(m.drive.gate_time(), c.time_points);
                const auto f = lindblad_average_fidelity(m, lindblad_channels(m, n), times, s);
                std::vector<double> flat;
                for (std::size_t k = 0; k < times.size(); ++k) flat.insert(flat.end(), {gammas[i], times[k], f[k]});
                return flat;
            });
            for (const auto& flat : rows) {
                for (std::size_t k = 0; k + 2 < flat.size(); k += 3) t.rows.push_back({flat[k], flat[k + 1], flat[k + 2]});
            }
            break;
        }
    }

    t.metadata["scenario"] = std::string(scenario_name(c.scenario));
    t.metadata["config_hash"] = config_hash(c);
    t.metadata["seed"] = std::to_string(c.noise.seed);
    t.metadata["version"] = kVersion;
    return t;
}

}  // namespace holo
