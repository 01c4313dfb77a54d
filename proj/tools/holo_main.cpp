// holo: command-line front end of the scenario runner.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "holo/errors.hpp"
#include "holo/experiments.hpp"
#include "holo/pulse.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
    double tol_scale = 1.0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Master seed (overrides the config)");
    app->add_option("--out", c.out, "Output CSV path (default: config output, else stdout)");
    app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--tol-scale", c.tol_scale, "Multiply integrator tolerances")->check(CLI::PositiveNumber);
}

holo::ScenarioConfig load(const std::string& text, const Common& common) {
    holo::ScenarioConfig c = holo::validate_config(text);
    if (common.seed) c.noise.seed = *common.seed;
    if (common.threads) c.threads = *common.threads;
    c.integrator = c.integrator.scaled(common.tol_scale);
    if (!common.out.empty()) c.output = common.out;
    // Keep the hash in step with the overrides.
    auto doc = nlohmann::json::parse(c.canonical);
    doc["seed"] = c.noise.seed;
    doc["integrator"]["rel_tol"] = c.integrator.rel_tol;
    doc["integrator"]["abs_tol"] = c.integrator.abs_tol;
    c.canonical = doc.dump();
    return c;
}

int emit(const holo::ScenarioConfig& c) {
    for (const auto& w : c.warnings) std::cerr << "warning: " << w << '\n';
    const holo::ResultTable table = holo::run_scenario(c);
    if (c.output.empty() || c.output == "-") {
        table.write_csv(std::cout);
    } else {
        std::ofstream f(c.output);
        if (!f) throw holo::ConfigError("cannot open output '" + c.output + "'");
        table.write_csv(f);
        std::cerr << "wrote " << table.rows.size() << " rows to " << c.output << '\n';
    }
    return 0;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw holo::ConfigError("cannot read config '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiqubit holonomic gate simulator"};
    app.require_subcommand(1);
    Common common;

    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
    std::string config_path;
    run->add_option("config", config_path, "Config file ('-' for stdin)")->required();
    add_common(run, common);

    auto* landscape = app.add_subcommand("landscape", "Sensitivity and gate time over (a1, a2)");
    std::vector<double> a1_range{-0.5, 0.7, 61}, a2_range{-0.5, 0.3, 41};
    landscape->add_option("--a1", a1_range, "start stop points")->expected(3);
    landscape->add_option("--a2", a2_range, "start stop points")->expected(3);
    add_common(landscape, common);

    auto* waveform = app.add_subcommand("waveform", "Sample a target waveform");
    std::string pulse = "ohqc";
    double omega_max_mhz = 1.0, a1 = 0.28, a2 = -0.12;
    std::size_t points = 201;
    waveform->add_option("--pulse", pulse, "ohqc or nhqc")->check(CLI::IsMember({"ohqc", "nhqc"}));
    waveform->add_option("--omega-max-mhz", omega_max_mhz, "Peak Rabi frequency / 2pi")->check(CLI::PositiveNumber);
    waveform->add_option("--a1", a1);
    waveform->add_option("--a2", a2);
    waveform->add_option("--points", points)->check(CLI::Range(2, 1000000));
    add_common(waveform, common);

    auto* avg = app.add_subcommand("avg-fidelity", "Average gate fidelity under the master equation");
    std::size_t n_controls = 1;
    double gamma = std::numbers::pi, tau_us = 400.0, gamma_phi_khz = 1.0;
    avg->add_option("--n-controls", n_controls)->check(CLI::Range(1, 2));
    avg->add_option("--gamma", gamma, "Target rotation angle (rad)");
    avg->add_option("--tau-us", tau_us, "Rydberg lifetime")->check(CLI::PositiveNumber);
    avg->add_option("--gamma-phi-khz", gamma_phi_khz, "Dephasing rate / 2pi")->check(CLI::NonNegativeNumber);
    add_common(avg, common);

    app.add_subcommand("list-scenarios", "List scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            std::string text;
            if (config_path == "-") {
                std::ostringstream s;
                s << std::cin.rdbuf();
                text = s.str();
            } else {
                text = read_file(config_path);
            }
            return emit(load(text, common));
        }
        if (*landscape) {
            nlohmann::json doc = {{"scenario", "pulse_landscape"},
                                  {"sweep", {{"start", a1_range[0]}, {"stop", a1_range[1]}, {"points", static_cast<std::size_t>(a1_range[2])}}},
                                  {"sweep2", {{"start", a2_range[0]}, {"stop", a2_range[1]}, {"points", static_cast<std::size_t>(a2_range[2])}}}};
            return emit(load(doc.dump(), common));
        }
        if (*waveform) {
            const auto w = holo::make_waveform(pulse == "ohqc" ? holo::PulseKind::Ohqc : holo::PulseKind::Nhqc,
                                               holo::kTwoPi * omega_max_mhz, a1, a2);
            const auto table = holo::pulse::sample_waveform(w, points);
            if (common.out.empty()) {
                table.write_csv(std::cout);
            } else {
                std::ofstream f(common.out);
                if (!f) throw holo::ConfigError("cannot open output '" + common.out + "'");
                table.write_csv(f);
            }
            return 0;
        }
        if (*avg) {
            nlohmann::json doc = {{"scenario", "avg_fidelity"},
                                  {"n_controls", n_controls},
                                  {"series", {gamma}},
                                  {"time_points", 2},
                                  {"noise", {{"tau_rydberg_us", tau_us}, {"gamma_phi_khz", gamma_phi_khz}}}};
            return emit(load(doc.dump(), common));
        }
        for (const auto& info : holo::scenario_catalog()) std::cout << info.name << "\t" << info.summary << '\n';
        return 0;
    } catch (const holo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const holo::ModelError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const holo::DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const holo::IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
}
