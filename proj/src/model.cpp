#include "holo/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "holo/errors.hpp"

namespace holo {

namespace {

constexpr double kPi = std::numbers::pi;

// Sum over sites of a single-site operator.
Operator sum_over_sites(const Operator& op, std::size_t first, std::size_t last, const SiteDims& dims) {
    Operator acc = Operator::zero(dims);
    for (std::size_t s = first; s < last; ++s) acc = acc + embed_site_operator(op, s, dims);
    return acc;
}

// sum_{a<b} V_ab n_a n_b with n the projector on level `r`.
Operator interaction_diagonal(const InteractionGraph& g, std::size_t r, const SiteDims& dims) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    Matrix diag = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < dims.total(); ++i) {
        double e = 0.0;
        for (std::size_t a = 0; a < g.n_atoms(); ++a) {
            if (dims.digit(i, a) != r) continue;
            for (std::size_t b = a + 1; b < g.n_atoms(); ++b) {
                if (dims.digit(i, b) == r) e += g.coupling(a, b);
            }
        }
        diag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e;
    }
    return Operator(dims, std::move(diag), true);
}

// sum_a d_a n_a
Operator detuning_diagonal(const std::vector<double>& detunings, double sign, std::size_t r,
                           const SiteDims& dims) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    Matrix diag = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < dims.total(); ++i) {
        double e = 0.0;
        for (std::size_t a = 0; a < detunings.size(); ++a) {
            if (dims.digit(i, a) == r) e += sign * detunings[a];
        }
        diag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e;
    }
    return Operator(dims, std::move(diag), true);
}

std::size_t binomial2(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

// ---------------------------------------------------------------------------

LevelScheme::LevelScheme(LevelVariant v, std::vector<std::string> labels)
    : variant_(v), labels_(std::move(labels)) {}

LevelScheme LevelScheme::three_level() { return {LevelVariant::ThreeLevel, {"0", "1", "r"}}; }
LevelScheme LevelScheme::four_level_loss() { return {LevelVariant::FourLevelLoss, {"0", "1", "2", "r"}}; }
LevelScheme LevelScheme::four_level_pump() { return {LevelVariant::FourLevelPump, {"0", "1", "p", "r"}}; }

LevelScheme LevelScheme::from_variant(LevelVariant v) {
    switch (v) {
        case LevelVariant::ThreeLevel: return three_level();
        case LevelVariant::FourLevelLoss: return four_level_loss();
        case LevelVariant::FourLevelPump: return four_level_pump();
    }
    throw ModelError("unknown level variant");
}

std::size_t LevelScheme::index(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
    }
    throw ModelError("level '" + std::string(label) + "' not in scheme");
}

bool LevelScheme::has(std::string_view label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

// ---------------------------------------------------------------------------

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

AtomGeometry build_geometry(std::size_t n_controls, double ring_radius, Placement placement, double chord) {
    if (n_controls < 1) throw ModelError("geometry needs at least one control atom");
    if (!(ring_radius > 0.0)) throw ModelError("ring radius must be positive");
    AtomGeometry g;
    g.n_controls = n_controls;
    g.ring_radius = ring_radius;
    g.placement = placement;
    double step = 2.0 * kPi / static_cast<double>(n_controls);
    if (placement == Placement::AdjacentChord) {
        if (!(chord > 0.0)) throw ModelError("chord length must be positive");
        if (chord > 2.0 * ring_radius) {
            throw ModelError("chord " + std::to_string(chord) + " exceeds ring diameter");
        }
        g.chord = chord;
        step = 2.0 * std::asin(chord / (2.0 * ring_radius));
    }
    for (std::size_t j = 0; j < n_controls; ++j) {
        const double a = step * static_cast<double>(j);
        g.positions.push_back({ring_radius * std::cos(a), ring_radius * std::sin(a)});
    }
    g.positions.push_back({0.0, 0.0});
    return g;
}

InteractionGraph::InteractionGraph(Eigen::MatrixXd couplings, double c6) : v_(std::move(couplings)), c6_(c6) {
    if (v_.rows() < 2 || v_.rows() != v_.cols()) throw ModelError("interaction matrix must be square, >= 2 atoms");
    for (Eigen::Index a = 0; a < v_.rows(); ++a) {
        if (v_(a, a) != 0.0) throw ModelError("interaction matrix diagonal must be zero");
        for (Eigen::Index b = 0; b < v_.cols(); ++b) {
            if (!std::isfinite(v_(a, b)) || v_(a, b) < 0.0) throw ModelError("couplings must be finite and >= 0");
            if (v_(a, b) != v_(b, a)) throw ModelError("interaction matrix must be symmetric");
        }
    }
}

InteractionGraph InteractionGraph::uniform(std::size_t n_controls, double j_c, double j_t) {
    const auto n = static_cast<Eigen::Index>(n_controls + 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(n, n, j_c);
    v.row(n - 1).setConstant(j_t);
    v.col(n - 1).setConstant(j_t);
    v.diagonal().setZero();
    return InteractionGraph(std::move(v), 0.0);
}

double InteractionGraph::v_ct(std::size_t control) const {
    if (control >= n_controls()) throw ModelError("control index out of range");
    return v_(static_cast<Eigen::Index>(control), v_.rows() - 1);
}

double InteractionGraph::v_cc(std::size_t j, std::size_t k) const {
    if (j >= n_controls() || k >= n_controls()) throw ModelError("control index out of range");
    return v_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
}

InteractionGraph build_interactions(const AtomGeometry& geometry, double c6) {
    if (!(c6 > 0.0)) throw ModelError("C6 must be positive");
    const auto n = static_cast<Eigen::Index>(geometry.positions.size());
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double r = distance(geometry.positions[a], geometry.positions[b]);
            if (r < 1e-9) {
                throw ModelError("atoms " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
            }
            v(a, b) = v(b, a) = c6 / std::pow(r, 6);
        }
    }
    return InteractionGraph(std::move(v), c6);
}

// ---------------------------------------------------------------------------

DriveSpec::DriveSpec(double control_amp, double modulation, pulse::TargetWaveform waveform, double theta,
                     double phi, double gamma)
    : control_amp_(control_amp), modulation_(modulation), waveform_(std::move(waveform)), theta_(theta),
      phi_(phi), gamma_(gamma) {
    if (!std::isfinite(control_amp) || !std::isfinite(modulation)) throw ModelError("drive values must be finite");
}

void DriveSpec::set_errors(const DriveErrors& e) {
    if (!(e.duration_rel > -1.0)) throw ModelError("duration error must exceed -100%");
    errors_ = e;
}

double DriveSpec::gate_time() const { return nominal_duration() * (1.0 + errors_.duration_rel); }

std::size_t DriveSpec::segment(double t) const {
    const double T = gate_time();
    const double slack = 1e-12 * T;
    if (t < -slack || t > T + slack) {
        throw ModelError("time " + std::to_string(t) + " outside gate [0, " + std::to_string(T) + "]");
    }
    return t <= 0.5 * T ? 0 : 1;
}

std::pair<double, double> DriveSpec::phases(std::size_t segment) const {
    if (segment == 0) return {0.0, kPi + phi_};
    return {kPi + gamma_, gamma_ + phi_};
}

std::optional<double> DriveSpec::waveform_time(double t) const {
    const std::size_t seg = segment(t);
    const double nominal_half = 0.5 * nominal_duration();
    double tau = seg == 0 ? t : t - half_time();
    tau = std::max(tau, 0.0);
    if (tau > nominal_half) {
        // Past the end of the designed half: smooth pulses are off, a
        // rectangle keeps its amplitude.
        if (waveform_.optimized()) return std::nullopt;
        tau = nominal_half;
    }
    return std::min(tau + (seg == 0 ? 0.0 : nominal_half), nominal_duration());
}

double DriveSpec::control_field(double t) const { return control_amp_ * std::cos(modulation_ * t); }

DriveSpec::TargetSample DriveSpec::sample(double t, double error_sign) const {
    const auto w = waveform_time(t);
    double omega = 0.0, delta = 0.0;
    if (w) {
        omega = waveform_.omega(*w);
        delta = waveform_.delta(*w);
    }
    omega = omega * (1.0 + errors_.omega_t_rel) + errors_.omega_t_abs;
    return {omega * std::sin(0.5 * theta_) + errors_.omega0_abs, omega * std::cos(0.5 * theta_),
            delta * (1.0 + error_sign * errors_.delta_rel)};
}

double DriveSpec::omega_t(double t) const {
    const auto w = waveform_time(t);
    const double base = w ? waveform_.omega(*w) : 0.0;
    return base * (1.0 + errors_.omega_t_rel) + errors_.omega_t_abs;
}

double DriveSpec::omega0(double t) const { return sample(t).omega0; }

double DriveSpec::omega1(double t) const { return sample(t).omega1; }

double DriveSpec::delta(double t, double error_sign) const { return sample(t, error_sign).delta; }

// ---------------------------------------------------------------------------

pulse::TargetWaveform make_waveform(PulseKind kind, double omega_max, double a1, double a2) {
    if (kind == PulseKind::Ohqc) return pulse::OhqcWaveform(pulse::OhqcParams::from_peak(a1, a2, omega_max));
    return pulse::RectangularWaveform(omega_max, 2.0 * kPi / omega_max);
}

SystemModel make_gate_model(const GateModelConfig& c) {
    const auto geometry = build_geometry(c.n_controls, c.ring_radius, c.placement, c.chord);
    auto graph = build_interactions(geometry, c.c6);
    const double modulation = c.modulation.value_or(graph.v_ct(0));
    DriveSpec drive(c.control_amp, modulation, make_waveform(c.pulse, c.omega_max, c.a1, c.a2), c.theta, c.phi,
                    c.gamma);
    SystemModel m{LevelScheme::from_variant(c.levels), std::move(graph), std::move(drive), {}, false};
    m.static_detunings.assign(c.n_controls + 1, 0.0);
    return m;
}

Operator bright_projector(double theta, double phi, std::size_t levels) {
    if (levels < 2) throw DimensionError("bright projector needs at least two levels");
    Vector b = Vector::Zero(static_cast<Eigen::Index>(levels));
    b(0) = std::sin(0.5 * theta);
    b(1) = -std::cos(0.5 * theta) * std::polar(1.0, phi);
    return Operator(SiteDims({levels}), b * b.adjoint(), true);
}

// ---------------------------------------------------------------------------

TimeDependentHamiltonian full_hamiltonian(const SystemModel& model) {
    const SiteDims dims = model.dims();
    const std::size_t d = model.scheme.size();
    const std::size_t r = model.scheme.rydberg();
    const std::size_t g0 = model.scheme.index("0");
    const std::size_t g1 = model.scheme.index("1");
    const std::size_t n = model.n_controls();
    const std::size_t target = model.target_site();
    if (!model.static_detunings.empty() && model.static_detunings.size() != n + 1) {
        throw ModelError("static detunings must list every atom");
    }

    const Operator interactions = interaction_diagonal(model.interactions, r, dims);
    const Operator control_x = sum_over_sites(transition(d, g0, r) + transition(d, r, g0), 0, n, dims);
    const Operator leg0 = embed_site_operator(transition(d, g0, r), target, dims);
    const Operator leg1 = embed_site_operator(transition(d, g1, r), target, dims);
    const Operator z = embed_site_operator(
        projector(d, r) - [&] {
            // |B><B| padded to d levels at (0, 1).
            Operator b = bright_projector(model.drive.theta(), model.drive.phi(), 2);
            Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            m(g0, g0) = b(0, 0);
            m(g0, g1) = b(0, 1);
            m(g1, g0) = b(1, 0);
            m(g1, g1) = b(1, 1);
            return Operator(SiteDims({d}), m, true);
        }(),
        target, dims);

    const DriveSpec drive = model.drive;
    const double half = drive.half_time();
    std::vector<HamiltonianSegment> segments;
    for (std::size_t seg = 0; seg < 2; ++seg) {
        const double sign = (model.spin_echo && seg == 1) ? -1.0 : 1.0;
        HamiltonianSegment s{seg == 0 ? 0.0 : half, seg == 0 ? half : drive.gate_time(), {}, 4, {}};
        Operator diag = interactions;
        if (!model.static_detunings.empty()) diag = diag + detuning_diagonal(model.static_detunings, sign, r, dims);
        s.terms.push_back({diag, kStaticSlot, false});
        if (n > 0) s.terms.push_back({control_x, 0, false});
        s.terms.push_back({leg0, 1, true});
        s.terms.push_back({leg1, 2, true});
        s.terms.push_back({z, 3, false});
        const auto [phi0, phi1] = drive.phases(seg);
        const cplx e0 = std::polar(0.5, phi0);
        const cplx e1 = std::polar(0.5, phi1);
        s.coefficients = [drive, sign, e0, e1](double t, std::span<cplx> c) {
            const auto v = drive.sample(t, sign);
            c[0] = 0.5 * drive.control_field(t);
            c[1] = v.omega0 * e0;
            c[2] = v.omega1 * e1;
            c[3] = 0.5 * v.delta;
        };
        segments.push_back(std::move(s));
    }
    return TimeDependentHamiltonian(dims, std::move(segments));
}

Operator build_full_hamiltonian(const SystemModel& model, double t) {
    const auto h = full_hamiltonian(model);
    const std::size_t seg = model.drive.segment(t);
    return h.at(t, seg);
}

TimeDependentHamiltonian effective_hamiltonian(const SystemModel& model) {
    const SiteDims dims = model.dims();
    const std::size_t d = model.scheme.size();
    const std::size_t r = model.scheme.rydberg();
    const std::size_t g0 = model.scheme.index("0");
    const std::size_t g1 = model.scheme.index("1");
    const std::size_t n = model.n_controls();

    // (x)_j |1><1|_j (x) op_t
    auto gated = [&](const Operator& op_t) {
        std::vector<std::pair<std::size_t, Operator>> factors;
        for (std::size_t j = 0; j < n; ++j) factors.emplace_back(j, projector(d, g1));
        factors.emplace_back(n, op_t);
        return embed_product(factors, dims);
    };
    Matrix bb = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Operator b2 = bright_projector(model.drive.theta(), model.drive.phi(), 2);
    bb(g0, g0) = b2(0, 0);
    bb(g0, g1) = b2(0, 1);
    bb(g1, g0) = b2(1, 0);
    bb(g1, g1) = b2(1, 1);
    const Operator leg0 = gated(transition(d, g0, r));
    const Operator leg1 = gated(transition(d, g1, r));
    const Operator z = gated(projector(d, r) - Operator(SiteDims({d}), bb, true));

    const DriveSpec drive = model.drive;
    std::vector<HamiltonianSegment> segments;
    for (std::size_t seg = 0; seg < 2; ++seg) {
        const double sign = (model.spin_echo && seg == 1) ? -1.0 : 1.0;
        HamiltonianSegment s{seg == 0 ? 0.0 : drive.half_time(), seg == 0 ? drive.half_time() : drive.gate_time(),
                             {}, 3, {}};
        s.terms.push_back({leg0, 0, true});
        s.terms.push_back({leg1, 1, true});
        s.terms.push_back({z, 2, false});
        const auto [phi0, phi1] = drive.phases(seg);
        const cplx e0 = std::polar(0.5, phi0);
        const cplx e1 = std::polar(0.5, phi1);
        s.coefficients = [drive, sign, e0, e1](double t, std::span<cplx> c) {
            const auto v = drive.sample(t, sign);
            c[0] = v.omega0 * e0;
            c[1] = v.omega1 * e1;
            c[2] = 0.5 * v.delta;
        };
        segments.push_back(std::move(s));
    }
    return TimeDependentHamiltonian(dims, std::move(segments));
}

Operator build_effective_hamiltonian(const SystemModel& model, double t) {
    return effective_hamiltonian(model).at(t, model.drive.segment(t));
}

Operator build_effective_hamiltonian(const GateSpec& gate, double omega_t, double delta,
                                     std::pair<double, double> phases) {
    const SiteDims dims = SiteDims::uniform(gate.n_controls + 1, 3);
    const Operator b2 = bright_projector(gate.theta, gate.phi, 2);
    Matrix ht = Matrix::Zero(3, 3);
    const cplx c0 = 0.5 * omega_t * std::sin(0.5 * gate.theta) * std::polar(1.0, phases.first);
    const cplx c1 = 0.5 * omega_t * std::cos(0.5 * gate.theta) * std::polar(1.0, phases.second);
    ht(0, 2) = c0;
    ht(2, 0) = std::conj(c0);
    ht(1, 2) = c1;
    ht(2, 1) = std::conj(c1);
    ht(2, 2) += 0.5 * delta;
    for (Eigen::Index a = 0; a < 2; ++a) {
        for (Eigen::Index b = 0; b < 2; ++b) ht(a, b) -= 0.5 * delta * b2(a, b);
    }
    std::vector<std::pair<std::size_t, Operator>> factors;
    for (std::size_t j = 0; j < gate.n_controls; ++j) factors.emplace_back(j, projector(3, 1));
    factors.emplace_back(gate.n_controls, Operator(SiteDims({3}), ht, true));
    return embed_product(factors, dims);
}

// ---------------------------------------------------------------------------

DickeBasis::DickeBasis(std::size_t n_controls, bool effective_regime) : n_(n_controls), effective_(effective_regime) {
    for (std::size_t m = 0; m <= n_; ++m) {
        for (std::size_t k = 0; k <= m; ++k) {
            if (effective_ && k + 1 < m) continue;
            labels_.push_back({m, k, false});
            labels_.push_back({m, k, true});
        }
    }
}

std::optional<std::size_t> DickeBasis::find(std::size_t m, std::size_t k, bool target_excited) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const auto& l = labels_[i];
        if (l.m == m && l.k == k && l.target_excited == target_excited) return i;
    }
    return std::nullopt;
}

Operator build_dicke_hamiltonian(const DickeBasis& basis, double j_c, double j_t, const DickeDrives& drives) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix h = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& l = basis.labels()[i];
        const std::size_t n_a = l.m - l.k;
        const auto ii = static_cast<Eigen::Index>(i);
        h(ii, ii) = static_cast<double>(binomial2(n_a)) * j_c +
                    (l.target_excited ? static_cast<double>(n_a) * j_t + 0.5 * drives.detuning : -0.5 * drives.detuning);
        if (l.k >= 1) {
            if (const auto lower = basis.find(l.m, l.k - 1, l.target_excited)) {
                const double c = std::sqrt(static_cast<double>(l.k * (l.m - l.k + 1))) * 0.5 * drives.control;
                const auto jj = static_cast<Eigen::Index>(*lower);
                h(ii, jj) += c;
                h(jj, ii) += c;
            }
        }
        if (!l.target_excited) {
            const auto up = static_cast<Eigen::Index>(*basis.find(l.m, l.k, true));
            h(ii, up) += 0.5 * drives.target;
            h(up, ii) += 0.5 * drives.target;
        }
    }
    return Operator(basis.dims(), std::move(h), true);
}

TimeDependentHamiltonian dicke_hamiltonian(const DickeBasis& basis, double j_c, double j_t,
                                           std::function<DickeDrives(double)> drives, double t_begin,
                                           double t_end) {
    // Three separate generators scaled by the drive values.
    const Operator h0 = build_dicke_hamiltonian(basis, j_c, j_t, {});
    const Operator hc = build_dicke_hamiltonian(basis, 0.0, 0.0, {1.0, 0.0, 0.0}) - build_dicke_hamiltonian(basis, 0.0, 0.0, {});
    const Operator ht = build_dicke_hamiltonian(basis, 0.0, 0.0, {0.0, 1.0, 0.0}) - build_dicke_hamiltonian(basis, 0.0, 0.0, {});
    const Operator hd = build_dicke_hamiltonian(basis, 0.0, 0.0, {0.0, 0.0, 1.0});
    HamiltonianSegment s{t_begin, t_end, {}, 3, {}};
    s.terms.push_back({h0, kStaticSlot, false});
    s.terms.push_back({hc, 0, false});
    s.terms.push_back({ht, 1, false});
    s.terms.push_back({hd, 2, false});
    s.coefficients = [drives](double t, std::span<cplx> c) {
        const auto v = drives(t);
        c[0] = v.control;
        c[1] = v.target;
        c[2] = v.detuning;
    };
    return TimeDependentHamiltonian(basis.dims(), {std::move(s)});
}

Matrix dicke_isometry(const DickeBasis& basis, const SiteDims& dims, const Vector& control_d,
                      const Vector& control_b, const Vector& control_a, const Vector& target_b,
                      const Vector& target_a) {
    const std::size_t n = basis.n_controls();
    if (dims.sites() != n + 1) throw DimensionError("isometry dims must have N + 1 sites");
    const auto d = static_cast<Eigen::Index>(dims[0]);
    for (const Vector* v : {&control_d, &control_b, &control_a, &target_b, &target_a}) {
        if (v->size() != d) throw DimensionError("single-site vector has wrong length");
    }
    std::size_t assignments = 1;
    for (std::size_t j = 0; j < n; ++j) assignments *= 3;

    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(dims.total()), static_cast<Eigen::Index>(basis.size()));
    std::vector<double> counts(basis.size(), 0.0);
    for (std::size_t code = 0; code < assignments; ++code) {
        // digit 0 -> D, 1 -> B, 2 -> A
        std::size_t c = code, nb = 0, na = 0;
        Vector controls = Vector::Ones(1);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t which = c % 3;
            c /= 3;
            const Vector& v = which == 0 ? control_d : (which == 1 ? control_b : control_a);
            nb += which == 1;
            na += which == 2;
            Vector next(controls.size() * d);
            for (Eigen::Index a = 0; a < controls.size(); ++a) next.segment(a * d, d) = controls(a) * v;
            controls = std::move(next);
        }
        const std::size_t m = nb + na;
        for (bool excited : {false, true}) {
            const auto col = basis.find(m, nb, excited);
            if (!col) continue;
            const Vector& tv = excited ? target_a : target_b;
            Vector full(controls.size() * d);
            for (Eigen::Index a = 0; a < controls.size(); ++a) full.segment(a * d, d) = controls(a) * tv;
            w.col(static_cast<Eigen::Index>(*col)) += full;
            counts[*col] += 1.0;
        }
    }
    for (std::size_t i = 0; i < basis.size(); ++i) w.col(static_cast<Eigen::Index>(i)) /= std::sqrt(counts[i]);
    return w;
}

// ---------------------------------------------------------------------------

std::vector<std::string> TwoPhotonParams::validate() const {
    std::vector<std::string> warnings;
    auto check = [&](const char* detuning_name, double detuning, std::initializer_list<std::pair<const char*, double>> amps) {
        for (const auto& [name, amp] : amps) {
            const double ratio = std::abs(detuning) / std::abs(amp);
            if (amp == 0.0) continue;
            if (ratio < 4.0) {
                throw ModelError(std::string(detuning_name) + " is only " + std::to_string(ratio) + "x " + name);
            }
            if (ratio < 10.0) {
                warnings.push_back(std::string(detuning_name) + "/" + name + " = " + std::to_string(ratio));
            }
        }
    };
    check("delta_c", delta_c, {{"omega_cp", omega_cp}, {"omega_cr_bar", omega_cr_bar}});
    check("delta_0", delta_0, {{"omega_0p", omega_0p_peak}, {"omega_0r", omega_0r}});
    check("delta_1", delta_1, {{"omega_1p", omega_1p_peak}, {"omega_1r", omega_1r}});
    return warnings;
}

double TwoPhotonModel::theta() const {
    return 2.0 * std::atan2(params.effective_omega0_peak(), params.effective_omega1_peak());
}

TwoPhotonModel make_two_photon_model(const TwoPhotonParams& params, const InteractionGraph& graph,
                                     double modulation, double a1, double a2, double phi, double gamma) {
    params.validate();
    const double peak = std::hypot(params.effective_omega0_peak(), params.effective_omega1_peak());
    return TwoPhotonModel{params, graph, modulation, pulse::OhqcParams::from_peak(a1, a2, peak), phi, gamma};
}

TimeDependentHamiltonian two_photon_hamiltonian(const TwoPhotonModel& model) {
    constexpr std::size_t d = 4;
    constexpr std::size_t g0 = 0, g1 = 1, p = 2, r = 3;
    const SiteDims dims = model.dims();
    const std::size_t n = model.n_controls();
    const std::size_t target = n;
    const TwoPhotonParams& q = model.params;
    const pulse::OhqcWaveform wave(model.shape);
    const double peak = model.shape.peak_omega;
    const double nu = q.delta_0 + q.delta_1;
    const double omega = model.modulation;

    auto site = [&](const Operator& op, std::size_t s) { return embed_site_operator(op, s, dims); };
    auto hc = [](const Operator& a) { return a + a.adjoint(); };

    // Static part.
    Operator h0 = interaction_diagonal(model.interactions, r, dims);
    for (std::size_t j = 0; j < n; ++j) {
        h0 = h0 + site(projector(d, p).scaled(-q.delta_c), j);
        h0 = h0 + site(hc(transition(d, g0, p)).scaled(0.5 * q.omega_cp), j);
    }
    h0 = h0 + site(projector(d, p).scaled(-q.delta_0), target);
    h0 = h0 + site(hc(transition(d, p, r)).scaled(0.5 * q.omega_0r), target);
    if (q.compensate_stark_shifts) {
        for (std::size_t j = 0; j < n; ++j) {
            h0 = h0 + site(projector(d, g0).scaled(-q.omega_cp * q.omega_cp / (4.0 * q.delta_c)), j);
        }
        const double shift_r = q.omega_0r * q.omega_0r / (4.0 * q.delta_0) - q.omega_1r * q.omega_1r / (4.0 * q.delta_1);
        h0 = h0 + site(projector(d, r).scaled(-shift_r), target);
    }

    const Operator control_pr = n > 0 ? sum_over_sites(hc(transition(d, p, r)), 0, n, dims) : Operator::zero(dims);
    const Operator control_rr = n > 0 ? sum_over_sites(projector(d, r), 0, n, dims) : Operator::zero(dims);
    const Operator leg0p = site(transition(d, g0, p), target);
    const Operator leg1p = site(transition(d, g1, p), target);
    const Operator leg1r = site(transition(d, p, r), target);
    const Operator target_r = site(projector(d, r), target);
    const Operator target_0 = site(projector(d, g0), target);
    const Operator target_1 = site(projector(d, g1), target);

    const double T = model.shape.duration;
    const auto sched = pulse::PhaseSchedule::for_gate(T, model.phi, model.gamma);
    std::vector<HamiltonianSegment> segments;
    for (const auto& ps : sched.segments()) {
        HamiltonianSegment s{ps.t_begin, ps.t_end, {}, 8, {}};
        s.terms.push_back({h0, kStaticSlot, false});
        if (n > 0) s.terms.push_back({control_pr, 0, false});
        s.terms.push_back({leg0p, 1, true});
        s.terms.push_back({leg1p, 2, true});
        s.terms.push_back({leg1r, 3, true});
        s.terms.push_back({target_r, 4, false});
        if (q.compensate_stark_shifts) {
            if (n > 0) s.terms.push_back({control_rr, 5, false});
            s.terms.push_back({target_0, 6, false});
            s.terms.push_back({target_1, 7, false});
        }
        const double phi0 = ps.phi0;
        // Path 1's effective coupling carries an extra minus sign.
        const double phi1 = ps.phi1 + kPi;
        s.coefficients = [q, wave, peak, phi0, phi1, nu, omega](double t, std::span<cplx> c) {
            const double shape = wave.omega(t) / peak;
            const double cr = q.omega_cr_bar * std::cos(omega * t);
            const double a0 = q.omega_0p_peak * shape;
            const double a1 = q.omega_1p_peak * shape;
            c[0] = 0.5 * cr;
            c[1] = 0.5 * a0 * std::polar(1.0, phi0);
            c[2] = 0.5 * a1 * std::polar(1.0, phi1 - nu * t);
            c[3] = 0.5 * q.omega_1r * std::polar(1.0, nu * t);
            c[4] = wave.delta(t);
            c[5] = -cr * cr / (4.0 * q.delta_c);
            c[6] = -a0 * a0 / (4.0 * q.delta_0);
            c[7] = a1 * a1 / (4.0 * q.delta_1);
        };
        segments.push_back(std::move(s));
    }
    return TimeDependentHamiltonian(dims, std::move(segments));
}

Operator build_two_photon_hamiltonian(const TwoPhotonModel& model, double t) {
    return two_photon_hamiltonian(model).at(t);
}

// ---------------------------------------------------------------------------

Operator dressed_basis_unitary(double theta, double phi, std::size_t levels) {
    if (levels < 2) throw DimensionError("dressed basis needs at least two levels");
    const auto d = static_cast<Eigen::Index>(levels);
    Matrix u = Matrix::Identity(d, d);
    const double s = std::sin(0.5 * theta);
    const double c = std::cos(0.5 * theta);
    const cplx e = std::polar(1.0, phi);
    u(0, 0) = c;
    u(1, 0) = s * e;
    u(0, 1) = s;
    u(1, 1) = -c * e;
    return Operator(SiteDims({levels}), std::move(u));
}

Matrix target_unitary(double theta, double phi, double gamma) {
    const cplx i(0.0, 1.0);
    const double nx = std::sin(theta) * std::cos(phi);
    const double ny = std::sin(theta) * std::sin(phi);
    const double nz = std::cos(theta);
    Matrix ns(2, 2);
    ns << nz, nx - i * ny, nx + i * ny, -nz;
    const Matrix u = std::cos(0.5 * gamma) * Matrix::Identity(2, 2) - i * std::sin(0.5 * gamma) * ns;
    return std::polar(1.0, 0.5 * gamma) * u;
}

Operator ideal_gate_unitary(const GateSpec& gate) {
    const SiteDims dims = SiteDims::uniform(gate.n_controls + 1, 2);
    const auto n = static_cast<Eigen::Index>(dims.total());
    Matrix u = Matrix::Identity(n, n);
    u.bottomRightCorner(2, 2) = target_unitary(gate.theta, gate.phi, gate.gamma);
    return Operator(dims, std::move(u));
}

}  // namespace holo
