#pragma once

// Level schemes, atom geometry, interaction graphs and Hamiltonian builders.
// Frequencies are angular (rad/us), lengths in um, time in us.

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holo/hamiltonian.hpp"
#include "holo/hilbert.hpp"
#include "holo/pulse.hpp"

namespace holo {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// C6 of Rb |70S_1/2>, angular MHz * um^6.
inline constexpr double kRb70sC6 = kTwoPi * 858.4e3;

enum class LevelVariant { ThreeLevel, FourLevelLoss, FourLevelPump };

class LevelScheme {
public:
    static LevelScheme three_level();        // {0, 1, r}
    static LevelScheme four_level_loss();    // {0, 1, 2, r}
    static LevelScheme four_level_pump();    // {0, 1, p, r}
    static LevelScheme from_variant(LevelVariant v);

    LevelVariant variant() const { return variant_; }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Throws ModelError for an unknown label.
    std::size_t index(std::string_view label) const;
    bool has(std::string_view label) const;
    std::size_t rydberg() const { return index("r"); }

private:
    LevelScheme(LevelVariant v, std::vector<std::string> labels);
    LevelVariant variant_;
    std::vector<std::string> labels_;
};

enum class Placement { UniformRing, AdjacentChord };

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct AtomGeometry {
    std::size_t n_controls = 0;
    double ring_radius = 0.0;
    Placement placement = Placement::UniformRing;
    double chord = 0.0;             // AdjacentChord only
    std::vector<Point2> positions;  // controls first, target last (origin)
};

AtomGeometry build_geometry(std::size_t n_controls, double ring_radius,
                            Placement placement = Placement::UniformRing, double chord = 2.0);

double distance(const Point2& a, const Point2& b);

/// Symmetric pair couplings over all atoms (controls first, target last).
class InteractionGraph {
public:
    InteractionGraph() = default;
    InteractionGraph(Eigen::MatrixXd couplings, double c6);

    /// Equal control-control coupling j_c and control-target coupling j_t.
    static InteractionGraph uniform(std::size_t n_controls, double j_c, double j_t);

    std::size_t n_controls() const { return static_cast<std::size_t>(v_.rows()) - 1; }
    std::size_t n_atoms() const { return static_cast<std::size_t>(v_.rows()); }
    double v_ct(std::size_t control) const;
    double v_cc(std::size_t j, std::size_t k) const;
    double coupling(std::size_t a, std::size_t b) const { return v_(a, b); }
    double c6() const { return c6_; }
    const Eigen::MatrixXd& matrix() const { return v_; }

private:
    Eigen::MatrixXd v_;
    double c6_ = 0.0;
};

InteractionGraph build_interactions(const AtomGeometry& geometry, double c6 = kRb70sC6);

struct GateSpec {
    std::size_t n_controls = 1;
    double theta = std::numbers::pi / 2;
    double phi = 0.0;
    double gamma = std::numbers::pi;

    static GateSpec cnot(std::size_t n_controls) { return {n_controls, std::numbers::pi / 2, 0.0, std::numbers::pi}; }
};

/// Systematic drive imperfections; all zero means an ideal drive.
struct DriveErrors {
    double omega_t_rel = 0.0;   // Omega_t -> Omega_t (1 + rel)
    double omega_t_abs = 0.0;   // Omega_t -> Omega_t + abs over the whole gate
    double omega0_abs = 0.0;    // extra amplitude on the |0>-|r> leg only
    double delta_rel = 0.0;     // Delta -> Delta (1 + rel), sign-flipped by echo
    double duration_rel = 0.0;  // each half lasts T/2 (1 + rel)
};

/// Drive fields of a gate model. Phases are compiled from (theta, phi, gamma)
/// into two segments switching at the actual half time.
class DriveSpec {
public:
    DriveSpec(double control_amp, double modulation, pulse::TargetWaveform waveform, double theta,
              double phi, double gamma);

    double control_amp() const { return control_amp_; }
    double modulation() const { return modulation_; }
    const pulse::TargetWaveform& waveform() const { return waveform_; }
    double theta() const { return theta_; }
    double phi() const { return phi_; }
    double gamma() const { return gamma_; }
    const DriveErrors& errors() const { return errors_; }

    void set_control_amp(double v) { control_amp_ = v; }
    void set_modulation(double v) { modulation_ = v; }
    void set_errors(const DriveErrors& e);

    double nominal_duration() const { return waveform_.duration(); }
    /// Gate time including the duration error.
    double gate_time() const;
    double half_time() const { return 0.5 * gate_time(); }

    /// 0 for [0, T/2], 1 for (T/2, T]. Throws ModelError outside the gate.
    std::size_t segment(double t) const;
    /// (phi0, phi1) of a segment.
    std::pair<double, double> phases(std::size_t segment) const;

    struct TargetSample {
        double omega0;
        double omega1;
        double delta;
    };
    /// Target leg amplitudes and detuning at t, errors applied.
    TargetSample sample(double t, double error_sign = 1.0) const;

    double control_field(double t) const;  // Omega_c_bar cos(omega t)
    /// Omega_t(t) with amplitude errors applied; `t` in actual gate time.
    double omega_t(double t) const;
    double omega0(double t) const;  // Omega_t sin(theta/2) + leg-0 offset
    double omega1(double t) const;  // Omega_t cos(theta/2)
    /// Delta(t) including delta_rel with the given sign (-1 after an echo).
    double delta(double t, double error_sign = 1.0) const;

private:
    // Nominal waveform time for actual time t, or nullopt when the drive is off.
    std::optional<double> waveform_time(double t) const;

    double control_amp_;
    double modulation_;
    pulse::TargetWaveform waveform_;
    double theta_;
    double phi_;
    double gamma_;
    DriveErrors errors_;
};

struct SystemModel {
    LevelScheme scheme = LevelScheme::three_level();
    InteractionGraph interactions;
    DriveSpec drive;
    std::vector<double> static_detunings;  // per atom on |r>, controls then target
    bool spin_echo = false;

    std::size_t n_controls() const { return interactions.n_controls(); }
    std::size_t target_site() const { return n_controls(); }
    SiteDims dims() const { return SiteDims::uniform(n_controls() + 1, scheme.size()); }
    GateSpec gate() const { return {n_controls(), drive.theta(), drive.phi(), drive.gamma()}; }
};

enum class PulseKind { Ohqc, Nhqc };

/// Declarative description of a gate experiment, resolved by make_gate_model.
struct GateModelConfig {
    std::size_t n_controls = 1;
    double ring_radius = 3.8;
    Placement placement = Placement::AdjacentChord;
    double chord = 2.0;
    double c6 = kRb70sC6;
    double control_amp = kTwoPi * 40.0;
    std::optional<double> modulation;  // defaults to the control-target coupling
    double omega_max = kTwoPi * 1.0;
    PulseKind pulse = PulseKind::Ohqc;
    double a1 = 0.28;
    double a2 = -0.12;
    double theta = std::numbers::pi / 2;
    double phi = 0.0;
    double gamma = std::numbers::pi;
    LevelVariant levels = LevelVariant::ThreeLevel;
};

pulse::TargetWaveform make_waveform(PulseKind kind, double omega_max, double a1 = 0.28, double a2 = -0.12);
SystemModel make_gate_model(const GateModelConfig& config);

/// Dressed-state projector |B><B| on a single site of `levels` levels.
Operator bright_projector(double theta, double phi, std::size_t levels);

/// Terms of the full rotating-frame Hamiltonian split at the actual half time.
TimeDependentHamiltonian full_hamiltonian(const SystemModel& model);
Operator build_full_hamiltonian(const SystemModel& model, double t);

/// (x)_j |1><1|_j (x) [Omega_t X_t + Delta Z_t]/2 over the model's level scheme.
TimeDependentHamiltonian effective_hamiltonian(const SystemModel& model);
Operator build_effective_hamiltonian(const SystemModel& model, double t);
/// Standalone form over three-level atoms.
Operator build_effective_hamiltonian(const GateSpec& gate, double omega_t, double delta,
                                     std::pair<double, double> phases);

// Collective (Dicke) basis |M, K, t>: M controls out of |D>, K of them in |B>,
// M - K in |A>; target t in {B, A}.
struct DickeLabel {
    std::size_t m;
    std::size_t k;
    bool target_excited;
};

class DickeBasis {
public:
    /// `effective_regime` keeps only K in {M, M-1}.
    DickeBasis(std::size_t n_controls, bool effective_regime = false);

    std::size_t n_controls() const { return n_; }
    bool effective_regime() const { return effective_; }
    std::size_t size() const { return labels_.size(); }
    const std::vector<DickeLabel>& labels() const { return labels_; }
    /// Index of a label, or nullopt when excluded.
    std::optional<std::size_t> find(std::size_t m, std::size_t k, bool target_excited) const;
    SiteDims dims() const { return SiteDims({size()}); }

private:
    std::size_t n_;
    bool effective_;
    std::vector<DickeLabel> labels_;
};

/// Drive values at one instant for the collective model.
struct DickeDrives {
    double control = 0.0;  // Omega_c(t)
    double target = 0.0;   // Omega_t(t)
    double detuning = 0.0; // Delta(t)
};

Operator build_dicke_hamiltonian(const DickeBasis& basis, double j_c, double j_t, const DickeDrives& drives);
TimeDependentHamiltonian dicke_hamiltonian(const DickeBasis& basis, double j_c, double j_t,
                                           std::function<DickeDrives(double)> drives, double t_begin,
                                           double t_end);

/// Columns are the symmetrized product states of each Dicke label, in the
/// product space of `dims` (uniform levels). Single-site vectors give |D>,
/// |B>, |A> for controls and |B>, |A> for the target.
Matrix dicke_isometry(const DickeBasis& basis, const SiteDims& dims, const Vector& control_d,
                      const Vector& control_b, const Vector& control_a, const Vector& target_b,
                      const Vector& target_a);

/// Effective-amplitude level scheme of the four-level two-photon realization.
struct TwoPhotonParams {
    double omega_cp = kTwoPi * 400.0;
    double omega_cr_bar = kTwoPi * 400.0;
    double omega_0p_peak = kTwoPi * 60.0 / std::numbers::sqrt2;
    double omega_1p_peak = kTwoPi * 60.0 / std::numbers::sqrt2;
    double omega_0r = kTwoPi * 60.0 / std::numbers::sqrt2;
    double omega_1r = kTwoPi * 60.0 / std::numbers::sqrt2;
    double delta_c = kTwoPi * 2000.0;
    double delta_0 = kTwoPi * 1800.0 / std::numbers::sqrt2;
    double delta_1 = kTwoPi * 1800.0 / std::numbers::sqrt2;
    bool compensate_stark_shifts = false;

    double effective_control_amp() const { return omega_cr_bar * omega_cp / (2.0 * delta_c); }
    double effective_omega0_peak() const { return omega_0r * omega_0p_peak / (2.0 * delta_0); }
    double effective_omega1_peak() const { return omega_1r * omega_1p_peak / (2.0 * delta_1); }

    /// Throws ModelError if any detuning is below 4x a Rabi amplitude;
    /// returns warnings for ratios below 10.
    std::vector<std::string> validate() const;
};

struct TwoPhotonModel {
    TwoPhotonParams params;
    InteractionGraph interactions;
    double modulation = 0.0;
    pulse::OhqcParams shape;  // shape and duration; peak taken from params
    double phi = 0.0;
    double gamma = std::numbers::pi;

    std::size_t n_controls() const { return interactions.n_controls(); }
    SiteDims dims() const { return SiteDims::uniform(n_controls() + 1, 4); }
    double theta() const;
    double gate_time() const { return shape.duration; }
};

/// Builds the model from parameters; the pulse duration follows from the
/// effective peak Rabi frequency.
TwoPhotonModel make_two_photon_model(const TwoPhotonParams& params, const InteractionGraph& graph,
                                     double modulation, double a1 = 0.28, double a2 = -0.12,
                                     double phi = 0.0, double gamma = std::numbers::pi);

TimeDependentHamiltonian two_photon_hamiltonian(const TwoPhotonModel& model);
Operator build_two_photon_hamiltonian(const TwoPhotonModel& model, double t);

/// d x d unitary with U|0> = |D>, U|1> = |B>, identity on higher levels.
Operator dressed_basis_unitary(double theta, double phi, std::size_t levels = 3);

/// 2 x 2 target rotation e^{i gamma/2} e^{-i gamma/2 n.sigma}.
Matrix target_unitary(double theta, double phi, double gamma);

/// Ideal gate on the 2^{N+1} computational space.
Operator ideal_gate_unitary(const GateSpec& gate);

}  // namespace holo
