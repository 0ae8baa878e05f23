#pragma once

#include <Eigen/Dense>

#include "mtg/classical.hpp"
#include "mtg/model.hpp"
#include "mtg/specfn.hpp"

namespace mtg::quantum {

using specfn::Complex;

struct MotionalState {
    long n_x = 0, n_y = 0, n_z = 0;  // relative motion
    long N_X = 0, N_Y = 0, N_Z = 0;  // center of mass
};

struct KickIntegral {
    Complex value;
    double frequency = 0.0;  // rad/s
    double t0 = 0.0, t = 0.0;
};

// K(W, t, t0) = (W/2) int_{t0}^{t} F(s) e^{i W s} ds, closed form through the
// scaled complex erf. With validate, a composite Gauss-Legendre evaluation is
// compared against it and a NumericError raised on disagreement.
KickIntegral kick_integral(const model::TrapModel& m, const model::ForcePulse& p, double frequency,
                           double t0, double t, bool validate = true);
Complex kick_quadrature(const model::ForcePulse& p, double frequency, double t0, double t);

enum class PhiMethod { Saddle, Quadrature };

// Phi(W) per unit xi^2, i.e. Im int K conj(dK/ds) ds for a unit-amplitude pulse.
double phi_of_omega(const model::ForcePulse& p, double frequency, double t0, double t,
                    PhiMethod method = PhiMethod::Saddle);

struct PhiComparison {
    double saddle = 0.0;
    double quadrature = 0.0;
    double relative_difference = 0.0;
};
PhiComparison compare_phi(const model::ForcePulse& p, double frequency, double t0, double t);

// Infinite-window limit, -(sqrt(pi)/4) (W tau)^2 Dawson(W tau / sqrt 2).
double phi_infinite_window(double frequency, double tau);

// theta = 2 xi^2 [ (omega/nu)^3 Phi(nu) - Phi(omega) ].
double gate_phase_theta(const model::TrapModel& m, const model::ForcePulse& p, double t0, double t,
                        PhiMethod method = PhiMethod::Saddle);

struct PhaseOptions {
    double x0_cm = 0.0;  // m, initial center-of-mass offset X0
    int k_max = 4;       // highest multipole kept in Delta (3..6)
    // Ratio of the perturbing shift to the reference a_nu xi_tilde F / xi.
    // 1 reproduces the tabulated deltas; 1/2 is the shift of the relative
    // trap minimum, (omega/nu)^2 a_omega F.
    double shift_ratio = 1.0;
};

struct PhaseRow {
    double phi_R = 0.0, phi_r = 0.0;
    double dynamic_R = 0.0, dynamic_r = 0.0;  // Phi terms
    double linear_R = 0.0, linear_r = 0.0;    // first-order displacement terms
    double kinetic_R = 0.0, kinetic_r = 0.0;  // (t - t0) terms
    double delta_ab = 0.0, delta_prime = 0.0;
    double total() const { return phi_R + phi_r + delta_ab + delta_prime; }
};

struct PhaseTable {
    Eigen::Matrix2d phi_R = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d phi_r = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d delta_ab = Eigen::Matrix2d::Zero();
    double delta_prime = 0.0;
    double kinetic_R = 0.0, kinetic_r = 0.0;
    double delta_tail_bound = 0.0;

    Eigen::Matrix2d total() const;
    double signed_sum() const;  // (-1)^{a+b} sum of total()
};

PhaseRow unperturbed_phases(const model::TrapModel& m, const model::ForcePulse& p,
                            const MotionalState& s, int alpha, int beta, double t0, double t,
                            PhiMethod method = PhiMethod::Saddle, const PhaseOptions& o = {});

PhaseTable phase_table(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                       double t0, double t, PhiMethod method = PhiMethod::Saddle,
                       const PhaseOptions& o = {});

struct Overlap {
    double value = 1.0;
    double center_of_mass = 1.0, relative = 1.0;
    double defect = 0.0;  // 1 - value, evaluated without cancellation
};

Overlap motional_overlap(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                         int alpha, int beta, double t0, double t);

struct Deltas {
    double delta3 = 0.0, delta4 = 0.0, delta4_prime = 0.0;
    double delta3_prime = 0.0;
    double xi_tilde = 0.0, nu_tilde = 0.0;
};

// Occupations are real so thermal means can be substituted directly.
Deltas perturbation_deltas(const model::TrapModel& m, const model::ForcePulse& p, double n_x, double n_y,
                           double n_z, double shift_ratio = 1.0);
Deltas perturbation_deltas(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                           double shift_ratio = 1.0);

struct FirstOrderShift {
    double delta_ab = 0.0;
    double delta_prime = 0.0;
    double tail_bound = 0.0;  // bound on the omitted k = 5, 6 terms
    double k3 = 0.0, k4 = 0.0;
};

FirstOrderShift first_order_phase_shift(const model::TrapModel& m, const model::ForcePulse& p,
                                        const MotionalState& s, int alpha, int beta, double t0, double t,
                                        int k_max = 4, double shift_ratio = 1.0);

// Signed sum of Delta^{ab} at the given occupations (k = 4 term only survives).
double delta_theta_perturbative(const model::TrapModel& m, const model::ForcePulse& p, double n_x,
                                double n_y, double n_z, int k_max = 4, double shift_ratio = 1.0);

// 8 (a_omega/d)^2 theta_cl [sqrt(2) xi^2 + 3 (2 n_x - n_y - n_z)]
double delta_theta_closed(const model::TrapModel& m, const model::ForcePulse& p, double n_x, double n_y,
                          double n_z);

struct ThermalOccupation {
    double gamma_x = 0.0, gamma_perp = 0.0;
    double n_x = 0.0, n_perp = 0.0;  // mean per mode
};
ThermalOccupation thermal_occupation(const model::TrapModel& m, double temperature);

double mean_delta_theta(const model::TrapModel& m, const model::ForcePulse& p, double temperature);

struct ComposeOptions {
    bool echo = true;
    bool enforce_calibration = true;
    double calibration_tolerance = 1e-6;
    PhiMethod method = PhiMethod::Saddle;
    PhaseOptions phases{};
};

struct GateReport {
    double theta = 0.0;               // per application of U
    double delta_theta = 0.0;         // closed form at the given state
    double delta_theta_perturbative = 0.0;
    double mean_delta_theta = 0.0;
    double Delta_theta = 0.0;         // delta_theta - mean
    double Delta_theta_table = 0.0;   // -(G01 - G00) from the composed table
    double Theta_global = 0.0;        // G00
    double Theta_closed = 0.0;
    double calibration_residual = 0.0;
    double odd_k_residual = 0.0;      // k = 3 content of G_ab - G_00
    double fidelity = 1.0;
    double overlap_defect = 0.0;
    Eigen::Matrix2d table = Eigen::Matrix2d::Zero();  // G_ab phases
    double s0 = 0.0, s1 = 0.0;
};

GateReport compose_gate(const model::TrapModel& m, const model::ForcePulse& p,
                        const classical::ThermalEnsemble& e, const MotionalState& s,
                        const ComposeOptions& o = {});

enum class FidelityForm { Exact, MinFidQ, EvalF };

struct FidelityOptions {
    int gates = 1;
    bool eps5_as_power = false;  // (1 + eps)^5 instead of (1 + eps^5)
};

struct QuantumFidelity {
    double exact = 1.0;
    double min_fid_q = 1.0;
    double eval_f = 1.0;
    long terms_x = 0, terms_perp = 0;
};

QuantumFidelity quantum_fidelity(const model::TrapModel& m, const model::ForcePulse& p, double temperature,
                                 const FidelityOptions& o = {});

// Temperature where 1 - F first reaches `deficit`, by bracketed root finding.
double fidelity_crossing(const model::TrapModel& m, const model::ForcePulse& p, FidelityForm form,
                         double deficit = 1e-6);

// Single-qubit corrections leaving only the conditional phase on |11>.
Eigen::Matrix2d undo_single_particle_phases(const Eigen::Matrix2d& phases);
struct SingleQubitPhases {
    double s0 = 0.0, s1_1 = 0.0, s2_1 = 0.0;
};
SingleQubitPhases single_particle_corrections(const Eigen::Matrix2d& phases);

enum class TuneMode { PerPulse, Echo };

struct TuneResult {
    double tau = 0.0;
    double residual = 0.0;
    double theta = 0.0;
    int iterations = 0;
    double lo = 0.0, hi = 0.0;
};

// Solve for tau at fixed xi. The window is rescaled with tau (window_factor * tau).
TuneResult tune_tau(const model::TrapModel& m, double xi, double target, TuneMode mode,
                    double temperature = 0.0, double window_factor = 6.0, double tau_lo = 0.0,
                    double tau_hi = 0.0);

}  // namespace mtg::quantum
