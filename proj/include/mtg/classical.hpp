#pragma once

#include <Eigen/Dense>

#include "mtg/model.hpp"

namespace mtg::classical {

struct ThermalEnsemble {
    double temperature = 0.0;   // K
    double kT_over_hw = 0.0;    // k_B T / (hbar omega_tilde)
};

ThermalEnsemble make_ensemble(const model::TrapModel& m, double temperature);

struct ClassicalInitial {
    double E1 = 0.0, E2 = 0.0;  // J
    double t1 = 0.0, t2 = 0.0;  // s
};

// Cross-term sign in E1 + E2 +/- 2 sqrt(E1 E2) cos[omega_tilde (t1 - t2)].
enum class CrossTerm { Plus, Minus };

struct ClassicalPhaseTable {
    Eigen::Matrix2d phi;
    Eigen::Matrix2d ground;
    Eigen::Matrix2d thermal_corr;
};

struct SeriesResult {
    double value = 0.0;
    double last_term = 0.0;
    int terms = 0;
};

// sqrt(pi/8) xi^2 eps omega_tilde tau
double theta_cl(const model::TrapModel& m, const model::ForcePulse& p);

// Same prefactor with omega in place of omega_tilde, and with eps at d0.
double theta_cl_bare_omega(const model::TrapModel& m, const model::ForcePulse& p);
double theta_cl_at_d0(const model::TrapModel& m, const model::ForcePulse& p);

// Ground-state phase series to n_max harmonic terms (plus the linear
// (alpha - beta) term). Stops early once a term drops below 1e-15 of the sum.
SeriesResult phi_cl_ground(const model::TrapModel& m, const model::ForcePulse& p, int alpha, int beta,
                           int n_max = 12);

// Thermal correction to o[(a/d)^3]. The sign convention matches
// phi_cl_ground (phase = -(1/hbar) integral of the Coulomb energy).
double delta_phi_thermal(const model::TrapModel& m, const model::ForcePulse& p, int alpha, int beta,
                         const ClassicalInitial& init, CrossTerm cross = CrossTerm::Minus);

ClassicalPhaseTable phase_table(const model::TrapModel& m, const model::ForcePulse& p,
                                const ClassicalInitial& init, CrossTerm cross = CrossTerm::Minus);

// (-1)^{a+b} signed sum of a 2x2 table.
double signed_sum(const Eigen::Matrix2d& t);

// Closed-form Li_{1/2} gate phase.
double gate_phase_polylog(const model::TrapModel& m, const model::ForcePulse& p);

// Thermal coefficient multiplying (a/d)^2 k_B T / hbar omega_tilde in the mean
// gate phase. Averaging the per-entry thermal phases gives 12; the compact
// quoted bracket carries 6.
enum class MeanPhaseForm { Averaged, Compact };

double mean_gate_phase(const model::TrapModel& m, const model::ForcePulse& p, const ThermalEnsemble& e,
                       MeanPhaseForm form = MeanPhaseForm::Averaged);

// Ratio kappa = d / (sqrt(2) xi a_omega_tilde).
double kappa(const model::TrapModel& m, const model::ForcePulse& p);

// |<chi'|chi>|^2 over the square (a, b) in [0,1]^2.
double xi_overlap(double a, double b, double kappa, double eps_th);
double b_bar(double kappa, double eps_th);
double f_kappa(double kappa, double eps_th);
// Closed-form minimum along a = 1, b = clamp(b_bar, 0, 1), and (1 + cos eps)/2
// at kappa = 0. It is the minimum over the square only while |kappa eps| <~ 1;
// past the first zero of Xi the minimum moves inside.
double xi_minimum_edge(double kappa, double eps_th);
// Exact minimum of the quadratic Xi over the square (stationary point and edges).
double xi_minimum(double kappa, double eps_th);

struct FidelityResult {
    double exact = 1.0;   // thermal average of the pointwise minimum
    double series = 1.0;  // low-temperature expansion
    double kappa = 0.0;
};

struct QuadratureSpec {
    int energy_nodes = 64;
    int phase_nodes = 64;
};

FidelityResult classical_fidelity(const model::TrapModel& m, const model::ForcePulse& p,
                                  const ThermalEnsemble& e, bool suppress_cubic,
                                  QuadratureSpec q = {});

// Thermal deviation variable for one sample, energies in units of k_B T.
double eps_thermal(const model::TrapModel& m, const model::ForcePulse& p, const ThermalEnsemble& e,
                   double e1, double e2, double phase);

}  // namespace mtg::classical
