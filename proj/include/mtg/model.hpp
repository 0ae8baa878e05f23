#pragma once

#include <string>

namespace mtg::model {

struct IonSpecies {
    std::string name;
    double mass = 0.0;    // kg
    double charge = 0.0;  // C
};

IonSpecies calcium40();
IonSpecies species_from_mass_u(double mass_u, std::string name = "custom");

// How the Coulomb-induced equilibrium shift is evaluated.
//   Exact:      root of the equilibrium condition in closed sinh^2 form.
//   FirstOrder: the leading term eps(d0) d0 / 2.
enum class ShiftModel { Exact, FirstOrder };

struct TrapModel {
    IonSpecies species;
    ShiftModel shift_model = ShiftModel::FirstOrder;

    double omega = 0.0;  // rad/s
    double d0 = 0.0;     // m, bare trap separation

    double a_omega = 0.0;      // sqrt(hbar / m omega)
    double delta_x = 0.0;      // active equilibrium shift
    double delta_x_exact = 0.0;
    double d = 0.0;            // d0 + delta_x
    double epsilon = 0.0;      // Coulomb ratio at d
    double epsilon_d0 = 0.0;   // same ratio at d0 (diagnostic)
    double nu = 0.0;           // omega sqrt(1 + eps)
    double nu_perp = 0.0;      // omega sqrt(1 - eps/2)
    double omega_tilde = 0.0;  // omega sqrt(1 + eps/2)
    double a_nu = 0.0;         // sqrt(hbar / mu nu), mu = m/2
    double a_omega_tilde = 0.0;

    double reduced_mass() const { return 0.5 * species.mass; }
    // lambda = q^2 / (4 pi eps0)
    double coulomb_lambda() const;
    // Residual of mu omega^2 x = lambda / (x + d0)^2 at x = delta_x_exact,
    // relative to mu omega^2 delta_x_exact.
    double equilibrium_residual() const;
};

TrapModel build_trap_model(const IonSpecies& species, double omega, double d0,
                           ShiftModel shift = ShiftModel::FirstOrder);

// Coulomb ratio q^2 / (pi eps0 m omega^2 d^3).
double coulomb_ratio(const IonSpecies& species, double omega, double d);

struct ForcePulse {
    double xi = 0.0;       // peak displacement in units of a_omega
    double tau = 0.0;      // s
    double t_start = 0.0;  // s, < 0
    double t_end = 0.0;    // s, > 0

    double value(double t) const;  // xi exp(-(t/tau)^2)
    // True when the profile at both window edges is below 1e-12 xi.
    bool support_ok() const;
    double edge_fraction() const;  // max(F(t_start), F(t_end)) / xi
};

ForcePulse make_pulse(double xi, double tau, double t_start, double t_end);
// Symmetric window wide enough for support_ok().
ForcePulse make_pulse(double xi, double tau);

double force_profile(const ForcePulse& pulse, double t);
double displacement(const ForcePulse& pulse, const TrapModel& model, int alpha, double t);
double omega_tau(const ForcePulse& pulse, const TrapModel& model);

}  // namespace mtg::model
