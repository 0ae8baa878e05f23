#include "mtg/model.hpp"

#include <algorithm>
#include <cmath>

#include "mtg/constants.hpp"
#include "mtg/errors.hpp"

namespace mtg::model {

using namespace mtg::constants;

IonSpecies calcium40() {
    return {"Ca40+", calcium40_mass_u * atomic_mass_unit, elementary_charge};
}

IonSpecies species_from_mass_u(double mass_u, std::string name) {
    return {std::move(name), mass_u * atomic_mass_unit, elementary_charge};
}

double coulomb_ratio(const IonSpecies& s, double omega, double d) {
    return s.charge * s.charge / (pi * epsilon0 * s.mass * omega * omega * d * d * d);
}

double TrapModel::coulomb_lambda() const {
    return species.charge * species.charge / (4.0 * pi * epsilon0);
}

double TrapModel::equilibrium_residual() const {
    const double lhs = reduced_mass() * omega * omega * delta_x_exact;
    const double rhs = coulomb_lambda() / ((delta_x_exact + d0) * (delta_x_exact + d0));
    return std::abs(lhs - rhs) / lhs;
}

TrapModel build_trap_model(const IonSpecies& species, double omega, double d0, ShiftModel shift) {
    if (!(species.mass > 0.0) || !(species.charge > 0.0))
        throw DomainError("build_trap_model: species mass and charge must be positive");
    if (!(omega > 0.0) || !(d0 > 0.0))
        throw DomainError("build_trap_model: omega and d0 must be positive");

    TrapModel m;
    m.species = species;
    m.shift_model = shift;
    m.omega = omega;
    m.d0 = d0;

    const double mu = 0.5 * species.mass;
    const double lambda = m.coulomb_lambda();
    const double third = d0 / 3.0;
    const double eta = lambda / (2.0 * mu * omega * omega * third * third * third);
    const double sh = std::sinh(std::log(eta + 1.0 + std::sqrt(eta * (eta + 2.0))) / 6.0);
    m.delta_x_exact = 4.0 * d0 / 3.0 * sh * sh;

    m.epsilon_d0 = coulomb_ratio(species, omega, d0);
    // the expansion about d0 is meaningless once the ratio there reaches 1
    if (!(m.epsilon_d0 < 1.0)) throw DomainError("build_trap_model: confinement too weak (epsilon at d0 >= 1)");
    m.delta_x = shift == ShiftModel::Exact ? m.delta_x_exact : 0.5 * m.epsilon_d0 * d0;
    m.d = d0 + m.delta_x;
    m.epsilon = coulomb_ratio(species, omega, m.d);
    if (!(m.epsilon < 1.0)) throw DomainError("build_trap_model: confinement too weak (epsilon >= 1)");

    m.a_omega = std::sqrt(hbar / (species.mass * omega));
    m.nu = omega * std::sqrt(1.0 + m.epsilon);
    m.nu_perp = omega * std::sqrt(1.0 - 0.5 * m.epsilon);
    m.omega_tilde = omega * std::sqrt(1.0 + 0.5 * m.epsilon);
    m.a_nu = std::sqrt(hbar / (mu * m.nu));
    m.a_omega_tilde = std::sqrt(hbar / (species.mass * m.omega_tilde));

    for (double v : {m.delta_x_exact, m.d, m.epsilon, m.a_omega, m.nu, m.nu_perp, m.a_nu})
        if (!std::isfinite(v)) throw NumericError("build_trap_model: non-finite derived quantity");
    return m;
}

double ForcePulse::value(double t) const {
    const double u = t / tau;
    return xi * std::exp(-u * u);
}

double ForcePulse::edge_fraction() const {
    const double u = std::min(std::abs(t_start), std::abs(t_end)) / tau;
    return std::exp(-u * u);
}

bool ForcePulse::support_ok() const { return edge_fraction() < 1e-12; }

ForcePulse make_pulse(double xi, double tau, double t_start, double t_end) {
    if (!(tau > 0.0)) throw DomainError("ForcePulse: tau must be positive");
    if (!(t_start < 0.0 && t_end > 0.0)) throw DomainError("ForcePulse: window must satisfy t_start < 0 < t_end");
    if (!std::isfinite(xi)) throw DomainError("ForcePulse: xi must be finite");
    return {xi, tau, t_start, t_end};
}

ForcePulse make_pulse(double xi, double tau) {
    // exp(-6^2) ~ 2.3e-16
    return make_pulse(xi, tau, -6.0 * tau, 6.0 * tau);
}

double force_profile(const ForcePulse& pulse, double t) { return pulse.value(t); }

double displacement(const ForcePulse& pulse, const TrapModel& model, int alpha, double t) {
    if (alpha != 0 && alpha != 1) throw DomainError("displacement: alpha must be 0 or 1");
    return alpha * model.a_omega * pulse.value(t);
}

double omega_tau(const ForcePulse& pulse, const TrapModel& model) { return model.omega * pulse.tau; }

}  // namespace mtg::model
