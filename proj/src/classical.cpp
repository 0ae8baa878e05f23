#include "mtg/classical.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/quadrature.hpp"
#include "mtg/specfn.hpp"

namespace mtg::classical {

using namespace mtg::constants;

namespace {

void check_bit(int v, const char* what) {
    if (v != 0 && v != 1) throw DomainError(std::string(what) + " must be 0 or 1");
}

double a_over_d(const model::TrapModel& m) { return m.a_omega_tilde / m.d; }

}  // namespace

ThermalEnsemble make_ensemble(const model::TrapModel& m, double temperature) {
    if (!(temperature >= 0.0)) throw DomainError("ThermalEnsemble: temperature must be >= 0");
    return {temperature, boltzmann * temperature / (hbar * m.omega_tilde)};
}

double theta_cl(const model::TrapModel& m, const model::ForcePulse& p) {
    return std::sqrt(pi / 8.0) * p.xi * p.xi * m.epsilon * m.omega_tilde * p.tau;
}

double theta_cl_bare_omega(const model::TrapModel& m, const model::ForcePulse& p) {
    return std::sqrt(pi / 8.0) * p.xi * p.xi * m.epsilon * m.omega * p.tau;
}

double theta_cl_at_d0(const model::TrapModel& m, const model::ForcePulse& p) {
    const double wt = m.omega * std::sqrt(1.0 + 0.5 * m.epsilon_d0);
    return std::sqrt(pi / 8.0) * p.xi * p.xi * m.epsilon_d0 * wt * p.tau;
}

SeriesResult phi_cl_ground(const model::TrapModel& m, const model::ForcePulse& p, int alpha, int beta,
                           int n_max) {
    check_bit(alpha, "alpha");
    check_bit(beta, "beta");
    if (n_max < 1) throw DomainError("phi_cl_ground: n_max must be positive");
    const double z = p.xi * a_over_d(m);
    if (!(std::abs(z) < 1.0)) throw DomainError("phi_cl_ground: xi a/d >= 1, series diverges");

    SeriesResult r;
    const int s = alpha - beta;
    if (s == 0) return r;

    // Linear term, (alpha - beta) (d / xi a) / sqrt(2), then the harmonic terms
    // (alpha - beta)^{n+1} (xi a / d)^{n-1} / sqrt(2(n+1)).
    const double pref = -theta_cl(m, p);
    double sum = s / (std::sqrt(2.0) * z);
    r.terms = 0;
    double pw = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        const double sign = ((n + 1) % 2 == 0) ? 1.0 : static_cast<double>(s);
        const double term = sign * pw / std::sqrt(2.0 * (n + 1));
        sum += term;
        r.last_term = pref * term;
        r.terms = n;
        if (std::abs(term) < 1e-15 * std::abs(sum)) break;
        pw *= z;
    }
    r.value = pref * sum;
    return r;
}

double delta_phi_thermal(const model::TrapModel& m, const model::ForcePulse& p, int alpha, int beta,
                         const ClassicalInitial& init, CrossTerm cross) {
    check_bit(alpha, "alpha");
    check_bit(beta, "beta");
    if (init.E1 < 0.0 || init.E2 < 0.0) throw DomainError("delta_phi_thermal: energies must be >= 0");
    const int s = alpha - beta;
    if (s == 0) return 0.0;
    const double r = a_over_d(m);
    const double sgn = cross == CrossTerm::Plus ? 1.0 : -1.0;
    const double energy = init.E1 + init.E2 +
                          sgn * 2.0 * std::sqrt(init.E1 * init.E2) *
                              std::cos(m.omega_tilde * (init.t1 - init.t2));
    return -3.0 * s * theta_cl(m, p) * (r / (std::sqrt(2.0) * p.xi) + s * r * r) * energy /
           (hbar * m.omega_tilde);
}

ClassicalPhaseTable phase_table(const model::TrapModel& m, const model::ForcePulse& p,
                                const ClassicalInitial& init, CrossTerm cross) {
    ClassicalPhaseTable t;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            t.ground(a, b) = phi_cl_ground(m, p, a, b).value;
            t.thermal_corr(a, b) = delta_phi_thermal(m, p, a, b, init, cross);
        }
    t.phi = t.ground + t.thermal_corr;
    return t;
}

double signed_sum(const Eigen::Matrix2d& t) { return t(0, 0) - t(0, 1) - t(1, 0) + t(1, 1); }

double gate_phase_polylog(const model::TrapModel& m, const model::ForcePulse& p) {
    const double r = a_over_d(m);
    return std::sqrt(pi / 8.0) * m.epsilon * m.omega_tilde * p.tau / (r * r) *
           specfn::polylog_half(p.xi * p.xi * r * r);
}

double mean_gate_phase(const model::TrapModel& m, const model::ForcePulse& p, const ThermalEnsemble& e,
                       MeanPhaseForm form) {
    const double r = a_over_d(m);
    const double c = form == MeanPhaseForm::Averaged ? 12.0 : 6.0;
    return theta_cl(m, p) * (1.0 + r * r * (p.xi * p.xi / std::sqrt(2.0) + c * e.kT_over_hw));
}

double kappa(const model::TrapModel& m, const model::ForcePulse& p) {
    return m.d / (std::sqrt(2.0) * p.xi * m.a_omega_tilde);
}

double xi_overlap(double a, double b, double k, double eps) {
    const double q = 1.0 - a - b;
    return q * q + a * a + b * b + 2.0 * q * a * std::cos((k - 1.0) * eps) +
           2.0 * q * b * std::cos((k + 1.0) * eps) + 2.0 * a * b * std::cos(2.0 * k * eps);
}

double b_bar(double k, double eps) {
    return 0.5 * std::sin((3.0 * k - 1.0) * eps / 2.0) / std::sin((k + 1.0) * eps / 2.0);
}

double f_kappa(double k, double eps) {
    const double s = std::sin(3.0 * k * eps / 2.0) - 2.0 * std::sin(k * eps);
    return 2.0 * std::asin(std::clamp(s / std::sqrt(5.0 + 4.0 * std::cos(2.0 * k * eps)), -1.0, 1.0));
}

double xi_minimum_edge(double k, double eps) {
    if (eps == 0.0) return 1.0;
    if (k == 0.0) return 0.5 * (1.0 + std::cos(eps));
    // Along a = 1, Xi is the quadratic 2(1 - c+) b^2 + 2(c2 - c-) b + 1.
    const double cp = std::cos((k + 1.0) * eps);
    const double cm = std::cos((k - 1.0) * eps);
    const double c2 = std::cos(2.0 * k * eps);
    const double qa = 2.0 * (1.0 - cp), qb = 2.0 * (c2 - cm);
    double b = qa > 0.0 ? -qb / (2.0 * qa) : (qb < 0.0 ? 1.0 : 0.0);
    b = std::clamp(b, 0.0, 1.0);
    return xi_overlap(1.0, b, k, eps);
}

double xi_minimum(double k, double eps) {
    if (eps == 0.0) return 1.0;
    const double cp = std::cos((k + 1.0) * eps);
    const double cm = std::cos((k - 1.0) * eps);
    const double c2 = std::cos(2.0 * k * eps);
    // Xi = A a^2 + B b^2 + 2 C ab + 2 D a + 2 E b + 1
    const double A = 2.0 * (1.0 - cm), B = 2.0 * (1.0 - cp), C = 1.0 - cm - cp + c2;
    const double D = cm - 1.0, E = cp - 1.0;
    auto xi = [&](double a, double b) { return xi_overlap(a, b, k, eps); };
    // minimum of c2 x^2 + 2 c1 x on [0, 1]
    auto edge_arg = [](double c2x, double c1x) {
        if (c2x > 0.0) return std::clamp(-c1x / c2x, 0.0, 1.0);
        return c2x + 2.0 * c1x < 0.0 ? 1.0 : 0.0;
    };
    double best = std::min({xi(0.0, edge_arg(B, E)), xi(1.0, edge_arg(B, C + E)), xi(edge_arg(A, D), 0.0),
                            xi(edge_arg(A, C + D), 1.0)});
    const double det = A * B - C * C;
    if (A > 0.0 && det > 0.0) {
        const double a = (C * E - B * D) / det, b = (C * D - A * E) / det;
        if (a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0) best = std::min(best, xi(a, b));
    }
    return best;
}

double eps_thermal(const model::TrapModel& m, const model::ForcePulse& p, const ThermalEnsemble& e,
                   double e1, double e2, double phase) {
    const double r = a_over_d(m);
    return 3.0 * theta_cl(m, p) * r * r * e.kT_over_hw *
           (e1 + e2 - 2.0 * std::sqrt(e1 * e2) * std::cos(phase) - 2.0);
}

FidelityResult classical_fidelity(const model::TrapModel& m, const model::ForcePulse& p,
                                  const ThermalEnsemble& e, bool suppress_cubic, QuadratureSpec q) {
    FidelityResult out;
    out.kappa = suppress_cubic ? 0.0 : kappa(m, p);
    const double r = a_over_d(m);
    const double th = theta_cl(m, p);
    const double kt = e.kT_over_hw;
    if (suppress_cubic) {
        const double c = 3.0 * th * kt;
        out.series = 1.0 - c * c * r * r * r * r;
    } else {
        const double c = 6.0 * th * kt;
        out.series = 1.0 - c * c * (r * r / (p.xi * p.xi) - 2.0 * r * r * r * r);
    }
    if (e.temperature == 0.0) {
        out.exact = 1.0;
        out.series = 1.0;
        return out;
    }

    const quad::Rule lag = quad::gauss_laguerre(q.energy_nodes);
    const int np = q.phase_nodes;
    std::vector<double> rows(static_cast<std::size_t>(q.energy_nodes) * q.energy_nodes);
    std::vector<double> ph(np);
    for (int i = 0; i < q.energy_nodes; ++i)
        for (int j = 0; j < q.energy_nodes; ++j) {
            for (int k = 0; k < np; ++k) {
                const double phi = 2.0 * pi * k / np;
                ph[k] = xi_minimum(out.kappa,
                                   eps_thermal(m, p, e, lag.nodes[i], lag.nodes[j], phi));
            }
            rows[static_cast<std::size_t>(i) * q.energy_nodes + j] =
                lag.weights[i] * lag.weights[j] * quad::pairwise_sum(ph) / np;
        }
    out.exact = quad::pairwise_sum(rows);
    return out;
}

}  // namespace mtg::classical
