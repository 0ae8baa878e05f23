#include <doctest.h>

#include <cmath>
#include <random>

#include "mtg/classical.hpp"
#include "mtg/constants.hpp"
#include "mtg/quadrature.hpp"

using namespace mtg;
using classical::ClassicalInitial;
using classical::CrossTerm;

namespace {

const model::TrapModel& trap() {
    static const model::TrapModel m = model::build_trap_model(model::calcium40(), 2.0 * constants::pi * 1e6, 20e-6);
    return m;
}
const model::ForcePulse& pulse() {
    static const model::ForcePulse p = model::make_pulse(0.7, 41.1069e-6);
    return p;
}

// -(1/hbar) int [V_ab(E) - V_ab(0) - V_00(E) + V_00(0)] dt along the
// unperturbed trajectories, over a whole number of omega_tilde periods.
double trajectory_thermal_phase(int alpha, int beta, const ClassicalInitial& init) {
    const model::TrapModel& m = trap();
    const model::ForcePulse& p = pulse();
    const double w = m.omega_tilde;
    const double period = 2.0 * constants::pi / w;
    const int periods = static_cast<int>(std::ceil(6.0 * p.tau / period));
    const double A1 = std::sqrt(2.0 * init.E1 / (m.species.mass * w * w));
    const double A2 = std::sqrt(2.0 * init.E2 / (m.species.mass * w * w));
    const double d = m.d;
    auto g = [d](double dx) { return -dx / (d * (d + dx)); };  // 1/(d+dx) - 1/d
    auto f = [&](double t) {
        const double push = m.a_omega * p.value(t);
        const double th = A2 * std::cos(w * (t - init.t2)) - A1 * std::cos(w * (t - init.t1));
        const double dx = (beta - alpha) * push;
        return g(dx + th) - g(dx) - g(th);
    };
    const quad::Rule r = quad::gauss_legendre(20);
    double sum = 0.0;
    for (int k = -periods; k < periods; ++k) sum += quad::integrate(f, k * period, (k + 1) * period, 4, r);
    return -m.coulomb_lambda() / constants::hbar * sum;
}

}  // namespace

TEST_CASE("theta_cl at the reference point") {
    const double th = classical::theta_cl(trap(), pulse());
    CHECK(th / constants::pi == doctest::Approx(1.04).epsilon(0.03 / 1.04));
    CHECK(classical::theta_cl_bare_omega(trap(), pulse()) < th);
    auto p0 = pulse();
    p0.xi = 0.0;
    CHECK(classical::theta_cl(trap(), p0) == 0.0);
    auto p2 = pulse();
    p2.tau *= 2.0;
    CHECK(classical::theta_cl(trap(), p2) == doctest::Approx(2.0 * th).epsilon(1e-15));
}

TEST_CASE("ground-state series") {
    for (int a = 0; a < 2; ++a) CHECK(classical::phi_cl_ground(trap(), pulse(), a, a).value == 0.0);
    const double th = classical::theta_cl(trap(), pulse());
    const double s01 = classical::phi_cl_ground(trap(), pulse(), 0, 1, 1).value;
    const double s10 = classical::phi_cl_ground(trap(), pulse(), 1, 0, 1).value;
    // linear (alpha - beta) terms cancel; what remains is the n = 1 harmonic term
    CHECK(0.5 * (s01 + s10) == doctest::Approx(-th / 2.0).epsilon(1e-14).scale(std::abs(s01)));
    Eigen::Matrix2d g;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g(a, b) = classical::phi_cl_ground(trap(), pulse(), a, b).value;
    const double r = trap().a_omega_tilde / trap().d;
    CHECK(classical::signed_sum(g) == doctest::Approx(th).epsilon(2.0 * r * r));
    CHECK(classical::signed_sum(g) == doctest::Approx(classical::gate_phase_polylog(trap(), pulse())).epsilon(1e-6));
    const auto res = classical::phi_cl_ground(trap(), pulse(), 0, 1, 12);
    CHECK(std::abs(res.last_term) < 1e-15 * std::abs(res.value) + 1e-30);
}

TEST_CASE("ground series splits into parts even and odd in alpha - beta") {
    const double th = classical::theta_cl(trap(), pulse());
    const double x = pulse().xi * trap().a_omega_tilde / trap().d;
    for (int n = 1; n <= 6; ++n) {
        double even = 0.0, odd = -th / (std::sqrt(2.0) * x);  // linear term at s = +1
        for (int k = 1; k <= n; ++k) {
            const double term = -th * std::pow(x, k - 1) / std::sqrt(2.0 * (k + 1));
            ((k + 1) % 2 == 0 ? even : odd) += term;
        }
        const double p10 = classical::phi_cl_ground(trap(), pulse(), 1, 0, n).value;
        const double p01 = classical::phi_cl_ground(trap(), pulse(), 0, 1, n).value;
        // both parts come out of sums dominated by the linear term
        CHECK(0.5 * (p10 + p01) == doctest::Approx(even).epsilon(1e-14).scale(std::abs(odd)));
        CHECK(0.5 * (p10 - p01) == doctest::Approx(odd).epsilon(1e-14));
    }
}

TEST_CASE("thermal correction vanishes without excitation or without a push difference") {
    const ClassicalInitial zero{};
    CHECK(classical::delta_phi_thermal(trap(), pulse(), 1, 0, zero) == 0.0);
    const double hw = constants::hbar * trap().omega_tilde;
    const ClassicalInitial e{hw, 2.0 * hw, 0.0, 0.3e-6};
    CHECK(classical::delta_phi_thermal(trap(), pulse(), 0, 0, e) == 0.0);
    CHECK(classical::delta_phi_thermal(trap(), pulse(), 1, 1, e) == 0.0);
    const auto t = classical::phase_table(trap(), pulse(), e);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(t.phi(a, b) == doctest::Approx(t.ground(a, b) + t.thermal_corr(a, b)));
}

TEST_CASE("thermal correction against trajectory quadrature") {
    const double hw = constants::hbar * trap().omega_tilde;
    // the trajectories carry (omega/omega_tilde)^2 from m omega_tilde^2 A^2 = 2E,
    // the formula a_omega_tilde / d in place of a_omega / d
    const double ratio = std::pow(trap().omega / trap().omega_tilde, 1.5);
    const double half_period = constants::pi / trap().omega_tilde;

    SUBCASE("equal energies in phase: the minus cross term gives zero") {
        const ClassicalInitial e{hw, hw, 0.0, 0.0};
        const double oracle = trajectory_thermal_phase(1, 0, e);
        const double plus = classical::delta_phi_thermal(trap(), pulse(), 1, 0, e, CrossTerm::Plus);
        CHECK(classical::delta_phi_thermal(trap(), pulse(), 1, 0, e, CrossTerm::Minus) == 0.0);
        CHECK(std::abs(oracle) < 1e-3 * std::abs(plus));
    }
    SUBCASE("equal energies in antiphase") {
        const ClassicalInitial e{hw, hw, 0.0, half_period};
        const double oracle = trajectory_thermal_phase(1, 0, e);
        const double formula = classical::delta_phi_thermal(trap(), pulse(), 1, 0, e);
        CHECK(std::abs(oracle / formula - ratio) < 1e-3);
    }
    SUBCASE("unequal energies, generic phase, both branches") {
        const ClassicalInitial e{4.0 * hw, hw, 0.1e-6, 0.37e-6};
        for (auto [a, b] : {std::pair{1, 0}, std::pair{0, 1}}) {
            const double oracle = trajectory_thermal_phase(a, b, e);
            const double formula = classical::delta_phi_thermal(trap(), pulse(), a, b, e);
            CHECK(std::abs(oracle / formula - ratio) < 1e-3);
        }
    }
}

TEST_CASE("mean gate phase against a Monte-Carlo thermal average") {
    const double T = 1e-3;
    const auto ens = classical::make_ensemble(trap(), T);
    const double kT = constants::boltzmann * T;
    const double period = 2.0 * constants::pi / trap().omega_tilde;
    std::mt19937_64 rng(2024);
    std::exponential_distribution<double> energy(1.0 / kT);
    std::uniform_real_distribution<double> phase(0.0, period);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const ClassicalInitial e{energy(rng), energy(rng), phase(rng), phase(rng)};
        const double v = classical::signed_sum(classical::phase_table(trap(), pulse(), e).phi);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double sigma = std::sqrt((sum2 / n - mean * mean) / n);
    const double averaged = classical::mean_gate_phase(trap(), pulse(), ens);
    const double compact = classical::mean_gate_phase(trap(), pulse(), ens, classical::MeanPhaseForm::Compact);
    CHECK(std::abs(mean - averaged) < 3.0 * sigma);
    CHECK(std::abs(mean - compact) > 10.0 * sigma);
}

TEST_CASE("mean gate phase at zero temperature") {
    const double th = classical::theta_cl(trap(), pulse());
    const double r = trap().a_omega_tilde / trap().d;
    const double m0 = classical::mean_gate_phase(trap(), pulse(), classical::make_ensemble(trap(), 0.0));
    CHECK(m0 == doctest::Approx(th * (1.0 + r * r * 0.49 / std::sqrt(2.0))).epsilon(1e-15));
    CHECK((m0 / th - 1.0) == doctest::Approx(2e-7).epsilon(0.3));
}

TEST_CASE("overlap function") {
    CHECK(classical::xi_overlap(0.3, 0.2, 30.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // kappa = 0: depends on a + b only
    CHECK(classical::xi_overlap(0.1, 0.3, 0.0, 0.2) == doctest::Approx(classical::xi_overlap(0.25, 0.15, 0.0, 0.2)).epsilon(1e-14));
}

TEST_CASE("analytic minimizer against a 400 x 400 grid") {
    for (double eps : {0.01, -0.004, 0.02}) {
        const double kappa = 30.0;
        double grid_min = 2.0;
        for (int i = 0; i < 400; ++i)
            for (int j = 0; j < 400; ++j)
                grid_min = std::min(grid_min, classical::xi_overlap(i / 399.0, j / 399.0, kappa, eps));
        const double analytic = classical::xi_minimum_edge(kappa, eps);
        CHECK(analytic <= grid_min + 1e-12);
        CHECK(std::abs(grid_min - analytic) < 1e-6);
        CHECK(classical::xi_minimum(kappa, eps) == doctest::Approx(analytic).epsilon(1e-12));
    }
}

TEST_CASE("exact minimum over the square") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ue(-0.2, 0.2), uk(0.0, 60.0);
    for (int t = 0; t < 40; ++t) {
        const double kappa = uk(rng), eps = ue(rng);
        double grid_min = 2.0;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 200; ++j)
                grid_min = std::min(grid_min, classical::xi_overlap(i / 200.0, j / 200.0, kappa, eps));
        const double exact = classical::xi_minimum(kappa, eps);
        CHECK(exact <= grid_min + 1e-12);
        CHECK(grid_min - exact < 1e-3);
        CHECK(exact <= classical::xi_minimum_edge(kappa, eps) + 1e-12);
    }
    // past the first zero the edge formula is no longer the minimum
    const double kappa = 1000.0, eps = 1.5 / kappa;
    CHECK(classical::xi_minimum(kappa, eps) < 1e-6);
    CHECK(classical::xi_minimum_edge(kappa, eps) > 0.3);
}

TEST_CASE("classical fidelity") {
    const auto& m = trap();
    const auto& p = pulse();
    const auto z = classical::classical_fidelity(m, p, classical::make_ensemble(m, 0.0), false);
    CHECK(z.exact == 1.0);
    double prev = 1.0, prev4 = 1.0;
    // The overlap is periodic in the thermal phase, so the average bottoms out
    // near k_B T ~ 90 hbar omega_tilde (about 4.4 mK); stay below that.
    for (int i = 1; i <= 50; ++i) {
        const auto e = classical::make_ensemble(m, 3e-3 * i / 50.0);
        const double f = classical::classical_fidelity(m, p, e, false).exact;
        const double f4 = classical::classical_fidelity(m, p, e, true).exact;
        CHECK(f <= prev + 1e-15);
        CHECK(f4 <= prev4 + 1e-15);
        CHECK(f4 >= f);
        prev = f;
        prev4 = f4;
    }
}
