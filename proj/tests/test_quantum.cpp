#include <doctest.h>

#include <cmath>
#include <random>

#include "mtg/classical.hpp"
#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/quadrature.hpp"
#include "mtg/quantum.hpp"

using namespace mtg;
using quantum::MotionalState;

namespace {

const double kOmega = 2.0 * constants::pi * 1e6;

const model::TrapModel& trap() {
    static const model::TrapModel m = model::build_trap_model(model::calcium40(), kOmega, 20e-6);
    return m;
}
const model::ForcePulse& pulse() {
    static const model::ForcePulse p = model::make_pulse(0.7, 41.1069e-6);
    return p;
}

MotionalState random_state(std::mt19937_64& rng, long max_n) {
    std::uniform_int_distribution<long> u(0, max_n);
    MotionalState s;
    s.n_x = u(rng);
    s.n_y = u(rng);
    s.n_z = u(rng);
    s.N_X = u(rng);
    s.N_Y = u(rng);
    s.N_Z = u(rng);
    return s;
}

// <n|X^j|n> for X = a + a^dagger, from explicit ladder matrices.
Eigen::MatrixXd ladder_x(int dim) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
    return x;
}

// Time-integrated <P_k(X + S(t), rho) - P_k(X, rho)> over a Gaussian S(t) = S0 exp(-(t/tau)^2),
// with rho^2 = nu_tilde (Y^2 + Z^2).
double shifted_multipole(int k, long nx, long ny, long nz, double S0, double nt, double tau) {
    const int dim = static_cast<int>(std::max({nx, ny, nz})) + 8;
    const Eigen::MatrixXd X = ladder_x(dim);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd X2 = X * X;
    const double y2 = nt * (X2(ny, ny) + X2(nz, nz));  // <rho^2>
    const quad::Rule r = quad::gauss_legendre(24);
    auto integrand = [&](double t) {
        const double S = S0 * std::exp(-(t / tau) * (t / tau));
        const Eigen::MatrixXd Xs = X + S * I;
        const Eigen::MatrixXd Xs2 = Xs * Xs;
        if (k == 3) {
            const double shifted = -((Xs2 * Xs)(nx, nx) - 1.5 * Xs(nx, nx) * y2);
            const double bare = -((X2 * X)(nx, nx) - 1.5 * X(nx, nx) * y2);
            return shifted - bare;
        }
        const double shifted = (Xs2 * Xs2)(nx, nx) - 3.0 * Xs2(nx, nx) * y2;
        const double bare = (X2 * X2)(nx, nx) - 3.0 * X2(nx, nx) * y2;
        return shifted - bare;
    };
    return quad::integrate(integrand, -8.0 * tau, 8.0 * tau, 32, r);
}

}  // namespace

TEST_CASE("kick integral") {
    const auto& m = trap();
    auto p0 = pulse();
    p0.xi = 0.0;
    CHECK(std::abs(quantum::kick_integral(m, p0, m.omega, p0.t_start, p0.t_end).value) == 0.0);
    for (double t : {-2e-5, 0.0, 3e-5, pulse().t_end}) {
        const auto k = quantum::kick_integral(m, pulse(), m.nu, pulse().t_start, t);
        const auto q = quantum::kick_quadrature(pulse(), m.nu, pulse().t_start, t);
        CHECK(std::abs(k.value - q) <= 1e-8 * std::max(std::abs(q), 0.35));
    }
    // slow limit: the full Gaussian area
    const double w = 1.0;
    const auto slow = quantum::kick_integral(m, pulse(), w, pulse().t_start, pulse().t_end);
    CHECK(std::abs(slow.value) / w == doctest::Approx(0.5 * constants::sqrt_pi * pulse().tau * 0.7).epsilon(1e-6));
}

TEST_CASE("dynamical phase functional") {
    const auto& p = pulse();
    const auto c = quantum::compare_phi(p, trap().omega, p.t_start, p.t_end);
    CHECK(std::abs(c.saddle - c.quadrature) < 1e-5 * std::abs(c.quadrature));
    const double wt = trap().omega * p.tau;
    CHECK(c.saddle == doctest::Approx(-std::sqrt(constants::pi / 32.0) * wt).epsilon(0.01));
    CHECK(quantum::phi_infinite_window(trap().omega, p.tau) == doctest::Approx(c.quadrature).epsilon(1e-9));
}

TEST_CASE("gate phase theta") {
    const auto& p = pulse();
    const double th = quantum::gate_phase_theta(trap(), p, p.t_start, p.t_end);
    CHECK(th / constants::pi == doctest::Approx(1.0).epsilon(1e-3));
    auto p0 = p;
    p0.xi = 0.0;
    CHECK(quantum::gate_phase_theta(trap(), p0, p.t_start, p.t_end) == 0.0);
    // weak coupling: theta approaches theta_cl
    const auto far = model::build_trap_model(model::calcium40(), kOmega, 400e-6);
    const double tf = quantum::gate_phase_theta(far, p, p.t_start, p.t_end);
    CHECK(std::abs(tf / classical::theta_cl(far, p) - 1.0) < 5.0 * far.epsilon);
}

TEST_CASE("unperturbed phases") {
    const auto& m = trap();
    const auto& p = pulse();
    MotionalState s;
    s.n_x = 3;
    s.N_Y = 2;
    const auto r00 = quantum::unperturbed_phases(m, p, s, 0, 0, p.t_start, p.t_end);
    CHECK(r00.phi_R == doctest::Approx(r00.kinetic_R));
    CHECK(r00.phi_r == doctest::Approx(r00.kinetic_r));
    const auto r11 = quantum::unperturbed_phases(m, p, s, 1, 1, p.t_start, p.t_end);
    CHECK(r11.dynamic_r == 0.0);
    const double phi_w = quantum::phi_of_omega(p, m.omega, p.t_start, p.t_end);
    CHECK(r11.dynamic_R == doctest::Approx(-4.0 * p.xi * p.xi * phi_w).epsilon(1e-14));
}

TEST_CASE("theta does not depend on the motional state") {
    const auto& p = pulse();
    quantum::PhaseOptions o;
    o.x0_cm = 0.37 * trap().a_omega;
    const double ref = quantum::gate_phase_theta(trap(), p, p.t_start, p.t_end);
    auto signed_total = [&](const MotionalState& s) {
        Eigen::Matrix2d phi;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const auto r = quantum::unperturbed_phases(trap(), p, s, a, b, p.t_start, p.t_end,
                                                           quantum::PhiMethod::Saddle, o);
                // The free-evolution terms are the same in all four branches and
                // large enough (~1e5 rad) to swamp 1e-12 in rounding, so the
                // totals are rebuilt from the remaining parts.
                CHECK(r.phi_R + r.phi_r == doctest::Approx(r.dynamic_R + r.dynamic_r + r.linear_R + r.linear_r +
                                                           r.kinetic_R + r.kinetic_r).epsilon(1e-14));
                phi(a, b) = r.dynamic_R + r.dynamic_r + r.linear_R + r.linear_r;
            }
        return classical::signed_sum(phi);
    };
    const double ground = signed_total({});
    // the +/-2e5 rad relative linear terms cancel pairwise; their rounding sets the floor
    CHECK(std::abs(ground - ref) < 1e-10 * ref);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 20; ++i) {
        const MotionalState s = random_state(rng, 60);
        CHECK(std::abs(signed_total(s) - ground) <= 1e-12 * ref);
    }
}

TEST_CASE("motional overlap") {
    const auto& m = trap();
    auto p0 = pulse();
    p0.xi = 0.0;
    MotionalState s;
    s.n_x = 12;
    CHECK(quantum::motional_overlap(m, p0, s, 0, 1, p0.t_start, p0.t_end).value == 1.0);
    const auto& p = pulse();
    const auto g = quantum::motional_overlap(m, p, MotionalState{}, 1, 0, -20e-6, 10e-6);
    const double kR = std::abs(quantum::kick_integral(m, p, m.omega, -20e-6, 10e-6).value);
    const double kr = std::abs(quantum::kick_integral(m, p, m.nu, -20e-6, 10e-6).value) *
                      std::pow(m.omega / m.nu, 1.5);
    CHECK(g.value == doctest::Approx(std::exp(-(kR * kR + kr * kr) / 2.0)).epsilon(1e-12));
    for (long n = 0; n <= 40; ++n) {
        MotionalState e;
        e.n_x = n;
        e.N_X = n;
        for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 1}})
            CHECK(quantum::motional_overlap(m, p, e, a, b, p.t_start, p.t_end).defect < 1e-8);
    }
}

TEST_CASE("perturbation coefficients") {
    const auto d = quantum::perturbation_deltas(trap(), pulse(), 0.0, 0.0, 0.0);
    CHECK(d.delta3_prime == 0.0);
    const double nt = d.nu_tilde;
    CHECK(d.delta4_prime == doctest::Approx(0.75 - 1.5 * nt + 0.75 * nt * nt).epsilon(1e-14));
    CHECK(d.delta4 == doctest::Approx(0.5 + 3.0 / (std::sqrt(2.0) * d.xi_tilde * d.xi_tilde) * (1.0 - nt)).epsilon(1e-14));
}

TEST_CASE("first-order shifts against ladder-operator expectation values") {
    const auto& m = trap();
    const auto& p = pulse();
    const double lam = 0.25 * m.epsilon * m.omega * std::pow(m.d / m.a_omega, 2);  // lambda / (hbar d)
    const double u = m.a_nu / (std::sqrt(2.0) * m.d);
    const long states[][3] = {{0, 0, 0}, {3, 0, 0}, {0, 2, 1}, {7, 4, 2}, {20, 1, 5}};
    for (const auto& st : states) {
        MotionalState s;
        s.n_x = st[0];
        s.n_y = st[1];
        s.n_z = st[2];
        const auto d = quantum::perturbation_deltas(m, p, s);
        for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 0}}) {
            const double S0 = std::sqrt(2.0) * d.xi_tilde * (a - b);
            const auto f = quantum::first_order_phase_shift(m, p, s, a, b, p.t_start, p.t_end);
            const double o3 = -lam * u * u * u * shifted_multipole(3, st[0], st[1], st[2], S0, d.nu_tilde, p.tau);
            const double o4 = -lam * u * u * u * u * shifted_multipole(4, st[0], st[1], st[2], S0, d.nu_tilde, p.tau);
            CHECK(f.k3 == doctest::Approx(o3).epsilon(1e-10));
            CHECK(f.k4 == doctest::Approx(o4).epsilon(1e-10));
        }
    }
}

TEST_CASE("static quartic coefficient against ladder algebra") {
    // delta4' = <P_4>/4 in the unshifted state; the printed z-part carries
    // n_z(n_z + 5) where the symmetric expectation value has n_z(3 n_z + 5).
    const auto& p = pulse();
    for (long nx : {0L, 2L, 5L})
        for (long ny : {0L, 1L, 4L})
            for (long nz : {0L, 3L}) {
                const auto d = quantum::perturbation_deltas(trap(), p, double(nx), double(ny), double(nz));
                const double nt = d.nu_tilde;
                const int dim = 16;
                const Eigen::MatrixXd X = ladder_x(dim);
                const Eigen::MatrixXd X2 = X * X, X4 = X2 * X2;
                const double rho2 = nt * (X2(ny, ny) + X2(nz, nz));
                const double rho4 = nt * nt * (X4(ny, ny) + 2.0 * X2(ny, ny) * X2(nz, nz) + X4(nz, nz));
                const double p4 = X4(nx, nx) - 3.0 * X2(nx, nx) * rho2 + 0.375 * rho4;
                const double verbatim_gap = (3.0 / 16.0) * nt * nt * 2.0 * double(nz * nz);
                CHECK(d.delta4_prime + verbatim_gap == doctest::Approx(p4 / 4.0).epsilon(1e-13));
            }
}

TEST_CASE("first-order shift structure") {
    const auto& m = trap();
    const auto& p = pulse();
    MotionalState s;
    s.n_x = 2;
    s.n_y = 1;
    for (int a = 0; a < 2; ++a) {
        const auto f = quantum::first_order_phase_shift(m, p, s, a, a, p.t_start, p.t_end);
        CHECK(f.delta_ab == 0.0);
    }
    const auto f01 = quantum::first_order_phase_shift(m, p, s, 0, 1, p.t_start, p.t_end);
    const auto f10 = quantum::first_order_phase_shift(m, p, s, 1, 0, p.t_start, p.t_end);
    CHECK(f01.k3 == doctest::Approx(-f10.k3).epsilon(1e-15));
    CHECK(f01.k4 == doctest::Approx(f10.k4).epsilon(1e-15));
    CHECK(f01.tail_bound > 0.0);
    CHECK(f01.tail_bound < 1e-2 * std::abs(f01.k4));

    // ground state: the signed sum of the shifts is the closed-form delta theta
    const MotionalState g;
    Eigen::Matrix2d t;
    double tail = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const auto f = quantum::first_order_phase_shift(m, p, g, a, b, p.t_start, p.t_end);
            t(a, b) = f.delta_ab;
            tail = std::max(tail, f.tail_bound);
        }
    // The closed form keeps only the leading order in eps and drops the
    // transverse zero-point term (1 - nu_tilde) of delta4.
    const double closed = quantum::delta_theta_closed(m, p, 0, 0, 0);
    const auto d = quantum::perturbation_deltas(m, p, g);
    const double expect = std::pow(1.0 + m.epsilon, -3.0) * std::pow(m.omega / m.nu, 2) * (m.omega / m.omega_tilde) *
                          (1.0 + 6.0 * (1.0 - d.nu_tilde) / (std::sqrt(2.0) * d.xi_tilde * d.xi_tilde));
    CHECK(classical::signed_sum(t) / closed == doctest::Approx(expect).epsilon(1e-10));
    CHECK(tail < 1e-2 * std::abs(closed));
    CHECK(classical::signed_sum(t) == doctest::Approx(quantum::delta_theta_perturbative(m, p, 0, 0, 0)).epsilon(1e-13));
}

TEST_CASE("delta theta is linear in the occupations") {
    const auto& m = trap();
    const auto& p = pulse();
    const double base = quantum::delta_theta_closed(m, p, 0, 0, 0);
    const double r = m.a_omega / m.d;
    const double th = classical::theta_cl(m, p);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> u(0, 200);
    for (int i = 0; i < 20; ++i) {
        const double nx = u(rng), ny = u(rng), nz = u(rng);
        CHECK(quantum::delta_theta_closed(m, p, nx, ny, nz) - base ==
              doctest::Approx(8.0 * r * r * th * 3.0 * (2.0 * nx - ny - nz)).epsilon(1e-12));
    }
}

TEST_CASE("spin echo removes the cubic contribution") {
    const auto& m = trap();
    const auto& p = pulse();
    const auto e = classical::make_ensemble(m, 1e-3);
    std::mt19937_64 rng(17);
    quantum::ComposeOptions echo, plain;
    echo.enforce_calibration = false;
    plain.echo = false;
    plain.enforce_calibration = false;
    for (int i = 0; i < 20; ++i) {
        const MotionalState s = random_state(rng, 80);
        CHECK(quantum::compose_gate(m, p, e, s, echo).odd_k_residual == 0.0);
        CHECK(quantum::compose_gate(m, p, e, s, plain).odd_k_residual > 0.0);
    }
}

TEST_CASE("composed gate at zero temperature") {
    const auto& m = trap();
    // per-pulse tuning of the echo condition
    const auto tr = quantum::tune_tau(m, 0.7, constants::pi, quantum::TuneMode::Echo);
    const auto p = model::make_pulse(0.7, tr.tau);
    const auto g = quantum::compose_gate(m, p, classical::make_ensemble(m, 0.0), MotionalState{});
    CHECK(std::abs(g.Delta_theta) < 1e-15);
    CHECK(std::abs(g.calibration_residual) < 1e-6);
    CHECK(g.fidelity == 1.0);
    // conditional phase of the composed gate is pi
    const double cond = classical::signed_sum(g.table);
    CHECK(std::abs(std::remainder(cond - constants::pi, 2.0 * constants::pi)) < 1e-6);
    // an untuned pulse is rejected
    CHECK_THROWS_AS(quantum::compose_gate(m, pulse(), classical::make_ensemble(m, 0.0), MotionalState{}),
                    CalibrationError);
}

TEST_CASE("thermal fidelity") {
    const auto& m = trap();
    const auto& p = pulse();
    CHECK(quantum::quantum_fidelity(m, p, 0.0).exact == 1.0);
    const auto occ = quantum::thermal_occupation(m, 1e-3);
    CHECK(occ.n_x == doctest::Approx(occ.gamma_x / (1.0 - occ.gamma_x)).epsilon(1e-14));

    const double base = 1.0 - quantum::quantum_fidelity(m, p, 1e-3).exact;
    for (int g = 2; g <= 5; ++g) {
        quantum::FidelityOptions o;
        o.gates = g;
        const double dg = 1.0 - quantum::quantum_fidelity(m, p, 1e-3, o).exact;
        CHECK(dg / (g * g * base) == doctest::Approx(1.0).epsilon(0.01));
    }

    // The exact deficit sits a roughly constant factor above the quoted
    // closed approximation across the low-temperature range.
    for (double kt : {5.0, 10.0, 20.0, 50.0}) {
        const double T = kt * constants::hbar * m.omega / constants::boltzmann;
        const auto f = quantum::quantum_fidelity(m, p, T);
        const double ratio = (1.0 - f.exact) / (1.0 - f.eval_f);
        CHECK(ratio > 3.0);
        CHECK(ratio < 5.0);
        CHECK(f.exact >= 0.0);
        CHECK(f.exact <= 1.0);
    }

    const double tc = quantum::fidelity_crossing(m, p, quantum::FidelityForm::Exact);
    CHECK(tc > 0.5e-3);
    CHECK(tc < 2e-3);
    CHECK(1.0 - quantum::quantum_fidelity(m, p, 0.999 * tc).exact < 1e-6);
    CHECK(1.0 - quantum::quantum_fidelity(m, p, 1.001 * tc).exact > 1e-6);
}

TEST_CASE("single-particle phase correction") {
    Eigen::Matrix2d c = Eigen::Matrix2d::Constant(0.83);
    const Eigen::Matrix2d zc = quantum::undo_single_particle_phases(c);
    CHECK(zc.cwiseAbs().maxCoeff() < 1e-15);
    Eigen::Matrix2d only = Eigen::Matrix2d::Zero();
    only(1, 1) = 1.3;
    const Eigen::Matrix2d oc = quantum::undo_single_particle_phases(only);
    CHECK(oc(1, 1) == doctest::Approx(1.3));
    CHECK(oc(0, 0) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 20; ++i) {
        Eigen::Matrix2d r;
        r << u(rng), u(rng), u(rng), u(rng);
        const Eigen::Matrix2d k = quantum::undo_single_particle_phases(r);
        CHECK(std::abs(k(0, 0)) < 1e-13);
        CHECK(std::abs(k(0, 1)) < 1e-13);
        CHECK(std::abs(k(1, 0)) < 1e-13);
        CHECK(k(1, 1) == doctest::Approx(classical::signed_sum(r)).epsilon(1e-13));
    }
}

TEST_CASE("pulse-length tuning") {
    const auto& m = trap();
    const auto one = quantum::tune_tau(m, 0.7, constants::pi, quantum::TuneMode::PerPulse);
    CHECK(one.tau == doctest::Approx(41.1069e-6).epsilon(0.01));
    CHECK(std::abs(one.residual) < 1e-9);
    const auto two = quantum::tune_tau(m, 0.7, 2.0 * constants::pi, quantum::TuneMode::PerPulse);
    CHECK(two.tau / one.tau == doctest::Approx(2.0).epsilon(0.01));
    const auto echo = quantum::tune_tau(m, 0.7, constants::pi, quantum::TuneMode::Echo);
    CHECK(echo.tau / one.tau == doctest::Approx(0.5).epsilon(0.01));
    CHECK_THROWS_AS(quantum::tune_tau(m, 0.7, 0.0, quantum::TuneMode::PerPulse), DomainError);
    // theta grows with tau
    double prev = 0.0;
    for (double tau = 5e-6; tau < 100e-6; tau += 5e-6) {
        const auto p = model::make_pulse(0.7, tau);
        const double th = quantum::gate_phase_theta(m, p, p.t_start, p.t_end);
        CHECK(th > prev);
        prev = th;
    }
}
