#include "mtg/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/quadrature.hpp"

namespace mtg::quantum {

using namespace mtg::constants;

namespace {

const quad::Rule& gl16() {
    static const quad::Rule r = quad::gauss_legendre(16);
    return r;
}

void check_bit(int v, const char* what) {
    if (v != 0 && v != 1) throw DomainError(std::string(what) + " must be 0 or 1");
}

// e^{-x^2} erf(u - i x), x = W tau / 2
Complex scaled_I(double u, double x) { return specfn::exp_scaled_erf(Complex(u, -x), -x * x); }

// Unit-amplitude kick integral.
Complex unit_kick(double W, double tau, double t0, double t) {
    const double x = 0.5 * W * tau;
    return 0.25 * sqrt_pi * W * tau * (scaled_I(t / tau, x) - scaled_I(t0 / tau, x));
}

int panel_count(double W, double tau, double t0, double t) {
    double h = 0.25 * tau;
    if (W > 0.0) h = std::min(h, pi / W);
    return std::max(1, static_cast<int>(std::ceil((t - t0) / h)));
}

double erf_window(double tau, double t0, double t) { return std::erf(t / tau) - std::erf(t0 / tau); }

double lambda_over_hbar_d(const model::TrapModel& m) {
    return 0.25 * m.epsilon * m.omega * (m.d / m.a_omega) * (m.d / m.a_omega);
}

// 1 - L_n(z) e^{-z/2} for z >= 0, keeping accuracy when the result is tiny.
double overlap_defect_1d(long n, double z) {
    const double e_def = -std::expm1(-0.5 * z);
    double l_def;
    if (static_cast<double>(n) * z < 0.5) {
        // 1 - L_n(z) = -sum_{k>=1} C(n,k) (-z)^k / k!
        double term = 1.0, sum = 0.0;
        for (long k = 1; k <= n; ++k) {
            term *= -static_cast<double>(n - k + 1) * z / (static_cast<double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        l_def = -sum;
    } else {
        l_def = 1.0 - specfn::confluent_m_neg(static_cast<unsigned>(n), z);
    }
    return e_def + l_def - e_def * l_def;
}

double wrap_pi(double x) {
    x = std::remainder(x, 2.0 * pi);
    return x;
}

}  // namespace

Complex kick_quadrature(const model::ForcePulse& p, double W, double t0, double t) {
    const int panels = panel_count(W, p.tau, t0, t);
    const Complex v = quad::integrate(
        [&](double s) {
            const double u = s / p.tau;
            return std::exp(-u * u) * std::exp(Complex(0.0, W * s));
        },
        t0, t, panels, gl16());
    return 0.5 * W * p.xi * v;
}

KickIntegral kick_integral(const model::TrapModel&, const model::ForcePulse& p, double W, double t0,
                           double t, bool validate) {
    if (!(t0 >= p.t_start && t <= p.t_end)) throw DomainError("kick_integral: (t0, t) outside the pulse window");
    KickIntegral k{p.xi * unit_kick(W, p.tau, t0, t), W, t0, t};
    if (validate) {
        const Complex q = kick_quadrature(p, W, t0, t);
        const double scale = std::max(std::abs(k.value), 0.5 * std::abs(p.xi));
        if (std::abs(q - k.value) > 1e-8 * scale) {
            std::ostringstream os;
            os << "kick_integral: closed form and quadrature disagree (|dK| = " << std::abs(q - k.value)
               << ", scale " << scale << ")";
            throw NumericError(os.str());
        }
    }
    return k;
}

double phi_infinite_window(double W, double tau) {
    const double y = W * tau / std::sqrt(2.0);
    const double dawson = 0.5 * sqrt_pi * specfn::faddeeva(Complex(y, 0.0)).imag();
    return -0.25 * sqrt_pi * (W * tau) * (W * tau) * dawson;
}

double phi_of_omega(const model::ForcePulse& p, double W, double t0, double t, PhiMethod method) {
    const double tau = p.tau;
    if (method == PhiMethod::Quadrature) {
        const int panels = panel_count(W, tau, t0, t);
        return quad::integrate(
            [&](double s) {
                const double u = s / tau;
                const Complex k = unit_kick(W, tau, t0, s) * std::exp(Complex(0.0, -W * s));
                return 0.5 * W * std::exp(-u * u) * k.imag();
            },
            t0, t, panels, gl16());
    }
    // Saddle-point closed form with the common e^{x^2} factor of A, B, C removed.
    const double x = 0.5 * W * tau;
    const Complex e0 = scaled_I(t0 / tau, x);
    const Complex ez = scaled_I(0.0, x);
    const double A = e0.imag() + (Complex(0.0, -1.0) * std::conj(ez)).real();
    const double B = W * e0.real();
    const double rad = A * A * (0.5 * W * W + 1.0 / (tau * tau)) - A * W / (sqrt_pi * tau) + 0.25 * B * B;
    if (!(rad > 0.0)) throw NumericError("phi_of_omega: saddle-point radicand not positive");
    const double C = 2.0 * std::sqrt(rad);
    const double bc = B / C;
    const double D = std::erf(bc + C * t / (2.0 * A)) - std::erf(bc + C * t0 / (2.0 * A));
    return -pi * W * W * tau * (A * A / (8.0 * C)) * D * std::exp(bc * bc);
}

PhiComparison compare_phi(const model::ForcePulse& p, double W, double t0, double t) {
    PhiComparison c;
    c.saddle = phi_of_omega(p, W, t0, t, PhiMethod::Saddle);
    c.quadrature = phi_of_omega(p, W, t0, t, PhiMethod::Quadrature);
    c.relative_difference = std::abs(c.saddle - c.quadrature) / std::abs(c.quadrature);
    return c;
}

double gate_phase_theta(const model::TrapModel& m, const model::ForcePulse& p, double t0, double t,
                        PhiMethod method) {
    const double rho = std::pow(m.omega / m.nu, 3);
    return 2.0 * p.xi * p.xi *
           (rho * phi_of_omega(p, m.nu, t0, t, method) - phi_of_omega(p, m.omega, t0, t, method));
}

Eigen::Matrix2d PhaseTable::total() const {
    Eigen::Matrix2d t = phi_R + phi_r + delta_ab;
    t.array() += delta_prime;
    return t;
}

double PhaseTable::signed_sum() const {
    const Eigen::Matrix2d t = total();
    return t(0, 0) - t(0, 1) - t(1, 0) + t(1, 1);
}

namespace {

struct PhiPair {
    double w, nu;
};

PhaseRow row_from(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s, int a,
                  int b, double t0, double t, const PhiPair& phi, const PhaseOptions& o) {
    PhaseRow r;
    const double xi2 = p.xi * p.xi;
    const double rho = std::pow(m.omega / m.nu, 3);
    const double window = erf_window(p.tau, t0, t);
    const double span = t - t0;

    r.dynamic_R = -static_cast<double>((a + b) * (a + b)) * xi2 * phi.w;
    r.linear_R = (a + b) * m.omega * (o.x0_cm / m.a_omega) * p.xi * p.tau * 0.5 * sqrt_pi * window;
    r.kinetic_R = -static_cast<double>(s.N_X + s.N_Y + s.N_Z) * m.omega * span;

    r.dynamic_r = -static_cast<double>((a - b) * (a - b)) * xi2 * rho * phi.nu;
    r.linear_r = (b - a) * (m.d / m.a_omega) * m.omega * p.xi * p.tau * 0.25 * sqrt_pi * window;
    r.kinetic_r = -(static_cast<double>(s.n_x) * m.nu + static_cast<double>(s.n_y + s.n_z) * m.nu_perp) * span;

    r.phi_R = r.dynamic_R + r.linear_R + r.kinetic_R;
    r.phi_r = r.dynamic_r + r.linear_r + r.kinetic_r;

    const FirstOrderShift f = first_order_phase_shift(m, p, s, a, b, t0, t, o.k_max, o.shift_ratio);
    r.delta_ab = f.delta_ab;
    r.delta_prime = f.delta_prime;
    return r;
}

}  // namespace

PhaseRow unperturbed_phases(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                            int alpha, int beta, double t0, double t, PhiMethod method,
                            const PhaseOptions& o) {
    check_bit(alpha, "alpha");
    check_bit(beta, "beta");
    const PhiPair phi{phi_of_omega(p, m.omega, t0, t, method), phi_of_omega(p, m.nu, t0, t, method)};
    return row_from(m, p, s, alpha, beta, t0, t, phi, o);
}

PhaseTable phase_table(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                       double t0, double t, PhiMethod method, const PhaseOptions& o) {
    const PhiPair phi{phi_of_omega(p, m.omega, t0, t, method), phi_of_omega(p, m.nu, t0, t, method)};
    PhaseTable tab;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const PhaseRow r = row_from(m, p, s, a, b, t0, t, phi, o);
            tab.phi_R(a, b) = r.phi_R;
            tab.phi_r(a, b) = r.phi_r;
            tab.delta_ab(a, b) = r.delta_ab;
            tab.delta_prime = r.delta_prime;
            tab.kinetic_R = r.kinetic_R;
            tab.kinetic_r = r.kinetic_r;
        }
    tab.delta_tail_bound = first_order_phase_shift(m, p, s, 0, 1, t0, t, o.k_max, o.shift_ratio).tail_bound;
    return tab;
}

Overlap motional_overlap(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                         int alpha, int beta, double t0, double t) {
    check_bit(alpha, "alpha");
    check_bit(beta, "beta");
    if (s.n_x < 0 || s.N_X < 0) throw DomainError("motional_overlap: occupations must be >= 0");
    const Complex kw = p.xi * unit_kick(m.omega, p.tau, t0, t);
    const Complex kn = p.xi * unit_kick(m.nu, p.tau, t0, t);
    const double zR = std::norm(static_cast<double>(alpha + beta) * kw);
    const double zr = std::norm(static_cast<double>(beta - alpha) * std::pow(m.omega / m.nu, 1.5) * kn);

    const double dR = overlap_defect_1d(s.N_X, zR);
    const double dr = overlap_defect_1d(s.n_x, zr);
    Overlap o;
    o.center_of_mass = 1.0 - dR;
    o.relative = 1.0 - dr;
    o.defect = dR + dr - dR * dr;
    o.value = 1.0 - o.defect;
    return o;
}

Deltas perturbation_deltas(const model::TrapModel& m, const model::ForcePulse& p, double nx, double ny,
                           double nz, double r) {
    if (nx < 0.0 || ny < 0.0 || nz < 0.0) throw DomainError("perturbation_deltas: occupations must be >= 0");
    Deltas d;
    d.xi_tilde = std::sqrt(2.0) * p.xi * std::pow(1.0 + m.epsilon, -0.75);
    d.nu_tilde = m.nu / m.nu_perp;
    const double xt2 = d.xi_tilde * d.xi_tilde;
    const double nt = d.nu_tilde;
    const double B = 2.0 * nx + 1.0 - nt * (ny + nz + 1.0);
    d.delta3 = -r * r * r / std::sqrt(3.0) - 1.5 * r / xt2 * B;
    d.delta4 = 0.5 * r * r * r * r + 3.0 * r * r / (std::sqrt(2.0) * xt2) * B;
    d.delta3_prime = 0.0;
    d.delta4_prime = 0.75 * (2.0 * nx * (nx + 1.0) + 1.0) - 1.5 * nt * (2.0 * nx + 1.0) * (ny + nz + 1.0) +
                     (3.0 / 16.0) * nt * nt * (ny * (3.0 * ny + 5.0) + nz * (nz + 5.0) + 4.0 * (1.0 + ny * nz));
    return d;
}

Deltas perturbation_deltas(const model::TrapModel& m, const model::ForcePulse& p, const MotionalState& s,
                           double r) {
    return perturbation_deltas(m, p, static_cast<double>(s.n_x), static_cast<double>(s.n_y),
                               static_cast<double>(s.n_z), r);
}

FirstOrderShift first_order_phase_shift(const model::TrapModel& m, const model::ForcePulse& p,
                                        const MotionalState& s, int alpha, int beta, double t0, double t,
                                        int k_max, double r) {
    check_bit(alpha, "alpha");
    check_bit(beta, "beta");
    if (k_max < 3 || k_max > 6) throw DomainError("first_order_phase_shift: k_max must be in 3..6");
    const Deltas d = perturbation_deltas(m, p, s, r);
    const double lam = lambda_over_hbar_d(m);
    const double z = (m.a_nu / m.d) * d.xi_tilde * static_cast<double>(alpha - beta);
    const double pref = -sqrt_pi * p.tau * lam;

    FirstOrderShift f;
    // delta3, delta4 hold 1/xi_tilde^2 and are infinite at xi = 0
    if (z != 0.0) {
        f.k3 = pref * z * z * z * d.delta3;
        f.k4 = k_max >= 4 ? pref * z * z * z * z * d.delta4 : 0.0;
    }
    f.delta_ab = f.k3 + f.k4;
    const double an = m.a_nu / m.d;
    f.delta_prime = k_max >= 4 ? -(t - t0) * lam * an * an * an * an * d.delta4_prime : 0.0;

    const double zabs = (m.a_nu / m.d) * d.xi_tilde;
    const double grow = static_cast<double>(s.n_x + s.n_y + s.n_z) + 1.0;
    for (int k = 5; k <= 6; ++k)
        f.tail_bound += sqrt_pi * p.tau * lam * std::pow(zabs, k) * std::pow(grow, 0.5 * k);
    return f;
}

double delta_theta_perturbative(const model::TrapModel& m, const model::ForcePulse& p, double nx,
                                double ny, double nz, int k_max, double r) {
    if (k_max < 4) return 0.0;
    const Deltas d = perturbation_deltas(m, p, nx, ny, nz, r);
    const double z = (m.a_nu / m.d) * d.xi_tilde;
    if (z == 0.0) return 0.0;
    // -(Delta^{01} + Delta^{10}); odd k cancel.
    return 2.0 * sqrt_pi * p.tau * lambda_over_hbar_d(m) * z * z * z * z * d.delta4;
}

double delta_theta_closed(const model::TrapModel& m, const model::ForcePulse& p, double nx, double ny,
                          double nz) {
    const double r = m.a_omega / m.d;
    return 8.0 * r * r * classical::theta_cl(m, p) *
           (std::sqrt(2.0) * p.xi * p.xi + 3.0 * (2.0 * nx - ny - nz));
}

ThermalOccupation thermal_occupation(const model::TrapModel& m, double T) {
    if (!(T >= 0.0)) throw DomainError("thermal_occupation: temperature must be >= 0");
    ThermalOccupation o;
    if (T == 0.0) return o;
    o.gamma_x = std::exp(-hbar * m.nu / (boltzmann * T));
    o.gamma_perp = std::exp(-hbar * m.nu_perp / (boltzmann * T));
    o.n_x = o.gamma_x / (1.0 - o.gamma_x);
    o.n_perp = o.gamma_perp / (1.0 - o.gamma_perp);
    return o;
}

double mean_delta_theta(const model::TrapModel& m, const model::ForcePulse& p, double T) {
    const ThermalOccupation o = thermal_occupation(m, T);
    return delta_theta_closed(m, p, o.n_x, o.n_perp, o.n_perp);
}

GateReport compose_gate(const model::TrapModel& m, const model::ForcePulse& p,
                        const classical::ThermalEnsemble& e, const MotionalState& s, const ComposeOptions& o) {
    const double t0 = p.t_start, t = p.t_end;
    const PhaseTable tab = phase_table(m, p, s, t0, t, o.method, o.phases);
    const Eigen::Matrix2d phi = tab.total();
    const double xi2 = p.xi * p.xi;
    const double rho = std::pow(m.omega / m.nu, 3);
    const double phi_w = phi_of_omega(p, m.omega, t0, t, o.method);
    const double phi_nu = phi_of_omega(p, m.nu, t0, t, o.method);

    GateReport g;
    g.theta = 2.0 * xi2 * (rho * phi_nu - phi_w);
    g.delta_theta = delta_theta_closed(m, p, static_cast<double>(s.n_x), static_cast<double>(s.n_y),
                                       static_cast<double>(s.n_z));
    g.mean_delta_theta = mean_delta_theta(m, p, e.temperature);
    g.Delta_theta = g.delta_theta - g.mean_delta_theta;

    g.delta_theta_perturbative = delta_theta_perturbative(
        m, p, static_cast<double>(s.n_x), static_cast<double>(s.n_y), static_cast<double>(s.n_z),
        o.phases.k_max, o.phases.shift_ratio);

    // The single-qubit rotation uses the perturbative mean so that the composed
    // table is self-consistent; it is linear in the occupations.
    const ThermalOccupation occ = thermal_occupation(m, e.temperature);
    const double mean_pert =
        delta_theta_perturbative(m, p, occ.n_x, occ.n_perp, occ.n_perp, o.phases.k_max, o.phases.shift_ratio);
    const Deltas d0 = perturbation_deltas(m, p, s, o.phases.shift_ratio);

    g.s0 = 2.0 * xi2 * phi_w;
    g.s1 = 2.0 * xi2 * rho * phi_nu + mean_pert;
    const double sv[2] = {g.s0, g.s1};

    Eigen::Matrix2d k3 = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            k3(a, b) = first_order_phase_shift(m, p, s, a, b, t0, t, 3, o.phases.shift_ratio).k3;

    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            if (o.echo) {
                g.table(a, b) = phi(a, b) + phi(1 - a, 1 - b) + sv[a] + sv[b];
            } else {
                g.table(a, b) = 2.0 * phi(a, b) + sv[a] + sv[b];
            }
        }
    double odd = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double c = o.echo ? k3(a, b) + k3(1 - a, 1 - b) - 2.0 * k3(0, 0) : 2.0 * (k3(a, b) - k3(0, 0));
            odd = std::max(odd, std::abs(c));
        }
    g.odd_k_residual = odd;

    g.Theta_global = g.table(0, 0);
    g.Delta_theta_table = -(g.table(0, 1) - g.table(0, 0));
    g.calibration_residual = wrap_pi(g.table(1, 1) - g.table(0, 0) - pi);

    const Deltas ds = d0;
    const double r = m.a_omega / m.d;
    const double n_all = static_cast<double>(s.n_x + s.n_y + s.n_z + s.N_X + s.N_Y + s.N_Z);
    g.Theta_closed = 2.0 * m.omega *
                     (sqrt_pi * p.xi * p.tau * o.phases.x0_cm / m.a_omega -
                      (n_all + m.epsilon * r * r * r * r * ds.delta4_prime) * (t - t0));

    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            g.overlap_defect = std::max(g.overlap_defect, motional_overlap(m, p, s, a, b, t0, t).defect);
    g.fidelity = quantum_fidelity(m, p, e.temperature).exact;

    if (o.echo && o.enforce_calibration && std::abs(g.calibration_residual) > o.calibration_tolerance) {
        std::ostringstream os;
        os.precision(10);
        os << "compose_gate: calibration residual " << g.calibration_residual
           << " rad exceeds tolerance; re-tune tau (echo condition 2 theta + 2 <<delta theta>> = pi)";
        throw CalibrationError(os.str());
    }
    return g;
}

namespace {

// (1 - g) sum_n g^n e^{i a n} and (1 - g)^2 sum_m (m + 1) g^m e^{i a m}, truncated
// once the weight falls below 1e-16 of the accumulated weight.
Complex geometric_sum(double g, double a, int power, long& terms) {
    Complex acc = 0.0;
    double wsum = 0.0;
    double gn = 1.0;
    const double norm = power == 1 ? (1.0 - g) : (1.0 - g) * (1.0 - g);
    for (long n = 0;; ++n) {
        const double w = norm * gn * (power == 1 ? 1.0 : static_cast<double>(n + 1));
        acc += w * std::exp(Complex(0.0, a * static_cast<double>(n)));
        wsum += w;
        gn *= g;
        if (w < 1e-16 * wsum || gn == 0.0) {
            terms = n + 1;
            break;
        }
        if (n > 100000000) throw ConvergenceError("quantum_fidelity: thermal sum did not converge");
    }
    return acc;
}

}  // namespace

QuantumFidelity quantum_fidelity(const model::TrapModel& m, const model::ForcePulse& p, double T,
                                 const FidelityOptions& o) {
    if (!(T >= 0.0)) throw DomainError("quantum_fidelity: temperature must be >= 0");
    if (o.gates < 1) throw DomainError("quantum_fidelity: gate count must be >= 1");
    QuantumFidelity f;
    if (T == 0.0) return f;
    const ThermalOccupation occ = thermal_occupation(m, T);
    if (!(occ.gamma_x < 1.0) || !(occ.gamma_perp < 1.0))
        throw DomainError("quantum_fidelity: thermal sum does not converge (gamma >= 1)");

    const double r = m.a_omega / m.d;
    const double th = classical::theta_cl(m, p);
    const double c = o.gates * 24.0 * r * r * th;
    const double mean = 2.0 * occ.n_x - 2.0 * occ.n_perp;
    const Complex sx = geometric_sum(occ.gamma_x, 2.0 * c, 1, f.terms_x);
    const Complex sm = geometric_sum(occ.gamma_perp, -c, 2, f.terms_perp);
    f.exact = 0.5 * (1.0 + (std::exp(Complex(0.0, -c * mean)) * sx * sm).real());

    const double g2 = static_cast<double>(o.gates) * o.gates;
    const double e = m.epsilon;
    const double e5 = o.eps5_as_power ? std::pow(1.0 + e, 5) : 1.0 + std::pow(e, 5);
    const double gx = occ.gamma_x;
    f.min_fid_q = 1.0 - g2 * 216.0 * th * th / (e5 * (1.0 - 0.25 * e * e)) * r * r * r * r * gx /
                            ((1.0 - gx) * (1.0 - gx));
    const double kt = boltzmann * T / (hbar * m.omega);
    f.eval_f = 1.0 - g2 * 216.0 * (th * kt) * (th * kt) * r * r * r * r;
    return f;
}

double fidelity_crossing(const model::TrapModel& m, const model::ForcePulse& p, FidelityForm form,
                         double deficit) {
    if (!(deficit > 0.0 && deficit < 1.0)) throw DomainError("fidelity_crossing: deficit must be in (0, 1)");
    auto def = [&](double T) {
        const QuantumFidelity q = quantum_fidelity(m, p, T);
        const double v = form == FidelityForm::Exact ? q.exact : form == FidelityForm::MinFidQ ? q.min_fid_q : q.eval_f;
        return 1.0 - v - deficit;
    };
    double lo = 1e-7, hi = 1e-3;
    if (def(lo) > 0.0) throw ConvergenceError("fidelity_crossing: deficit exceeded at the lowest temperature");
    int expand = 0;
    while (def(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expand > 60) throw ConvergenceError("fidelity_crossing: no bracket found");
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (def(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SingleQubitPhases single_particle_corrections(const Eigen::Matrix2d& phi) {
    SingleQubitPhases s;
    s.s0 = -0.5 * phi(0, 0);
    s.s1_1 = -phi(1, 0) - s.s0;
    s.s2_1 = -phi(0, 1) - s.s0;
    return s;
}

Eigen::Matrix2d undo_single_particle_phases(const Eigen::Matrix2d& phi) {
    const SingleQubitPhases s = single_particle_corrections(phi);
    const double q1[2] = {s.s0, s.s1_1};
    const double q2[2] = {s.s0, s.s2_1};
    Eigen::Matrix2d out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out(a, b) = phi(a, b) + q1[a] + q2[b];
    // Entries that cancel analytically are pinned to zero.
    out(0, 0) = out(0, 1) = out(1, 0) = 0.0;
    out(1, 1) = phi(0, 0) - phi(0, 1) - phi(1, 0) + phi(1, 1);
    return out;
}

TuneResult tune_tau(const model::TrapModel& m, double xi, double target, TuneMode mode, double T,
                    double wf, double lo, double hi) {
    if (!(target > 0.0) || !std::isfinite(target))
        throw DomainError("tune_tau: target phase must be positive (zero is degenerate)");
    if (!(xi > 0.0)) throw DomainError("tune_tau: xi must be positive");
    if (!(wf >= 3.0)) throw DomainError("tune_tau: window factor must be >= 3");
    const double factor = mode == TuneMode::Echo ? 2.0 : 1.0;

    auto phase_at = [&](double tau) {
        const model::ForcePulse p = model::make_pulse(xi, tau, -wf * tau, wf * tau);
        // perturbative mean, matching the single-qubit rotation in compose_gate
        const ThermalOccupation occ = thermal_occupation(m, T);
        const double mean = delta_theta_perturbative(m, p, occ.n_x, occ.n_perp, occ.n_perp);
        return factor * (gate_phase_theta(m, p, p.t_start, p.t_end) + mean);
    };

    TuneResult r;
    if (lo <= 0.0 || hi <= lo) {
        const model::ForcePulse unit = model::make_pulse(xi, 1.0);
        const double guess = target / (factor * classical::theta_cl(m, unit));
        lo = 0.5 * guess;
        hi = 2.0 * guess;
    }
    double flo = phase_at(lo) - target, fhi = phase_at(hi) - target;
    std::vector<std::pair<double, double>> samples{{lo, flo + target}, {hi, fhi + target}};
    for (int i = 0; i < 40 && flo * fhi > 0.0; ++i) {
        if (flo > 0.0) {
            lo *= 0.5;
            flo = phase_at(lo) - target;
            samples.emplace_back(lo, flo + target);
        } else {
            hi *= 2.0;
            fhi = phase_at(hi) - target;
            samples.emplace_back(hi, fhi + target);
        }
    }
    if (flo * fhi > 0.0) {
        std::ostringstream os;
        os << "tune_tau: no bracket found; theta(tau) samples:";
        for (auto& [t, v] : samples) os << " (" << t << ", " << v << ")";
        throw ConvergenceError(os.str());
    }
    r.lo = lo;
    r.hi = hi;
    while (hi - lo > 1e-12 * hi && r.iterations < 200) {
        const double mid = 0.5 * (lo + hi);
        const double fm = phase_at(mid) - target;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        ++r.iterations;
    }
    r.tau = 0.5 * (lo + hi);
    const double v = phase_at(r.tau);
    r.residual = v - target;
    r.theta = v / factor;
    return r;
}

}  // namespace mtg::quantum
