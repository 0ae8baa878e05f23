#include "mtg/numint.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>

#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/quantum.hpp"

namespace mtg::numint {

using namespace mtg::constants;

void validate(const SimGrid& g) {
    if (g.n_cut < 4 || g.l_cut < 4) throw DomainError("SimGrid: cutoffs must be >= 4");
    if (g.k_max < 2 || g.k_max > 4) throw DomainError("SimGrid: k_max must be 2, 3 or 4");
    if (!(g.tol > 0.0)) throw DomainError("SimGrid: tol must be positive");
    if (g.dt < 0.0) throw DomainError("SimGrid: dt must be >= 0");
}

std::vector<StencilEntry> stencil_entries(int k, int n, int l, double nt) {
    std::vector<StencilEntry> e;
    auto sq = [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; };
    const double N = n, L = l;
    auto add = [&](int dn, int dl, double c) {
        if (n + dn < 0 || l + dl < 0 || c == 0.0) return;
        e.push_back({n + dn, l + dl, c});
    };
    if (k == 3) {
        add(-3, 0, sq(N * (N - 1) * (N - 2)));
        add(-1, 0, 3.0 * N * std::sqrt(N));
        add(+1, 0, 3.0 * (N + 1) * std::sqrt(N + 1));
        add(+3, 0, sq((N + 1) * (N + 2) * (N + 3)));
        const double c = -1.5 * nt;
        add(-1, -2, c * sq(N * L * (L - 1)));
        add(-1, +2, c * sq(N * (L + 1) * (L + 2)));
        add(-1, 0, c * (2 * L + 1) * sq(N));
        add(+1, 0, c * (2 * L + 1) * sq(N + 1));
        add(+1, -2, c * sq((N + 1) * L * (L - 1)));
        add(+1, +2, c * sq((N + 1) * (L + 1) * (L + 2)));
    } else if (k == 4) {
        const double lo2 = sq(L * (L - 1)), hi2 = sq((L + 1) * (L + 2));
        const double nm2 = sq(N * (N - 1)), np2 = sq((N + 1) * (N + 2));
        add(-4, 0, -sq(N * (N - 1) * (N - 2) * (N - 3)));
        add(-2, -2, 3.0 * nt * nm2 * lo2);
        add(-2, +2, 3.0 * nt * nm2 * hi2);
        add(-2, 0, nm2 * (3.0 * nt * (2 * L + 1) - 2.0 * (2 * N - 1)));
        add(0, -4, -3.0 * nt * nt / 8.0 * sq(L * (L - 1) * (L - 2) * (L - 3)));
        add(0, -2, 3.0 * nt * lo2 * ((2 * N + 1) - nt / 4.0 * (2 * L - 1)));
        add(0, 0,
            -(9.0 * nt * nt / 8.0 * (2 * L * (L + 1) + 1) - 3.0 * nt * (2 * N + 1) * (2 * L + 1) +
              3.0 * (2 * N * (N + 1) + 1)));
        add(0, +2, -0.75 * nt * hi2 * (nt * (2 * L + 3) - 4.0 * (2 * N + 1)));
        add(0, +4, -3.0 * nt * nt / 8.0 * sq((L + 1) * (L + 2) * (L + 3) * (L + 4)));
        add(+2, 0, np2 * (3.0 * nt * (2 * L + 1) - 2.0 * (2 * N + 3)));
        add(+2, +2, 3.0 * nt * np2 * hi2);
        add(+2, -2, 3.0 * nt * np2 * lo2);
        add(+4, 0, -sq((N + 1) * (N + 2) * (N + 3) * (N + 4)));
    } else {
        throw DomainError("stencil_entries: k must be 3 or 4");
    }
    return e;
}

namespace {

// Dimensionless system: time in units of 1/omega. The interaction-picture
// coupling is D(s) [g(s) F + M] D(s)^dagger with D = diag exp(i(n nu + l nu_perp)s),
// so the sparse part stays real.
struct System {
    int N = 0, L = 0;
    double nu = 1.0, nu_perp = 1.0;  // in units of omega
    double force_amp = 0.0;          // (beta - alpha)/2 sqrt(omega/nu) xi
    double tau = 1.0;                // omega tau
    std::vector<int> row_ptr, col;
    std::vector<double> coef;
    std::vector<double> sqrt_n;

    int idx(int n, int l) const { return n * L + l; }
    int size() const { return N * L; }

    double force(double s) const {
        const double u = s / tau;
        return force_amp * std::exp(-u * u);
    }

    void rhs(double s, const Complex* c, Complex* out) const {
        thread_local std::vector<Complex> pn, pl, w;
        pn.resize(N);
        pl.resize(L);
        w.resize(size());
        for (int n = 0; n < N; ++n) pn[n] = std::polar(1.0, n * nu * s);
        for (int l = 0; l < L; ++l) pl[l] = std::polar(1.0, l * nu_perp * s);
        for (int n = 0; n < N; ++n)
            for (int l = 0; l < L; ++l) {
                const int r = idx(n, l);
                w[r] = std::conj(pn[n] * pl[l]) * c[r];
            }
        const double g = force(s);
        for (int n = 0; n < N; ++n)
            for (int l = 0; l < L; ++l) {
                const int r = idx(n, l);
                Complex acc = 0.0;
                if (g != 0.0) {
                    if (n >= 1) acc += (g * sqrt_n[n]) * w[r - L];
                    if (n + 1 < N) acc += (g * sqrt_n[n + 1]) * w[r + L];
                }
                double re = 0.0, im = 0.0;
                for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                    re += coef[k] * w[col[k]].real();
                    im += coef[k] * w[col[k]].imag();
                }
                acc += Complex(re, im);
                const Complex z = pn[n] * pl[l] * acc;
                out[r] = Complex(-z.imag(), z.real());
            }
    }
};

System build_system(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g, int alpha,
                    int beta) {
    validate(g);
    if ((alpha != 0 && alpha != 1) || (beta != 0 && beta != 1)) throw DomainError("numint: alpha, beta must be 0 or 1");
    System sys;
    sys.N = g.n_cut + 1;
    sys.L = g.l_cut + 1;
    sys.nu = m.nu / m.omega;
    sys.nu_perp = m.nu_perp / m.omega;
    sys.tau = m.omega * p.tau;
    sys.force_amp = 0.5 * (beta - alpha) * std::sqrt(m.omega / m.nu) * p.xi;

    const double nt = m.nu / m.nu_perp;
    const double lam = 0.25 * m.epsilon * (m.d / m.a_omega) * (m.d / m.a_omega);  // lambda/(hbar d omega)
    const double unit = m.a_nu / (std::sqrt(2.0) * m.d);

    const int n_rows = sys.size();
    sys.row_ptr.assign(1, 0);
    sys.row_ptr.reserve(n_rows + 1);
    sys.sqrt_n.resize(sys.N + 1);
    for (int n = 0; n <= sys.N; ++n) sys.sqrt_n[n] = std::sqrt(static_cast<double>(n));
    for (int n = 0; n < sys.N; ++n)
        for (int l = 0; l < sys.L; ++l) {
            for (int k = 3; k <= g.k_max; ++k) {
                const double mu = lam * std::pow(unit, k);
                for (const StencilEntry& e : stencil_entries(k, n, l, nt)) {
                    if (e.n2 >= sys.N || e.l2 >= sys.L) continue;
                    sys.col.push_back(sys.idx(e.n2, e.l2));
                    sys.coef.push_back(mu * e.coef);
                }
            }
            sys.row_ptr.push_back(static_cast<int>(sys.col.size()));
        }
    return sys;
}

double linear_phase(const model::TrapModel& m, const model::ForcePulse& p, int alpha, int beta, double t0,
                    double t) {
    return (beta - alpha) * (m.d / m.a_omega) * m.omega * p.xi * p.tau * 0.25 * sqrt_pi *
           (std::erf(t / p.tau) - std::erf(t0 / p.tau));
}

using Vec = std::vector<Complex>;

double norm2(const Vec& v) {
    double s = 0.0;
    for (const Complex& z : v) s += std::norm(z);
    return s;
}

struct Core {
    Vec c;
    double unwrapped_ref = 0.0;  // continuous arg of c_ref relative to its start
    long steps = 0, rejected = 0;
    double max_norm_defect = 0.0;
    std::vector<Checkpoint> checkpoints;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 - (-92097.0 / 339200), e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

Core integrate(const System& sys, const SimGrid& g, Vec c, int ref, double s0, double s1, double omega,
               double checkpoint_ds, const EvolveOptions& o, double ref_phase_offset) {
    const int n = sys.size();
    Core core;
    const double norm0 = norm2(c);
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n), ynew(n);
    const double dir = s1 >= s0 ? 1.0 : -1.0;
    const double span = std::abs(s1 - s0);
    const bool fixed = g.dt > 0.0;
    double h = fixed ? span / std::max(1.0, std::ceil(span / (g.dt * omega))) : std::min(0.05, span);
    double s = s0;
    double prev_arg = std::arg(c[ref]);
    double next_cp = s0;

    auto record = [&](double at) {
        if (checkpoint_ds <= 0.0) return;
        while (dir * (at - next_cp) >= -1e-9 * checkpoint_ds) {
            const Complex z = c[ref];
            core.checkpoints.push_back({at / omega, core.unwrapped_ref + ref_phase_offset, std::norm(z)});
            if (o.dump) {
                for (int i = 0; i < n; ++i)
                    *o.dump << at / omega << ',' << i / sys.L << ',' << i % sys.L << ',' << c[i].real() << ','
                            << c[i].imag() << '\n';
            }
            next_cp += dir * checkpoint_ds;
        }
    };
    record(s);

    sys.rhs(s, c.data(), k1.data());
    while (dir * (s1 - s) > 1e-12 * span) {
        double hs = std::min(h, std::abs(s1 - s));
        bool clipped = false;
        if (!fixed && checkpoint_ds > 0.0 && dir * (next_cp - s) > 0.0 && dir * (next_cp - s) < hs) {
            hs = dir * (next_cp - s);
            clipped = true;
        }
        const double hd = dir * hs;
        auto stage = [&](Vec& out, double cs, std::initializer_list<std::pair<double, const Vec*>> terms) {
            for (int i = 0; i < n; ++i) {
                Complex acc = c[i];
                for (const auto& [a, v] : terms) acc += hd * a * (*v)[i];
                y[i] = acc;
            }
            sys.rhs(s + cs * hd, y.data(), out.data());
        };
        stage(k2, c2, {{a21, &k1}});
        stage(k3, c3, {{a31, &k1}, {a32, &k2}});
        stage(k4, c4, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        stage(k5, c5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        stage(k6, 1.0, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        for (int i = 0; i < n; ++i)
            ynew[i] = c[i] + hd * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        sys.rhs(s + hd, ynew.data(), k7.data());

        if (!fixed) {
            double err = 0.0;
            for (int i = 0; i < n; ++i) {
                const Complex e = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = g.tol * (1.0 + std::max(std::abs(c[i]), std::abs(ynew[i])));
                err = std::max(err, std::abs(e) / sc);
            }
            const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            if (err > 1.0) {
                h = hs * std::max(0.2, fac);
                ++core.rejected;
                continue;
            }
            if (!clipped) h = hs * fac;
        }
        s += hd;
        c.swap(ynew);
        k1.swap(k7);
        ++core.steps;

        const double a = std::arg(c[ref]);
        core.unwrapped_ref += std::remainder(a - prev_arg, 2.0 * pi);
        prev_arg = a;

        const double nd = std::abs(norm2(c) - norm0) / norm0;
        core.max_norm_defect = std::max(core.max_norm_defect, nd);
        if (nd > 1e-8 && o.throw_on_norm) {
            std::ostringstream os;
            os << "numint: norm defect " << nd << " exceeds 1e-8 at t = " << s / omega << " s";
            throw NumericError(os.str());
        }
        record(s);
    }
    core.c = std::move(c);
    return core;
}

double boundary_weight(const System& sys, const Vec& c) {
    double w = 0.0;
    for (int n = 0; n < sys.N; ++n)
        for (int l = 0; l < sys.L; ++l)
            if (n >= sys.N - 4 || l >= sys.L - 4) w += std::norm(c[sys.idx(n, l)]);
    return w;
}

SimState to_state(const System& sys, const Vec& c, double t, double defect) {
    SimState st;
    st.amplitudes.resize(sys.N, sys.L);
    for (int n = 0; n < sys.N; ++n)
        for (int l = 0; l < sys.L; ++l) st.amplitudes(n, l) = c[sys.idx(n, l)];
    st.time = t;
    st.norm_defect = defect;
    return st;
}

Vec from_state(const System& sys, const SimState& s) {
    if (s.amplitudes.rows() != sys.N || s.amplitudes.cols() != sys.L)
        throw DomainError("numint: state dimensions do not match the grid");
    Vec c(sys.size());
    for (int n = 0; n < sys.N; ++n)
        for (int l = 0; l < sys.L; ++l) c[sys.idx(n, l)] = s.amplitudes(n, l);
    return c;
}

double checkpoint_step(const EvolveOptions& o, const model::ForcePulse& p) {
    if (o.checkpoint_interval < 0.0) return 0.0;
    return o.checkpoint_interval > 0.0 ? o.checkpoint_interval : p.tau / 20.0;
}

}  // namespace

Eigen::MatrixXcd derivative(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                            const SimState& s, int alpha, int beta, double t) {
    const System sys = build_system(m, p, g, alpha, beta);
    const Vec c = from_state(sys, s);
    Vec out(sys.size());
    sys.rhs(m.omega * t, c.data(), out.data());
    SimState d = to_state(sys, out, t, 0.0);
    return d.amplitudes * m.omega;
}

Eigen::MatrixXcd coupling_matrix(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                                 int alpha, int beta, double t) {
    const System sys = build_system(m, p, g, alpha, beta);
    const int n = sys.size();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    Vec e(n), out(n);
    for (int j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), Complex(0.0));
        e[j] = 1.0;
        sys.rhs(m.omega * t, e.data(), out.data());
        for (int i = 0; i < n; ++i) H(i, j) = Complex(out[i].imag(), -out[i].real());  // strip the factor i
    }
    return H;
}

EvolveResult evolve(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g, InitialLevel init,
                    int alpha, int beta, double t0, double t, const EvolveOptions& o) {
    const System sys = build_system(m, p, g, alpha, beta);
    if (init.n < 0 || init.l < 0 || init.n > g.n_cut || init.l > g.l_cut)
        throw DomainError("evolve: initial level outside the cutoffs");
    Vec c(sys.size(), Complex(0.0));
    const int ref = sys.idx(init.n, init.l);
    c[ref] = 1.0;
    const double cp = checkpoint_step(o, p) * m.omega;

    const double kin_rate = init.n * m.nu + init.l * m.nu_perp;
    Core core = integrate(sys, g, std::move(c), ref, m.omega * t0, m.omega * t, m.omega, cp, o, 0.0);
    for (Checkpoint& k : core.checkpoints)
        k.phase += linear_phase(m, p, alpha, beta, t0, k.time) - kin_rate * (k.time - t0);

    EvolveResult r;
    r.phase = core.unwrapped_ref + linear_phase(m, p, alpha, beta, t0, t) - kin_rate * (t - t0);
    r.overlap = std::abs(core.c[ref]);
    r.leakage = boundary_weight(sys, core.c);
    r.converged = r.leakage <= 1e-10;
    r.steps = core.steps;
    r.rejected = core.rejected;
    r.max_norm_defect = core.max_norm_defect;
    r.checkpoints = std::move(core.checkpoints);
    r.state = to_state(sys, core.c, t, core.max_norm_defect);
    return r;
}

EvolveResult evolve_state(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                          const SimState& start, InitialLevel reference, int alpha, int beta, double t,
                          const EvolveOptions& o) {
    const System sys = build_system(m, p, g, alpha, beta);
    const Vec c0 = from_state(sys, start);
    const int ref = sys.idx(reference.n, reference.l);
    const double cp = checkpoint_step(o, p) * m.omega;
    Core core = integrate(sys, g, c0, ref, m.omega * start.time, m.omega * t, m.omega, cp, o, 0.0);

    // <Psi(t0)|Psi(t)> with the frame phases restored.
    Complex ov = 0.0;
    const double dt = t - start.time;
    for (int n = 0; n < sys.N; ++n)
        for (int l = 0; l < sys.L; ++l) {
            const int i = sys.idx(n, l);
            ov += std::conj(c0[i]) * core.c[i] * std::exp(Complex(0.0, -(n * m.nu + l * m.nu_perp) * dt));
        }
    EvolveResult r;
    r.overlap = std::abs(ov);
    r.phase = std::arg(ov) + linear_phase(m, p, alpha, beta, start.time, t);
    r.leakage = boundary_weight(sys, core.c);
    r.converged = r.leakage <= 1e-10;
    r.steps = core.steps;
    r.rejected = core.rejected;
    r.max_norm_defect = core.max_norm_defect;
    r.checkpoints = std::move(core.checkpoints);
    r.state = to_state(sys, core.c, t, core.max_norm_defect);
    return r;
}

NumericPhase numeric_gate_phase(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                                InitialLevel init, double t0, double t, bool parallel) {
    NumericPhase out;
    auto run = [&](int a, int b) { return evolve(m, p, g, init, a, b, t0, t); };
    EvolveResult res[2][2];
    if (parallel) {
        std::future<EvolveResult> f[2][2];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) f[a][b] = std::async(std::launch::async, run, a, b);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) res[a][b] = f[a][b].get();
    } else {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) res[a][b] = run(a, b);
    }
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            out.phases[a][b] = res[a][b].phase;
            out.min_overlap = std::min(out.min_overlap, res[a][b].overlap);
            out.max_leakage = std::max(out.max_leakage, res[a][b].leakage);
            out.converged = out.converged && res[a][b].converged;
        }
    out.relative_sum = out.phases[0][0] - out.phases[0][1] - out.phases[1][0] + out.phases[1][1];
    out.center_of_mass =
        -2.0 * p.xi * p.xi * quantum::phi_of_omega(p, m.omega, t0, t, quantum::PhiMethod::Quadrature);
    out.theta = out.relative_sum + out.center_of_mass;
    return out;
}

}  // namespace mtg::numint
