#include "mtg/chain.hpp"

#include <cmath>
#include <cstdlib>

#include "mtg/classical.hpp"
#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/quantum.hpp"
#include "mtg/specfn.hpp"

namespace mtg::chain {

using namespace mtg::constants;

ChainConfig uniform_config(int n_ions, int alpha) {
    ChainConfig c;
    c.n_ions = n_ions;
    c.internal.assign(static_cast<std::size_t>(std::max(n_ions, 0)), alpha);
    c.motional.assign(static_cast<std::size_t>(std::max(n_ions, 0)), {0, 0, 0});
    return c;
}

void validate(const ChainConfig& c) {
    if (c.n_ions < 2) throw DomainError("chain: n_ions must be >= 2");
    if (c.internal.size() != static_cast<std::size_t>(c.n_ions) ||
        c.motional.size() != static_cast<std::size_t>(c.n_ions))
        throw DomainError("chain: internal/motional arrays must have n_ions entries");
    for (int a : c.internal)
        if (a != 0 && a != 1) throw DomainError("chain: internal states must be 0 or 1");
    for (const auto& n : c.motional)
        for (long v : n)
            if (v < 0) throw DomainError("chain: occupations must be >= 0");
}

double eta_direct(int i, int n) {
    double s = 0.0;
    // smallest terms first
    for (int j = n; j >= 1; --j) {
        if (j == i) continue;
        const double k = std::abs(i - j);
        s += 1.0 / (k * k * k);
    }
    return 0.5 * s;
}

double eta_prime_direct(int i, int n) {
    double s = 0.0;
    for (int j = n; j >= 1; --j) {
        if (j == i) continue;
        const double k = i - j;
        s += (k > 0 ? 1.0 : -1.0) / (k * k);
    }
    return 0.5 * s;
}

ChainCoefficients chain_coefficients(const model::TrapModel& m, int n) {
    if (n < 2) throw DomainError("chain_coefficients: n_ions must be >= 2");
    ChainCoefficients c;
    const double e = m.epsilon;
    for (int i = 1; i <= n; ++i) {
        const double eta = 0.25 * (specfn::polygamma_int(2, i) + specfn::polygamma_int(2, n + 1 - i)) + zeta3;
        const double etap = 0.5 * (specfn::polygamma_int(1, n + 1 - i) - specfn::polygamma_int(1, i));
        c.eta.push_back(eta);
        c.eta_prime.push_back(etap);
        c.eta_direct.push_back(eta_direct(i, n));
        c.eta_prime_direct.push_back(eta_prime_direct(i, n));
        const double wi = m.omega * std::sqrt(1.0 + e * eta);
        const double xt = 0.5 * m.d * e * etap / (1.0 + e * eta);
        c.omega_i.push_back(wi);
        c.x_tilde.push_back(xt);
        const double r = wi / m.omega;
        c.epsilon_i.push_back(r * r * xt * xt - 0.5 * e * m.d * m.d * specfn::harmonic_number(n - i));
    }
    return c;
}

namespace {

PairPhase pair_from(const model::TrapModel& m, const model::ForcePulse& p, int i, int j,
                    const ChainCoefficients& c) {
    if (i == j) throw DomainError("pair_phase: i == j");
    const double k = std::abs(i - j);
    const double k3 = k * k * k;
    PairPhase r;
    r.full = std::sqrt(pi / 8.0) * p.xi * p.xi * m.epsilon * m.omega * p.tau /
             ((1.0 + m.epsilon * c.eta[i - 1]) * (1.0 + m.epsilon * c.eta[j - 1])) / k3;
    r.leading = classical::theta_cl(m, p) / k3;
    return r;
}

}  // namespace

PairPhase pair_phase(const model::TrapModel& m, const model::ForcePulse& p, int i, int j, int n) {
    if (i < 1 || j < 1 || i > n || j > n) throw DomainError("pair_phase: index out of range");
    return pair_from(m, p, i, j, chain_coefficients(m, n));
}

ChainPhaseTable chain_phase_table(const model::TrapModel& m, const model::ForcePulse& p, const ChainConfig& cfg,
                                  double t0, double t) {
    validate(cfg);
    const int n = cfg.n_ions;
    const ChainCoefficients c = chain_coefficients(m, n);
    ChainPhaseTable out;
    out.pair_full = Eigen::MatrixXd::Zero(n, n);
    out.pair_leading = Eigen::MatrixXd::Zero(n, n);
    const double xi2 = p.xi * p.xi;
    for (int i = 1; i <= n; ++i) {
        const int a = cfg.internal[i - 1];
        const auto& nm = cfg.motional[i - 1];
        const double wi = c.omega_i[i - 1];
        const double kin = -(static_cast<double>(nm[0]) * wi + static_cast<double>(nm[1] + nm[2]) * m.omega) * (t - t0);
        double ph = kin;
        if (a == 1) {
            const double x_bar = i * m.d;
            ph += -2.0 * xi2 * std::pow(m.omega / wi, 3) * quantum::phi_of_omega(p, wi, t0, t) +
                  sqrt_pi * m.omega * p.tau * p.xi * x_bar / m.a_omega;
        }
        out.single.push_back(ph);
        out.single_kinetic.push_back(kin);
    }
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            if (cfg.internal[i - 1] * cfg.internal[j - 1] == 0) continue;
            const PairPhase pp = pair_from(m, p, i, j, c);
            out.pair_full(i - 1, j - 1) = out.pair_full(j - 1, i - 1) = pp.full;
            out.pair_leading(i - 1, j - 1) = out.pair_leading(j - 1, i - 1) = pp.leading;
            out.total_conditional += pp.full;
            if (j == i + 1) out.nearest_neighbour += pp.full;
        }
    return out;
}

MaximaReport maxima(const ChainCoefficients& c) {
    MaximaReport r;
    r.bound_eta = zeta3;
    r.bound_eta_prime = pi * pi / 12.0;
    for (std::size_t i = 0; i < c.eta.size(); ++i) {
        if (std::abs(c.eta[i]) > r.max_eta) {
            r.max_eta = std::abs(c.eta[i]);
            r.argmax_eta = static_cast<int>(i) + 1;
        }
        if (std::abs(c.eta_prime[i]) > r.max_eta_prime) {
            r.max_eta_prime = std::abs(c.eta_prime[i]);
            r.argmax_eta_prime = static_cast<int>(i) + 1;
        }
    }
    return r;
}

}  // namespace mtg::chain
