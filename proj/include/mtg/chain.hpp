#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mtg/model.hpp"

namespace mtg::chain {

struct ChainConfig {
    int n_ions = 2;
    std::vector<int> internal;                 // alpha_i
    std::vector<std::array<long, 3>> motional;  // (n_x, n_y, n_z) per ion
};

ChainConfig uniform_config(int n_ions, int alpha = 1);
void validate(const ChainConfig& c);

struct ChainCoefficients {
    std::vector<double> eta, eta_prime;
    std::vector<double> eta_direct, eta_prime_direct;  // finite-sum cross-check
    std::vector<double> omega_i;   // rad/s
    std::vector<double> x_tilde;   // m
    std::vector<double> epsilon_i; // m^2
};

// Closed forms through polygamma at integers, with the direct sums alongside.
//   eta_i  = (1/4)[psi2(i) + psi2(N+1-i)] + zeta(3)
//   eta'_i = (1/2)[psi1(N+1-i) - psi1(i)]
ChainCoefficients chain_coefficients(const model::TrapModel& m, int n_ions);

double eta_direct(int i, int n);
double eta_prime_direct(int i, int n);

struct PairPhase {
    double full = 0.0;     // with the (1 + eps eta) denominators
    double leading = 0.0;  // theta_cl / |i - j|^3
};

// Ions are 1-based. alpha_i = alpha_j = 1 assumed; use chain_phase_table for
// arbitrary internal states.
PairPhase pair_phase(const model::TrapModel& m, const model::ForcePulse& p, int i, int j, int n_ions);

struct ChainPhaseTable {
    std::vector<double> single;  // phi^{alpha_i}
    std::vector<double> single_kinetic;
    Eigen::MatrixXd pair_full;    // symmetric, zero diagonal
    Eigen::MatrixXd pair_leading;
    double total_conditional = 0.0;  // sum_{i<j} pair_full
    double nearest_neighbour = 0.0;  // sum_{|i-j|=1} pair_full
};

ChainPhaseTable chain_phase_table(const model::TrapModel& m, const model::ForcePulse& p, const ChainConfig& c,
                                  double t0, double t);

struct MaximaReport {
    double max_eta = 0.0, max_eta_prime = 0.0;
    int argmax_eta = 0, argmax_eta_prime = 0;
    double bound_eta = 0.0, bound_eta_prime = 0.0;  // zeta(3), pi^2/12
};
MaximaReport maxima(const ChainCoefficients& c);

}  // namespace mtg::chain
