#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "mtg/model.hpp"

namespace mtg::numint {

using Complex = std::complex<double>;

struct SimGrid {
    int n_cut = 48;  // axial levels 0..n_cut
    int l_cut = 24;  // transverse levels 0..l_cut
    int k_max = 4;   // 2, 3 or 4
    double dt = 0.0; // s; > 0 selects fixed-step mode
    double tol = 1e-12;
};

void validate(const SimGrid& g);

struct SimState {
    Eigen::MatrixXcd amplitudes;  // (n_cut + 1) x (l_cut + 1)
    double time = 0.0;            // s
    double norm_defect = 0.0;
};

struct InitialLevel {
    int n = 0, l = 0;
};

// One nonzero coupling <n l| . |n' l'> in units where the ladder operators are bare.
struct StencilEntry {
    int n2 = 0, l2 = 0;
    double coef = 0.0;
};

// Entries of C^{(k)}_{nl} (k = 3, 4) as matrix elements of -P_k on the (n, l)
// ladder basis, before truncation.
std::vector<StencilEntry> stencil_entries(int k, int n, int l, double nu_tilde);

// dc/dt (1/s) at time t (s).
Eigen::MatrixXcd derivative(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                            const SimState& s, int alpha, int beta, double t);

// Matrix H(t) with dc/dt = i omega H c, rows/columns ordered n * (l_cut + 1) + l.
Eigen::MatrixXcd coupling_matrix(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                                 int alpha, int beta, double t);

struct Checkpoint {
    double time = 0.0;
    double phase = 0.0;
    double projection = 0.0;  // |<n0 l0 | psi(t)>|^2 in the instantaneous frame
};

struct EvolveOptions {
    double checkpoint_interval = 0.0;  // s; 0 selects tau / 20, < 0 disables
    std::ostream* dump = nullptr;      // CSV rows time,n,l,re,im at checkpoints
    bool throw_on_norm = true;
};

struct EvolveResult {
    SimState state;
    double phase = 0.0;    // arg <Psi(t0)|Psi(t)>, unwrapped
    double overlap = 0.0;  // |<Psi(t0)|Psi(t)>|
    double leakage = 0.0;  // weight in the top 4 levels of either axis
    bool converged = true;
    long steps = 0, rejected = 0;
    double max_norm_defect = 0.0;
    std::vector<Checkpoint> checkpoints;
};

EvolveResult evolve(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                    InitialLevel initial, int alpha, int beta, double t0, double t,
                    const EvolveOptions& o = {});

// Continue from an arbitrary state (used for time reversal checks).
EvolveResult evolve_state(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                          const SimState& start, InitialLevel reference, int alpha, int beta, double t,
                          const EvolveOptions& o = {});

struct NumericPhase {
    double theta = 0.0;          // signed relative sum plus analytic center of mass
    double relative_sum = 0.0;
    double center_of_mass = 0.0;
    double phases[2][2] = {{0, 0}, {0, 0}};
    double min_overlap = 1.0;
    double max_leakage = 0.0;
    bool converged = true;
};

NumericPhase numeric_gate_phase(const model::TrapModel& m, const model::ForcePulse& p, const SimGrid& g,
                                InitialLevel initial, double t0, double t, bool parallel = true);

}  // namespace mtg::numint
