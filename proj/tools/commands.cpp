#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "mtg/chain.hpp"
#include "mtg/classical.hpp"
#include "mtg/constants.hpp"
#include "mtg/errors.hpp"
#include "mtg/numint.hpp"
#include "mtg/quantum.hpp"

namespace mtg::cli {

namespace {

constexpr const char* kToolVersion = "mtg-gate 1.0.0";

ResultTable start_table(const RunConfig& c, const model::TrapModel& m, const model::ForcePulse& p) {
    ResultTable t;
    t.add_meta("tool", kToolVersion);
    t.add_meta("command", c.command);
    for (auto& [k, v] : resolved_settings(c)) t.add_meta(k, v);
    t.add_meta("derived.mass_kg", m.species.mass);
    t.add_meta("derived.a_omega_m", m.a_omega);
    t.add_meta("derived.d_m", m.d);
    t.add_meta("derived.delta_x_m", m.delta_x);
    t.add_meta("derived.delta_x_exact_m", m.delta_x_exact);
    t.add_meta("derived.epsilon", m.epsilon);
    t.add_meta("derived.nu_rad_s", m.nu);
    t.add_meta("derived.nu_perp_rad_s", m.nu_perp);
    t.add_meta("derived.omega_tilde_rad_s", m.omega_tilde);
    t.add_meta("derived.omega_tau", model::omega_tau(p, m));
    t.add_meta("derived.t_start_s", p.t_start);
    t.add_meta("derived.t_end_s", p.t_end);
    t.add_meta("derived.theta_cl", classical::theta_cl(m, p));
    return t;
}

quantum::MotionalState motional_state(const RunConfig& c) {
    quantum::MotionalState s;
    s.n_x = c.nx;
    s.n_y = c.ny;
    s.n_z = c.nz;
    return s;
}

std::vector<double> temperature_grid(const RunConfig& c) {
    if (!c.temperatures.empty()) return c.temperatures;
    return parse_temperature_range("0mK:3mK:31");
}

}  // namespace

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& f) {
    const size_t workers = std::min(n, static_cast<size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

ResultTable cmd_phases(const RunConfig& c) {
    const model::TrapModel m = build_model(c);
    const model::ForcePulse p = build_pulse(c);
    const quantum::MotionalState s = motional_state(c);
    ResultTable t = start_table(c, m, p);
    t.columns = {"alpha",     "beta",     "phi_R",     "phi_r",    "dynamic_R",   "dynamic_r",
                 "linear_R",  "linear_r", "kinetic_R", "kinetic_r", "delta_ab",   "delta_prime",
                 "total",     "theta_over_pi", "delta_theta"};

    const double theta = quantum::gate_phase_theta(m, p, p.t_start, p.t_end);
    const double dtheta = quantum::delta_theta_perturbative(m, p, c.nx, c.ny, c.nz);
    Eigen::Matrix2d totals;
    double tail = 0.0, max_defect = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const quantum::PhaseRow r = quantum::unperturbed_phases(m, p, s, a, b, p.t_start, p.t_end);
            const quantum::FirstOrderShift f = quantum::first_order_phase_shift(m, p, s, a, b, p.t_start, p.t_end);
            const quantum::Overlap ov = quantum::motional_overlap(m, p, s, a, b, p.t_start, p.t_end);
            const double total = r.phi_R + r.phi_r + f.delta_ab + f.delta_prime;
            totals(a, b) = total;
            tail = std::max(tail, f.tail_bound);
            max_defect = std::max(max_defect, ov.defect);
            t.add_row({double(a), double(b), r.phi_R, r.phi_r, r.dynamic_R, r.dynamic_r, r.linear_R, r.linear_r,
                       r.kinetic_R, r.kinetic_r, f.delta_ab, f.delta_prime, total, theta / constants::pi, dtheta});
        }

    t.add_meta("result.theta", theta);
    t.add_meta("result.theta_over_pi", theta / constants::pi);
    t.add_meta("result.delta_theta", dtheta);
    t.add_meta("result.delta_theta_closed", quantum::delta_theta_closed(m, p, c.nx, c.ny, c.nz));
    t.add_meta("result.signed_sum", classical::signed_sum(totals));
    t.add_meta("result.tail_bound", tail);
    t.add_meta("result.max_overlap_defect", max_defect);

    const double T = c.temperatures.empty() ? 0.0 : c.temperatures.front();
    quantum::ComposeOptions co;
    co.echo = c.echo;
    co.enforce_calibration = false;
    const quantum::GateReport g = quantum::compose_gate(m, p, classical::make_ensemble(m, T), s, co);
    t.add_meta("result.gate.temperature_K", T);
    t.add_meta("result.gate.Theta_global", g.Theta_global);
    t.add_meta("result.gate.Delta_theta", g.Delta_theta);
    t.add_meta("result.gate.Delta_theta_table", g.Delta_theta_table);
    t.add_meta("result.gate.mean_delta_theta", g.mean_delta_theta);
    t.add_meta("result.gate.calibration_residual", g.calibration_residual);
    t.add_meta("result.gate.odd_k_residual", g.odd_k_residual);
    t.add_meta("result.gate.fidelity", g.fidelity);
    t.add_meta("status.converged", "true");
    return t;
}

ResultTable cmd_fidelity_curve(const RunConfig& c) {
    const model::TrapModel m = build_model(c);
    const model::ForcePulse p = build_pulse(c);
    const std::vector<double> temps = temperature_grid(c);
    if (!std::is_sorted(temps.begin(), temps.end())) throw ConfigError("temperature grid must be ascending");

    ResultTable t = start_table(c, m, p);
    t.columns = {"temperature_K",      "kT_over_hw",          "F_cl",          "F_cl_prime",
                 "F_cl_series",        "F_cl_prime_series",   "F_quantum_exact", "F_quantum_approx",
                 "F_quantum_evalF",    "one_minus_F_cl",      "one_minus_F_cl_prime",
                 "one_minus_F_quantum", "log10_one_minus_F_quantum"};
    std::vector<std::vector<double>> rows(temps.size());
    parallel_for(temps.size(), thread_count(c), [&](size_t i) {
        const double T = temps[i];
        const classical::ThermalEnsemble e = classical::make_ensemble(m, T);
        const classical::FidelityResult fc = classical::classical_fidelity(m, p, e, false);
        const classical::FidelityResult fp = classical::classical_fidelity(m, p, e, true);
        const quantum::QuantumFidelity q = quantum::quantum_fidelity(m, p, T);
        const double dq = 1.0 - q.exact;
        rows[i] = {T,          e.kT_over_hw,      fc.exact,          fp.exact,  fc.series,
                   fp.series,  q.exact,           q.min_fid_q,       q.eval_f,  1.0 - fc.exact,
                   1.0 - fp.exact, dq,            dq > 0.0 ? std::log10(dq) : -INFINITY};
    });
    for (auto& r : rows) t.add_row(std::move(r));
    t.add_meta("result.crossing_exact_K", quantum::fidelity_crossing(m, p, quantum::FidelityForm::Exact));
    t.add_meta("result.crossing_min_fid_q_K", quantum::fidelity_crossing(m, p, quantum::FidelityForm::MinFidQ));
    t.add_meta("result.crossing_eval_f_K", quantum::fidelity_crossing(m, p, quantum::FidelityForm::EvalF));
    t.add_meta("status.converged", "true");
    return t;
}

ResultTable cmd_tune(const RunConfig& c) {
    const model::TrapModel m = build_model(c);
    const model::ForcePulse p = build_pulse(c);
    const double T = c.temperatures.empty() ? 0.0 : c.temperatures.front();
    const quantum::TuneResult r = quantum::tune_tau(m, c.xi, c.target, c.echo ? quantum::TuneMode::Echo
                                                                              : quantum::TuneMode::PerPulse,
                                                    T, 6.0, c.tau_lo, c.tau_hi);
    ResultTable t = start_table(c, m, p);
    t.columns = {"target", "tau_s", "tau_us", "residual", "theta", "iterations", "bracket_lo_s", "bracket_hi_s"};
    t.add_row({c.target, r.tau, r.tau * 1e6, r.residual, r.theta, double(r.iterations), r.lo, r.hi});
    t.add_meta("result.mode", c.echo ? "echo" : "per-pulse");
    t.add_meta("result.temperature_K", T);
    t.add_meta("status.converged", "true");
    return t;
}

ResultTable cmd_numsim(const RunConfig& c) {
    const model::TrapModel m = build_model(c);
    const model::ForcePulse p = build_pulse(c);
    numint::SimGrid g;
    g.n_cut = c.n_cut;
    g.l_cut = c.l_cut;
    g.k_max = c.k_max;
    g.tol = c.tol;
    g.dt = c.dt;
    numint::validate(g);
    const numint::InitialLevel init{c.n0, c.l0};

    std::ofstream dump;
    if (!c.dump.empty()) {
        dump.open(c.dump);
        if (!dump) throw ConfigError("cannot open dump file '" + c.dump + "'");
        dump.precision(17);
        dump << "time,n,l,re,im\n";
    }

    numint::EvolveResult res[4];
    parallel_for(4, thread_count(c), [&](size_t k) {
        numint::EvolveOptions o;
        if (k == 1 && dump.is_open()) o.dump = &dump;
        res[k] = numint::evolve(m, p, g, init, static_cast<int>(k / 2), static_cast<int>(k % 2), p.t_start, p.t_end, o);
    });
    const double sign[4] = {1.0, -1.0, -1.0, 1.0};

    ResultTable t = start_table(c, m, p);
    t.columns = {"time_s", "time_over_tau", "theta_num_over_pi", "theta_analytic_over_pi",
                 "projection_01", "projection_10", "force", "final"};
    size_t n_cp = res[0].checkpoints.size();
    for (const auto& r : res) n_cp = std::min(n_cp, r.checkpoints.size());
    const double xi2 = p.xi * p.xi;
    for (size_t i = 0; i < n_cp; ++i) {
        const double tk = res[1].checkpoints[i].time;
        double rel = 0.0;
        for (int k = 0; k < 4; ++k) rel += sign[k] * res[k].checkpoints[i].phase;
        const double cm = tk > p.t_start ? -2.0 * xi2 *
                                               quantum::phi_of_omega(p, m.omega, p.t_start, tk,
                                                                     quantum::PhiMethod::Quadrature)
                                         : 0.0;
        const double ana = tk > p.t_start ? quantum::gate_phase_theta(m, p, p.t_start, tk,
                                                                      quantum::PhiMethod::Quadrature)
                                          : 0.0;
        t.add_row({tk, tk / p.tau, (rel + cm) / constants::pi, ana / constants::pi,
                   res[1].checkpoints[i].projection, res[2].checkpoints[i].projection, model::force_profile(p, tk),
                   0.0});
    }

    double rel = 0.0, min_overlap = 1.0, max_leak = 0.0, max_defect = 0.0;
    long steps = 0;
    bool converged = true;
    for (int k = 0; k < 4; ++k) {
        rel += sign[k] * res[k].phase;
        min_overlap = std::min(min_overlap, res[k].overlap);
        max_leak = std::max(max_leak, res[k].leakage);
        max_defect = std::max(max_defect, res[k].max_norm_defect);
        steps += res[k].steps;
        converged = converged && res[k].converged;
    }
    const double cm = -2.0 * xi2 * quantum::phi_of_omega(p, m.omega, p.t_start, p.t_end, quantum::PhiMethod::Quadrature);
    const double theta_num = rel + cm;
    const double theta_ana = quantum::gate_phase_theta(m, p, p.t_start, p.t_end);
    t.add_row({p.t_end, p.t_end / p.tau, theta_num / constants::pi, theta_ana / constants::pi,
               res[1].overlap * res[1].overlap, res[2].overlap * res[2].overlap, model::force_profile(p, p.t_end), 1.0});

    t.add_meta("result.theta_num", theta_num);
    t.add_meta("result.theta_analytic", theta_ana);
    t.add_meta("result.difference", theta_num - theta_ana);
    t.add_meta("result.delta_theta_perturbative",
               quantum::delta_theta_perturbative(m, p, c.n0, c.l0, c.l0));  // n_y + n_z = 2l
    for (int k = 0; k < 4; ++k)
        t.add_meta("result.phase_" + std::to_string(k / 2) + std::to_string(k % 2), res[k].phase);
    t.add_meta("result.min_overlap", min_overlap);
    t.add_meta("result.max_leakage", max_leak);
    t.add_meta("result.max_norm_defect", max_defect);
    t.add_meta("result.steps", double(steps));
    t.add_meta("status.converged", converged ? "true" : "false");
    if (!converged && !c.allow_unconverged)
        throw UnconvergedRun("numsim: cutoff leakage " + format_number(max_leak) +
                                 " exceeds 1e-10; raise --n-cut/--l-cut or pass --allow-unconverged",
                             std::move(t));
    return t;
}

ResultTable cmd_chain(const RunConfig& c) {
    const model::TrapModel m = build_model(c);
    const model::ForcePulse p = build_pulse(c);
    if (c.ions < 2) throw ConfigError("chain: --ions must be >= 2");
    chain::ChainConfig cfg = chain::uniform_config(c.ions, 1);
    if (!c.internal.empty()) {
        if (static_cast<int>(c.internal.size()) != c.ions)
            throw ConfigError("chain: --internal lists " + std::to_string(c.internal.size()) + " states for " +
                              std::to_string(c.ions) + " ions");
        cfg.internal = c.internal;
    }
    const chain::ChainCoefficients co = chain::chain_coefficients(m, c.ions);
    const chain::ChainPhaseTable ph = chain::chain_phase_table(m, p, cfg, p.t_start, p.t_end);

    ResultTable t = start_table(c, m, p);
    t.columns = {"kind",      "i",        "j",         "eta",          "eta_prime",   "eta_direct",
                 "eta_prime_direct", "omega_i", "x_tilde", "epsilon_i", "single_phase", "pair_full",
                 "pair_leading"};
    for (int i = 0; i < c.ions; ++i)
        t.add_row({0.0, double(i + 1), 0.0, co.eta[i], co.eta_prime[i], co.eta_direct[i], co.eta_prime_direct[i],
                   co.omega_i[i], co.x_tilde[i], co.epsilon_i[i], ph.single[i], 0.0, 0.0});
    for (int i = 0; i < c.ions; ++i)
        for (int j = i + 1; j < c.ions; ++j)
            t.add_row({1.0, double(i + 1), double(j + 1), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                       ph.pair_full(i, j), ph.pair_leading(i, j)});
    t.add_meta("result.total_conditional", ph.total_conditional);
    t.add_meta("result.nearest_neighbour", ph.nearest_neighbour);
    if (c.check_maxima) {
        const chain::MaximaReport r = chain::maxima(co);
        t.add_meta("result.max_eta", r.max_eta);
        t.add_meta("result.argmax_eta", double(r.argmax_eta));
        t.add_meta("result.bound_eta", r.bound_eta);
        t.add_meta("result.max_eta_prime", r.max_eta_prime);
        t.add_meta("result.argmax_eta_prime", double(r.argmax_eta_prime));
        t.add_meta("result.bound_eta_prime", r.bound_eta_prime);
        const bool ok = std::abs(r.max_eta - r.bound_eta) <= 1e-4 && std::abs(r.max_eta_prime - r.bound_eta_prime) <= 1e-4;
        t.add_meta("result.maxima_within_1e-4", ok ? "true" : "false");
    }
    t.add_meta("status.converged", "true");
    return t;
}

ResultTable run_command(const RunConfig& c) {
    if (c.command == "phases") return cmd_phases(c);
    if (c.command == "fidelity") return cmd_fidelity_curve(c);
    if (c.command == "tune") return cmd_tune(c);
    if (c.command == "numsim") return cmd_numsim(c);
    if (c.command == "chain") return cmd_chain(c);
    throw ConfigError("unknown command '" + c.command + "'");
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const UnconvergedRun&) {
        return kExitConvergence;
    } catch (const ConvergenceError&) {
        return kExitConvergence;
    } catch (const ConfigError&) {
        return kExitConfig;
    } catch (const DomainError&) {
        return kExitConfig;
    } catch (const NumericError&) {
        return kExitNumeric;
    } catch (const CalibrationError&) {
        return kExitNumeric;
    } catch (...) {
        return kExitNumeric;
    }
}

}  // namespace mtg::cli
