#pragma once

#include <functional>

#include "result_table.hpp"
#include "run_config.hpp"

namespace mtg::cli {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitConvergence = 3;

// Raised when a run finished but a convergence flag failed. Carries the table
// so it can still be written.
struct UnconvergedRun : std::runtime_error {
    ResultTable table;
    UnconvergedRun(const std::string& what, ResultTable t) : std::runtime_error(what), table(std::move(t)) {}
};

ResultTable cmd_phases(const RunConfig& c);
ResultTable cmd_fidelity_curve(const RunConfig& c);
ResultTable cmd_tune(const RunConfig& c);
ResultTable cmd_numsim(const RunConfig& c);
ResultTable cmd_chain(const RunConfig& c);

ResultTable run_command(const RunConfig& c);

// Runs f(0..n-1) on `threads` workers. Each index writes only its own slot,
// so output order does not depend on scheduling.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& f);

// Maps the library and config exceptions to exit codes.
int exit_code_for_current_exception();

}  // namespace mtg::cli
