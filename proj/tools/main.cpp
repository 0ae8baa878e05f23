#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <deque>
#include <map>
#include <optional>

#include "commands.hpp"

using namespace mtg::cli;

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

// Flags shared by every subcommand; each maps onto one config key.
const FlagSpec kCommon[] = {
    {"--species", "species", "ion species (Ca40, Be9, Mg24, Sr88, ...)"},
    {"--mass-u", "mass_u", "explicit ion mass in u (overrides --species)"},
    {"--omega", "omega", "trap frequency: 1MHz means 2*pi*1e6 rad/s; use rad/s for angular"},
    {"--separation", "separation", "bare trap separation, e.g. 20um"},
    {"--xi", "xi", "peak push in units of a_omega"},
    {"--tau", "tau", "pulse width, e.g. 41.1069us"},
    {"--window", "window", "integration window T (symmetric) or t0:t1, or auto (+/- 6 tau)"},
    {"--temp", "temp", "temperature or comma list, e.g. 1mK,2mK"},
    {"--temp-range", "temp_range", "start:stop:count, e.g. 0mK:3mK:31"},
    {"--shift", "shift", "equilibrium shift: first-order or exact"},
    {"--format", "format", "csv or tsv"},
    {"--out", "out", "output file (default stdout)"},
    {"--threads", "threads", "worker threads (0: all cores)"},
};

const std::map<std::string, std::vector<FlagSpec>> kCommandFlags = {
    {"phases",
     {{"--nx", "nx", "relative axial occupation"},
      {"--ny", "ny", "relative transverse occupation"},
      {"--nz", "nz", "relative transverse occupation"}}},
    {"fidelity", {}},
    {"tune",
     {{"--target", "target", "target phase in rad (accepts pi, 2pi)"},
      {"--tau-range", "tau_range", "bracket lo:hi for tau"}}},
    {"numsim",
     {{"--n-cut", "n_cut", "axial cutoff"},
      {"--l-cut", "l_cut", "transverse cutoff"},
      {"--k-max", "k_max", "highest multipole order (2, 3, 4)"},
      {"--tol", "tol", "adaptive tolerance"},
      {"--dt", "dt", "fixed step (0: adaptive)"},
      {"--n0", "n0", "initial axial level"},
      {"--l0", "l0", "initial transverse level"},
      {"--dump", "dump", "write checkpoint amplitudes to this CSV file"}}},
    {"chain",
     {{"--ions", "ions", "number of ions"},
      {"--internal", "internal", "comma list of internal states, e.g. 1,0,1"}}},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional phase gates between ions in separate microtraps"};
    app.require_subcommand(1);

    std::deque<std::pair<std::string, std::optional<std::string>>> values;  // stable addresses
    std::string config_path;
    bool echo = false, allow_unconverged = false, check_maxima = false;

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, extra] : kCommandFlags) {
        CLI::App* sub = app.add_subcommand(name);
        subs[name] = sub;
        sub->add_option("--config", config_path, "key = value file; flags override it");
        auto add = [&](const FlagSpec& f) {
            values.emplace_back(f.key, std::nullopt);
            sub->add_option(f.flag, values.back().second, f.help);
        };
        for (const FlagSpec& f : kCommon) add(f);
        for (const FlagSpec& f : extra) add(f);
        if (name == "phases" || name == "tune") sub->add_flag("--echo", echo, "spin-echo composition");
        if (name == "numsim") sub->add_flag("--allow-unconverged", allow_unconverged, "exit 0 even if leakage fails");
        if (name == "chain") sub->add_flag("--check-maxima", check_maxima, "report eta maxima against their bounds");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    RunConfig cfg;
    try {
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) cfg.command = name;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const auto& [key, v] : values)
            if (v) apply_setting(cfg, key, *v, "flag --" + std::string(key));
        if (echo) cfg.echo = true;
        if (allow_unconverged) cfg.allow_unconverged = true;
        if (check_maxima) cfg.check_maxima = true;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    auto emit = [&](const ResultTable& t) {
        const char delim = cfg.format == "tsv" ? '\t' : ',';
        if (cfg.out.empty()) {
            write_table(std::cout, t, delim);
            return;
        }
        std::ofstream f(cfg.out);
        if (!f) throw ConfigError("cannot open output file '" + cfg.out + "'");
        write_table(f, t, delim);
    };

    try {
        emit(run_command(cfg));
        return kExitOk;
    } catch (const UnconvergedRun& e) {
        try {
            emit(e.table);
        } catch (const std::exception& w) {
            std::cerr << "error: " << w.what() << '\n';
        }
        std::cerr << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for_current_exception();
    }
}
