#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtg/model.hpp"

namespace mtg::cli {

// Bad flag, bad config line or bad unit. Maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Dimension { Frequency, Length, Time, Temperature };

// "<number>[ ]<unit>". MHz, kHz and Hz are cyclic (2 pi applied); rad/s is
// angular. A bare number is rejected for every dimension.
double parse_quantity(std::string_view text, Dimension dim);

// "<start>:<stop>:<count>", inclusive, e.g. "0mK:3mK:31".
std::vector<double> parse_temperature_range(std::string_view text);

struct RunConfig {
    std::string command;

    std::string species = "Ca40";
    double mass_u = 0.0;  // > 0 overrides the species table
    double omega = 2.0 * 3.14159265358979323846 * 1e6;
    double separation = 20e-6;
    double xi = 0.7;
    double tau = 41.1069e-6;
    double t_start = 0.0, t_end = 0.0;  // both 0: +/- 6 tau
    std::vector<double> temperatures;   // K
    std::string shift = "first-order";  // or "exact"

    std::string format = "csv";
    std::string out;
    int threads = 0;  // 0: hardware concurrency

    // phases
    long nx = 0, ny = 0, nz = 0;
    bool echo = false;

    // tune
    double target = 3.14159265358979323846;
    double tau_lo = 0.0, tau_hi = 0.0;

    // numsim
    int n_cut = 48, l_cut = 24, k_max = 4;
    double tol = 1e-12;
    double dt = 0.0;
    int n0 = 0, l0 = 0;
    bool allow_unconverged = false;
    std::string dump;

    // chain
    int ions = 2;
    std::vector<int> internal;
    bool check_maxima = false;
};

// Applies one `key = value` setting. `origin` names the flag or file line in
// error messages.
void apply_setting(RunConfig& c, const std::string& key, const std::string& value, const std::string& origin);

// Line-oriented `key = value`. Lines without '=' are ignored and a leading
// '#' is stripped, so a result file's metadata header loads as a config.
void load_config_file(RunConfig& c, const std::string& path);
void load_config_text(RunConfig& c, std::string_view text, const std::string& source);

// Every resolved setting, in SI units with round-trip precision.
std::vector<std::pair<std::string, std::string>> resolved_settings(const RunConfig& c);

model::IonSpecies resolve_species(const RunConfig& c);
model::TrapModel build_model(const RunConfig& c);
model::ForcePulse build_pulse(const RunConfig& c);
int thread_count(const RunConfig& c);

std::string format_number(double v);

}  // namespace mtg::cli
