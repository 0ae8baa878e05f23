#include "run_config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "mtg/constants.hpp"

namespace mtg::cli {

namespace {

struct Unit {
    std::string_view name;
    Dimension dim;
    double scale;
};

constexpr double two_pi = 2.0 * constants::pi;

const std::array<Unit, 19> kUnits = {{
    {"rad/s", Dimension::Frequency, 1.0},
    {"Hz", Dimension::Frequency, two_pi},
    {"kHz", Dimension::Frequency, two_pi * 1e3},
    {"MHz", Dimension::Frequency, two_pi * 1e6},
    {"m", Dimension::Length, 1.0},
    {"mm", Dimension::Length, 1e-3},
    {"um", Dimension::Length, 1e-6},
    {"\xC2\xB5m", Dimension::Length, 1e-6},  // micro sign
    {"\xCE\xBCm", Dimension::Length, 1e-6},  // greek mu
    {"nm", Dimension::Length, 1e-9},
    {"s", Dimension::Time, 1.0},
    {"ms", Dimension::Time, 1e-3},
    {"us", Dimension::Time, 1e-6},
    {"\xC2\xB5s", Dimension::Time, 1e-6},
    {"\xCE\xBCs", Dimension::Time, 1e-6},
    {"ns", Dimension::Time, 1e-9},
    {"K", Dimension::Temperature, 1.0},
    {"mK", Dimension::Temperature, 1e-3},
    {"uK", Dimension::Temperature, 1e-6},
}};

const char* dim_name(Dimension d) {
    switch (d) {
        case Dimension::Frequency: return "frequency (rad/s, Hz, kHz, MHz)";
        case Dimension::Length: return "length (m, mm, um, nm)";
        case Dimension::Time: return "time (s, ms, us, ns)";
        case Dimension::Temperature: return "temperature (K, mK, uK)";
    }
    return "";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (true) {
        const size_t next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

// Leading number; returns the unparsed tail.
double leading_number(std::string_view s, std::string_view& rest, const std::string& what) {
    s = trim(s);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc()) throw ConfigError("cannot parse a number from '" + std::string(s) + "' (" + what + ")");
    rest = trim(std::string_view(ptr, s.data() + s.size() - ptr));
    return v;
}

double parse_real(std::string_view s, const std::string& what) {
    std::string_view rest;
    const double v = leading_number(s, rest, what);
    if (!rest.empty()) throw ConfigError("unexpected trailing text '" + std::string(rest) + "' (" + what + ")");
    if (!std::isfinite(v)) throw ConfigError("non-finite value (" + what + ")");
    return v;
}

long parse_integer(std::string_view s, const std::string& what) {
    s = trim(s);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("expected an integer, got '" + std::string(s) + "' (" + what + ")");
    return v;
}

bool parse_bool(std::string_view s, const std::string& what) {
    std::string v(trim(s));
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected a boolean, got '" + v + "' (" + what + ")");
}

// "pi", "2pi", "0.5 pi" or a plain number of radians.
double parse_angle(std::string_view s, const std::string& what) {
    s = trim(s);
    if (s == "pi") return constants::pi;
    if (s.size() > 2 && s.substr(s.size() - 2) == "pi") return parse_real(s.substr(0, s.size() - 2), what) * constants::pi;
    return parse_real(s, what);
}

struct SpeciesEntry {
    const char* name;
    double mass_u;
};

const std::array<SpeciesEntry, 9> kSpecies = {{
    {"Ca40", 39.9626},
    {"Be9", 9.0121831},
    {"Mg24", 23.985042},
    {"Mg25", 24.985837},
    {"Ca43", 42.958766},
    {"Sr88", 87.905612},
    {"Ba138", 137.905247},
    {"Yb171", 170.936326},
    {"Yb174", 173.938862},
}};

bool iequal(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string with_unit(double v, const char* unit) { return format_number(v) + " " + unit; }

template <class T>
void require(bool ok, const std::string& what, const T& msg) {
    if (!ok) throw ConfigError(std::string(msg) + " (" + what + ")");
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_quantity(std::string_view text, Dimension dim) {
    std::string_view unit;
    const std::string what(text);
    const double v = leading_number(text, unit, what);
    if (!std::isfinite(v)) throw ConfigError("non-finite value '" + what + "'");
    if (unit.empty()) throw ConfigError("'" + what + "' needs a unit of " + dim_name(dim));
    for (const Unit& u : kUnits)
        if (u.name == unit) {
            if (u.dim != dim) break;
            return v * u.scale;
        }
    throw ConfigError("unit '" + std::string(unit) + "' in '" + what + "' is not a " + dim_name(dim));
}

std::vector<double> parse_temperature_range(std::string_view text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("temperature range must be start:stop:count, got '" + std::string(text) + "'");
    const double a = parse_quantity(parts[0], Dimension::Temperature);
    const double b = parse_quantity(parts[1], Dimension::Temperature);
    const long n = parse_integer(parts[2], "temperature range count");
    if (n < 1) throw ConfigError("temperature range count must be >= 1");
    if (b < a) throw ConfigError("temperature range must be ascending");
    std::vector<double> out(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value, const std::string& origin) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string what = origin + ": " + raw_key;
    const std::string_view v = trim(value);

    if (key == "tool" || key == "command" || key.rfind("derived.", 0) == 0 || key.rfind("status.", 0) == 0 ||
        key.rfind("result.", 0) == 0)
        return;  // informational metadata
    if (key == "species") {
        require(!v.empty(), what, "species name is empty");
        c.species = std::string(v);
    } else if (key == "mass_u") {
        c.mass_u = parse_real(v, what);
        require(c.mass_u >= 0.0, what, "mass must be positive (0 selects the species table)");
    } else if (key == "omega") {
        c.omega = parse_quantity(v, Dimension::Frequency);
        require(c.omega > 0.0, what, "omega must be positive");
    } else if (key == "separation") {
        c.separation = parse_quantity(v, Dimension::Length);
        require(c.separation > 0.0, what, "separation must be positive");
    } else if (key == "xi") {
        c.xi = parse_real(v, what);
        require(c.xi >= 0.0, what, "xi must be non-negative");
    } else if (key == "tau") {
        c.tau = parse_quantity(v, Dimension::Time);
        require(c.tau > 0.0, what, "tau must be positive");
    } else if (key == "window") {
        if (v == "auto") {
            c.t_start = c.t_end = 0.0;
            return;
        }
        const auto parts = split(v, ':');
        if (parts.size() == 1) {
            const double h = parse_quantity(parts[0], Dimension::Time);
            require(h > 0.0, what, "half window must be positive");
            c.t_start = -h;
            c.t_end = h;
        } else if (parts.size() == 2) {
            c.t_start = parse_quantity(parts[0], Dimension::Time);
            c.t_end = parse_quantity(parts[1], Dimension::Time);
            require(c.t_start < 0.0 && c.t_end > 0.0, what, "window must straddle t = 0");
        } else {
            throw ConfigError("window must be T or t0:t1 (" + what + ")");
        }
    } else if (key == "temperatures" || key == "temp") {
        c.temperatures.clear();
        if (v == "none" || v.empty()) return;
        for (std::string_view part : split(v, ',')) {
            const double t = parse_quantity(part, Dimension::Temperature);
            require(t >= 0.0, what, "temperature must be non-negative");
            c.temperatures.push_back(t);
        }
    } else if (key == "temp_range") {
        c.temperatures = parse_temperature_range(v);
        require(c.temperatures.front() >= 0.0, what, "temperature must be non-negative");
    } else if (key == "shift") {
        require(v == "first-order" || v == "exact", what, "shift must be first-order or exact");
        c.shift = std::string(v);
    } else if (key == "format") {
        require(v == "csv" || v == "tsv", what, "format must be csv or tsv");
        c.format = std::string(v);
    } else if (key == "out") {
        c.out = std::string(v);
    } else if (key == "threads") {
        c.threads = static_cast<int>(parse_integer(v, what));
        require(c.threads >= 0, what, "threads must be >= 0");
    } else if (key == "nx" || key == "ny" || key == "nz") {
        const long n = parse_integer(v, what);
        require(n >= 0, what, "occupation must be >= 0");
        (key == "nx" ? c.nx : key == "ny" ? c.ny : c.nz) = n;
    } else if (key == "echo") {
        c.echo = parse_bool(v, what);
    } else if (key == "target") {
        c.target = parse_angle(v, what);
    } else if (key == "tau_range") {
        if (v == "auto") {
            c.tau_lo = c.tau_hi = 0.0;
            return;
        }
        const auto parts = split(v, ':');
        if (parts.size() != 2) throw ConfigError("tau range must be lo:hi (" + what + ")");
        c.tau_lo = parse_quantity(parts[0], Dimension::Time);
        c.tau_hi = parse_quantity(parts[1], Dimension::Time);
        require(c.tau_lo > 0.0 && c.tau_hi > c.tau_lo, what, "tau range must satisfy 0 < lo < hi");
    } else if (key == "n_cut" || key == "l_cut" || key == "k_max" || key == "n0" || key == "l0" || key == "ions") {
        const long n = parse_integer(v, what);
        require(n >= 0, what, "must be >= 0");
        int& dst = key == "n_cut" ? c.n_cut : key == "l_cut" ? c.l_cut : key == "k_max" ? c.k_max
                 : key == "n0"    ? c.n0    : key == "l0"    ? c.l0    : c.ions;
        dst = static_cast<int>(n);
    } else if (key == "tol") {
        c.tol = parse_real(v, what);
        require(c.tol > 0.0, what, "tol must be positive");
    } else if (key == "dt") {
        c.dt = (v == "0") ? 0.0 : parse_quantity(v, Dimension::Time);
        require(c.dt >= 0.0, what, "dt must be >= 0");
    } else if (key == "allow_unconverged") {
        c.allow_unconverged = parse_bool(v, what);
    } else if (key == "dump") {
        c.dump = std::string(v);
    } else if (key == "internal") {
        c.internal.clear();
        if (v == "uniform" || v.empty()) return;
        for (std::string_view part : split(v, ',')) {
            const long a = parse_integer(part, what);
            require(a == 0 || a == 1, what, "internal states must be 0 or 1");
            c.internal.push_back(static_cast<int>(a));
        }
    } else if (key == "check_maxima") {
        c.check_maxima = parse_bool(v, what);
    } else {
        throw ConfigError("unknown setting '" + raw_key + "' (" + origin + ")");
    }
}

void load_config_text(RunConfig& c, std::string_view text, const std::string& source) {
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (!s.empty() && s.front() == '#') s = trim(s.substr(1));
        const size_t eq = s.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string key(trim(s.substr(0, eq)));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": missing key");
        apply_setting(c, key, std::string(trim(s.substr(eq + 1))), source + ":" + std::to_string(line_no));
    }
}

void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    load_config_text(c, ss.str(), path);
}

std::vector<std::pair<std::string, std::string>> resolved_settings(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("species", c.species);
    kv.emplace_back("mass_u", format_number(c.mass_u));
    kv.emplace_back("omega", with_unit(c.omega, "rad/s"));
    kv.emplace_back("separation", with_unit(c.separation, "m"));
    kv.emplace_back("xi", format_number(c.xi));
    kv.emplace_back("tau", with_unit(c.tau, "s"));
    kv.emplace_back("window", c.t_start == 0.0 && c.t_end == 0.0
                                  ? std::string("auto")
                                  : with_unit(c.t_start, "s") + ":" + with_unit(c.t_end, "s"));
    std::string temps;
    for (double t : c.temperatures) temps += (temps.empty() ? "" : ",") + with_unit(t, "K");
    kv.emplace_back("temperatures", temps.empty() ? "none" : temps);
    kv.emplace_back("shift", c.shift);
    kv.emplace_back("format", c.format);
    kv.emplace_back("threads", std::to_string(c.threads));
    kv.emplace_back("nx", std::to_string(c.nx));
    kv.emplace_back("ny", std::to_string(c.ny));
    kv.emplace_back("nz", std::to_string(c.nz));
    kv.emplace_back("echo", c.echo ? "true" : "false");
    kv.emplace_back("target", format_number(c.target));
    kv.emplace_back("tau_range", c.tau_lo == 0.0 && c.tau_hi == 0.0
                                     ? std::string("auto")
                                     : with_unit(c.tau_lo, "s") + ":" + with_unit(c.tau_hi, "s"));
    kv.emplace_back("n_cut", std::to_string(c.n_cut));
    kv.emplace_back("l_cut", std::to_string(c.l_cut));
    kv.emplace_back("k_max", std::to_string(c.k_max));
    kv.emplace_back("tol", format_number(c.tol));
    kv.emplace_back("dt", c.dt == 0.0 ? std::string("0") : with_unit(c.dt, "s"));
    kv.emplace_back("n0", std::to_string(c.n0));
    kv.emplace_back("l0", std::to_string(c.l0));
    kv.emplace_back("allow_unconverged", c.allow_unconverged ? "true" : "false");
    kv.emplace_back("ions", std::to_string(c.ions));
    std::string internal;
    for (int a : c.internal) internal += (internal.empty() ? "" : ",") + std::to_string(a);
    kv.emplace_back("internal", internal.empty() ? "uniform" : internal);
    kv.emplace_back("check_maxima", c.check_maxima ? "true" : "false");
    return kv;
}

model::IonSpecies resolve_species(const RunConfig& c) {
    if (c.mass_u > 0.0) return model::species_from_mass_u(c.mass_u, c.species);
    if (iequal(c.species, "Ca40")) return model::calcium40();
    for (const SpeciesEntry& s : kSpecies)
        if (iequal(c.species, s.name)) return model::species_from_mass_u(s.mass_u, s.name);
    std::string known;
    for (const SpeciesEntry& s : kSpecies) known += std::string(known.empty() ? "" : ", ") + s.name;
    throw ConfigError("unknown species '" + c.species + "' (known: " + known + "; or give --mass-u)");
}

model::TrapModel build_model(const RunConfig& c) {
    return model::build_trap_model(resolve_species(c), c.omega, c.separation,
                                   c.shift == "exact" ? model::ShiftModel::Exact : model::ShiftModel::FirstOrder);
}

model::ForcePulse build_pulse(const RunConfig& c) {
    if (c.t_start == 0.0 && c.t_end == 0.0) return model::make_pulse(c.xi, c.tau);
    return model::make_pulse(c.xi, c.tau, c.t_start, c.t_end);
}

int thread_count(const RunConfig& c) {
    if (c.threads > 0) return c.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace mtg::cli
