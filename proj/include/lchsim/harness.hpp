#pragma once

// Scenario files, snapshot round-trip and the command entry points.
//
// Error contract shared by all commands: configuration problems exit 2,
// numerical instability exits 3, file-system failures exit 4.  Summaries go
// to the given output stream as machine-readable key = value lines; progress
// goes to the error stream.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lchsim/geometry.hpp"
#include "lchsim/ladder.hpp"
#include "lchsim/spectroscopy.hpp"
#include "lchsim/switching.hpp"

namespace lchsim {

inline constexpr int exit_ok = 0;
inline constexpr int exit_parse = 2;
inline constexpr int exit_instability = 3;
inline constexpr int exit_io = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class UnitSystem { sim, si };

// ---------------------------------------------------------------------------
// Structured text configuration: [section] headers, key = value [unit-tag]
// lines, '#' comments.  Every physical quantity carries an explicit unit tag;
// bare counts and names do not.

struct ConfigEntry {
    std::string value;
    std::string unit;
    int line = 0;
};

struct Config {
    std::map<std::string, ConfigEntry> entries;  // "section.key"

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    const ConfigEntry& at(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) throw ConfigError("config: missing key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key) const { return at(key).value; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? at(key).value : fallback;
    }

    double get_number(const std::string& key, const std::string& expected_unit) const {
        const auto& e = at(key);
        if (e.unit != expected_unit)
            throw ConfigError("config line " + std::to_string(e.line) + ": '" + key + "' needs unit '" +
                              expected_unit + "', got '" + e.unit + "'");
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(e.line) + ": '" + key +
                              "' is not a number: '" + e.value + "'");
        }
    }

    double get_number(const std::string& key, const std::string& expected_unit, double fallback) const {
        return has(key) ? get_number(key, expected_unit) : fallback;
    }

    long long get_count(const std::string& key) const {
        const auto& e = at(key);
        if (!e.unit.empty())
            throw ConfigError("config line " + std::to_string(e.line) + ": '" + key +
                              "' is a bare count, got unit '" + e.unit + "'");
        try {
            std::size_t used = 0;
            const long long v = std::stoll(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(e.line) + ": '" + key +
                              "' is not an integer: '" + e.value + "'");
        }
    }

    long long get_count(const std::string& key, long long fallback) const {
        return has(key) ? get_count(key) : fallback;
    }
};

inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3)
                throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
            section = body.substr(1, body.size() - 2);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::istringstream keys(body.substr(0, eq));
        std::string key;
        keys >> key;
        std::string extra;
        if (key.empty() || (keys >> extra))
            throw ConfigError("config line " + std::to_string(line_no) + ": malformed key");
        std::istringstream vals(body.substr(eq + 1));
        ConfigEntry entry;
        entry.line = line_no;
        if (!(vals >> entry.value))
            throw ConfigError("config line " + std::to_string(line_no) + ": missing value for '" + key +
                              "'");
        vals >> entry.unit;
        if (vals >> extra)
            throw ConfigError("config line " + std::to_string(line_no) + ": trailing tokens after '" +
                              key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries.count(full))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
        cfg.entries[full] = entry;
    }
    return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    return parse_config(in);
}

// ---------------------------------------------------------------------------

struct Scenario {
    LadderConfig config;
    VelocityProfile profile;
    bool has_profile = false;
    SwitchParams switch_params;
    PulseDrive pulse;
    CellDesign design;
    bool has_pulse = false;
    std::optional<WavePacket> packet;
    ScatterRun run;
    UnitSystem units = UnitSystem::sim;
    std::uint64_t seed = 0;
    bool binary_snapshots = false;
};

namespace detail {

inline CellDesign design_from_config(const Config& c, const std::string& section) {
    CellDesign d;
    d.delta_z = c.get_number(section + ".delta_z", "m");
    d.delta_x = c.get_number(section + ".delta_x", "m");
    d.big_delta_x = c.get_number(section + ".big_delta_x", "m");
    d.big_delta_z = c.get_number(section + ".big_delta_z", "m");
    d.big_delta_y = c.get_number(section + ".big_delta_y", "m");
    d.lambda = c.get_number(section + ".lambda", "m");
    d.epsilon = c.get_number(section + ".epsilon", "F/m", constants::eps0);
    d.mu = c.get_number(section + ".mu", "H/m", constants::mu0);
    return d;
}

}  // namespace detail

// Simulation-unit scenarios: every physical quantity tagged "sim" and the
// ladder in natural units L = dx = 1.
inline Scenario scenario_from_config(const Config& c) {
    Scenario s;
    const std::string units = c.get_string("units", "sim");
    if (units == "sim")
        s.units = UnitSystem::sim;
    else if (units == "si")
        s.units = UnitSystem::si;
    else
        throw ConfigError("config: units must be 'sim' or 'si', got '" + units + "'");
    s.seed = std::uint64_t(c.get_count("seed", 0));

    s.config.n_cells = std::size_t(c.get_count("ladder.n_cells"));
    s.config.inductance = c.get_number("ladder.inductance", "sim", 1.0);
    s.config.dx = c.get_number("ladder.dx", "sim", 1.0);
    if (s.units == UnitSystem::sim && (s.config.inductance != 1.0 || s.config.dx != 1.0))
        throw ConfigError("config: simulation units require inductance = dx = 1");
    s.config.dt = c.get_number("ladder.dt", "sim");
    const std::string boundary = c.get_string("ladder.boundary", "periodic");
    if (boundary == "periodic")
        s.config.boundary = Boundary::periodic;
    else if (boundary == "absorbing")
        s.config.boundary = Boundary::absorbing;
    else
        throw ConfigError("config: unknown boundary '" + boundary + "'");
    s.config.sponge_width = std::size_t(c.get_count("ladder.sponge_width", 0));
    s.config.max_damping = c.get_number("ladder.max_damping", "sim", 0.0);
    try {
        s.config.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: ") + err.what());
    }

    s.has_profile = c.has("profile.type");
    s.has_pulse = c.has("pulse.density");
    if (s.has_profile == s.has_pulse)
        throw ConfigError("config: exactly one schedule source required ([profile] or [pulse])");

    if (s.has_profile) {
        const std::string type = c.get_string("profile.type");
        if (type == "tanh") {
            s.profile = tanh_profile(c.get_number("profile.c_mean", "sim"),
                                     c.get_number("profile.c_step", "sim"),
                                     c.get_number("profile.steepness", "sim"),
                                     c.get_number("profile.center", "sim"),
                                     c.get_number("profile.drift", "sim"));
        } else if (type == "linear") {
            s.profile = linear_profile(c.get_number("profile.c0", "sim"),
                                       c.get_number("profile.slope", "sim"),
                                       c.get_number("profile.center", "sim"),
                                       c.get_number("profile.c_floor", "sim"),
                                       c.get_number("profile.c_ceil", "sim"),
                                       c.get_number("profile.drift", "sim"));
        } else {
            throw ConfigError("config: unknown profile type '" + type + "'");
        }
    } else {
        s.switch_params.delta_omega = c.get_number("switch.delta_omega", "sim");
        s.switch_params.kappa = c.get_number("switch.kappa", "sim");
        s.switch_params.rabi = [](double) { return 0.0; };
        s.switch_params.test_field = [](double) { return 0.0; };
        s.pulse.density = c.get_number("pulse.density", "sim");
        s.pulse.eps_background = c.get_number("pulse.eps_background", "sim");
        s.pulse.t_end = c.get_number("pulse.t_end", "sim", 0.0);
        s.pulse.dt = c.get_number("pulse.dt", "sim", 0.0);
        s.pulse.sample_dt = c.get_number("pulse.sample_dt", "sim", 0.0);
        if (c.has("pulse.omega0")) {
            s.pulse.rabi_per_cell = swept_gaussian_rabi(
                c.get_number("pulse.omega0", "sim"), c.get_number("pulse.tau", "sim"),
                c.get_number("pulse.x_start", "sim"), c.get_number("pulse.speed", "sim"), s.config.dx);
        }
        s.design = CellDesign{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    }

    if (c.has("packet.k0")) {
        WavePacket pk;
        pk.k0 = c.get_number("packet.k0", "sim");
        pk.sigma_k = c.get_number("packet.sigma_k", "sim");
        pk.x0 = c.get_number("packet.x0", "sim");
        pk.amplitude = c.get_number("packet.amplitude", "sim", 1.0);
        const std::string branch = c.get_string("packet.branch", "right");
        if (branch == "right")
            pk.branch = PacketBranch::right_moving;
        else if (branch == "left")
            pk.branch = PacketBranch::left_moving;
        else
            throw ConfigError("config: packet branch must be 'right' or 'left'");
        s.packet = pk;
    }

    s.run.t_end = c.get_number("run.t_end", "sim");
    s.run.snap_stride = std::size_t(c.get_count("run.snap_stride", 1));
    if (s.run.snap_stride == 0) throw ConfigError("config: snap_stride must be >= 1");
    const auto n_steps = std::llround(s.run.t_end / s.config.dt);
    if (n_steps <= 0 || n_steps % (long long)(s.run.snap_stride) != 0)
        throw ConfigError("config: snap_stride must divide the total step count");
    s.run.window_chi_lo = c.get_number("run.window_chi_lo", "sim", 0.0);
    s.run.window_n_chi = std::size_t(c.get_count("run.window_n_chi", 0));
    s.run.t_in_begin = c.get_number("run.t_in_begin", "sim", 0.0);
    s.run.t_in_end = c.get_number("run.t_in_end", "sim", 0.0);
    s.run.t_out_begin = c.get_number("run.t_out_begin", "sim", 0.0);
    s.run.t_out_end = c.get_number("run.t_out_end", "sim", 0.0);
    s.run.fit_band_lo = c.get_number("run.fit_band_lo", "sim", 0.0);
    s.run.fit_band_hi = c.get_number("run.fit_band_hi", "sim", 0.0);
    s.binary_snapshots = c.get_string("output.snapshots", "csv") == "binary";
    return s;
}

// ---------------------------------------------------------------------------
// Snapshots: CSV (17 significant digits, round-trip safe) or binary with the
// magic header "LCH1".

namespace detail {

inline constexpr char snapshot_magic[4] = {'L', 'C', 'H', '1'};

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const LadderState& state,
                           bool binary = false) {
    if (binary) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write snapshot: " + path.string());
        out.write(detail::snapshot_magic, 4);
        const std::uint64_t n = state.a.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(reinterpret_cast<const char*>(&state.t), sizeof state.t);
        out.write(reinterpret_cast<const char*>(state.a.data()), std::streamsize(n * sizeof(double)));
        out.write(reinterpret_cast<const char*>(state.q.data()), std::streamsize(n * sizeof(double)));
        if (!out) throw IoError("short write on snapshot: " + path.string());
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write snapshot: " + path.string());
    out << "# lchsim snapshot t = " << detail::fmt17(state.t) << "\n";
    out << "index,a,q\n";
    for (std::size_t i = 0; i < state.a.size(); ++i)
        out << i << ',' << detail::fmt17(state.a[i]) << ',' << detail::fmt17(state.q[i]) << "\n";
    if (!out) throw IoError("short write on snapshot: " + path.string());
}

inline LadderState read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    LadderState state;
    if (in && std::memcmp(magic, detail::snapshot_magic, 4) == 0) {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof n);
        in.read(reinterpret_cast<char*>(&state.t), sizeof state.t);
        if (!in || n > (1ull << 32)) throw IoError("corrupt snapshot header: " + path.string());
        state.a.resize(n);
        state.q.resize(n);
        in.read(reinterpret_cast<char*>(state.a.data()), std::streamsize(n * sizeof(double)));
        in.read(reinterpret_cast<char*>(state.q.data()), std::streamsize(n * sizeof(double)));
        if (!in) throw IoError("truncated snapshot: " + path.string());
        return state;
    }
    in.clear();
    in.seekg(0);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# lchsim snapshot t = ", 0) != 0)
        throw IoError("not a snapshot file: " + path.string());
    state.t = std::stod(line.substr(22));
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw IoError("corrupt snapshot row: " + path.string());
        state.a.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        state.q.push_back(std::stod(line.substr(c2 + 1)));
    }
    return state;
}

// ---------------------------------------------------------------------------

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    UnitSystem units = UnitSystem::sim;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::optional<std::pair<double, double>> fit_band;
};

namespace detail {

// E - dt^2/(8C) sum (lap A)^2 is the exactly conserved leapfrog quadratic on
// a uniform periodic ladder; elsewhere it is reported as-is.
inline double shadow_energy(const LadderState& s, const LadderConfig& cfg,
                            const CapacitanceSchedule& caps) {
    const std::size_t n = cfg.n_cells;
    double corr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lap = s.a[(i + 1) % n] - 2.0 * s.a[i] + s.a[(i + n - 1) % n];
        corr += lap * lap / caps.value(i, s.t);
    }
    return energy(s, cfg, caps) - cfg.dt * cfg.dt / 8.0 * corr;
}

inline CapacitanceSchedule schedule_for(const Scenario& s) {
    return s.has_profile ? capacitance_from_profile(s.profile, s.config)
                         : pulse_to_schedule(s.pulse, s.switch_params, s.design, s.config);
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec || !std::filesystem::is_directory(p)) throw IoError("cannot create output directory: " + dir);
    return p;
}

}  // namespace detail

inline int cmd_simulate(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario scen = scenario_from_config(load_config(opts.config_path));
        const auto out_dir = detail::prepare_out_dir(opts.out_dir);
        auto caps = detail::schedule_for(scen);
        std::vector<double> a(scen.config.n_cells, 0.0), q(scen.config.n_cells, 0.0);
        if (scen.packet) make_packet(*scen.packet, scen.config, caps, a, q);
        auto state = init_ladder(scen.config, a, q);

        const long long n_steps = std::llround(scen.run.t_end / scen.config.dt);
        std::vector<double> energies, shadows, charges;
        std::size_t n_snapshots = 0;
        auto record = [&](const LadderState& st) {
            energies.push_back(energy(st, scen.config, caps));
            shadows.push_back(detail::shadow_energy(st, scen.config, caps));
            charges.push_back(total_charge(st));
            char name[32];
            std::snprintf(name, sizeof name, "snap_%06zu.%s", n_snapshots,
                          scen.binary_snapshots ? "lch1" : "csv");
            write_snapshot(out_dir / name, st, scen.binary_snapshots);
            ++n_snapshots;
        };
        record(state);
        try {
            for (long long i = 1; i <= n_steps; ++i) {
                step_inplace(state, scen.config, caps);
                if (i % 1000 == 0) err << "step " << i << "/" << n_steps << "\n";
                if (i % (long long)(scen.run.snap_stride) == 0) record(state);
            }
        } catch (const std::runtime_error& e) {
            err << "instability: " << e.what() << "\n";
            return exit_instability;
        }

        out << "n_steps = " << n_steps << "\n";
        out << "n_snapshots = " << n_snapshots << "\n";
        out << "energy_initial = " << detail::fmt17(energies.front()) << "\n";
        out << "energy_final = " << detail::fmt17(energies.back()) << "\n";
        const double e0 = shadows.front();
        out << "energy_drift_rel = "
            << detail::fmt17(e0 != 0.0 ? std::abs(shadows.back() - e0) / std::abs(e0) : 0.0) << "\n";
        const double q0 = charges.front();
        double dq = 0.0;
        for (double qv : charges) dq = std::max(dq, std::abs(qv - q0));
        out << "charge_drift = " << detail::fmt17(dq) << "\n";
        if (scen.has_profile) {
            const auto horizons = find_horizons(scen.profile);
            out << "n_horizons = " << horizons.crossings.size() << "\n";
            for (const auto& h : horizons.crossings) {
                out << "horizon = " << detail::fmt17(h.chi) << " "
                    << (h.kind == HorizonKind::black ? "black" : "white") << " kappa_g "
                    << detail::fmt17(h.kappa_g);
                if (opts.units == UnitSystem::si) out << " t_kelvin " << detail::fmt17(h.t_kelvin);
                out << "\n";
            }
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        err << "config: " << e.what() << "\n";
        return exit_parse;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_spectrum(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario scen = scenario_from_config(load_config(opts.config_path));
        if (!scen.has_profile) throw ConfigError("config: spectrum needs a [profile] scenario");
        if (!scen.packet) throw ConfigError("config: spectrum needs a [packet] section");
        const auto out_dir = detail::prepare_out_dir(opts.out_dir);
        ScatterRun run = scen.run;
        const bool band_override = opts.fit_band.has_value();
        if (band_override) {
            run.fit_band_lo = opts.fit_band->first;
            run.fit_band_hi = opts.fit_band->second;
        }

        ScatterResult res;
        try {
            res = scatter_experiment(scen.profile, *scen.packet, scen.config, run);
        } catch (const std::runtime_error& e) {
            err << "instability: " << e.what() << "\n";
            return exit_instability;
        }

        std::ofstream csv(out_dir / "spectrum.csv");
        if (!csv) throw IoError("cannot write spectrum.csv");
        csv << "# kappa_g_predicted = " << detail::fmt17(res.kappa_predicted) << "\n";
        csv << "# t_fit = " << detail::fmt17(res.t_fit) << "\n";
        csv << "# t_fit_2pi = " << detail::fmt17(res.t_fit * 2.0 * std::numbers::pi) << "\n";
        csv << "# fit_r2 = " << detail::fmt17(res.fit_r2) << "\n";
        csv << "# fit_band = " << detail::fmt17(res.fit_band_lo) << " "
            << detail::fmt17(res.fit_band_hi) << "\n";
        csv << "# fit_band_source = " << (band_override ? "override" : "default") << "\n";
        csv << "# window_chi = nuttall\n# window_t = rect\n";
        csv << "# window_n_chi = " << run.window_n_chi << "\n";
        csv << "# snap_stride = " << run.snap_stride << "\n";
        csv << "# n_samples = " << res.samples.size() << "\n";
        csv << "omega,alpha2,beta2,ratio\n";
        std::ofstream plot(out_dir / "spectrum_plot.dat");
        if (!plot) throw IoError("cannot write spectrum_plot.dat");
        for (const auto& s : res.samples) {
            csv << detail::fmt17(s.omega_comoving) << ',' << detail::fmt17(s.alpha2) << ','
                << detail::fmt17(s.beta2) << ','
                << detail::fmt17(s.alpha2 > 0.0 ? s.beta2 / s.alpha2 : 0.0) << "\n";
            plot << detail::fmt17(s.omega_comoving) << ' ' << detail::fmt17(s.beta2) << "\n";
        }
        if (!csv || !plot) throw IoError("short write on spectrum output");

        if (res.kappa_predicted > 0.0) {
            out << "kappa_g_predicted = " << detail::fmt17(res.kappa_predicted) << "\n";
            out << "t_fit_2pi = " << detail::fmt17(res.t_fit * 2.0 * std::numbers::pi) << "\n";
            out << "ratio_t_fit_2pi_over_kappa = "
                << detail::fmt17(res.t_fit * 2.0 * std::numbers::pi / res.kappa_predicted) << "\n";
            out << "fit_r2 = " << detail::fmt17(res.fit_r2) << "\n";
        } else {
            double worst = 0.0;
            for (const auto& s : res.samples) worst = std::max(worst, s.beta2);
            out << "no horizon; beta2 consistent with zero (max " << detail::fmt17(worst) << ")\n";
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        err << "config: " << e.what() << "\n";
        return exit_parse;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_design(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Config c = load_config(opts.config_path);
        const CellDesign d = detail::design_from_config(c, "design");
        const double ratio = c.get_number("design.hierarchy_ratio", "", 10.0);
        HierarchyReport rep;
        try {
            rep = validate_hierarchy(d, ratio);
        } catch (const std::invalid_argument& e) {
            err << "config: " << e.what() << "\n";
            return exit_parse;
        }
        out << "inductance_H = " << detail::fmt17(rep.inductance) << "\n";
        out << "capacitance_F = " << detail::fmt17(rep.capacitance) << "\n";
        out << "wave_speed_m_per_s = " << detail::fmt17(rep.c) << "\n";
        out << "slow_down = " << detail::fmt17(rep.slow_down) << "\n";
        for (const auto& l : rep.links)
            out << "hierarchy " << l.name << " = " << (l.pass ? "PASS" : "FAIL") << " ("
                << detail::fmt17(l.lhs) << " vs " << detail::fmt17(l.rhs) << ")\n";
        out << "hierarchy_overall = " << (rep.pass ? "PASS" : "FAIL") << "\n";
        if (c.has("design.sweep_rate")) {
            const double kappa = c.get_number("design.sweep_rate", "1/s");
            const double t_h = hawking_temperature_SI(kappa);
            out << "t_hawking_K = " << detail::fmt17(t_h) << "\n";
            out << "flux_W = " << detail::fmt17(hawking_flux_SI(t_h)) << "\n";
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        err << "config: " << e.what() << "\n";
        return exit_parse;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return exit_io;
    }
}

inline int cmd_switch(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Scenario scen = scenario_from_config(load_config(opts.config_path));
        if (!scen.has_pulse) throw ConfigError("config: switch needs a [pulse] scenario");
        const auto out_dir = detail::prepare_out_dir(opts.out_dir);
        if (scen.pulse.rabi_per_cell &&
            scen.pulse.dt * scen.switch_params.delta_omega > 0.1) {
            err << "instability: dt * delta_omega exceeds the integration guard (0.1); refine pulse.dt\n";
            return exit_instability;
        }
        auto caps = pulse_to_schedule(scen.pulse, scen.switch_params, scen.design, scen.config);

        const double t_end = scen.pulse.t_end > 0.0 ? scen.pulse.t_end : scen.run.t_end;
        const double dt_tab = scen.pulse.sample_dt > 0.0 ? scen.pulse.sample_dt : t_end / 100.0;
        std::ofstream table(out_dir / "schedule.csv");
        if (!table) throw IoError("cannot write schedule.csv");
        table << "t";
        for (std::size_t n = 0; n < scen.config.n_cells; ++n) table << ",c" << n;
        table << "\n";
        double c_lo = caps.c_max, c_hi = caps.c_min;
        for (double t = 0.0; t <= t_end + 0.5 * dt_tab; t += dt_tab) {
            table << detail::fmt17(t);
            for (std::size_t n = 0; n < scen.config.n_cells; ++n) {
                const double cv = caps.value(n, t);
                c_lo = std::min(c_lo, cv);
                c_hi = std::max(c_hi, cv);
                table << ',' << detail::fmt17(cv);
            }
            table << "\n";
        }
        if (!table) throw IoError("short write on schedule.csv");

        // adiabaticity report from the mid-lattice cell's three-level system
        double norm_drift = 0.0, pop_b_max = 0.0;
        if (scen.pulse.rabi_per_cell) {
            SwitchParams cell = scen.switch_params;
            const auto rabi = scen.pulse.rabi_per_cell;
            const std::size_t mid = scen.config.n_cells / 2;
            cell.rabi = [rabi, mid](double t) { return rabi(mid, t); };
            ThreeLevelState st;
            const int n_check = 200;
            for (int i = 1; i <= n_check; ++i) {
                st = integrate_three_level(st, cell, t_end * double(i) / n_check, scen.pulse.dt);
                norm_drift = std::max(norm_drift, std::abs(st.norm2() - 1.0));
                pop_b_max = std::max(pop_b_max, st.pop_b());
            }
        }
        out << "schedule_c_min = " << detail::fmt17(c_lo) << "\n";
        out << "schedule_c_max = " << detail::fmt17(c_hi) << "\n";
        out << "norm_drift_max = " << detail::fmt17(norm_drift) << "\n";
        out << "pop_b_max = " << detail::fmt17(pop_b_max) << "\n";
        return exit_ok;
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        err << "config: " << e.what() << "\n";
        return exit_parse;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return exit_io;
    }
}

}  // namespace lchsim
