#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lchsim/harness.hpp"

namespace {

lchsim::CliOptions parse_common(const std::string& units, const std::string& fit_band,
                                const std::string& config, const std::string& out_dir,
                                std::uint64_t seed, bool seed_set) {
    lchsim::CliOptions opts;
    opts.config_path = config;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.seed_set = seed_set;
    if (units == "sim")
        opts.units = lchsim::UnitSystem::sim;
    else if (units == "si")
        opts.units = lchsim::UnitSystem::si;
    else
        throw lchsim::ConfigError("--units must be 'sim' or 'si'");
    if (!fit_band.empty()) {
        const auto colon = fit_band.find(':');
        if (colon == std::string::npos)
            throw lchsim::ConfigError("--fit-band expects LO:HI");
        try {
            const double lo = std::stod(fit_band.substr(0, colon));
            const double hi = std::stod(fit_band.substr(colon + 1));
            if (!(hi > lo) || !(lo > 0.0)) throw std::invalid_argument("order");
            opts.fit_band = {lo, hi};
        } catch (const std::exception&) {
            throw lchsim::ConfigError("--fit-band expects 0 < LO < HI");
        }
    }
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete LC-ladder horizon laboratory"};
    app.require_subcommand(1);

    std::string config, out_dir = ".", units = "sim", fit_band;
    std::uint64_t seed = 0;
    bool seed_set = false;
    auto add_common = [&](CLI::App* sub, bool needs_band) {
        sub->add_option("--config", config, "scenario file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--units", units, "unit system: sim or si");
        sub->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_set = true; });
        if (needs_band) sub->add_option("--fit-band", fit_band, "fit band LO:HI (co-moving frequency)");
    };
    auto* sim = app.add_subcommand("simulate", "run a ladder scenario and write snapshots");
    auto* spec = app.add_subcommand("spectrum", "scattering run plus thermal fit");
    auto* design = app.add_subcommand("design", "SI cell-design feasibility report");
    auto* sw = app.add_subcommand("switch", "pulse-driven capacitance schedule report");
    add_common(sim, false);
    add_common(spec, true);
    add_common(design, false);
    add_common(sw, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lchsim::exit_parse;
    }

    try {
        const auto opts = parse_common(units, fit_band, config, out_dir, seed, seed_set);
        if (sim->parsed()) return lchsim::cmd_simulate(opts, std::cout, std::cerr);
        if (spec->parsed()) return lchsim::cmd_spectrum(opts, std::cout, std::cerr);
        if (design->parsed()) return lchsim::cmd_design(opts, std::cout, std::cerr);
        if (sw->parsed()) return lchsim::cmd_switch(opts, std::cout, std::cerr);
    } catch (const lchsim::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return lchsim::exit_parse;
    }
    return lchsim::exit_parse;
}
