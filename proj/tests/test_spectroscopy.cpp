#include <catch2/catch_amalgamated.hpp>

#include "lchsim/spectroscopy.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lchsim;
using std::numbers::pi;

namespace {

LadderConfig headline_config() {
    LadderConfig cfg;
    cfg.n_cells = 4096;
    cfg.dt = 1.0 / 60.0;
    cfg.boundary = Boundary::absorbing;
    cfg.sponge_width = 100;
    cfg.max_damping = 1.5;
    return cfg;
}

WavePacket headline_packet() {
    WavePacket pk;
    pk.k0 = 0.22;
    pk.sigma_k = 0.07;
    pk.x0 = 3850.0;
    pk.branch = PacketBranch::left_moving;
    return pk;
}

ScatterRun headline_run() {
    ScatterRun run;
    run.t_end = 360.0;
    run.snap_stride = 30;
    run.window_chi_lo = 3620.0;
    run.window_n_chi = 160;
    run.t_in_begin = 0.0;
    run.t_in_end = 155.0;
    run.t_out_begin = 160.0;
    run.t_out_end = 360.0;
    return run;
}

// black-hole horizon at chi = 3500 with surface gravity 1/4
VelocityProfile headline_profile() {
    const double v = 10.0, c_mean = 8.0, c_step = 4.0, steep = 12.0;
    const double center = 3500.0 - steep * std::atanh((v - c_mean) / c_step);
    return tanh_profile(c_mean, c_step, steep, center, v);
}

}  // namespace

TEST_CASE("leapfrog-corrected dispersion") {
    LatticeDispersion disp{1.0, 1.0, 1.0, 0.05};
    const double k = 1.3;
    const double w0 = 2.0 * std::sin(0.5 * k);
    REQUIRE(disp.omega0(k) == Catch::Approx(w0).epsilon(1e-14));
    // the discrete eigenmode satisfies sin(w dt/2) = w0 dt/2
    REQUIRE(std::sin(0.5 * disp.omega(k) * 0.05) == Catch::Approx(0.5 * w0 * 0.05).epsilon(1e-14));
    REQUIRE(disp.group_velocity(k) ==
            Catch::Approx(std::cos(0.5 * k) / std::sqrt(1.0 - std::pow(0.5 * w0 * 0.05, 2))));
    REQUIRE(disp.norm_frequency(0.7) == Catch::Approx(std::sin(0.7 * 0.05) / 0.05));
    LatticeDispersion coarse{1.0, 1.0, 1.0, 1.5};
    REQUIRE_THROWS_AS(coarse.omega(pi), std::invalid_argument);  // w0 dt/2 = 1.5 > 1
    LatticeDispersion cont{1.0, 1.0, 1.0, 0.0};
    REQUIRE(cont.omega(k) == Catch::Approx(w0));
    REQUIRE(cont.norm_frequency(0.7) == Catch::Approx(0.7));
}

TEST_CASE("branch modes solve the co-moving dispersion relation") {
    // analysis-window medium of the headline fixture: c = 12, drift 10
    const double c = 12.0, v = 10.0;
    LatticeDispersion disp{1.0, 1.0 / (c * c), 1.0, 1.0 / 60.0};
    const double W = 0.44;
    auto modes = branch_modes(W, v, disp);
    REQUIRE(modes.size() == 4);
    int n_in = 0, n_neg = 0;
    for (const auto& m : modes) {
        const double s = (m.w_lab >= 0.0) ? 1.0 : -1.0;
        REQUIRE(s * disp.omega(std::abs(m.k)) + v * m.k == Catch::Approx(W).margin(1e-5));
        REQUIRE(m.weight == Catch::Approx(disp.norm_frequency(m.w_lab) * std::abs(m.vg)));
        if (m.vg < 0.0) ++n_in;
        if (m.w_lab < 0.0) ++n_neg;
    }
    REQUIRE(n_in == 1);   // one incident channel
    REQUIRE(n_neg == 1);  // one negative-norm channel
}

TEST_CASE("make_packet contract") {
    LadderConfig cfg;
    cfg.n_cells = 256;
    cfg.dt = 0.05;
    auto caps = CapacitanceSchedule::uniform(1.0);
    std::vector<double> a, q;
    WavePacket pk;
    pk.k0 = 0.8;
    pk.sigma_k = 0.1;
    pk.x0 = 128.0;
    REQUIRE_NOTHROW(make_packet(pk, cfg, caps, a, q));
    pk.k0 = -0.1;
    REQUIRE_THROWS_AS(make_packet(pk, cfg, caps, a, q), std::invalid_argument);
    pk.k0 = 0.8;
    pk.sigma_k = 0.0;
    REQUIRE_THROWS_AS(make_packet(pk, cfg, caps, a, q), std::invalid_argument);
    pk.sigma_k = 0.1;
    pk.x0 = 10.0;  // 6/sigma_k support leaves the lattice
    REQUIRE_THROWS_AS(make_packet(pk, cfg, caps, a, q), std::invalid_argument);
    // packet must not straddle a non-uniform stretch
    CapacitanceSchedule step;
    step.value = [](std::size_t n, double) { return n < 128 ? 1.0 : 2.0; };
    step.c_min = 1.0;
    step.c_max = 2.0;
    pk.x0 = 128.0;
    REQUIRE_THROWS_AS(make_packet(pk, cfg, step, a, q), std::invalid_argument);
}

TEST_CASE("packet propagates at the lattice group velocity") {
    LadderConfig cfg;
    cfg.n_cells = 1024;
    cfg.dt = 0.05;
    auto caps = CapacitanceSchedule::uniform(1.0);
    WavePacket pk;
    pk.k0 = 0.8;
    pk.sigma_k = 0.05;
    pk.x0 = 400.0;
    std::vector<double> a, q;
    make_packet(pk, cfg, caps, a, q);
    auto state = init_ladder(cfg, a, q);
    auto centroid = [&](const std::vector<double>& f) {
        double s = 0.0, sx = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            s += f[i] * f[i];
            sx += f[i] * f[i] * double(i);
        }
        return sx / s;
    };
    const double x_start = centroid(state.a);
    const double t_run = 200.0;
    for (int i = 0; i < int(t_run / cfg.dt); ++i) step_inplace(state, cfg, caps);
    LatticeDispersion disp{1.0, 1.0, 1.0, cfg.dt};
    const double expected = disp.group_velocity(pk.k0) * t_run;
    REQUIRE(std::abs(centroid(state.a) - x_start - expected) < 0.5);
}

TEST_CASE("comoving resample reproduces a plane wave") {
    const double k = 0.3, w = 2.0 * std::sin(0.15);
    FieldHistory hist;
    hist.n_x = 512;
    hist.n_t = 40;
    hist.dx = 1.0;
    hist.dt_snap = 0.7;
    hist.a.resize(hist.n_x * hist.n_t);
    for (std::size_t j = 0; j < hist.n_t; ++j)
        for (std::size_t i = 0; i < hist.n_x; ++i)
            hist.a[j * hist.n_x + i] = std::cos(k * double(i) - w * double(j) * hist.dt_snap);
    const double v = 1.7;  // non-integer shift per snapshot exercises the kernel
    auto field = comoving_resample(hist, v, 100.0, 64);
    double worst = 0.0;
    for (std::size_t j = 0; j < field.n_t; ++j)
        for (std::size_t i = 0; i < field.n_chi; ++i) {
            const double t = double(j) * hist.dt_snap;
            const double x = 100.0 + double(i) - v * t;
            worst = std::max(worst,
                             std::abs(field.val[j * field.n_chi + i].real() - std::cos(k * x - w * t)));
        }
    REQUIRE(worst < 2e-3);  // Lanczos-8 kernel accuracy at mid-band k
    // integer shift per snapshot hits lattice sites exactly
    auto exact = comoving_resample(hist, 1.0 / 0.7, 100.0, 64);
    worst = 0.0;
    for (std::size_t j = 0; j < exact.n_t; ++j)
        for (std::size_t i = 0; i < exact.n_chi; ++i) {
            const double t = double(j) * hist.dt_snap;
            const double x = 100.0 + double(i) - t / 0.7;
            worst = std::max(worst,
                             std::abs(exact.val[j * exact.n_chi + i].real() - std::cos(k * x - w * t)));
        }
    REQUIRE(worst < 1e-9);
    // v = 0 is the identity
    auto still = comoving_resample(hist, 0.0, 100.0, 64);
    for (std::size_t i = 0; i < 64; ++i)
        REQUIRE(still.val[i].real() == Catch::Approx(hist.a[100 + i]).margin(1e-15));
    REQUIRE_THROWS_AS(comoving_resample(hist, 20.0, 100.0, 64), std::out_of_range);
}

TEST_CASE("split_norm classifies norm sign and flux direction") {
    LatticeDispersion disp{1.0, 1.0, 1.0, 0.0};
    ComovingField field;
    field.n_chi = 64;
    field.n_t = 64;
    field.dchi = 1.0;
    field.dts = 1.0;
    field.val.resize(64 * 64);
    SplitOptions opt;
    opt.window_chi = WindowType::rect;
    opt.window_t = WindowType::rect;

    // bin-aligned real plane wave; with drift 0 its lab frequency is W > 0
    const double K = 2.0 * pi * 6.0 / 64.0, W = 2.0 * pi * 3.0 / 64.0;
    for (std::size_t j = 0; j < 64; ++j)
        for (std::size_t i = 0; i < 64; ++i)
            field.val[j * 64 + i] = std::cos(K * double(i) - W * double(j));
    field.drift = 0.0;
    auto s = split_norm(field, disp, opt);
    const std::size_t row = 2;  // W bin 3 -> index 2
    REQUIRE(s.omega[row] == Catch::Approx(W));
    REQUIRE(s.n_pos[row] > 0.0);
    REQUIRE(s.n_neg[row] == Catch::Approx(0.0).margin(1e-12 * s.n_pos[row]));
    const double total = s.raw[row];
    REQUIRE(s.n_pos[row] == Catch::Approx(total * W * std::cos(0.5 * K)).epsilon(1e-9));

    // strong drift makes the same wave a negative-lab-frequency (negative
    // norm) outgoing mode: w_lab = W - v K < 0, v_g' = v - cos(K/2) > 0
    field.drift = 2.0;
    auto d = split_norm(field, disp, opt);
    REQUIRE(d.n_neg[row] > 0.0);
    REQUIRE(d.n_pos[row] == Catch::Approx(0.0).margin(1e-12 * d.n_neg[row]));
    REQUIRE(d.out_neg[row] == Catch::Approx(d.n_neg[row]));
}

TEST_CASE("fit_temperature recovers its generator") {
    std::vector<std::pair<double, double>> s;
    for (int i = 0; i < 8; ++i) {
        const double w = 0.1 + 0.07 * i;
        s.push_back({w, std::exp(-w / 0.04)});
    }
    auto [t, r2] = fit_temperature(s);
    REQUIRE(std::abs(t - 0.04) < 1e-12);
    REQUIRE(r2 == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("fit_temperature rejects malformed input") {
    std::vector<std::pair<double, double>> two = {{0.1, 0.5}, {0.2, 0.25}};
    REQUIRE_THROWS_AS(fit_temperature(two), std::invalid_argument);
    std::vector<std::pair<double, double>> bad = {{0.1, 1.5}, {0.2, 0.2}, {0.3, 0.1}, {0.4, 0.05}};
    REQUIRE_THROWS_AS(fit_temperature(bad), std::invalid_argument);  // ratio >= 1
    std::vector<std::pair<double, double>> flat = {{0.1, 0.5}, {0.1, 0.4}, {0.1, 0.3}, {0.1, 0.2}};
    REQUIRE_THROWS_AS(fit_temperature(flat), std::invalid_argument);
}

TEST_CASE("fit_temperature under multiplicative noise") {
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss(0.0, 0.05);
    const double t0 = 0.04;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::pair<double, double>> s;
        for (int i = 0; i < 12; ++i) {
            const double w = 0.13 + 0.05 * i;
            s.push_back({w, std::exp(-w / t0) * (1.0 + gauss(rng))});
        }
        auto [t, r2] = fit_temperature(s);
        REQUIRE(std::abs(t - t0) / t0 < 0.05);
        REQUIRE(r2 > 0.99);
    }
}

TEST_CASE("thermal flux against the mode-sum oracle") {
    for (double t : {0.01, 0.04, 0.1})
        REQUIRE(thermal_flux_mode_sum(t, 1.0, 1.0, 1.0) ==
                Catch::Approx(hawking_flux(t)).epsilon(1e-4));
    REQUIRE(hawking_flux(0.0) == 0.0);
    REQUIRE_THROWS_AS(hawking_flux(-1.0), std::invalid_argument);
    // SI anchor: 50 mK lands in the expected power decade
    const double f = hawking_flux_SI(0.05);
    REQUIRE(f > 1e-16);
    REQUIRE(f < 1e-14);
    REQUIRE(f == Catch::Approx(1.183e-15).epsilon(1e-3));
}

TEST_CASE("horizon scattering yields a thermal Hawking spectrum") {
    auto profile = headline_profile();
    auto res = scatter_experiment(profile, headline_packet(), headline_config(), headline_run());
    const double kappa = 0.25;
    REQUIRE(res.kappa_predicted == Catch::Approx(kappa).epsilon(1e-6));
    REQUIRE(res.fit_band_lo == Catch::Approx(0.5 * kappa));
    REQUIRE(res.fit_band_hi == Catch::Approx(3.0 * kappa));
    REQUIRE(res.samples.size() >= 10);
    const double t_expect = kappa / (2.0 * pi);
    REQUIRE(std::abs(res.t_fit - t_expect) / t_expect < 0.10);
    REQUIRE(res.fit_r2 > 0.98);
    // unitarity of the mode conversion, bin by bin
    for (const auto& s : res.samples) REQUIRE(std::abs(s.alpha2 - s.beta2 - 1.0) < 0.02);
}

TEST_CASE("no horizon, no pair production") {
    auto profile = tanh_profile(12.0, 0.0, 12.0, 3500.0, 10.0);  // uniform subcritical flow
    REQUIRE(find_horizons(profile).crossings.empty());
    auto run = headline_run();
    run.fit_band_lo = 0.125;  // no kappa to derive the band from
    run.fit_band_hi = 0.75;
    auto res = scatter_experiment(profile, headline_packet(), headline_config(), run);
    REQUIRE(res.samples.size() >= 10);
    for (const auto& s : res.samples) REQUIRE(s.beta2 < 1e-8);
}
