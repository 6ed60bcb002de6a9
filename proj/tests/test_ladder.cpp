#include <catch2/catch_amalgamated.hpp>

#include "lchsim/ladder.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace lchsim;
using std::numbers::pi;

namespace {

LadderConfig uniform_config(std::size_t n, double dt) {
    LadderConfig cfg;
    cfg.n_cells = n;
    cfg.dt = dt;
    return cfg;
}

// Traveling plane wave (k, +omega branch) matched to the continuous-time flow.
void plane_wave(std::vector<double>& a, std::vector<double>& q, std::size_t n, double k, double c_uniform) {
    const double omega = dispersion_omega(k, 1.0, c_uniform, 1.0);
    a.resize(n);
    q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::cos(k * double(i));
        q[i] = c_uniform * omega * std::sin(k * double(i));  // Q = L C dA/dt at t = 0
    }
}

// Frequency of the mode k from the phase slope of its Fourier amplitude.
double measure_mode_frequency(LadderState s, const LadderConfig& cfg, const CapacitanceSchedule& caps,
                              double k, int n_steps) {
    const std::size_t n = cfg.n_cells;
    std::vector<double> phase(n_steps + 1);
    double prev = 0.0, offset = 0.0;
    for (int j = 0; j <= n_steps; ++j) {
        std::complex<double> amp = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            amp += s.a[i] * std::exp(std::complex<double>(0.0, -k * double(i)));
        double ph = std::arg(amp);
        if (j > 0) {
            while (ph + offset - prev > pi) offset -= 2 * pi;
            while (ph + offset - prev < -pi) offset += 2 * pi;
        }
        phase[j] = ph + offset;
        prev = phase[j];
        if (j < n_steps) step_inplace(s, cfg, caps);
    }
    // least-squares slope of phase vs time
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j <= n_steps; ++j) {
        const double x = j * cfg.dt;
        sx += x; sy += phase[j]; sxx += x * x; sxy += x * phase[j];
    }
    const double m = double(n_steps + 1);
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("init_ladder basic contracts") {
    auto cfg = uniform_config(8, 0.1);
    std::vector<double> z(8, 0.0);
    auto s = init_ladder(cfg, z, z);
    REQUIRE(s.t == 0.0);
    REQUIRE(s.a == z);
    REQUIRE(s.q == z);

    auto cfg3 = uniform_config(3, 0.1);
    std::vector<double> bad(4, 0.0), good(3, 0.0);
    REQUIRE_THROWS_AS(init_ladder(cfg3, bad, good), std::invalid_argument);

    std::vector<double> nan3 = {0.0, std::nan(""), 0.0};
    REQUIRE_THROWS_AS(init_ladder(cfg3, nan3, good), std::invalid_argument);

    auto cfg2 = uniform_config(2, 0.1);
    REQUIRE_THROWS_AS(init_ladder(cfg2, good, good), std::invalid_argument);

    auto cfg_bad_dt = uniform_config(8, -1.0);
    REQUIRE_THROWS_AS(init_ladder(cfg_bad_dt, z, z), std::invalid_argument);
}

TEST_CASE("constant A with zero Q is an exact fixed point, even for time-dependent C") {
    auto cfg = uniform_config(16, 0.1);
    std::vector<double> a(16, 0.7), q(16, 0.0);
    auto s = init_ladder(cfg, a, q);
    CapacitanceSchedule caps{[](std::size_t n, double t) { return 1.0 + 0.4 * std::sin(0.3 * t + 0.1 * double(n)); },
                             0.6, 1.4};
    for (int i = 0; i < 200; ++i) step_inplace(s, cfg, caps);
    for (std::size_t i = 0; i < 16; ++i) {
        REQUIRE(s.a[i] == 0.7);
        REQUIRE(s.q[i] == 0.0);
    }
}

TEST_CASE("plane-wave frequency matches the lattice dispersion") {
    const std::size_t n = 64;
    auto cfg = uniform_config(n, 0.05);
    auto caps = CapacitanceSchedule::uniform(1.0);
    const double k = 2 * pi * 8 / double(n);
    std::vector<double> a, q;
    plane_wave(a, q, n, k, 1.0);
    auto s = init_ladder(cfg, a, q);
    const double omega = measure_mode_frequency(s, cfg, caps, k, 2000);
    const double expected = 2.0 * std::abs(std::sin(k / 2));
    REQUIRE(std::abs(omega - expected) / expected < 1e-4);
}

TEST_CASE("energy values") {
    auto cfg = uniform_config(8, 0.1);
    auto caps = CapacitanceSchedule::uniform(1.0);
    std::vector<double> z(8, 0.0);
    auto s = init_ladder(cfg, z, z);
    REQUIRE(energy(s, cfg, caps) == 0.0);

    // two-cell ring: a = (0,1), q = 0 -> both links carry I^2 = 1
    LadderConfig cfg2;
    cfg2.n_cells = 2;
    cfg2.dt = 0.1;
    LadderState s2{{0.0, 1.0}, {0.0, 0.0}, 0.0};
    REQUIRE(energy(s2, cfg2, caps) == Catch::Approx(1.0).epsilon(1e-14));
}

namespace {

// Leapfrog exactly conserves the per-mode quadratic  p^2 + w^2 (1 - (w dt/2)^2) x^2,
// which for the ladder with uniform C and periodic ends sums to
// E - dt^2/(8C) sum_n (lap A_n)^2.  The physical energy oscillates within a
// bounded O((w dt)^2) band around it; "drift" means the secular part.
double shadow_energy(const LadderState& s, const LadderConfig& cfg, double c_uniform, double dt) {
    const std::size_t n = cfg.n_cells;
    double corr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lap = s.a[(i + 1) % n] - 2.0 * s.a[i] + s.a[(i + n - 1) % n];
        corr += lap * lap;
    }
    return energy(s, cfg, CapacitanceSchedule::uniform(c_uniform)) - dt * dt / (8.0 * c_uniform) * corr;
}

}  // namespace

TEST_CASE("energy conservation: no secular drift, bounded oscillation") {
    const std::size_t n = 64;
    auto cfg = uniform_config(n, 0.2);
    auto caps = CapacitanceSchedule::uniform(1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double u1 = u(rng), u2 = u(rng), u3 = u(rng), u4 = u(rng);
    std::vector<double> a(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {  // smooth random data: a few low-k modes
        const double x = 2 * pi * double(i) / double(n);
        a[i] = u1 * std::sin(x) + u2 * std::cos(2 * x) + u3 * std::sin(3 * x);
        q[i] = 0.3 * u4 * std::cos(x);
    }
    auto s = init_ladder(cfg, a, q);
    const double e0 = energy(s, cfg, caps);
    const double es0 = shadow_energy(s, cfg, 1.0, cfg.dt);
    double max_osc = 0.0;
    for (int i = 0; i < 10000; ++i) {
        step_inplace(s, cfg, caps);
        if (i % 100 == 0) max_osc = std::max(max_osc, std::abs(energy(s, cfg, caps) - e0) / e0);
    }
    const double es1 = shadow_energy(s, cfg, 1.0, cfg.dt);
    REQUIRE(std::abs(es1 - es0) / es0 < 1e-8);      // secular drift
    const double wdt = dispersion_omega(3 * 2 * pi / double(n), 1, 1, 1) * cfg.dt;
    REQUIRE(max_osc < wdt * wdt);                   // oscillation stays bounded
}

TEST_CASE("charge conservation with time-varying capacitance") {
    const std::size_t n = 64;
    auto cfg = uniform_config(n, 0.1);
    CapacitanceSchedule caps{[](std::size_t i, double t) { return 1.0 + 0.3 * std::sin(0.01 * t + 0.1 * double(i)); },
                             0.7, 1.3};
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::sin(2 * pi * 2 * double(i) / double(n)) + 0.3 * u(rng);
        q[i] = 0.2 * std::cos(2 * pi * 3 * double(i) / double(n));
    }
    auto s = init_ladder(cfg, a, q);
    const double q0 = total_charge(s);
    double abs_sum = 0.0;
    for (double x : s.q) abs_sum += std::abs(x);
    for (int i = 0; i < 10000; ++i) step_inplace(s, cfg, caps);
    REQUIRE(std::abs(total_charge(s) - q0) <= 1e-12 * std::max(1.0, abs_sum));
}

TEST_CASE("leapfrog reversibility with frozen capacitance") {
    const std::size_t n = 64;
    auto cfg = uniform_config(n, 0.15);
    auto caps = CapacitanceSchedule::uniform(1.0);
    std::vector<double> a(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2 * pi * double(i) / double(n);
        a[i] = std::sin(x) + 0.5 * std::cos(2 * x);
        q[i] = 0.3 * std::sin(3 * x);
    }
    auto s = init_ladder(cfg, a, q);
    for (int i = 0; i < 1000; ++i) step_inplace(s, cfg, caps);
    auto back = cfg;
    back.dt = -cfg.dt;
    for (int i = 0; i < 1000; ++i) step_inplace(s, back, caps);
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(std::abs(s.a[i] - a[i]) < 1e-10);
        REQUIRE(std::abs(s.q[i] - q[i]) < 1e-10);
    }
    REQUIRE(std::abs(s.t) < 1e-12);
}

TEST_CASE("dispersion relation closed form") {
    REQUIRE(dispersion_omega(0.0, 1, 1, 1) == 0.0);
    REQUIRE(dispersion_omega(pi, 1, 1, 1) == Catch::Approx(2.0).epsilon(1e-14));
    REQUIRE(dispersion_omega(pi / 2, 1, 1, 1) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
    REQUIRE_THROWS_AS(dispersion_omega(1.0, -1, 1, 1), std::invalid_argument);
}

TEST_CASE("group velocity: limits and sub-luminality") {
    REQUIRE(group_velocity(0.0, 1, 1, 1) == Catch::Approx(1.0));
    REQUIRE(group_velocity(pi, 1, 1, 1) == Catch::Approx(0.0).margin(1e-15));
    // property: matches centered finite difference of omega, and 0 < v_g < c
    for (int i = 1; i < 40; ++i) {
        const double k = pi * double(i) / 40.0;
        const double h = 1e-6;
        const double fd = (dispersion_omega(k + h, 1, 1, 1) - dispersion_omega(k - h, 1, 1, 1)) / (2 * h);
        const double vg = group_velocity(k, 1, 1, 1);
        REQUIRE(vg == Catch::Approx(fd).margin(1e-8));
        if (i < 40) REQUIRE(vg < 1.0);
        REQUIRE(vg >= 0.0);
    }
}

TEST_CASE("step rejects unstable dt") {
    auto cfg = uniform_config(8, 1.5);  // above sqrt(L C_min) = 1
    auto caps = CapacitanceSchedule::uniform(1.0);
    std::vector<double> z(8, 0.0);
    auto s = init_ladder(cfg, z, z);
    REQUIRE_THROWS_AS(step_inplace(s, cfg, caps), std::invalid_argument);
}

TEST_CASE("absorbing sponge damps outgoing waves") {
    const std::size_t n = 256;
    LadderConfig cfg;
    cfg.n_cells = n;
    cfg.dt = 0.1;
    cfg.boundary = Boundary::absorbing;
    cfg.sponge_width = 40;
    cfg.max_damping = 1.0;
    auto caps = CapacitanceSchedule::uniform(1.0);
    // Gaussian pulse in the middle; it splits and both halves run into the sponges.
    std::vector<double> a(n), q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (double(i) - 128.0) / 8.0;
        a[i] = std::exp(-x * x);
    }
    auto s = init_ladder(cfg, a, q);
    const double e0 = energy(s, cfg, caps);
    for (int i = 0; i < 8000; ++i) step_inplace(s, cfg, caps);
    REQUIRE(energy(s, cfg, caps) < 1e-6 * e0);
}
