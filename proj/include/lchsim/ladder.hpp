#pragma once

// Discrete LC ladder: state representation and symplectic time stepping of
//
//   d/dt [ L C_n(t) dA_n/dt ] = A_{n+1} - 2 A_n + A_{n-1}
//
// in the canonical pair (A_n, Q_n) with U_n = Q_n / C_n and I_n = A_{n+1} - A_n.
// The Q-update is capacitance-independent, so total charge is conserved per
// step (telescoping sum) even for time-dependent C_n.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lchsim {

enum class Boundary { periodic, absorbing };

struct LadderConfig {
    std::size_t n_cells = 0;
    double inductance = 1.0;   // henries (sim units: 1)
    double dx = 1.0;           // cell pitch (sim units: 1)
    double dt = 0.0;           // step size
    Boundary boundary = Boundary::periodic;
    std::size_t sponge_width = 0;   // cells, absorbing only
    double max_damping = 0.0;       // 1/s, absorbing only

    void validate() const {
        if (n_cells < 3)
            throw std::invalid_argument("LadderConfig: n_cells must be >= 3 (second difference needs three cells)");
        if (!(inductance > 0.0))
            throw std::invalid_argument("LadderConfig: inductance must be > 0");
        if (!(dx > 0.0))
            throw std::invalid_argument("LadderConfig: dx must be > 0");
        if (!(dt > 0.0))
            throw std::invalid_argument("LadderConfig: dt must be > 0");
        if (boundary == Boundary::absorbing) {
            if (sponge_width == 0 || 2 * sponge_width >= n_cells)
                throw std::invalid_argument("LadderConfig: sponge_width must be in [1, n_cells/2)");
            if (max_damping < 0.0)
                throw std::invalid_argument("LadderConfig: max_damping must be >= 0");
        }
    }
};

// Per-cell, per-time capacitance with declared bounds over the run.
// The callable must be pure and thread-safe.
struct CapacitanceSchedule {
    std::function<double(std::size_t n, double t)> value;
    double c_min = 0.0;
    double c_max = 0.0;

    void validate() const {
        if (!value) throw std::invalid_argument("CapacitanceSchedule: missing callable");
        if (!(c_min > 0.0) || !(c_max >= c_min))
            throw std::invalid_argument("CapacitanceSchedule: require 0 < c_min <= c_max");
    }

    static CapacitanceSchedule uniform(double c) {
        if (!(c > 0.0)) throw std::invalid_argument("CapacitanceSchedule: capacitance must be > 0");
        return {[c](std::size_t, double) { return c; }, c, c};
    }
};

struct LadderState {
    std::vector<double> a;  // effective potentials A_n
    std::vector<double> q;  // capacitor charges Q_n
    double t = 0.0;
};

// Band-edge stability limit is dt * omega_max = 2, i.e. dt = sqrt(L C_min).
inline constexpr double default_stability_factor = 0.2;

inline double stability_dt(const LadderConfig& config, const CapacitanceSchedule& caps,
                           double factor = default_stability_factor) {
    return factor * std::sqrt(config.inductance * caps.c_min);
}

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

// Exponential damping sponge with quadratic ramp. Damps q and the deviation
// of a from the sponge-segment mean (a constant shift of A is pure gauge).
inline void apply_sponge(LadderState& s, const LadderConfig& cfg, double dt) {
    const std::size_t n = cfg.n_cells;
    const std::size_t w = cfg.sponge_width;
    if (w == 0 || cfg.max_damping == 0.0) return;
    const double adt = std::abs(dt);
    auto damp_segment = [&](std::size_t begin, std::size_t end, bool left) {
        double mean = 0.0;
        for (std::size_t i = begin; i < end; ++i) mean += s.a[i];
        mean /= double(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            // depth in [0,1]: 0 at the inner sponge edge, 1 at the boundary
            const double depth = left ? double(w - 1 - (i - begin)) / double(w)
                                      : double(i - begin + 1) / double(w);
            const double g = std::exp(-cfg.max_damping * depth * depth * adt);
            s.a[i] = mean + (s.a[i] - mean) * g;
            s.q[i] *= g;
        }
    };
    damp_segment(0, w, true);
    damp_segment(n - w, n, false);
}

}  // namespace detail

inline LadderState init_ladder(const LadderConfig& config, const std::vector<double>& initial_a,
                               const std::vector<double>& initial_q) {
    config.validate();
    if (initial_a.size() != config.n_cells || initial_q.size() != config.n_cells)
        throw std::invalid_argument("init_ladder: array length does not match n_cells");
    detail::require_finite(initial_a, "init_ladder a");
    detail::require_finite(initial_q, "init_ladder q");
    return LadderState{initial_a, initial_q, 0.0};
}

// One kick-drift-kick leapfrog step. C_n is evaluated at the interval
// midpoint for the A-update; the Q-update does not involve C at all.
// Negative cfg.dt steps backwards (exact reversibility for frozen C).
inline void step_inplace(LadderState& s, const LadderConfig& cfg, const CapacitanceSchedule& caps) {
    const std::size_t n = cfg.n_cells;
    const double dt = cfg.dt;
    if (std::abs(dt) > std::sqrt(cfg.inductance * caps.c_min))
        throw std::invalid_argument("step: dt exceeds the band-edge stability limit sqrt(L C_min)");
    const bool periodic = (cfg.boundary == Boundary::periodic);
    const double t_half = s.t + 0.5 * dt;
    std::vector<double>& a = s.a;
    std::vector<double>& q = s.q;

    auto half_kick = [&]() {
        const double h = 0.5 * dt;
        const double a0 = a[0], aN = a[n - 1];
        double prev = periodic ? aN : a[0];
        for (std::size_t i = 0; i < n; ++i) {
            const double next = (i + 1 < n) ? a[i + 1] : (periodic ? a0 : aN);
            q[i] += h * (next - 2.0 * a[i] + prev);
            prev = a[i];
        }
        // non-periodic ends use mirrored neighbours (zero-current closure)
    };

    half_kick();
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = caps.value(i, t_half);
        a[i] += dt * q[i] / (cfg.inductance * c);
        max_abs = std::max(max_abs, std::abs(a[i]));
    }
    half_kick();
    s.t += dt;

    if (cfg.boundary == Boundary::absorbing) detail::apply_sponge(s, cfg, dt);

    if (!std::isfinite(max_abs))
        throw std::runtime_error("step: non-finite state at t = " + std::to_string(s.t) +
                                 " (instability; max |A| overflowed)");
}

inline LadderState step(const LadderState& state, const LadderConfig& cfg,
                        const CapacitanceSchedule& caps) {
    LadderState s = state;
    step_inplace(s, cfg, caps);
    return s;
}

// Total energy sum_n [ Q_n^2 / (2 C_n) + L I_n^2 / 2 ].
inline double energy(const LadderState& s, const LadderConfig& cfg, const CapacitanceSchedule& caps) {
    const std::size_t n = cfg.n_cells;
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = caps.value(i, s.t);
        e += 0.5 * s.q[i] * s.q[i] / c;
    }
    const std::size_t links = (cfg.boundary == Boundary::periodic) ? n : n - 1;
    for (std::size_t i = 0; i < links; ++i) {
        const double di = s.a[(i + 1) % n] - s.a[i];
        e += 0.5 * cfg.inductance * di * di;
    }
    return e;
}

// Neumaier-compensated sum of Q_n.
inline double total_charge(const LadderState& s) {
    double sum = 0.0, comp = 0.0;
    for (double x : s.q) {
        const double t = sum + x;
        comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

// Lattice dispersion omega(k) = (2 / sqrt(L C)) |sin(k dx / 2)|.
inline double dispersion_omega(double k, double inductance, double capacitance, double dx) {
    if (!(inductance > 0.0) || !(capacitance > 0.0) || !(dx > 0.0))
        throw std::invalid_argument("dispersion_omega: L, C, dx must be > 0");
    return 2.0 / std::sqrt(inductance * capacitance) * std::abs(std::sin(0.5 * k * dx));
}

// d omega / dk = c cos(k dx / 2) on the branch k in [0, pi/dx], c = dx/sqrt(LC).
inline double group_velocity(double k, double inductance, double capacitance, double dx) {
    if (!(inductance > 0.0) || !(capacitance > 0.0) || !(dx > 0.0))
        throw std::invalid_argument("group_velocity: L, C, dx must be > 0");
    const double c = dx / std::sqrt(inductance * capacitance);
    return c * std::cos(0.5 * k * dx);
}

}  // namespace lchsim
