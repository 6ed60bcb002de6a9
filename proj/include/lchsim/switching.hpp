#pragma once

// Reduced three-level model of the laser-driven capacitance switch:
//
//   i psi_a' + Omega(t) psi_b = 0
//   i psi_b' + kappa E(t) psi_c + Omega(t) psi_a = 0
//   i psi_c' - dw psi_c + kappa E(t) psi_b = 0
//
// full RK4 integration, the adiabatic elimination psi_c = kappa E psi_b / dw,
// the induced permittivity shift, and the laser-pulse -> capacitance-schedule
// pipeline feeding the ladder.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lchsim/geometry.hpp"
#include "lchsim/ladder.hpp"

namespace lchsim {

using complexd = std::complex<double>;

struct ThreeLevelState {
    complexd psi_a{1.0, 0.0};
    complexd psi_b{0.0, 0.0};
    complexd psi_c{0.0, 0.0};
    double t = 0.0;

    double norm2() const { return std::norm(psi_a) + std::norm(psi_b) + std::norm(psi_c); }
    double pop_b() const { return std::norm(psi_b); }
};

struct SwitchParams {
    double delta_omega = 0.0;                    // dw = w_c - w_b > 0
    double kappa = 0.0;                          // dipole coupling to the test field
    std::function<double(double)> rabi;          // Omega(t)
    std::function<double(double)> test_field;    // E(t)

    void validate() const {
        if (!(delta_omega > 0.0)) throw std::invalid_argument("SwitchParams: delta_omega must be > 0");
        if (!rabi || !test_field) throw std::invalid_argument("SwitchParams: missing drive callables");
    }
};

namespace detail {

struct ThreeLevelDeriv {
    complexd da, db, dc;
};

inline ThreeLevelDeriv three_level_rhs(const complexd& a, const complexd& b, const complexd& c,
                                       double t, const SwitchParams& p) {
    const double om = p.rabi(t);
    const double ke = p.kappa * p.test_field(t);
    if (!std::isfinite(om) || !std::isfinite(ke))
        throw std::runtime_error("integrate_three_level: non-finite drive value at t = " + std::to_string(t));
    const complexd i(0.0, 1.0);
    return {i * om * b, i * (ke * c + om * a), i * (ke * b) - i * p.delta_omega * c};
}

}  // namespace detail

// Classical fourth-order fixed-step integration; dt must resolve delta_omega
// (dt * dw <= 0.1 enforced).
inline ThreeLevelState integrate_three_level(ThreeLevelState state, const SwitchParams& params,
                                             double t_end, double dt) {
    params.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_three_level: dt must be > 0");
    if (dt * params.delta_omega > 0.1)
        throw std::invalid_argument("integrate_three_level: dt * delta_omega must be <= 0.1");
    if (t_end < state.t) throw std::invalid_argument("integrate_three_level: t_end < t");
    while (state.t < t_end - 0.5 * dt) {
        const double h = std::min(dt, t_end - state.t);
        const double t = state.t;
        const auto k1 = detail::three_level_rhs(state.psi_a, state.psi_b, state.psi_c, t, params);
        const auto k2 = detail::three_level_rhs(state.psi_a + 0.5 * h * k1.da, state.psi_b + 0.5 * h * k1.db,
                                                state.psi_c + 0.5 * h * k1.dc, t + 0.5 * h, params);
        const auto k3 = detail::three_level_rhs(state.psi_a + 0.5 * h * k2.da, state.psi_b + 0.5 * h * k2.db,
                                                state.psi_c + 0.5 * h * k2.dc, t + 0.5 * h, params);
        const auto k4 = detail::three_level_rhs(state.psi_a + h * k3.da, state.psi_b + h * k3.db,
                                                state.psi_c + h * k3.dc, t + h, params);
        state.psi_a += h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
        state.psi_b += h / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
        state.psi_c += h / 6.0 * (k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc);
        state.t = t + h;
    }
    state.t = t_end;
    return state;
}

// psi_c = kappa E psi_b / delta_omega (adiabatic elimination of level c).
inline complexd adiabatic_psi_c(const complexd& psi_b, double field, const SwitchParams& params) {
    params.validate();
    return params.kappa * field * psi_b / params.delta_omega;
}

// Delta eps = 2 density |psi_b|^2 kappa^2 / delta_omega; the factor 2 matches
// the per-dipole energy density |psi_b|^2 kappa^2 E^2 / dw against (1/2) de E^2.
inline double effective_permittivity_shift(double pop_b, const SwitchParams& params, double density) {
    params.validate();
    if (!(pop_b >= 0.0 && pop_b <= 1.0))
        throw std::invalid_argument("effective_permittivity_shift: pop_b must be in [0, 1]");
    if (density < 0.0) throw std::invalid_argument("effective_permittivity_shift: density must be >= 0");
    return 2.0 * density * pop_b * params.kappa * params.kappa / params.delta_omega;
}

// How the excited-population envelope is produced.
struct PulseDrive {
    // Full integration mode: per-cell Rabi drive Omega_n(t).
    std::function<double(std::size_t n, double t)> rabi_per_cell;
    // Fast mode: user-supplied excited population envelope pop_b(n, t); when
    // set it bypasses the per-cell integration.
    std::function<double(std::size_t n, double t)> pop_b_envelope;
    double density = 0.0;          // dipoles per unit volume
    double eps_background = 0.0;   // F/m
    double t_end = 0.0;            // schedule horizon (integration mode)
    double dt = 0.0;               // three-level integration step
    double sample_dt = 0.0;        // memoized table resolution (integration mode)
};

// Swept pulse factory: Omega_n(t) = omega0 * exp(-((t - t_n)/tau)^2 / 2) with
// the pulse front moving toward -x at `speed`; t_n is when the front reaches
// cell n.  Pulse area (2 integral Omega dt) = pi gives full a -> b transfer.
inline std::function<double(std::size_t, double)> swept_gaussian_rabi(double omega0, double tau,
                                                                      double x_start, double speed,
                                                                      double dx = 1.0) {
    if (!(tau > 0.0) || !(speed > 0.0))
        throw std::invalid_argument("swept_gaussian_rabi: tau and speed must be > 0");
    return [=](std::size_t n, double t) {
        const double t_n = (x_start - double(n) * dx) / speed;
        const double u = (t - t_n) / tau;
        return omega0 * std::exp(-0.5 * u * u);
    };
}

// C_n(t) = (eps_background + Delta eps_n(t)) * dX dY / delta_z.  In integration
// mode pop_b(t) is integrated per cell and memoized on a sample_dt grid before
// the ladder run starts.
inline CapacitanceSchedule pulse_to_schedule(const PulseDrive& drive, const SwitchParams& params,
                                             const CellDesign& design, const LadderConfig& config) {
    params.validate();
    design.validate();
    if (!(drive.eps_background > 0.0))
        throw std::invalid_argument("pulse_to_schedule: eps_background must be > 0");
    if (drive.density < 0.0) throw std::invalid_argument("pulse_to_schedule: density must be >= 0");
    const double geom = design.big_delta_x * design.big_delta_y / design.delta_z;
    const double de_full = effective_permittivity_shift(1.0, params, drive.density);

    std::function<double(std::size_t, double)> pop_b;
    if (drive.pop_b_envelope) {
        pop_b = drive.pop_b_envelope;
    } else {
        if (!drive.rabi_per_cell)
            throw std::invalid_argument("pulse_to_schedule: need rabi_per_cell or pop_b_envelope");
        if (!(drive.t_end > 0.0) || !(drive.dt > 0.0) || !(drive.sample_dt > 0.0))
            throw std::invalid_argument("pulse_to_schedule: integration mode needs t_end, dt, sample_dt");
        const std::size_t n_cells = config.n_cells;
        const std::size_t n_samples = std::size_t(std::ceil(drive.t_end / drive.sample_dt)) + 1;
        auto table = std::make_shared<std::vector<double>>(n_cells * n_samples);
        for (std::size_t n = 0; n < n_cells; ++n) {
            SwitchParams cell = params;
            const auto rabi_n = drive.rabi_per_cell;
            cell.rabi = [rabi_n, n](double t) { return rabi_n(n, t); };
            cell.test_field = [](double) { return 0.0; };  // pumping only
            ThreeLevelState s;
            for (std::size_t j = 0; j < n_samples; ++j) {
                (*table)[n * n_samples + j] = s.pop_b();
                if (j + 1 < n_samples)
                    s = integrate_three_level(s, cell, std::min(double(j + 1) * drive.sample_dt, drive.t_end),
                                              drive.dt);
            }
        }
        const double sample_dt = drive.sample_dt;
        pop_b = [table, n_samples, sample_dt](std::size_t n, double t) {
            if (t <= 0.0) return (*table)[n * n_samples];
            const double u = t / sample_dt;
            const std::size_t j = std::min(std::size_t(u), n_samples - 2);
            const double w = u - double(j);
            const double lo = (*table)[n * n_samples + j], hi = (*table)[n * n_samples + j + 1];
            return w >= 1.0 ? hi : (1.0 - w) * lo + w * hi;
        };
    }

    CapacitanceSchedule caps;
    const double eps_bg = drive.eps_background;
    caps.value = [pop_b, eps_bg, de_full, geom](std::size_t n, double t) {
        return (eps_bg + de_full * pop_b(n, t)) * geom;
    };
    caps.c_min = eps_bg * geom;
    caps.c_max = (eps_bg + de_full) * geom;
    return caps;
}

}  // namespace lchsim
