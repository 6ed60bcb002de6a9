#pragma once

// Wave-packet preparation, co-moving-frame resampling, Klein-Gordon norm
// accounting and the horizon-scattering pipeline.
//
// The analysis works on a spacetime window in co-moving coordinates
// chi = x + v t, where the profile is static and the co-moving frequency W is
// conserved.  A lab mode e^{i(k x - w t)} appears at (K = k, W = w + v k), so
// the lab frequency of an FFT bin is w = W - v K; its sign is the sign of the
// Klein-Gordon norm, and the co-moving group velocity separates incident
// (v_g' < 0) from outgoing (v_g' > 0) flux.  A mode's power, weighted by
// |w| |v_g'|, is proportional to the norm it carries through the window, so
// per-W ratios of weighted power give the Bogoliubov coefficients directly.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lchsim/geometry.hpp"
#include "lchsim/ladder.hpp"

namespace lchsim {

// Uniform-lattice dispersion, optionally corrected for the leapfrog step:
// the discrete eigenmode satisfies sin(w dt/2) = w0(k) dt/2.
struct LatticeDispersion {
    double inductance = 1.0;
    double capacitance = 1.0;
    double dx = 1.0;
    double dt = 0.0;  // 0 disables the leapfrog correction

    double omega0(double k) const { return dispersion_omega(k, inductance, capacitance, dx); }

    double omega(double k) const {
        const double w0 = omega0(k);
        if (dt <= 0.0) return w0;
        const double x = 0.5 * w0 * dt;
        if (x >= 1.0) throw std::invalid_argument("LatticeDispersion: mode beyond the stability limit");
        return 2.0 / dt * std::asin(x);
    }

    double group_velocity(double k) const {
        const double g0 = lchsim::group_velocity(std::abs(k), inductance, capacitance, dx);
        if (dt <= 0.0) return g0;
        const double x = 0.5 * omega0(k) * dt;
        return g0 / std::sqrt(std::max(1.0 - x * x, 1e-300));
    }

    // The conserved discrete norm of a leapfrog eigenmode carries
    // sin(w dt)/dt = w0 sqrt(1 - (w0 dt/2)^2) instead of the bare frequency.
    double norm_frequency(double w) const {
        return (dt > 0.0) ? std::abs(std::sin(w * dt)) / dt : std::abs(w);
    }
};

// One on-shell solution of W = s w(|K|) + v K: a physical mode with co-moving
// frequency W.
struct BranchMode {
    double k = 0.0;
    double w_lab = 0.0;   // signed lab frequency; its sign is the norm sign
    double vg = 0.0;      // co-moving group velocity
    double weight = 0.0;  // |w_lab| |vg|: flux weight per unit spectral power
};

namespace detail {

inline std::vector<BranchMode> branch_modes_from_grid(double W, double drift,
                                                      const LatticeDispersion& disp,
                                                      const std::vector<double>& k_grid,
                                                      const std::vector<double>& w_grid) {
    std::vector<BranchMode> modes;
    for (double s : {1.0, -1.0}) {
        double f_prev = s * w_grid[0] + drift * k_grid[0] - W;
        for (std::size_t j = 1; j < k_grid.size(); ++j) {
            const double f = s * w_grid[j] + drift * k_grid[j] - W;
            if ((f_prev <= 0.0 && f > 0.0) || (f_prev >= 0.0 && f < 0.0)) {
                const double k =
                    k_grid[j - 1] + (k_grid[j] - k_grid[j - 1]) * (-f_prev) / (f - f_prev);
                BranchMode m;
                m.k = k;
                m.w_lab = s * disp.omega(std::abs(k));
                m.vg = drift + s * ((k >= 0.0) ? 1.0 : -1.0) * disp.group_velocity(std::abs(k));
                m.weight = disp.norm_frequency(m.w_lab) * std::abs(m.vg);
                modes.push_back(m);
            }
            f_prev = f;
        }
    }
    return modes;
}

inline void fill_k_scan(const LatticeDispersion& disp, double dx, std::vector<double>& k_grid,
                        std::vector<double>& w_grid) {
    const double k_nyq = std::numbers::pi / dx;
    const std::size_t m = 8192;
    k_grid.resize(m);
    w_grid.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        k_grid[j] = -k_nyq + (double(j) + 0.5) * (2.0 * k_nyq / double(m));
        w_grid[j] = disp.omega(std::abs(k_grid[j]));
    }
}

}  // namespace detail

// All propagating modes with co-moving frequency W.
inline std::vector<BranchMode> branch_modes(double W, double drift, const LatticeDispersion& disp) {
    std::vector<double> k_grid, w_grid;
    detail::fill_k_scan(disp, disp.dx, k_grid, w_grid);
    return detail::branch_modes_from_grid(W, drift, disp, k_grid, w_grid);
}

enum class PacketBranch { right_moving, left_moving };

struct WavePacket {
    double k0 = 0.0;        // central wavenumber, in (0, pi/dx)
    double sigma_k = 0.0;   // spectral width
    double x0 = 0.0;        // center
    double amplitude = 1.0;
    PacketBranch branch = PacketBranch::right_moving;
};

// Gaussian-envelope single-branch packet built from the exact discrete
// eigenmodes of the leapfrog update: per mode, Q = -i s (L C sin(w dt)/dt) A.
inline void make_packet(const WavePacket& packet, const LadderConfig& config,
                        const CapacitanceSchedule& caps_at_t0, std::vector<double>& a,
                        std::vector<double>& q) {
    config.validate();
    const std::size_t n = config.n_cells;
    a.assign(n, 0.0);
    q.assign(n, 0.0);
    if (packet.amplitude == 0.0) return;
    if (!(packet.k0 > 0.0) || !(packet.k0 < std::numbers::pi / config.dx))
        throw std::invalid_argument("make_packet: k0 must be in (0, pi/dx)");
    if (!(packet.sigma_k > 0.0)) throw std::invalid_argument("make_packet: sigma_k must be > 0");

    // the packet must sit in a uniform stretch of the schedule
    const double c_here = caps_at_t0.value(std::size_t(std::llround(packet.x0 / config.dx)) % n, 0.0);
    const double half_extent = 6.0 / packet.sigma_k;
    const long i_lo = std::llround((packet.x0 - half_extent) / config.dx);
    const long i_hi = std::llround((packet.x0 + half_extent) / config.dx);
    if (i_lo < 0 || i_hi >= long(n))
        throw std::invalid_argument("make_packet: packet support leaves the lattice");
    for (long i = i_lo; i <= i_hi; i += std::max<long>(1, (i_hi - i_lo) / 64)) {
        if (std::abs(caps_at_t0.value(std::size_t(i), 0.0) - c_here) > 1e-6 * c_here)
            throw std::invalid_argument("make_packet: packet overlaps a non-uniform region");
    }

    const double s = (packet.branch == PacketBranch::right_moving) ? 1.0 : -1.0;
    LatticeDispersion disp{config.inductance, c_here, config.dx, config.dt};
    const double lc = config.inductance * c_here;
    const double dk = 2.0 * std::numbers::pi / (double(n) * config.dx);
    const long m0 = std::lround(packet.k0 / dk);
    const long dm = std::lround(5.0 * packet.sigma_k / dk) + 1;
    const long m_lo = std::max<long>(1, m0 - dm);
    const long m_hi = std::min<long>(long(n) / 2 - 1, m0 + dm);
    if (m_lo > m_hi) throw std::invalid_argument("make_packet: spectral band resolves no lattice modes");
    for (long m = m_lo; m <= m_hi; ++m) {
        const double k = dk * double(m);
        const double env = packet.amplitude * dk / (packet.sigma_k * std::sqrt(2.0 * std::numbers::pi)) *
                           std::exp(-0.5 * std::pow((k - packet.k0) / packet.sigma_k, 2));
        const double w = disp.omega(k);
        const double qfac = (config.dt > 0.0) ? lc * std::sin(w * config.dt) / config.dt : lc * w;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = k * (double(i) * config.dx - packet.x0);
            a[i] += env * std::cos(phase);
            q[i] += env * s * qfac * std::sin(phase);
        }
    }
}

// ---------------------------------------------------------------------------

// Lab-frame field history recorded at a fixed stride.
struct FieldHistory {
    std::vector<double> a;  // [n_t][n_x] row-major
    std::size_t n_x = 0;
    std::size_t n_t = 0;
    double dx = 1.0;
    double t0 = 0.0;
    double dt_snap = 0.0;
};

// Field on a regular (chi, t) grid.
struct ComovingField {
    std::vector<std::complex<double>> val;  // [n_t][n_chi] row-major
    std::size_t n_chi = 0;
    std::size_t n_t = 0;
    double chi0 = 0.0;
    double dchi = 1.0;
    double t0 = 0.0;
    double dts = 0.0;
    double drift = 0.0;
};

namespace detail {

// Windowed-sinc (Lanczos) interpolation; wide kernel keeps amplitude errors
// small for modes approaching the lattice band edge.
inline constexpr int lanczos_a = 8;

inline double lanczos(double x) {
    if (x == 0.0) return 1.0;
    if (std::abs(x) >= lanczos_a) return 0.0;
    const double px = std::numbers::pi * x;
    return double(lanczos_a) * std::sin(px) * std::sin(px / lanczos_a) / (px * px);
}

inline double interp_row(const double* row, std::size_t n, double x_over_dx) {
    const long base = long(std::floor(x_over_dx));
    if (std::abs(x_over_dx - double(base)) < 1e-12) {
        if (base < 0 || base >= long(n)) throw std::out_of_range("comoving_resample: window leaves the lattice");
        return row[base];
    }
    double sum = 0.0, wsum = 0.0;
    for (long j = base - lanczos_a + 1; j <= base + lanczos_a; ++j) {
        if (j < 0 || j >= long(n)) throw std::out_of_range("comoving_resample: window leaves the lattice");
        const double w = lanczos(x_over_dx - double(j));
        sum += w * row[j];
        wsum += w;
    }
    return sum / wsum;
}

}  // namespace detail

// Samples A(chi = x + v t, t) on a regular grid.  chi grid pitch equals the
// lattice pitch; the caller guarantees the window stays inside the uniform
// asymptotic region.
inline ComovingField comoving_resample(const FieldHistory& history, double drift, double chi_lo,
                                       std::size_t n_chi, std::size_t t_begin = 0,
                                       std::size_t t_count = 0) {
    if (history.n_x * history.n_t != history.a.size() || history.dt_snap <= 0.0)
        throw std::invalid_argument("comoving_resample: malformed history");
    if (t_count == 0) t_count = history.n_t - t_begin;
    if (t_begin + t_count > history.n_t)
        throw std::invalid_argument("comoving_resample: time window out of range");
    if (n_chi < 8) throw std::invalid_argument("comoving_resample: window too narrow");
    ComovingField out;
    out.n_chi = n_chi;
    out.n_t = t_count;
    out.chi0 = chi_lo;
    out.dchi = history.dx;
    out.t0 = history.t0 + double(t_begin) * history.dt_snap;
    out.dts = history.dt_snap;
    out.drift = drift;
    out.val.resize(n_chi * t_count);
    for (std::size_t j = 0; j < t_count; ++j) {
        const double t = out.t0 + double(j) * history.dt_snap;
        const double* row = history.a.data() + (t_begin + j) * history.n_x;
        for (std::size_t i = 0; i < n_chi; ++i) {
            const double x = chi_lo + double(i) * history.dx - drift * t;
            out.val[j * n_chi + i] = detail::interp_row(row, history.n_x, x / history.dx);
        }
    }
    return out;
}

enum class WindowType { rect, hann, blackman, nuttall };

namespace detail {

inline double window_weight(WindowType w, std::size_t i, std::size_t n) {
    if (n < 2) return 1.0;
    const double u = 2.0 * std::numbers::pi * double(i) / double(n - 1);
    switch (w) {
        case WindowType::rect: return 1.0;
        case WindowType::hann: return 0.5 - 0.5 * std::cos(u);
        case WindowType::blackman: return 0.42 - 0.5 * std::cos(u) + 0.08 * std::cos(2 * u);
        case WindowType::nuttall:
            return 0.355768 - 0.487396 * std::cos(u) + 0.144232 * std::cos(2 * u) -
                   0.012604 * std::cos(3 * u);
    }
    return 1.0;
}

}  // namespace detail

// Per-co-moving-frequency Klein-Gordon norm flux weights (W > 0 half-plane;
// for a real field every physical component has exactly one representative
// there).
struct NormSpectrum {
    std::vector<double> omega;     // co-moving frequency bins W > 0
    std::vector<double> raw;       // unweighted spectral power per W row
    std::vector<double> n_pos;     // all bins with lab frequency > 0
    std::vector<double> n_neg;     // all bins with lab frequency < 0
    std::vector<double> in_flux;   // bins with co-moving group velocity < 0
    std::vector<double> out_pos;   // outgoing, positive norm
    std::vector<double> out_neg;   // outgoing, negative norm
};

struct SplitOptions {
    WindowType window_chi = WindowType::hann;
    WindowType window_t = WindowType::hann;
    // Weight each bin's power with |w_lab| |v_g'| evaluated at the on-shell
    // mode of its branch nearest in K, instead of at the (off-shell) bin
    // centre.  Removes the leakage-variance bias from the flux accounting.
    bool on_shell_weights = false;
    // On-shell weights only apply within this many K bins of the mode; power
    // further out (leakage tails, quasi-static wake) keeps the off-shell weight.
    double capture_radius_bins = 6.0;
    // Subtract each time slice's window mean before transforming (a uniform A
    // offset is pure gauge).  Off by default: zeroing the K = 0 column also
    // clips genuine near-DC signal, which biases the lowest-frequency rows.
    bool subtract_slice_mean = false;
};

namespace detail {

// Window, gauge-subtract and 2D-transform a co-moving field.
inline std::vector<std::complex<double>> windowed_fft(const ComovingField& field,
                                                      const SplitOptions& opt) {
    const std::size_t nc = field.n_chi, nt = field.n_t;
    if (nc * nt != field.val.size() || nc < 8 || nt < 8)
        throw std::invalid_argument("split_norm: window too short for any frequency resolution");
    std::vector<std::complex<double>> buf(nc * nt);
    for (std::size_t j = 0; j < nt; ++j) {
        // a uniform offset of A is pure gauge (no charge, current, or norm)
        std::complex<double> mean = 0.0;
        if (opt.subtract_slice_mean) {
            for (std::size_t i = 0; i < nc; ++i) mean += field.val[j * nc + i];
            mean /= double(nc);
        }
        const double wt = window_weight(opt.window_t, j, nt);
        for (std::size_t i = 0; i < nc; ++i)
            buf[j * nc + i] =
                (field.val[j * nc + i] - mean) * (wt * window_weight(opt.window_chi, i, nc));
    }
    fftw_plan plan = fftw_plan_dft_2d(int(nt), int(nc), reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return buf;
}

}  // namespace detail

inline NormSpectrum split_norm(const ComovingField& field, const LatticeDispersion& disp,
                               const SplitOptions& opt = {}) {
    const std::size_t nc = field.n_chi, nt = field.n_t;
    auto buf = detail::windowed_fft(field, opt);

    const double dK = 2.0 * std::numbers::pi / (double(nc) * field.dchi);
    const double dW = 2.0 * std::numbers::pi / (double(nt) * field.dts);
    const double k_nyq = std::numbers::pi / field.dchi;
    NormSpectrum s;
    const std::size_t n_wbins = nt / 2;
    s.omega.resize(n_wbins);
    s.raw.assign(n_wbins, 0.0);
    s.n_pos.assign(n_wbins, 0.0);
    s.n_neg.assign(n_wbins, 0.0);
    s.in_flux.assign(n_wbins, 0.0);
    s.out_pos.assign(n_wbins, 0.0);
    s.out_neg.assign(n_wbins, 0.0);
    std::vector<double> k_grid, w_grid;
    if (opt.on_shell_weights) detail::fill_k_scan(disp, field.dchi, k_grid, w_grid);
    for (std::size_t qb = 1; qb <= n_wbins; ++qb) {
        // FFT convention: e^{i(K chi - W t)} lands in bin (p, nt - q); bin q
        // along the time axis therefore carries W = -2 pi q / T for q < nt/2.
        const std::size_t q_idx = nt - qb;
        const double W = dW * double(qb);
        s.omega[qb - 1] = W;
        std::vector<BranchMode> modes;
        if (opt.on_shell_weights)
            modes = detail::branch_modes_from_grid(W, field.drift, disp, k_grid, w_grid);
        for (std::size_t p = 0; p < nc; ++p) {
            const double K = (p <= nc / 2) ? dK * double(p) : dK * (double(p) - double(nc));
            if (std::abs(K) >= k_nyq) continue;
            double w_lab = W - field.drift * K;
            const double power = std::norm(buf[q_idx * nc + p]);
            const double s_branch = (w_lab >= 0.0) ? 1.0 : -1.0;
            const double sgn_k = (K >= 0.0) ? 1.0 : -1.0;
            double vg = field.drift + s_branch * sgn_k * disp.group_velocity(std::abs(K));
            double weight = power * disp.norm_frequency(w_lab) * std::abs(vg);
            s.raw[qb - 1] += power;
            if (opt.on_shell_weights) {
                const BranchMode* best = nullptr;
                double best_d = 0.0;
                for (const auto& m : modes) {
                    if ((m.w_lab >= 0.0) != (w_lab >= 0.0)) continue;
                    const double d = std::abs(m.k - K);
                    if (!best || d < best_d) {
                        best = &m;
                        best_d = d;
                    }
                }
                if (best && best_d <= opt.capture_radius_bins * dK) {
                    w_lab = best->w_lab;
                    vg = best->vg;
                    weight = power * best->weight;
                }
            }
            if (w_lab >= 0.0)
                s.n_pos[qb - 1] += weight;
            else
                s.n_neg[qb - 1] += weight;
            if (vg < 0.0)
                s.in_flux[qb - 1] += weight;
            else if (w_lab >= 0.0)
                s.out_pos[qb - 1] += weight;
            else
                s.out_neg[qb - 1] += weight;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

struct ScatterSample {
    double omega_comoving = 0.0;
    double alpha2 = 0.0;
    double beta2 = 0.0;
};

struct ScatterResult {
    std::vector<ScatterSample> samples;  // fitted band only
    double t_fit = 0.0;
    double fit_r2 = 0.0;
    double kappa_predicted = 0.0;
    double fit_band_lo = 0.0;
    double fit_band_hi = 0.0;
    NormSpectrum incident;   // early-window diagnostics
    NormSpectrum outgoing;   // late-window diagnostics
    std::vector<double> incident_norm;  // captured incident flux per incident-window row
};

// Least-squares slope of ln(alpha2/beta2) vs omega through the origin; T = 1/slope.
inline std::pair<double, double> fit_temperature(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 4) throw std::invalid_argument("fit_temperature: need at least 4 samples");
    double sxx = 0.0, sxy = 0.0;
    double w_first = samples.front().first;
    bool all_equal = true;
    for (const auto& [w, ratio] : samples) {
        if (!(ratio > 0.0) || !(ratio < 1.0))
            throw std::invalid_argument("fit_temperature: ratios must lie in (0, 1)");
        if (w != w_first) all_equal = false;
        const double y = -std::log(ratio);
        sxx += w * w;
        sxy += w * y;
    }
    if (all_equal || sxx == 0.0) throw std::invalid_argument("fit_temperature: degenerate frequencies");
    const double slope = sxy / sxx;
    if (!(slope > 0.0)) throw std::invalid_argument("fit_temperature: non-thermal ordering");
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [w, ratio] : samples) {
        const double y = -std::log(ratio);
        ss_res += (y - slope * w) * (y - slope * w);
        ss_tot += y * y;
    }
    return {1.0 / slope, 1.0 - ss_res / ss_tot};
}

// dE/dt = (pi / 12 hbar) (k_B T)^2; simulation units hbar = k_B = 1.
inline double hawking_flux(double t_sim) {
    if (t_sim < 0.0) throw std::invalid_argument("hawking_flux: temperature must be >= 0");
    return std::numbers::pi / 12.0 * t_sim * t_sim;
}

inline double hawking_flux_SI(double t_kelvin) {
    if (t_kelvin < 0.0) throw std::invalid_argument("hawking_flux_SI: temperature must be >= 0");
    const double kt = constants::k_boltzmann * t_kelvin;
    return std::numbers::pi / (12.0 * constants::hbar) * kt * kt;
}

// Independent check of the flux formula: band-limited thermal mode sum
// integral dk/2pi v_g(k) w(k) / (e^{w/T} - 1) over the lattice band.
inline double thermal_flux_mode_sum(double t_sim, double inductance, double capacitance, double dx,
                                    int n_k = 20000) {
    if (!(t_sim > 0.0)) return 0.0;
    const double k_max = std::numbers::pi / dx;
    double sum = 0.0;
    for (int i = 0; i < n_k; ++i) {
        const double k = k_max * (double(i) + 0.5) / double(n_k);
        const double w = dispersion_omega(k, inductance, capacitance, dx);
        const double vg = group_velocity(k, inductance, capacitance, dx);
        sum += vg * w / std::expm1(w / t_sim);
    }
    return sum * k_max / double(n_k) / (2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

struct ScatterRun {
    double t_end = 0.0;
    std::size_t snap_stride = 1;      // steps between recorded snapshots
    double window_chi_lo = 0.0;       // analysis window, co-moving coordinate
    std::size_t window_n_chi = 0;
    // Time sub-windows: the incident window must contain the full incident
    // traversal of the chi window and nothing else; the outgoing window the
    // full return of the scattered modes (lengths may differ — per-row FFT
    // power of a fully contained transient does not depend on window length).
    double t_in_begin = 0.0;
    double t_in_end = 0.0;
    double t_out_begin = 0.0;
    double t_out_end = 0.0;
    double fit_band_lo = 0.0;         // 0 -> kappa/2 .. 3 kappa default
    double fit_band_hi = 0.0;
    double min_in_fraction = 1e-4;    // usable rows need this much incident norm
    double in_capture_bins = 8.0;     // K neighbourhood captured as incident flux
    SplitOptions split{WindowType::nuttall, WindowType::rect, true};
};

// Full pipeline: schedule from the profile, packet evolution with absorbing
// ends, co-moving resample of two time windows, flux accounting, detailed
// balance temperature fit.  The incident window sees a single channel, so all
// its power is attributed to the on-shell incident mode (the one with
// v_g' < 0); the outgoing window separates alpha (positive-norm) from beta
// (negative-norm) flux per co-moving frequency.
inline ScatterResult scatter_experiment(const VelocityProfile& profile, const WavePacket& packet,
                                        const LadderConfig& config, const ScatterRun& run) {
    profile.validate();
    config.validate();
    if (!(run.t_end > 0.0) || run.snap_stride == 0 || run.window_n_chi < 8)
        throw std::invalid_argument("scatter_experiment: malformed run parameters");
    auto caps = capacitance_from_profile(profile, config);
    auto horizons = find_horizons(profile);

    ScatterResult result;
    for (const auto& h : horizons.crossings)
        if (h.kind == HorizonKind::black) result.kappa_predicted = h.kappa_g;
    if (result.kappa_predicted <= 0.0 && !horizons.crossings.empty())
        result.kappa_predicted = horizons.crossings.front().kappa_g;

    std::vector<double> a, q;
    make_packet(packet, config, caps, a, q);
    auto state = init_ladder(config, a, q);

    const std::size_t n_steps = std::size_t(std::ceil(run.t_end / config.dt));
    FieldHistory hist;
    hist.n_x = config.n_cells;
    hist.dx = config.dx;
    hist.t0 = 0.0;
    hist.dt_snap = config.dt * double(run.snap_stride);
    hist.a.reserve((n_steps / run.snap_stride + 1) * hist.n_x);
    hist.a.insert(hist.a.end(), state.a.begin(), state.a.end());
    for (std::size_t i = 1; i <= n_steps; ++i) {
        step_inplace(state, config, caps);
        if (i % run.snap_stride == 0) hist.a.insert(hist.a.end(), state.a.begin(), state.a.end());
    }
    hist.n_t = hist.a.size() / hist.n_x;

    auto snap_index = [&](double t) {
        const long j = std::lround(t / hist.dt_snap);
        if (j < 0 || std::size_t(j) >= hist.n_t)
            throw std::invalid_argument("scatter_experiment: time window outside the run");
        return std::size_t(j);
    };
    const std::size_t in_b = snap_index(run.t_in_begin), in_e = snap_index(run.t_in_end);
    const std::size_t out_b = snap_index(run.t_out_begin), out_e = snap_index(run.t_out_end);
    if (in_e <= in_b || out_e <= out_b || out_b < in_e)
        throw std::invalid_argument("scatter_experiment: time sub-windows must be ordered");

    auto field_in = comoving_resample(hist, profile.drift, run.window_chi_lo, run.window_n_chi,
                                      in_b, in_e - in_b + 1);
    auto field_out = comoving_resample(hist, profile.drift, run.window_chi_lo, run.window_n_chi,
                                       out_b, out_e - out_b + 1);

    // dispersion in the analysis window: uniform capacitance at the window centre
    const double chi_mid = run.window_chi_lo + 0.5 * double(run.window_n_chi) * config.dx;
    const double c_window = config.dx * config.dx / (config.inductance * profile.c2(chi_mid));
    LatticeDispersion disp{config.inductance, c_window, config.dx, config.dt};
    result.incident = split_norm(field_in, disp, run.split);
    result.outgoing = split_norm(field_out, disp, run.split);

    const double kappa = result.kappa_predicted;
    result.fit_band_lo = (run.fit_band_lo > 0.0) ? run.fit_band_lo : 0.5 * kappa;
    result.fit_band_hi = (run.fit_band_hi > 0.0) ? run.fit_band_hi : 3.0 * kappa;

    // incident norm per row: the early window contains only the incoming
    // channel, so all power near its on-shell wavenumber belongs to it —
    // summing a whole K neighbourhood sidesteps per-bin branch assignment,
    // which is ambiguous where the incident mode approaches K = 0
    const auto& in_sp = result.incident;
    const auto& out_sp = result.outgoing;
    std::vector<double> in_norm(in_sp.omega.size(), 0.0);
    double max_in = 0.0;
    {
        auto buf = detail::windowed_fft(field_in, run.split);
        const std::size_t nc = field_in.n_chi, nt = field_in.n_t;
        const double dK = 2.0 * std::numbers::pi / (double(nc) * field_in.dchi);
        std::vector<double> k_grid, w_grid;
        detail::fill_k_scan(disp, field_in.dchi, k_grid, w_grid);
        const double radius = run.in_capture_bins * dK;
        for (std::size_t i = 0; i < in_sp.omega.size(); ++i) {
            const BranchMode* incident = nullptr;
            auto modes = detail::branch_modes_from_grid(in_sp.omega[i], profile.drift, disp, k_grid,
                                                        w_grid);
            for (const auto& m : modes)
                if (m.vg < 0.0) incident = &m;
            if (!incident) continue;
            const std::size_t q_idx = nt - (i + 1);
            double raw = 0.0;
            for (std::size_t p = 0; p < nc; ++p) {
                const double K = (p <= nc / 2) ? dK * double(p) : dK * (double(p) - double(nc));
                if (std::abs(K - incident->k) <= radius) raw += std::norm(buf[q_idx * nc + p]);
            }
            in_norm[i] = raw * incident->weight;
            max_in = std::max(max_in, in_norm[i]);
        }
    }

    result.incident_norm = in_norm;

    // incident norm at an arbitrary frequency: quadratic interpolation of
    // ln(norm) on the incident-window grid (exact for a Gaussian envelope)
    const double dw_in = in_sp.omega.empty() ? 0.0 : in_sp.omega.front();
    auto in_norm_at = [&](double w) -> double {
        if (in_norm.size() < 3 || dw_in <= 0.0) return 0.0;
        const double u = w / dw_in - 1.0;  // fractional index into in_norm
        std::size_t j = std::size_t(std::clamp(std::lround(u), 1l, long(in_norm.size()) - 2));
        const double d = u - double(j);
        if (std::abs(d) > 0.75) return 0.0;  // out of grid range
        const double floor = run.min_in_fraction * max_in;
        if (in_norm[j - 1] < floor || in_norm[j] < floor || in_norm[j + 1] < floor) return 0.0;
        const double ym = std::log(in_norm[j - 1]), y0 = std::log(in_norm[j]),
                     yp = std::log(in_norm[j + 1]);
        return std::exp(y0 + 0.5 * d * (yp - ym) + 0.5 * d * d * (yp - 2.0 * y0 + ym));
    };

    std::vector<std::pair<double, double>> fit_samples;
    for (std::size_t i = 0; i < out_sp.omega.size(); ++i) {
        const double w = out_sp.omega[i];
        if (w < result.fit_band_lo || w > result.fit_band_hi) continue;
        const double denom = in_norm_at(w);
        if (!(denom > 0.0)) continue;
        ScatterSample smp;
        smp.omega_comoving = w;
        smp.alpha2 = out_sp.out_pos[i] / denom;
        smp.beta2 = out_sp.out_neg[i] / denom;
        result.samples.push_back(smp);
        if (smp.alpha2 > 0.0 && smp.beta2 > 0.0 && smp.beta2 < smp.alpha2)
            fit_samples.push_back({w, smp.beta2 / smp.alpha2});
    }
    if (fit_samples.size() >= 4) {
        auto [t, r2] = fit_temperature(fit_samples);
        result.t_fit = t;
        result.fit_r2 = r2;
    }
    return result;
}

}  // namespace lchsim
