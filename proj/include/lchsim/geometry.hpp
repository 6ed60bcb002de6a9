#pragma once

// Effective geometry of the ladder: velocity profiles c^2(chi) with chi = x + v t,
// the profile <-> capacitance mapping C_n(t) = dx^2 / (L c^2(x_n + v t)),
// the 2+1 dimensional Painleve-Gullstrand-Lemaitre metric, horizon location and
// surface gravity, and SI feasibility checks for the physical cell design.

#include <array>
#include <cmath>
#include <numbers>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lchsim/constants.hpp"
#include "lchsim/ladder.hpp"

namespace lchsim {

struct VelocityProfile {
    std::function<double(double)> c2;  // chi -> c^2(chi), strictly positive
    double drift = 0.0;                // v: speed of the profile pattern
    double chi_lo = 0.0;               // c^2 is constant outside [chi_lo, chi_hi]
    double chi_hi = 0.0;

    void validate() const {
        if (!c2) throw std::invalid_argument("VelocityProfile: missing c2 callable");
        if (!(chi_hi > chi_lo)) throw std::invalid_argument("VelocityProfile: empty support");
    }

    double c(double chi) const { return std::sqrt(c2(chi)); }
};

// c(chi) = c_mean + c_step * tanh((chi - center) / steepness); analytic surface
// gravity c_step/steepness * (1 - ((v - c_mean)/c_step)^2) makes this the oracle family.
inline VelocityProfile tanh_profile(double c_mean, double c_step, double steepness, double center,
                                    double drift) {
    if (!(steepness > 0.0)) throw std::invalid_argument("tanh_profile: steepness must be > 0");
    if (!(c_mean - std::abs(c_step) > 0.0))
        throw std::invalid_argument("tanh_profile: c must stay positive");
    VelocityProfile p;
    p.c2 = [=](double chi) {
        const double c = c_mean + c_step * std::tanh((chi - center) / steepness);
        return c * c;
    };
    p.drift = drift;
    p.chi_lo = center - 20.0 * steepness;
    p.chi_hi = center + 20.0 * steepness;
    return p;
}

// c(chi) = clamp(c0 + slope * (chi - center), c_floor, c_ceil)
inline VelocityProfile linear_profile(double c0, double slope, double center, double c_floor,
                                      double c_ceil, double drift) {
    if (!(c_floor > 0.0) || !(c_ceil >= c_floor))
        throw std::invalid_argument("linear_profile: require 0 < c_floor <= c_ceil");
    VelocityProfile p;
    p.c2 = [=](double chi) {
        double c = c0 + slope * (chi - center);
        c = std::min(std::max(c, c_floor), c_ceil);
        return c * c;
    };
    p.drift = drift;
    if (slope != 0.0) {
        p.chi_lo = center + (c_floor - c0) / slope;
        p.chi_hi = center + (c_ceil - c0) / slope;
        if (p.chi_lo > p.chi_hi) std::swap(p.chi_lo, p.chi_hi);
    } else {
        p.chi_lo = center - 1.0;
        p.chi_hi = center + 1.0;
    }
    return p;
}

// Natural cubic spline through user (chi, c) knots, constant extension outside.
inline VelocityProfile table_profile(std::vector<double> chi, std::vector<double> c, double drift) {
    const std::size_t n = chi.size();
    if (n < 3 || c.size() != n) throw std::invalid_argument("table_profile: need >= 3 matching knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(chi[i + 1] > chi[i])) throw std::invalid_argument("table_profile: knots must be increasing");
    for (double v : c)
        if (!(v > 0.0)) throw std::invalid_argument("table_profile: c values must be > 0");
    // second derivatives by the standard tridiagonal solve
    std::vector<double> m(n, 0.0), l(n, 1.0), mu(n, 0.0), z(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hi = chi[i] - chi[i - 1], hi1 = chi[i + 1] - chi[i];
        l[i] = 2.0 * (chi[i + 1] - chi[i - 1]) - hi * mu[i - 1];
        mu[i] = hi1 / l[i];
        const double alpha = 3.0 * ((c[i + 1] - c[i]) / hi1 - (c[i] - c[i - 1]) / hi);
        z[i] = (alpha - hi * z[i - 1]) / l[i];
    }
    for (std::size_t i = n - 1; i-- > 1;) m[i] = z[i] - mu[i] * m[i + 1];
    VelocityProfile p;
    p.c2 = [chi, c, m, n](double x) {
        double val;
        if (x <= chi.front()) {
            val = c.front();
        } else if (x >= chi.back()) {
            val = c.back();
        } else {
            std::size_t i = 1;
            while (i + 1 < n && chi[i] < x) ++i;
            const double h = chi[i] - chi[i - 1];
            const double t1 = (chi[i] - x) / h, t2 = (x - chi[i - 1]) / h;
            val = t1 * c[i - 1] + t2 * c[i] +
                  ((t1 * t1 * t1 - t1) * m[i - 1] + (t2 * t2 * t2 - t2) * m[i]) * h * h / 6.0;
        }
        return val * val;
    };
    p.drift = drift;
    p.chi_lo = chi.front();
    p.chi_hi = chi.back();
    return p;
}

// C_n(t) = dx^2 / (L c^2(x_n + v t)); bounds from a dense scan of the support.
inline CapacitanceSchedule capacitance_from_profile(const VelocityProfile& profile,
                                                    const LadderConfig& config) {
    profile.validate();
    const double dx2 = config.dx * config.dx;
    const double L = config.inductance;
    double c2min = profile.c2(profile.chi_lo), c2max = c2min;
    const int scan = 4096;
    for (int i = 0; i <= scan; ++i) {
        const double chi = profile.chi_lo + (profile.chi_hi - profile.chi_lo) * double(i) / scan;
        const double v = profile.c2(chi);
        if (!(v > 0.0)) throw std::invalid_argument("capacitance_from_profile: c^2 must be > 0");
        c2min = std::min(c2min, v);
        c2max = std::max(c2max, v);
    }
    c2max = std::max(c2max, profile.c2(profile.chi_hi));
    c2min = std::min(c2min, profile.c2(profile.chi_hi));
    CapacitanceSchedule caps;
    const auto c2 = profile.c2;
    const double v = profile.drift;
    const double dx = config.dx;
    caps.value = [c2, v, dx2, dx, L](std::size_t n, double t) {
        return dx2 / (L * c2(double(n) * dx + v * t));
    };
    caps.c_min = dx2 / (L * c2max);
    caps.c_max = dx2 / (L * c2min);
    return caps;
}

struct EffectiveMetric {
    std::array<std::array<double, 3>, 3> g_inv{};  // g^{mu nu}
    std::array<std::array<double, 3>, 3> g{};      // its matrix inverse
    double c = 0.0;
    double v = 0.0;

    double det_g_inv() const { return c * c * c * c; }  // analytically forced
};

inline EffectiveMetric effective_metric(double c, double v) {
    if (!(c > 0.0)) throw std::invalid_argument("effective_metric: c must be > 0");
    EffectiveMetric m;
    m.c = c;
    m.v = v;
    const double c2 = c * c;
    m.g_inv = {{{1.0, v, 0.0}, {v, v * v - c2, 0.0}, {0.0, 0.0, -c2}}};
    // block inverse: det of the 2x2 time-space block is -c^2
    m.g = {{{(c2 - v * v) / c2, v / c2, 0.0}, {v / c2, -1.0 / c2, 0.0}, {0.0, 0.0, -1.0 / c2}}};
    return m;
}

enum class HorizonKind { black, white };

struct HorizonCrossing {
    double chi = 0.0;       // root of c^2(chi) = v^2
    HorizonKind kind = HorizonKind::black;
    double kappa_g = 0.0;   // |dc/dchi| at the root
    double t_hawking = 0.0; // kappa_g / (2 pi), hbar = k_B = 1
    double t_kelvin = 0.0;  // same, SI (valid when kappa_g is in 1/s)
    bool degenerate = false;
};

struct HorizonReport {
    std::vector<HorizonCrossing> crossings;
};

// T = hbar/(2 pi k_B) * kappa_g
inline double hawking_temperature_SI(double kappa_g) {
    if (kappa_g < 0.0) throw std::invalid_argument("hawking_temperature_SI: kappa_g must be >= 0");
    return constants::hbar / (2.0 * std::numbers::pi * constants::k_boltzmann) * kappa_g;
}

// Locate all sign changes of c^2(chi) - v^2 by bisection on a 1024-point
// pre-scan.  Classification follows the convention that with v > 0 a crossing
// where c increases with chi is the black-hole horizon.
inline HorizonReport find_horizons(const VelocityProfile& profile, double tol = 0.0) {
    profile.validate();
    const double width = profile.chi_hi - profile.chi_lo;
    if (tol <= 0.0) tol = 1e-10 * width;
    const double v2 = profile.drift * profile.drift;
    auto f = [&](double chi) { return profile.c2(chi) - v2; };
    const int n_scan = 1024;
    HorizonReport report;
    auto record = [&](double root) {
        HorizonCrossing cr;
        cr.chi = root;
        // centered finite difference of c = sqrt(c^2); step large enough to
        // stay clear of roundoff cancellation
        const double h = std::max(tol, 1e-7 * width);
        const double dcd = (profile.c(cr.chi + h) - profile.c(cr.chi - h)) / (2.0 * h);
        cr.kappa_g = std::abs(dcd);
        cr.t_hawking = cr.kappa_g / (2.0 * std::numbers::pi);
        cr.t_kelvin = hawking_temperature_SI(cr.kappa_g);
        const bool increasing = dcd > 0.0;
        cr.kind = ((profile.drift > 0.0) == increasing) ? HorizonKind::black : HorizonKind::white;
        cr.degenerate = (cr.kappa_g * width < 1e-12);  // tangency: flagged, not resolved
        report.crossings.push_back(cr);
    };
    auto sgn = [](double x) { return (x > 0.0) - (x < 0.0); };
    double prev_chi = profile.chi_lo;
    int last_sign = sgn(f(prev_chi));
    for (int i = 1; i <= n_scan; ++i) {
        const double chi = profile.chi_lo + width * double(i) / n_scan;
        const int s = sgn(f(chi));
        if (s == 0) {
            record(chi);  // exact zero on the scan grid consumes this crossing
            last_sign = 0;
        } else if (last_sign == 0) {
            last_sign = s;
        } else if (s != last_sign) {
            double lo = prev_chi, hi = chi, flo = f(lo);
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (sgn(fm) == sgn(flo)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            double root = 0.5 * (lo + hi);
            // secant polish so the finite-difference step, not the bisection
            // interval, limits the surface-gravity accuracy
            double x0 = lo, x1 = hi, f0 = f(x0), f1 = f(x1);
            for (int it = 0; it < 8 && f1 != f0; ++it) {
                const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
                if (!std::isfinite(x2) || x2 < prev_chi - width || x2 > chi + width) break;
                x0 = x1; f0 = f1; x1 = x2; f1 = f(x1);
            }
            if (std::abs(f1) <= std::abs(f(root))) root = x1;
            record(root);
            last_sign = s;
        }
        prev_chi = chi;
    }
    return report;
}

// Physical dimensions of one wave-guide cell, SI.
struct CellDesign {
    double delta_z = 0.0;  // insulating slab thickness
    double delta_x = 0.0;  // capacitor plate gap scale
    double big_delta_x = 0.0;
    double big_delta_z = 0.0;
    double big_delta_y = 0.0;
    double lambda = 0.0;   // working wavelength
    double epsilon = constants::eps0;
    double mu = constants::mu0;

    void validate() const {
        for (double d : {delta_z, delta_x, big_delta_x, big_delta_z, big_delta_y, lambda, epsilon, mu})
            if (!(d > 0.0)) throw std::invalid_argument("CellDesign: all quantities must be > 0");
    }
};

struct HierarchyLink {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct HierarchyReport {
    std::vector<HierarchyLink> links;
    bool pass = false;
    double inductance = 0.0;   // mu dX dZ / dY  (long coil)
    double capacitance = 0.0;  // eps dX dY / delta_z
    double c = 0.0;            // sqrt(delta_z / (eps mu dZ))
    double slow_down = 0.0;    // c0 / c
};

// Checks delta_z << delta_x << dX, dZ << dY << lambda, each "<<" read as a
// factor-of-`ratio` separation (default 10).
inline HierarchyReport validate_hierarchy(const CellDesign& d, double ratio = 10.0) {
    d.validate();
    if (!(ratio > 1.0)) throw std::invalid_argument("validate_hierarchy: ratio must be > 1");
    HierarchyReport r;
    auto link = [&](const std::string& name, double lhs, double rhs) {
        r.links.push_back({name, lhs, rhs, rhs >= ratio * lhs});
    };
    link("delta_z << delta_x", d.delta_z, d.delta_x);
    link("delta_x << Delta_x", d.delta_x, d.big_delta_x);
    link("delta_x << Delta_z", d.delta_x, d.big_delta_z);
    link("Delta_x << Delta_y", d.big_delta_x, d.big_delta_y);
    link("Delta_z << Delta_y", d.big_delta_z, d.big_delta_y);
    link("Delta_y << lambda", d.big_delta_y, d.lambda);
    r.pass = true;
    for (const auto& l : r.links) r.pass = r.pass && l.pass;
    r.inductance = d.mu * d.big_delta_x * d.big_delta_z / d.big_delta_y;
    r.capacitance = d.epsilon * d.big_delta_x * d.big_delta_y / d.delta_z;
    r.c = std::sqrt(d.delta_z / (d.epsilon * d.mu * d.big_delta_z));
    r.slow_down = constants::c_light / r.c;
    return r;
}

}  // namespace lchsim
