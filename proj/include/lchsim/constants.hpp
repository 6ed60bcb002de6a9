#pragma once

// Physical constants (CODATA 2018). The simulation itself works in units
// L = dx = hbar = k_B = 1; these enter only when converting to SI.

namespace lchsim::constants {

inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double eps0 = 8.8541878128e-12;      // F/m
inline constexpr double mu0 = 1.25663706212e-6;       // H/m
inline constexpr double c_light = 299792458.0;        // m/s

}  // namespace lchsim::constants
