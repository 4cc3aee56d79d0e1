#pragma once

// SI constants (2019 redefinition, exact where exact).
namespace qcr::consts {

inline constexpr double e_charge = 1.602176634e-19;  // C
inline constexpr double h_planck = 6.62607015e-34;   // J s
inline constexpr double k_B = 1.380649e-23;          // J/K
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double hbar = h_planck / two_pi;
inline constexpr double R_K = h_planck / (e_charge * e_charge);  // von Klitzing, ~25812.807 Ohm

// unit helpers
inline constexpr double GHz = 1e9;
inline constexpr double MHz = 1e6;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
inline constexpr double fF = 1e-15;
inline constexpr double kOhm = 1e3;
inline constexpr double ueV = 1e-6 * e_charge;  // micro-electronvolt in J
inline constexpr double mK = 1e-3;

}  // namespace qcr::consts
