#pragma once

#include <string>

namespace qcr::params {

// Device and environment parameters, SI units throughout (rad/s, s, J, F,
// Ohm, K). Config files use lab units (GHz, MHz, us, fF, kOhm, ueV, mK) and
// are converted on load; see docs/config.md for the schema.
struct DeviceParams {
    // resonator / qubit spectrum (rad/s)
    double omega_r = 0.0;
    double omega_ge = 0.0;
    double omega_ef = 0.0;
    double alpha = 0.0;    // anharmonicity, negative
    double lambda_c = 0.0; // qubit-resonator coupling
    double omega_f0g1_measured = 0.0;  // 0 when the config omits the measured line
    double detuning_r = 0.0;  // static frame offsets standing in for Stark/Lamb shifts
    double detuning_q = 0.0;

    // decay / coherence
    double kappa_r = 0.0;   // 1/s
    double T1 = 0.0;        // s
    double T2_star = 0.0;   // s
    double P_e_thermal = 0.0;

    // SINIS junction and island
    double R_T = 0.0;      // Ohm
    double Delta = 0.0;    // J
    double gamma_D = 0.0;
    double T_N = 0.0;      // K
    double C_c = 0.0;      // F
    double C_j = 0.0;
    double C_m = 0.0;
    double C_sigma_override = 0.0;  // 0 = derive from C_c + 2 C_j + C_m
    double m2_coupling = 0.0;

    // environment occupations and optional extra decay channels
    double N_tr = 0.0;
    double n_th_ef = 0.0;
    double gamma_T_ge = 0.0;  // 1/s
    double gamma_T_ef = 0.0;
    double N_T_q = 0.0;
    double gamma_ef_override = 0.0;      // 0 = default 2 * gamma_ge
    double gamma_phi_ef_override = 0.0;  // 0 = default 2 * gamma_phi_ge

    // stored-only rows (no implemented equation consumes these)
    double EJ_over_EC = 0.0;
    double C_q = 0.0;

    int n_fock = 5;

    double delta_d() const { return omega_r - omega_ge; }
};

struct DerivedParams {
    double E_N = 0.0;              // island charging energy, J
    double C_sigma = 0.0;          // F
    double omega_f0g1_bare = 0.0;  // rad/s
    double n_th = 0.0;
    double gamma_ge = 0.0;         // 1/s
    double Gamma_up_q = 0.0;
    double Gamma_down_q = 0.0;
    double gamma_phi_ge = 0.0;
    double gamma_ef = 0.0;
    double gamma_phi_ef = 0.0;
};

// Parse a flat key-value document (either the lab-unit schema or the SI dump
// produced by to_config_text). Throws ConfigError on missing keys or syntax,
// ValidationError when a value breaks an invariant.
DeviceParams parse_params(const std::string& text);

// parse_params over the contents of a file.
DeviceParams load_params(const std::string& path);

// SI dump; reloading it through parse_params reproduces every field
// bit-identically (17 significant digits, no unit conversion on reload).
std::string to_config_text(const DeviceParams& p);

// Pure; throws ValidationError when T2_star > 2 T1 (negative pure dephasing).
DerivedParams derive(const DeviceParams& p);

}  // namespace qcr::params
