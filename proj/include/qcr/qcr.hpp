#pragma once

#include <vector>

#include "qcr/params.hpp"

namespace qcr::qcr {

struct JunctionParams {
    double R_T = 0.0;      // Ohm
    double Delta = 0.0;    // J
    double gamma_D = 0.0;
    double T_N = 0.0;      // K
    double E_N = 0.0;      // island charging energy, J
    double m2_coupling = 1.0;
};

JunctionParams junction_from_device(const params::DeviceParams& p,
                                    const params::DerivedParams& d);

// Broadened quasiparticle density of states,
// n_S(eps) = | Re[ (eps/Delta + i gamma_D) / sqrt((eps/Delta + i gamma_D)^2 - 1) ] |.
double dynes_dos(double eps, const JunctionParams& jp);

// Photon-assisted tunneling kernel
// F(E) = (1/h) * integral deps n_S(eps) f(eps - E) [1 - f(eps)],
// with both Fermi functions thermal at T_N. Units 1/s.
double rate_function_F(double E, const JunctionParams& jp);

// Single-photon Fock transition rate for a symmetrically biased SINIS pair,
// each junction dropping V_b/2:
//   Gamma(ell) = m2 * (2 R_K / R_T) * sum_{s=+,-} F(s eV_b/2 + ell hbar omega_r - E_N).
// ell = +1 absorbs a resonator photon (m -> m-1), ell = -1 emits.
double transition_rate(int ell, double V_b, double omega_r, const JunctionParams& jp);

// Gamma(+1) - Gamma(-1); negative values indicate the heating regime.
double delta_gamma(double V_b, double omega_r, const JunctionParams& jp);

double kappa_eff(double V_b, double omega_r, const JunctionParams& jp, double kappa_r);

// N_T = Gamma(-1) / (Gamma(+1) - Gamma(-1)), so delta_gamma * (1 + N_T) and
// delta_gamma * N_T reproduce the two directed rates exactly.
// Throws NumericalError when delta_gamma <= 0.
double effective_occupation_NT(double V_b, double omega_r, const JunctionParams& jp);

struct QcrBiasPoint {
    double V_b = 0.0;
    double Gamma_down = 0.0;  // photon-absorbing, resonator 1 -> 0
    double Gamma_up = 0.0;    // photon-emitting, 0 -> 1
    double delta_gamma = 0.0;
    double N_T = 0.0;  // 0 when delta_gamma <= 0 (no effective temperature)
    double kappa_eff = 0.0;
};

QcrBiasPoint bias_point(double V_b, double omega_r, const JunctionParams& jp, double kappa_r);

// Quasiparticle current of the SINIS pair,
// I = (1 / 2 e R_T) * integral dE n_S(E) [f(E - eV) - f(E + eV)];
// antisymmetrized in V by construction.
double iv_current(double V, const JunctionParams& jp);

// m2_coupling that makes delta_gamma(V_b) hit the target (rates are linear in
// m2). Throws NumericalError when the required weight exceeds 1.
double calibrate_m2(double target_delta_gamma, double V_b, double omega_r,
                    const JunctionParams& jp);

// Directed rates sampled on a uniform envelope-fraction grid u in [0, 1],
// where the instantaneous bias is u * V_plateau. Linear interpolation between
// nodes; endpoints exact. Lets the integrator follow a bias envelope without
// re-running quadrature per step.
class QcrRateTable {
  public:
    QcrRateTable() = default;
    QcrRateTable(const JunctionParams& jp, double omega_r, double V_plateau, int n_points = 513);

    double gamma_down(double u) const;
    double gamma_up(double u) const;
    double v_plateau() const { return V_plateau_; }
    bool empty() const { return down_.empty(); }

  private:
    double interp(const std::vector<double>& tab, double u) const;
    double V_plateau_ = 0.0;
    std::vector<double> down_;
    std::vector<double> up_;
};

}  // namespace qcr::qcr
