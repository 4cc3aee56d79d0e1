#include "qcr/qcr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"
#include "qcr/numerics.hpp"

namespace qcr::qcr {

namespace {

using consts::e_charge;
using consts::h_planck;
using consts::hbar;
using consts::k_B;
using consts::R_K;

// Fermi function, overflow-safe on both sides.
double fermi(double x) {
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

// n_S as a function of x = eps / Delta.
double dynes_reduced(double x, double gamma_D) {
    const std::complex<double> z(x, gamma_D);
    const std::complex<double> w = z / std::sqrt(z * z - 1.0);
    return std::abs(w.real());
}

// Breakpoints for the kernel integrals: every Fermi edge and gap edge gets a
// panel boundary plus a +-5 thermal-width layer so the panel error estimates
// see the boundary structure.
std::vector<double> edge_breakpoints(std::initializer_list<double> edges, double t, double cut) {
    std::vector<double> pts{-cut, cut};
    for (double v : edges) {
        for (double d : {-5.0 * t, 0.0, 5.0 * t}) {
            const double x = v + d;
            if (x > -cut && x < cut) pts.push_back(x);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              pts.end());
    return pts;
}

// Reduced kernel: integral dx n_S(x) f((x - E)/t) [1 - f(x/t)] with all
// energies in units of Delta. Multiply by Delta/h for the physical rate.
double kernel_reduced(double E, double gamma_D, double t) {
    const double cut = std::abs(E) + 10.0 * t + 10.0;
    const auto pts = edge_breakpoints({-1.0, 0.0, 1.0, E}, t, cut);

    numerics::QuadratureSpec spec;
    spec.abs_tol = 0.0;
    spec.rel_tol = 1e-6;
    spec.max_subdivisions = 4000;
    // 1 - f(x) = f(-x) exactly; the subtraction form loses all precision on
    // the deep tails that carry the detailed-balance weight at large |E|.
    auto integrand = [&](double x) {
        return dynes_reduced(x, gamma_D) * fermi((x - E) / t) * fermi(-x / t);
    };
    return numerics::integrate(integrand, pts, spec).value;
}

double rate_prefactor(const JunctionParams& jp) { return jp.m2_coupling * 2.0 * R_K / jp.R_T; }

}  // namespace

JunctionParams junction_from_device(const params::DeviceParams& p,
                                    const params::DerivedParams& d) {
    return {p.R_T, p.Delta, p.gamma_D, p.T_N, d.E_N, p.m2_coupling};
}

double dynes_dos(double eps, const JunctionParams& jp) {
    return dynes_reduced(eps / jp.Delta, jp.gamma_D);
}

double rate_function_F(double E, const JunctionParams& jp) {
    const double t = k_B * jp.T_N / jp.Delta;
    try {
        return (jp.Delta / h_planck) * kernel_reduced(E / jp.Delta, jp.gamma_D, t);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("rate_function_F: ") + e.what());
    }
}

double transition_rate(int ell, double V_b, double omega_r, const JunctionParams& jp) {
    if (ell != 1 && ell != -1)
        throw ValidationError("transition_rate: ell must be +1 or -1");
    if (V_b < 0.0) throw ValidationError("transition_rate: V_b must be nonnegative");
    const double half_bias = e_charge * V_b / 2.0;
    const double shift = ell * hbar * omega_r - jp.E_N;
    return rate_prefactor(jp) *
           (rate_function_F(half_bias + shift, jp) + rate_function_F(-half_bias + shift, jp));
}

double delta_gamma(double V_b, double omega_r, const JunctionParams& jp) {
    return transition_rate(+1, V_b, omega_r, jp) - transition_rate(-1, V_b, omega_r, jp);
}

double kappa_eff(double V_b, double omega_r, const JunctionParams& jp, double kappa_r) {
    return kappa_r + delta_gamma(V_b, omega_r, jp);
}

double effective_occupation_NT(double V_b, double omega_r, const JunctionParams& jp) {
    const double up = transition_rate(-1, V_b, omega_r, jp);
    const double down = transition_rate(+1, V_b, omega_r, jp);
    const double dg = down - up;
    if (dg <= 0.0)
        throw NumericalError("effective_occupation_NT: delta_gamma <= 0, no effective temperature");
    return up / dg;
}

QcrBiasPoint bias_point(double V_b, double omega_r, const JunctionParams& jp, double kappa_r) {
    QcrBiasPoint b;
    b.V_b = V_b;
    b.Gamma_down = transition_rate(+1, V_b, omega_r, jp);
    b.Gamma_up = transition_rate(-1, V_b, omega_r, jp);
    b.delta_gamma = b.Gamma_down - b.Gamma_up;
    b.N_T = b.delta_gamma > 0.0 ? b.Gamma_up / b.delta_gamma : 0.0;
    b.kappa_eff = kappa_r + b.delta_gamma;
    return b;
}

double iv_current(double V, const JunctionParams& jp) {
    if (V == 0.0) return 0.0;
    const double sign = V > 0.0 ? 1.0 : -1.0;
    const double v = e_charge * std::abs(V) / jp.Delta;
    const double t = k_B * jp.T_N / jp.Delta;
    const double cut = v + 10.0 * t + 10.0;
    const auto pts = edge_breakpoints({-v, -1.0, 0.0, 1.0, v}, t, cut);

    numerics::QuadratureSpec spec;
    spec.abs_tol = 0.0;
    spec.rel_tol = 1e-8;
    spec.max_subdivisions = 4000;
    // f(a) - f(b) = f(a) f(-b) (1 - e^{a-b}) exactly; the plain difference
    // cancels to rounding noise when eV << k_B T_N and the integrator then
    // chases a relative target the data cannot support.
    const double window = -std::expm1(-2.0 * v / t);
    auto integrand = [&](double x) {
        return dynes_reduced(x, jp.gamma_D) * window * fermi((x - v) / t) * fermi(-(x + v) / t);
    };
    double reduced;
    try {
        reduced = numerics::integrate(integrand, pts, spec).value;
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("iv_current: ") + e.what());
    }
    return sign * jp.Delta * reduced / (2.0 * e_charge * jp.R_T);
}

double calibrate_m2(double target_delta_gamma, double V_b, double omega_r,
                    const JunctionParams& jp) {
    if (target_delta_gamma <= 0.0)
        throw ValidationError("calibrate_m2: target must be positive");
    JunctionParams unit = jp;
    unit.m2_coupling = 1.0;
    const double dg1 = delta_gamma(V_b, omega_r, unit);
    if (dg1 <= 0.0)
        throw NumericalError("calibrate_m2: delta_gamma not positive at the calibration bias");
    const double m2 = target_delta_gamma / dg1;
    if (m2 > 1.0)
        throw NumericalError("calibrate_m2: required matrix-element weight exceeds 1");
    return m2;
}

QcrRateTable::QcrRateTable(const JunctionParams& jp, double omega_r, double V_plateau,
                           int n_points)
    : V_plateau_(V_plateau) {
    if (n_points < 2) throw ValidationError("QcrRateTable: need at least 2 points");
    down_.resize(n_points);
    up_.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double u = static_cast<double>(i) / (n_points - 1);
        down_[i] = transition_rate(+1, u * V_plateau, omega_r, jp);
        up_[i] = transition_rate(-1, u * V_plateau, omega_r, jp);
    }
}

double QcrRateTable::interp(const std::vector<double>& tab, double u) const {
    const int n = static_cast<int>(tab.size());
    if (u <= 0.0) return tab.front();
    if (u >= 1.0) return tab.back();
    const double x = u * (n - 1);
    const int i = std::min(static_cast<int>(x), n - 2);
    const double w = x - i;
    return tab[i] * (1.0 - w) + tab[i + 1] * w;
}

double QcrRateTable::gamma_down(double u) const { return interp(down_, u); }
double QcrRateTable::gamma_up(double u) const { return interp(up_, u); }

}  // namespace qcr::qcr
