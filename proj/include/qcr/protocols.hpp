#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcr/dynamics.hpp"
#include "qcr/hilbert.hpp"
#include "qcr/params.hpp"
#include "qcr/pulses.hpp"
#include "qcr/qcr.hpp"

namespace qcr::protocols {

// ---------------------------------------------------------------------------
// Optimal drive amplitude.
// ---------------------------------------------------------------------------

enum class DriveValidity { ok, boundary, violated };

struct OptimalDrive {
    double omega = 0.0;  // rad/s
    DriveValidity validity = DriveValidity::ok;
};

// Omega = sqrt(18 g^2 - kappa^2) / 6, the amplitude that maximizes the
// three-level cascade rate at fixed g and kappa. Requires g, kappa > 0;
// throws NumericalError when 18 g^2 < kappa^2 (imaginary amplitude).
// validity is ok when g >= sqrt(2/27) kappa, boundary within 1e-12 kappa of
// that threshold, violated between the threshold and the domain edge.
OptimalDrive optimal_drive(double g_rabi, double kappa);

// ---------------------------------------------------------------------------
// Static spectrum.
// ---------------------------------------------------------------------------

struct SpectrumLevel {
    int q = 0;
    int m = 0;
    double bare = 0.0;     // rad/s above the bare ground level
    double dressed = 0.0;  // rad/s above the dressed ground level
};

struct Spectrum {
    std::vector<SpectrumLevel> levels;  // basis order
    double omega_ge_bare = 0.0, omega_ge_dressed = 0.0;
    double omega_ef_bare = 0.0, omega_ef_dressed = 0.0;
    double omega_f0g1_bare = 0.0, omega_f0g1_dressed = 0.0;
};

// Diagonalizes the static (drives off) Hamiltonian and labels eigenstates by
// their dominant bare component. Throws NumericalError when the labeling is
// ambiguous (two eigenvectors claim the same bare level).
Spectrum dressed_spectrum(const params::DeviceParams& p);

// ---------------------------------------------------------------------------
// Reset.
// ---------------------------------------------------------------------------

// Per-bias setup shared across pulse lengths: junction, sampled QCR rates at
// this plateau bias, effective resonator decay and the dressed carriers the
// drives lock to.
struct ResetContext {
    params::DerivedParams derived;
    qcr::JunctionParams junction;
    qcr::QcrRateTable table;  // empty when V_b = 0
    double V_b = 0.0;
    double kappa_eff_plateau = 0.0;
    double carrier_ef = 0.0;    // rad/s
    double carrier_f0g1 = 0.0;  // rad/s
};

ResetContext make_reset_context(double V_b, const params::DeviceParams& p,
                                int table_points = 513);

struct ResetResult {
    dynamics::PopulationTrace trace;
    double residual_pe = 0.0;  // at the last sample, pulse fully over
    double residual_pf = 0.0;
    double omega_used = 0.0;  // rad/s
    double kappa_eff_plateau = 0.0;
    DriveValidity drive_validity = DriveValidity::ok;
};

// Full Lindblad evolution of one reset window: co-timed f0g1 drive (amplitude
// g_rabi), ef drive (amplitude omega_rabi, or the optimal_drive value when
// omega_rabi is empty) and QCR bias pulse of length tau_reset. rho0 enters
// as-is; preparation gates are the caller's business (apply_prep_gate).
// trace_dt is the sampling period of the returned trace (0 picks ~1 ns).
ResetResult simulate_reset(const ResetContext& ctx, double tau_reset, double g_rabi,
                           std::optional<double> omega_rabi,
                           const hilbert::DensityMatrix& rho0, const params::DeviceParams& p,
                           dynamics::Frame frame = dynamics::Frame::rotating,
                           double trace_dt = 0.0,
                           const dynamics::EvolveOptions& opt = {});

// Convenience form that builds the context itself.
ResetResult simulate_reset(double V_b, double tau_reset, double g_rabi,
                           std::optional<double> omega_rabi,
                           const hilbert::DensityMatrix& rho0, const params::DeviceParams& p);

// ---------------------------------------------------------------------------
// Reset sweep.
// ---------------------------------------------------------------------------

struct SweepCell {
    double residual_pe = 0.0;
    double residual_pf = 0.0;
    bool ok = false;
    std::string error;  // empty when ok
};

struct SweepGrid {
    std::vector<double> bias_ratios;  // eV_b / (2 Delta)
    std::vector<double> tau;          // s
    std::vector<std::vector<SweepCell>> cells;  // [bias][tau]
    std::vector<double> omega_used;             // rad/s, per bias
    std::vector<double> kappa_eff;              // 1/s, per bias
    std::vector<double> tau99;  // s, per bias; NaN when the 1% line is never crossed
    double g_rabi = 0.0;
    bool omega_from_rule = true;  // false when an explicit amplitude was given
    double omega_explicit = 0.0;
    std::string initial_state_label;
    int failed_cells = 0;
};

// Residual excited population over a bias x duration grid. Cells failing
// validation or integration are flagged and the sweep continues; failed_cells
// counts them. tau = 0 cells report the initial populations without evolving.
// jobs > 1 distributes per-bias setup and cells over a worker pool; results
// are identical to the single-threaded run.
SweepGrid reset_sweep(const std::vector<double>& bias_ratios, const std::vector<double>& tau_grid,
                      double g_rabi, std::optional<double> omega_rabi,
                      const hilbert::DensityMatrix& rho0, const params::DeviceParams& p,
                      int jobs = 1);

// ---------------------------------------------------------------------------
// Ringdown.
// ---------------------------------------------------------------------------

// Amplitude ratio of a classical ringdown across a measurement window of
// length dt_ab containing one flat-top QCR pulse: plateau rate over the flat
// section, an effective edge rate over rise + fall, base decay over the whole
// window. Pure closed form; the synthetic-data generator for round-trips.
double ringdown_ratio(double delta_gamma, double delta_gamma_edges, double kappa_r, double tau,
                      double t_rise, double t_fall, double dt_ab);

struct RingdownFit {
    double delta_gamma = 0.0;  // -2 x slope of ln ratio vs tau
    double delta_gamma_sigma = 0.0;
    double intercept = 0.0;  // ln ratio extrapolated to tau = 0
    double intercept_sigma = 0.0;
    double kappa_from_intercept = 0.0;  // -2 x intercept / dt_ab; kappa_r when V_b = 0
    double fit_residual_norm = 0.0;
};

// Line fit of ln(ratio) against tau. Throws NumericalError when the recovered
// delta_gamma is below -3 sigma (strong heating is outside the model) or when
// any ratio is not positive.
RingdownFit fit_ringdown(const std::vector<double>& tau, const std::vector<double>& ratio,
                         double dt_ab);

struct RingdownResult {
    std::vector<double> tau;    // s
    std::vector<double> ratio;  // A_after / A_before
    double dt_ab = 0.0;
    RingdownFit fit;
};

// Simulated ringdown at one bias: the resonator amplitude obeys
// d<a>/dt = -kappa_eff(t)/2 <a> with kappa_eff = kappa_r plus the
// photon-assisted rate at the instantaneous bias inside the pulse support,
// and plain kappa_r outside it. Needs at least two pulse lengths, each within
// [rise + fall, dt_ab].
RingdownResult ringdown(double V_b, const std::vector<double>& tau_list,
                        const params::DeviceParams& p, double dt_ab = 200e-9);

// ---------------------------------------------------------------------------
// kappa_eff bias sweep.
// ---------------------------------------------------------------------------

struct KappaSweepPoint {
    double bias_ratio = 0.0;  // eV_b / (2 Delta)
    double gamma_down = 0.0;
    double gamma_up = 0.0;
    double delta_gamma = 0.0;
    double kappa_eff_theory = 0.0;
    double kappa_eff_ringdown = 0.0;  // kappa_r from the zero-bias intercept + fitted delta_gamma
};

struct KappaSweepResult {
    std::vector<KappaSweepPoint> points;
    double kappa_r_extracted = 0.0;
};

// Theory curve from the rate integrals plus a ringdown-extracted curve at
// every bias. Ratios must lie in [0, 2.2]. tau_list empty picks a default
// ladder of pulse lengths.
KappaSweepResult kappa_sweep(const std::vector<double>& bias_ratios,
                             const params::DeviceParams& p,
                             std::vector<double> tau_list = {}, double dt_ab = 200e-9,
                             int jobs = 1);

// ---------------------------------------------------------------------------
// Residual-population measurement.
// ---------------------------------------------------------------------------

// Ideal preparation gates as qubit unitaries (resonator untouched): pi_ge and
// pi_ef swap the level pair, two_pi_ef is a full rotation (populations fixed).
hilbert::DensityMatrix apply_prep_gate(const hilbert::DensityMatrix& rho, pulses::PrepGate gate);

struct RpmAmplitudes {
    double a1 = 0.0;  // pi_ge then pi_ef
    double a2 = 0.0;  // pi_ge then two_pi_ef
    double b1 = 0.0;  // pi_ef
    double b2 = 0.0;  // two_pi_ef
    bool p_f_warning = false;  // initial P_f above 5%
};

// Runs the four gate sequences on copies of rho and reads out each final
// state. The readout projects onto {g, f}: the e-f Rabi contrast then carries
// P_e - P_f in the b pair and P_g - P_f in the a pair, so the estimator below
// is exact for any readout gain and offset.
RpmAmplitudes simulate_rpm(const hilbert::DensityMatrix& rho);

struct RpmEstimate {
    double P_e = 0.0;
    bool out_of_range = false;  // raw estimate fell outside [0, 1] before clamping
};

// P_e = (b1 - b2) / ((b1 - b2) + (a1 - a2)), clamped to [0, 1]. Throws
// NumericalError when the denominator vanishes (degenerate measurement).
RpmEstimate rpm_estimate(double a1, double a2, double b1, double b2);

// ---------------------------------------------------------------------------
// T1.
// ---------------------------------------------------------------------------

// Free decay of |e, 0> with drives and QCR off and the coupling removed: the
// measured T1 and thermal occupancy already absorb the resonator exchange, so
// the undriven hold runs on bare qubit channels only.
dynamics::PopulationTrace t1_trace(const params::DeviceParams& p, double t_max, int n_samples);

// Same channel set, arbitrary hold from the thermal state.
dynamics::PopulationTrace thermal_hold(const params::DeviceParams& p, double t_max,
                                       int n_samples);

// Stationary qubit populations of the undriven channel set.
double steady_state_pe(const params::DeviceParams& p);

struct T1Fit {
    double T1 = 0.0;  // s
    double T1_sigma = 0.0;
    double P_inf = 0.0;
    double P_inf_sigma = 0.0;
    double P0 = 0.0;
    double residual_norm = 0.0;
    bool degenerate = false;  // flat trace, relaxation time unidentifiable
};

// Least-squares fit of P_e(t) = P_inf + (P0 - P_inf) exp(-t / T1). A flat
// trace is returned with the degenerate flag instead of a fit; a
// non-convergent fit throws FitError carrying the residual norm.
T1Fit t1_fit(const dynamics::PopulationTrace& trace);

// ---------------------------------------------------------------------------
// Current-voltage fitting.
// ---------------------------------------------------------------------------

struct IvSample {
    double V = 0.0;  // volts
    double I = 0.0;  // amperes
};

struct IvFit {
    qcr::JunctionParams params;  // fitted R_T, Delta, T_N, gamma_D
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::Vector4d sigmas = Eigen::Vector4d::Zero();  // relative, order R_T, Delta, T_N, gamma_D
    std::array<bool, 4> unidentifiable{};              // same order
};

// Nonlinear least squares of the tunneling current against (V, I) samples,
// relative-weighted so the subgap leakage keeps leverage on gamma_D. Needs at
// least 20 samples. Parameters that the data cannot constrain (near-null
// Jacobian directions) are flagged rather than guessed.
IvFit fit_iv(const std::vector<IvSample>& data, const qcr::JunctionParams& guess);

// Synthetic samples on a symmetric voltage grid, for round-trips and the CLI.
std::vector<IvSample> synth_iv(const qcr::JunctionParams& jp, double v_max, int n_points);

// ---------------------------------------------------------------------------
// Fidelity estimate.
// ---------------------------------------------------------------------------

// Stationary ground-state occupation of the driven cascade,
// (Gamma_down + kappa_eff/3) / (Gamma_up + Gamma_down + kappa_eff/3).
double fidelity_estimate(double Gamma_up_q, double Gamma_down_q, double kappa_eff);

}  // namespace qcr::protocols
