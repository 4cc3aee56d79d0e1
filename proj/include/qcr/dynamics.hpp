#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qcr/hilbert.hpp"
#include "qcr/numerics.hpp"
#include "qcr/params.hpp"
#include "qcr/pulses.hpp"
#include "qcr/qcr.hpp"

namespace qcr::dynamics {

// Two interchangeable pictures for the same physics. The literal frame keeps
// absolute level energies and explicit carrier phases on the drives; the
// rotating frame moves each basis level by eps_q + m*omega_bar chosen so both
// active drive terms become static, which leaves the qubit-resonator coupling
// and the off-resonant drive leg as explicitly phased terms. Populations are
// identical in both frames; only integration cost differs.
enum class Frame { literal, rotating };

struct HamiltonianModel {
    hilbert::SpaceDims dims;
    Frame frame = Frame::rotating;
    double omega_r = 0.0;    // rad/s
    double omega_ge = 0.0;   // rad/s
    double alpha = 0.0;      // rad/s, negative
    double lambda_c = 0.0;   // rad/s
    double detuning_r = 0.0;
    double detuning_q = 0.0;
    double carrier_ef = 0.0;    // absolute drive carrier (rad/s); 0 = channel unused
    double carrier_f0g1 = 0.0;  // absolute drive carrier (rad/s); 0 = channel unused
};

HamiltonianModel model_from_params(const params::DeviceParams& p, Frame frame,
                                   double carrier_ef, double carrier_f0g1);

// Lindblad channel coefficients. Channels with zero rate are skipped. The
// dephasing inputs are coherence decay rates: the generator applies
// (rate/2) D[z] with z the +-1 diagonal so that the off-diagonal element
// decays at exactly the given rate.
struct DissipatorSet {
    double kappa_r = 0.0;
    double N_tr = 0.0;
    double gamma_ge = 0.0;
    double n_th = 0.0;
    double gamma_ef = 0.0;
    double n_th_ef = 0.0;
    double gamma_phi_ge = 0.0;
    double gamma_phi_ef = 0.0;
    double gamma_T_ge = 0.0;
    double gamma_T_ef = 0.0;
    double N_T_q = 0.0;
    // Photon-assisted tunneling rates vs bias fraction; null = QCR channel off.
    // The instantaneous bias follows the schedule's qcr_bias envelope.
    const qcr::QcrRateTable* qcr_table = nullptr;
};

DissipatorSet dissipators_from_params(const params::DeviceParams& p,
                                      const params::DerivedParams& d,
                                      const qcr::QcrRateTable* table = nullptr);

struct TraceSample {
    double t = 0.0;
    double P_g = 0.0, P_e = 0.0, P_f = 0.0;
    double n_mean = 0.0;
    double trace_err = 0.0;
    double herm_err = 0.0;
    double min_eig = 0.0;
};

struct PopulationTrace {
    std::vector<TraceSample> samples;
    hilbert::DensityMatrix final_state;
    numerics::OdeStats stats;
};

struct EvolveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    bool fixed_step_rk4 = false;  // cross-check mode
    double rk4_dt = 0.0;          // required when fixed_step_rk4
};

// Dense H(t) in the model's frame, drives included at their scheduled
// envelopes. Hermitian by construction; exposed for spectra and tests.
Eigen::MatrixXcd hamiltonian_matrix(const HamiltonianModel& model,
                                    const pulses::PulseSchedule& schedule, double t);

// Integrates rho' = -i[H(t), rho] + sum of dissipators over
// [t_grid.front(), t_grid.back()], sampling populations at each grid time.
// Preparation gate markers in the schedule are not integrated here; callers
// apply them to rho0 beforehand. Throws NumericalError when trace, hermiticity
// or positivity bounds are breached at a sample.
PopulationTrace evolve(const hilbert::DensityMatrix& rho0, const HamiltonianModel& model,
                       const DissipatorSet& diss, const pulses::PulseSchedule& schedule,
                       const std::vector<double>& t_grid, const EvolveOptions& opt = {});

// Null space of the static Liouvillian (drives off; QCR rates at the given
// bias fraction). The singular-value problem is solved on the unit-normalized
// generator, so the 1e-10 residual bound is scale-free. Throws NumericalError
// when the null space is degenerate, reporting its dimension.
hilbert::DensityMatrix steady_state(const HamiltonianModel& model, const DissipatorSet& diss,
                                    double bias_fraction = 0.0);

// Runs the schedule in both frames and returns the maximum deviation of
// P_g, P_e, P_f over the grid. Throws NumericalError above the threshold.
double frame_equivalence_check(const hilbert::DensityMatrix& rho0,
                               const HamiltonianModel& model, const DissipatorSet& diss,
                               const pulses::PulseSchedule& schedule,
                               const std::vector<double>& t_grid, double threshold,
                               const EvolveOptions& opt = {});

}  // namespace qcr::dynamics
