#include "qcr/pulses.hpp"

#include <cmath>

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"

namespace qcr::pulses {

namespace {

// half-width of a truncated Gaussian segment, in units of sigma
const double kTailSigmas = std::sqrt(-2.0 * std::log(kEnvelopeTruncation));

double gaussian_edge(double dt, double sigma) { return std::exp(-dt * dt / (2.0 * sigma * sigma)); }

}  // namespace

double envelope(const FlatTopPulse& p, double t) {
    if (p.amplitude == 0.0) return 0.0;
    const double plateau_lo = p.t_start + p.t_rise;
    const double plateau_hi = p.t_start + p.tau - p.t_fall;
    if (t >= plateau_lo && t <= plateau_hi) return p.amplitude;

    if (t < plateau_lo) {
        if (p.t_rise <= 0.0) return 0.0;
        const double sigma = p.t_rise / 2.0;
        if (plateau_lo - t >= kTailSigmas * sigma) return 0.0;
        return p.amplitude * gaussian_edge(plateau_lo - t, sigma);
    }
    if (p.t_fall <= 0.0) return 0.0;
    const double sigma = p.t_fall / 2.0;
    if (t - plateau_hi >= kTailSigmas * sigma) return 0.0;
    return p.amplitude * gaussian_edge(t - plateau_hi, sigma);
}

double effective_flat_duration(const FlatTopPulse& p) {
    const double flat = p.tau - p.t_rise - p.t_fall;
    if (flat < 0.0)
        throw ValidationError("pulse: tau shorter than rise plus fall");
    return flat;
}

void envelope_support(const FlatTopPulse& p, double& t_lo, double& t_hi) {
    t_lo = p.t_start + p.t_rise - kTailSigmas * (p.t_rise / 2.0);
    t_hi = p.t_start + p.tau - p.t_fall + kTailSigmas * (p.t_fall / 2.0);
}

PulseSchedule reset_schedule(double tau_reset, double V_b, double g_rabi, double omega_rabi,
                             const std::vector<PrepGate>& prep, double t_rise, double t_fall) {
    if (tau_reset < 5e-9)
        throw ValidationError("reset_schedule: tau_reset must be at least 5 ns");

    PulseSchedule s;
    s.ef_drive = {omega_rabi, 0.0, tau_reset, t_rise, t_fall, 0.0};
    s.f0g1_drive = {g_rabi, 0.0, tau_reset, t_rise, t_fall, 0.0};
    s.qcr_bias = {V_b, 0.0, tau_reset, t_rise, t_fall, 0.0};
    s.t_end = tau_reset;

    double t = -1e-9 * static_cast<double>(prep.size());
    for (PrepGate g : prep) {
        s.prep_gates.push_back({g, t});
        t += 1e-9;
    }
    return s;
}

double bias_from_ratio(double ratio, double Delta) {
    if (ratio < 0.0)
        throw ValidationError("bias_from_ratio: ratio must be nonnegative");
    return ratio * 2.0 * Delta / consts::e_charge;
}

}  // namespace qcr::pulses
