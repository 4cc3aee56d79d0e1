#pragma once

#include <vector>

namespace qcr::pulses {

// Flat-top envelope with Gaussian rise/fall segments, sigma = t_rise / 2.
// The plateau spans [t_start + t_rise, t_start + tau - t_fall]; the Gaussian
// tails continue past [t_start, t_start + tau] and are truncated where they
// reach 1e-6 of the amplitude.
struct FlatTopPulse {
    double amplitude = 0.0;  // rad/s for drives, V for the bias channel
    double t_start = 0.0;    // s
    double tau = 0.0;        // full pulse length, s
    double t_rise = 2.5e-9;
    double t_fall = 2.5e-9;
    double carrier_detuning = 0.0;  // rad/s, 0 when resonant
};

inline constexpr double kEnvelopeTruncation = 1e-6;

double envelope(const FlatTopPulse& p, double t);

// tau - t_rise - t_fall; throws ValidationError when negative.
double effective_flat_duration(const FlatTopPulse& p);

// [t_lo, t_hi] outside of which the envelope is identically zero.
void envelope_support(const FlatTopPulse& p, double& t_lo, double& t_hi);

enum class PrepGate { pi_ge, pi_ef, two_pi_ef };

struct TimedGate {
    PrepGate gate;
    double t = 0.0;
};

struct PulseSchedule {
    FlatTopPulse ef_drive;    // Omega channel
    FlatTopPulse f0g1_drive;  // g channel
    FlatTopPulse qcr_bias;    // V_b channel
    std::vector<TimedGate> prep_gates;
    double t_end = 0.0;
};

// Three co-timed flat-top pulses of length tau_reset starting at t = 0, with
// preparation gates placed before the window. Requires tau_reset >= 5 ns.
PulseSchedule reset_schedule(double tau_reset, double V_b, double g_rabi, double omega_rabi,
                             const std::vector<PrepGate>& prep = {}, double t_rise = 2.5e-9,
                             double t_fall = 2.5e-9);

// Bias voltage for a given eV_b / (2 Delta) ratio.
double bias_from_ratio(double ratio, double Delta);

}  // namespace qcr::pulses
