#include "qcr/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <thread>

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"
#include "qcr/numerics.hpp"

namespace qcr::protocols {

namespace {

using hilbert::DensityMatrix;

void run_pool(int jobs, size_t n, const std::function<void(size_t)>& task) {
    jobs = std::max(1, jobs);
    const size_t nt = std::min<size_t>(static_cast<size_t>(jobs), n);
    if (nt <= 1) {
        for (size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            task(i);
        }
    };
    std::vector<std::thread> pool;
    for (size_t k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

pulses::PulseSchedule idle_schedule() { return pulses::PulseSchedule{}; }

dynamics::HamiltonianModel bare_qubit_model(const params::DeviceParams& p) {
    auto m = dynamics::model_from_params(p, dynamics::Frame::rotating, 0.0, 0.0);
    m.lambda_c = 0.0;
    return m;
}

}  // namespace

OptimalDrive optimal_drive(double g_rabi, double kappa) {
    if (!(g_rabi > 0.0) || !(kappa > 0.0))
        throw ValidationError("optimal_drive: g and kappa must be positive");
    const double disc = 18.0 * g_rabi * g_rabi - kappa * kappa;
    if (disc < 0.0)
        throw NumericalError("optimal_drive: 18 g^2 < kappa^2, amplitude would be imaginary");
    OptimalDrive out;
    out.omega = std::sqrt(disc) / 6.0;
    const double g_threshold = std::sqrt(2.0 / 27.0) * kappa;
    if (std::abs(g_rabi - g_threshold) <= 1e-12 * kappa)
        out.validity = DriveValidity::boundary;
    else if (g_rabi < g_threshold)
        out.validity = DriveValidity::violated;
    return out;
}

Spectrum dressed_spectrum(const params::DeviceParams& p) {
    const auto model = dynamics::model_from_params(p, dynamics::Frame::literal, 0.0, 0.0);
    const Eigen::MatrixXcd H = dynamics::hamiltonian_matrix(model, idle_schedule(), 0.0);
    const auto es = numerics::hermitian_eigen(H);

    const int d = model.dims.dim();
    std::vector<int> level_of_basis(d, -1);
    std::vector<bool> taken(d, false);
    for (int k = 0; k < d; ++k) {
        int best = 0;
        double w = 0.0;
        for (int i = 0; i < d; ++i) {
            const double a = std::norm(es.vectors(i, k));
            if (a > w) {
                w = a;
                best = i;
            }
        }
        if (taken[best])
            throw NumericalError("dressed_spectrum: ambiguous level labeling near basis index " +
                                 std::to_string(best));
        taken[best] = true;
        level_of_basis[best] = k;
    }

    const auto& dims = model.dims;
    const double e_ground_dressed = es.values(level_of_basis[dims.index(0, 0)]);
    const double e_ground_bare = H(dims.index(0, 0), dims.index(0, 0)).real();

    Spectrum out;
    out.levels.resize(d);
    for (int q = 0; q < 3; ++q)
        for (int m = 0; m < dims.n_fock; ++m) {
            const int i = dims.index(q, m);
            out.levels[i] = {q, m, H(i, i).real() - e_ground_bare,
                             es.values(level_of_basis[i]) - e_ground_dressed};
        }
    auto dressed = [&](int q, int m) { return out.levels[dims.index(q, m)].dressed; };
    auto bare = [&](int q, int m) { return out.levels[dims.index(q, m)].bare; };
    out.omega_ge_bare = bare(1, 0);
    out.omega_ge_dressed = dressed(1, 0);
    out.omega_ef_bare = bare(2, 0) - bare(1, 0);
    out.omega_ef_dressed = dressed(2, 0) - dressed(1, 0);
    out.omega_f0g1_bare = bare(2, 0) - bare(0, 1);
    out.omega_f0g1_dressed = dressed(2, 0) - dressed(0, 1);
    return out;
}

ResetContext make_reset_context(double V_b, const params::DeviceParams& p, int table_points) {
    if (V_b < 0.0) throw ValidationError("make_reset_context: negative bias");
    ResetContext ctx;
    ctx.derived = params::derive(p);
    ctx.junction = qcr::junction_from_device(p, ctx.derived);
    ctx.V_b = V_b;
    if (V_b > 0.0) {
        ctx.table = qcr::QcrRateTable(ctx.junction, p.omega_r, V_b, table_points);
        ctx.kappa_eff_plateau = qcr::kappa_eff(V_b, p.omega_r, ctx.junction, p.kappa_r);
    } else {
        ctx.kappa_eff_plateau = p.kappa_r;
    }
    const Spectrum sp = dressed_spectrum(p);
    ctx.carrier_ef = sp.omega_ef_dressed;
    ctx.carrier_f0g1 = sp.omega_f0g1_dressed;
    return ctx;
}

ResetResult simulate_reset(const ResetContext& ctx, double tau_reset, double g_rabi,
                           std::optional<double> omega_rabi, const DensityMatrix& rho0,
                           const params::DeviceParams& p, dynamics::Frame frame,
                           double trace_dt, const dynamics::EvolveOptions& opt) {
    ResetResult out;
    out.kappa_eff_plateau = ctx.kappa_eff_plateau;
    if (omega_rabi) {
        out.omega_used = *omega_rabi;
        if (out.omega_used < 0.0)
            throw ValidationError("simulate_reset: negative drive amplitude");
    } else {
        const OptimalDrive od = optimal_drive(g_rabi, ctx.kappa_eff_plateau);
        out.omega_used = od.omega;
        out.drive_validity = od.validity;
    }

    const auto schedule = pulses::reset_schedule(tau_reset, ctx.V_b, g_rabi, out.omega_used);
    auto model = dynamics::model_from_params(p, frame, ctx.carrier_ef, ctx.carrier_f0g1);
    const auto diss = dynamics::dissipators_from_params(p, ctx.derived,
                                                        ctx.table.empty() ? nullptr : &ctx.table);

    double lo = 0.0, hi = tau_reset;
    bool any = false;
    for (const auto* pulse : {&schedule.ef_drive, &schedule.f0g1_drive, &schedule.qcr_bias}) {
        if (pulse->amplitude == 0.0) continue;
        double a = 0.0, b = 0.0;
        pulses::envelope_support(*pulse, a, b);
        lo = any ? std::min(lo, a) : a;
        hi = any ? std::max(hi, b) : b;
        any = true;
    }
    const double dt = trace_dt > 0.0 ? trace_dt : 1e-9;
    const int n = std::clamp(static_cast<int>(std::ceil((hi - lo) / dt)) + 1, 41, 4001);

    out.trace = dynamics::evolve(rho0, model, diss, schedule, linspace(lo, hi, n), opt);
    out.residual_pe = out.trace.samples.back().P_e;
    out.residual_pf = out.trace.samples.back().P_f;
    return out;
}

ResetResult simulate_reset(double V_b, double tau_reset, double g_rabi,
                           std::optional<double> omega_rabi, const DensityMatrix& rho0,
                           const params::DeviceParams& p) {
    return simulate_reset(make_reset_context(V_b, p), tau_reset, g_rabi, omega_rabi, rho0, p);
}

SweepGrid reset_sweep(const std::vector<double>& bias_ratios, const std::vector<double>& tau_grid,
                      double g_rabi, std::optional<double> omega_rabi,
                      const DensityMatrix& rho0, const params::DeviceParams& p, int jobs) {
    if (bias_ratios.empty() || tau_grid.empty())
        throw ValidationError("reset_sweep: empty grid axis");

    const size_t nb = bias_ratios.size();
    const size_t nt = tau_grid.size();
    SweepGrid grid;
    grid.bias_ratios = bias_ratios;
    grid.tau = tau_grid;
    grid.cells.assign(nb, std::vector<SweepCell>(nt));
    grid.omega_used.assign(nb, std::numeric_limits<double>::quiet_NaN());
    grid.kappa_eff.assign(nb, std::numeric_limits<double>::quiet_NaN());
    grid.tau99.assign(nb, std::numeric_limits<double>::quiet_NaN());
    grid.g_rabi = g_rabi;
    grid.omega_from_rule = !omega_rabi.has_value();
    grid.omega_explicit = omega_rabi.value_or(0.0);

    const auto pops0 = hilbert::populations(rho0);
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, "P_g=%.6g P_e=%.6g P_f=%.6g", pops0.P_g, pops0.P_e,
                      pops0.P_f);
        grid.initial_state_label = buf;
    }

    std::vector<ResetContext> ctxs(nb);
    std::vector<std::string> ctx_errors(nb);
    run_pool(jobs, nb, [&](size_t i) {
        try {
            ctxs[i] = make_reset_context(pulses::bias_from_ratio(bias_ratios[i], p.Delta), p);
        } catch (const std::exception& e) {
            ctx_errors[i] = e.what();
        }
    });

    run_pool(jobs, nb * nt, [&](size_t flat) {
        const size_t i = flat / nt;
        const size_t j = flat % nt;
        SweepCell& cell = grid.cells[i][j];
        if (!ctx_errors[i].empty()) {
            cell.error = ctx_errors[i];
            return;
        }
        try {
            if (tau_grid[j] == 0.0) {
                cell.residual_pe = pops0.P_e;
                cell.residual_pf = pops0.P_f;
            } else {
                const auto r =
                    simulate_reset(ctxs[i], tau_grid[j], g_rabi, omega_rabi, rho0, p);
                cell.residual_pe = r.residual_pe;
                cell.residual_pf = r.residual_pf;
            }
            if (cell.residual_pe < -1e-7 || cell.residual_pe > 1.0 + 1e-7)
                throw NumericalError("residual population outside [0, 1]");
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    for (size_t i = 0; i < nb; ++i) {
        if (!ctx_errors[i].empty()) continue;
        grid.kappa_eff[i] = ctxs[i].kappa_eff_plateau;
        grid.omega_used[i] =
            omega_rabi ? *omega_rabi : optimal_drive(g_rabi, ctxs[i].kappa_eff_plateau).omega;

        const auto& row = grid.cells[i];
        for (size_t j = 0; j < nt; ++j) {
            if (!row[j].ok) continue;
            if (row[j].residual_pe < 0.01) {
                if (j == 0 || !row[j - 1].ok || row[j - 1].residual_pe < 0.01) {
                    grid.tau99[i] = tau_grid[j];
                } else {
                    const double r0 = std::max(row[j - 1].residual_pe, 1e-300);
                    const double r1 = std::max(row[j].residual_pe, 1e-300);
                    const double f = (std::log(0.01) - std::log(r0)) / (std::log(r1) - std::log(r0));
                    grid.tau99[i] = tau_grid[j - 1] + f * (tau_grid[j] - tau_grid[j - 1]);
                }
                break;
            }
        }
    }
    for (const auto& row : grid.cells)
        for (const auto& c : row)
            if (!c.ok) ++grid.failed_cells;
    return grid;
}

double ringdown_ratio(double delta_gamma, double delta_gamma_edges, double kappa_r, double tau,
                      double t_rise, double t_fall, double dt_ab) {
    return std::exp(-0.5 * (delta_gamma * (tau - t_rise - t_fall) +
                            delta_gamma_edges * (t_rise + t_fall) + kappa_r * dt_ab));
}

RingdownFit fit_ringdown(const std::vector<double>& tau, const std::vector<double>& ratio,
                         double dt_ab) {
    if (tau.size() != ratio.size() || tau.size() < 2)
        throw ValidationError("fit_ringdown: need at least two (tau, ratio) pairs");
    if (!(dt_ab > 0.0)) throw ValidationError("fit_ringdown: dt_ab must be positive");
    std::vector<double> lr(ratio.size());
    for (size_t i = 0; i < ratio.size(); ++i) {
        if (!(ratio[i] > 0.0))
            throw NumericalError("fit_ringdown: non-positive amplitude ratio at index " +
                                 std::to_string(i));
        lr[i] = std::log(ratio[i]);
    }
    const auto line = numerics::fit_line(tau, lr);
    RingdownFit out;
    out.delta_gamma = -2.0 * line.slope;
    out.delta_gamma_sigma = 2.0 * line.slope_sigma;
    out.intercept = line.intercept;
    out.intercept_sigma = line.intercept_sigma;
    out.kappa_from_intercept = -2.0 * line.intercept / dt_ab;
    out.fit_residual_norm = line.residual_norm;

    const double scale = std::abs(out.delta_gamma) + std::abs(out.kappa_from_intercept);
    if (out.delta_gamma + 3.0 * out.delta_gamma_sigma < -1e-8 * std::max(1.0, scale))
        throw NumericalError("fit_ringdown: significantly negative photon-assisted rate " +
                             std::to_string(out.delta_gamma));
    return out;
}

RingdownResult ringdown(double V_b, const std::vector<double>& tau_list,
                        const params::DeviceParams& p, double dt_ab) {
    if (V_b < 0.0) throw ValidationError("ringdown: negative bias");
    if (tau_list.size() < 2)
        throw ValidationError("ringdown: need at least two pulse lengths for the fit");

    pulses::FlatTopPulse ref;
    ref.amplitude = V_b;
    ref.t_start = 0.0;
    ref.tau = 2.0 * (ref.t_rise + ref.t_fall);
    for (double tau : tau_list) {
        if (tau < ref.t_rise + ref.t_fall)
            throw ValidationError("ringdown: pulse shorter than rise plus fall");
        if (tau > dt_ab)
            throw ValidationError("ringdown: pulse longer than the measurement window");
    }

    double dg_plateau = 0.0;
    double edge_integral = 0.0;
    if (V_b > 0.0) {
        const auto d = params::derive(p);
        const auto jp = qcr::junction_from_device(p, d);
        dg_plateau = qcr::delta_gamma(V_b, p.omega_r, jp);

        double lo = 0.0, hi = 0.0;
        pulses::envelope_support(ref, lo, hi);
        const double plateau_lo = ref.t_start + ref.t_rise;
        const double plateau_hi = ref.t_start + ref.tau - ref.t_fall;
        const auto dg_at = [&](double t) {
            return qcr::delta_gamma(pulses::envelope(ref, t), p.omega_r, jp);
        };
        numerics::QuadratureSpec spec;
        spec.rel_tol = 1e-4;
        spec.abs_tol = 1e-12;
        edge_integral = numerics::integrate(dg_at, {lo, plateau_lo}, spec).value +
                        numerics::integrate(dg_at, {plateau_hi, hi}, spec).value;
    }

    RingdownResult out;
    out.dt_ab = dt_ab;
    out.tau = tau_list;
    out.ratio.resize(tau_list.size());
    for (size_t i = 0; i < tau_list.size(); ++i) {
        const double flat = tau_list[i] - ref.t_rise - ref.t_fall;
        out.ratio[i] = std::exp(-0.5 * (p.kappa_r * dt_ab + dg_plateau * flat + edge_integral));
        if (!(out.ratio[i] > 0.0))
            throw NumericalError("ringdown: amplitude ratio underflowed to zero");
    }
    out.fit = fit_ringdown(out.tau, out.ratio, dt_ab);
    return out;
}

KappaSweepResult kappa_sweep(const std::vector<double>& bias_ratios,
                             const params::DeviceParams& p, std::vector<double> tau_list,
                             double dt_ab, int jobs) {
    if (bias_ratios.empty()) throw ValidationError("kappa_sweep: empty bias grid");
    for (double r : bias_ratios)
        if (r < 0.0 || r > 2.2)
            throw ValidationError("kappa_sweep: bias ratio outside [0, 2.2]");
    if (tau_list.empty()) tau_list = {60e-9, 100e-9, 140e-9, 180e-9};

    const auto d = params::derive(p);
    const auto jp = qcr::junction_from_device(p, d);

    KappaSweepResult out;
    out.kappa_r_extracted = ringdown(0.0, tau_list, p, dt_ab).fit.kappa_from_intercept;
    out.points.resize(bias_ratios.size());

    std::vector<std::exception_ptr> errs(bias_ratios.size());
    run_pool(jobs, bias_ratios.size(), [&](size_t i) {
        try {
            const double V_b = pulses::bias_from_ratio(bias_ratios[i], p.Delta);
            KappaSweepPoint& pt = out.points[i];
            pt.bias_ratio = bias_ratios[i];
            const auto bp = qcr::bias_point(V_b, p.omega_r, jp, p.kappa_r);
            pt.gamma_down = bp.Gamma_down;
            pt.gamma_up = bp.Gamma_up;
            pt.delta_gamma = bp.delta_gamma;
            pt.kappa_eff_theory = bp.kappa_eff;
            const auto rd = ringdown(V_b, tau_list, p, dt_ab);
            pt.kappa_eff_ringdown = out.kappa_r_extracted + rd.fit.delta_gamma;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

DensityMatrix apply_prep_gate(const DensityMatrix& rho, pulses::PrepGate gate) {
    Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
    switch (gate) {
        case pulses::PrepGate::pi_ge:
            u.setZero();
            u(0, 1) = u(1, 0) = u(2, 2) = 1.0;
            break;
        case pulses::PrepGate::pi_ef:
            u.setZero();
            u(0, 0) = u(1, 2) = u(2, 1) = 1.0;
            break;
        case pulses::PrepGate::two_pi_ef:
            u(1, 1) = -1.0;
            u(2, 2) = -1.0;
            break;
    }
    const Eigen::MatrixXcd U = hilbert::qubit_op(rho.dims, u);
    return {rho.dims, U * rho.rho * U.adjoint()};
}

RpmAmplitudes simulate_rpm(const DensityMatrix& rho) {
    const auto pops = hilbert::populations(rho);
    RpmAmplitudes out;
    out.p_f_warning = pops.P_f > 0.05;

    const auto readout = [](const DensityMatrix& s) {
        const auto q = hilbert::populations(s);
        return q.P_g + q.P_f;
    };
    const auto run = [&](std::initializer_list<pulses::PrepGate> seq) {
        DensityMatrix s = rho;
        for (auto g : seq) s = apply_prep_gate(s, g);
        return readout(s);
    };
    out.a1 = run({pulses::PrepGate::pi_ge, pulses::PrepGate::pi_ef});
    out.a2 = run({pulses::PrepGate::pi_ge, pulses::PrepGate::two_pi_ef});
    out.b1 = run({pulses::PrepGate::pi_ef});
    out.b2 = run({pulses::PrepGate::two_pi_ef});
    return out;
}

RpmEstimate rpm_estimate(double a1, double a2, double b1, double b2) {
    const double rabi_a = a1 - a2;
    const double rabi_b = b1 - b2;
    const double den = rabi_a + rabi_b;
    const double scale =
        std::max({std::abs(a1), std::abs(a2), std::abs(b1), std::abs(b2), 1e-300});
    if (std::abs(den) <= 1e-12 * scale)
        throw NumericalError("rpm_estimate: degenerate measurement, Rabi contrasts cancel");
    RpmEstimate out;
    const double raw = rabi_b / den;
    out.out_of_range = raw < 0.0 || raw > 1.0;
    out.P_e = std::clamp(raw, 0.0, 1.0);
    return out;
}

dynamics::PopulationTrace t1_trace(const params::DeviceParams& p, double t_max, int n_samples) {
    if (!(t_max > 0.0) || n_samples < 2)
        throw ValidationError("t1_trace: need a positive span and at least two samples");
    const auto model = bare_qubit_model(p);
    const auto diss = dynamics::dissipators_from_params(p, params::derive(p));
    const auto rho0 = hilbert::basis_state(model.dims, 1, 0);
    return dynamics::evolve(rho0, model, diss, idle_schedule(), linspace(0.0, t_max, n_samples));
}

dynamics::PopulationTrace thermal_hold(const params::DeviceParams& p, double t_max,
                                       int n_samples) {
    if (!(t_max > 0.0) || n_samples < 2)
        throw ValidationError("thermal_hold: need a positive span and at least two samples");
    const auto model = bare_qubit_model(p);
    const auto diss = dynamics::dissipators_from_params(p, params::derive(p));
    const auto rho0 = hilbert::thermal_state(model.dims, p.P_e_thermal);
    return dynamics::evolve(rho0, model, diss, idle_schedule(), linspace(0.0, t_max, n_samples));
}

double steady_state_pe(const params::DeviceParams& p) {
    auto model = bare_qubit_model(p);
    model.frame = dynamics::Frame::literal;
    const auto diss = dynamics::dissipators_from_params(p, params::derive(p));
    const auto ss = dynamics::steady_state(model, diss);
    return hilbert::populations(ss).P_e;
}

T1Fit t1_fit(const dynamics::PopulationTrace& trace) {
    const size_t n = trace.samples.size();
    if (n < 3) throw ValidationError("t1_fit: need at least three samples");
    std::vector<double> t(n), y(n);
    for (size_t i = 0; i < n; ++i) {
        t[i] = trace.samples[i].t;
        y[i] = trace.samples[i].P_e;
    }

    T1Fit out;
    out.P0 = y.front();
    const double ymin = *std::min_element(y.begin(), y.end());
    const double ymax = *std::max_element(y.begin(), y.end());
    if (ymax - ymin < 1e-10) {
        out.degenerate = true;
        out.P_inf = 0.5 * (ymin + ymax);
        return out;
    }

    const double span = t.back() - t.front();
    double T1_guess = span / 3.0;
    {
        const double target = y.back() + (y.front() - y.back()) / std::exp(1.0);
        const bool decreasing = y.front() > y.back();
        for (size_t i = 1; i < n; ++i) {
            if ((decreasing && y[i] <= target) || (!decreasing && y[i] >= target)) {
                T1_guess = std::max(t[i] - t.front(), span * 1e-3);
                break;
            }
        }
    }

    Eigen::VectorXd guess(3);
    guess << y.back(), y.front(), T1_guess;
    numerics::FitOptions fopt;
    fopt.lower = Eigen::Vector3d(-0.5, -0.5, span * 1e-6);
    fopt.upper = Eigen::Vector3d(1.5, 1.5, span * 1e3);
    const auto fn = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
        for (size_t i = 0; i < n; ++i)
            r[i] = q[0] + (q[1] - q[0]) * std::exp(-(t[i] - t[0]) / q[2]) - y[i];
    };
    const auto rep = numerics::nonlinear_least_squares(fn, static_cast<int>(n), guess, fopt);
    if (!rep.converged)
        throw FitError("t1_fit: no convergence after " + std::to_string(rep.iterations) +
                       " iterations, residual " + std::to_string(rep.residual_norm));
    out.P_inf = rep.params[0];
    out.P0 = rep.params[1];
    out.T1 = rep.params[2];
    out.residual_norm = rep.residual_norm;
    if (rep.param_sigmas.size() == 3) {
        out.P_inf_sigma = rep.param_sigmas[0];
        out.T1_sigma = rep.param_sigmas[2];
    }
    out.degenerate = std::abs(out.P0 - out.P_inf) < 1e-9 || rep.jacobian_cond > 1e12;
    return out;
}

IvFit fit_iv(const std::vector<IvSample>& data, const qcr::JunctionParams& guess) {
    if (data.size() < 20)
        throw ValidationError("fit_iv: need at least 20 samples across the gap");
    if (!(guess.R_T > 0.0) || !(guess.Delta > 0.0) || !(guess.T_N > 0.0) ||
        !(guess.gamma_D > 0.0))
        throw ValidationError("fit_iv: guess must have positive R_T, Delta, T_N, gamma_D");

    double i_max = 0.0;
    for (const auto& s : data) i_max = std::max(i_max, std::abs(s.I));
    if (!(i_max > 0.0)) throw ValidationError("fit_iv: all currents are zero");
    const double floor = 1e-6 * i_max;
    std::vector<double> w(data.size());
    for (size_t i = 0; i < data.size(); ++i) w[i] = std::max(std::abs(data[i].I), floor);

    const double R0 = guess.R_T, D0 = guess.Delta, T0 = guess.T_N;
    const auto junction_at = [&](const Eigen::VectorXd& x) {
        qcr::JunctionParams jp;
        jp.R_T = R0 * x[0];
        jp.Delta = D0 * x[1];
        jp.T_N = T0 * x[2];
        jp.gamma_D = std::pow(10.0, x[3]);
        return jp;
    };
    const auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        const auto jp = junction_at(x);
        for (size_t i = 0; i < data.size(); ++i)
            r[static_cast<int>(i)] = (qcr::iv_current(data[i].V, jp) - data[i].I) / w[i];
    };

    Eigen::VectorXd x0(4);
    x0 << 1.0, 1.0, 1.0, std::log10(guess.gamma_D);
    numerics::FitOptions fopt;
    fopt.lower = Eigen::Vector4d(1e-2, 1e-2, 1e-2, -12.0);
    fopt.upper = Eigen::Vector4d(1e2, 1e2, 1e2, std::log10(0.5));
    const auto rep =
        numerics::nonlinear_least_squares(fn, static_cast<int>(data.size()), x0, fopt);

    IvFit out;
    out.params = junction_at(rep.params);
    out.residual_norm = rep.residual_norm;
    out.iterations = rep.iterations;
    out.converged = rep.converged;
    if (rep.param_sigmas.size() == 4) {
        out.sigmas[0] = rep.param_sigmas[0];
        out.sigmas[1] = rep.param_sigmas[1];
        out.sigmas[2] = rep.param_sigmas[2];
        out.sigmas[3] = std::log(10.0) * rep.param_sigmas[3];
    }
    if (!out.converged)
        throw FitError("fit_iv: no convergence after " + std::to_string(rep.iterations) +
                       " iterations, residual " + std::to_string(rep.residual_norm) +
                       ", best R_T = " + std::to_string(out.params.R_T) +
                       ", Delta = " + std::to_string(out.params.Delta / consts::ueV) + " ueV");

    // rank check at the solution: flag parameters the data cannot move
    Eigen::MatrixXd J(data.size(), 4);
    Eigen::VectorXd r0(data.size()), r1(data.size());
    fn(rep.params, r0);
    for (int j = 0; j < 4; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(rep.params[j]));
        Eigen::VectorXd xp = rep.params;
        xp[j] += h;
        fn(xp, r1);
        J.col(j) = (r1 - r0) / h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(0) > 0.0) {
        for (int k = 0; k < 4; ++k) {
            if (sv(k) >= 1e-6 * sv(0)) continue;
            for (int j = 0; j < 4; ++j)
                if (std::abs(svd.matrixV()(j, k)) > 0.5) out.unidentifiable[j] = true;
        }
    } else {
        out.unidentifiable = {true, true, true, true};
    }
    return out;
}

std::vector<IvSample> synth_iv(const qcr::JunctionParams& jp, double v_max, int n_points) {
    if (!(v_max > 0.0) || n_points < 2)
        throw ValidationError("synth_iv: need a positive range and at least two points");
    std::vector<IvSample> out(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double V = -v_max + 2.0 * v_max * static_cast<double>(i) / (n_points - 1);
        out[i] = {V, qcr::iv_current(V, jp)};
    }
    return out;
}

double fidelity_estimate(double Gamma_up_q, double Gamma_down_q, double kappa_eff) {
    if (Gamma_up_q < 0.0 || Gamma_down_q < 0.0 || kappa_eff < 0.0)
        throw ValidationError("fidelity_estimate: rates must be nonnegative");
    if (std::isinf(kappa_eff)) return 1.0;
    const double pump = kappa_eff / 3.0 + Gamma_down_q;
    const double total = pump + Gamma_up_q;
    if (!(total > 0.0)) throw ValidationError("fidelity_estimate: all rates vanish");
    return pump / total;
}

}  // namespace qcr::protocols
