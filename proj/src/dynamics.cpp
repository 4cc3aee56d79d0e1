#include "qcr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"

namespace qcr::dynamics {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::complex;

constexpr complex<double> kI{0.0, 1.0};

struct Trip {
    int i;
    int j;
    double v;
};

// One Hermitian Hamiltonian contribution amp(t) * (e^{i rate t} O + h.c.)
// where all elements of O share the same frame-phase rate. channel selects
// the amplitude source: 0 constant 1, 1 ef envelope, 2 f0g1 envelope.
struct PhasedOp {
    std::vector<Trip> trips;
    double rate = 0.0;
    int channel = 0;
};

struct Terms {
    VectorXd diag;  // static diagonal in the working frame (rad/s)
    std::vector<PhasedOp> ops;
    double f_max = 0.0;  // fastest phase (rad/s) for the step cap
};

double effective_carrier_ef(const HamiltonianModel& m, const pulses::PulseSchedule& s) {
    return m.carrier_ef + s.ef_drive.carrier_detuning;
}

double effective_carrier_f0g1(const HamiltonianModel& m, const pulses::PulseSchedule& s) {
    return m.carrier_f0g1 + s.f0g1_drive.carrier_detuning;
}

Terms build_terms(const HamiltonianModel& model, const pulses::PulseSchedule& schedule) {
    const auto& dims = model.dims;
    const int nf = dims.n_fock;
    const bool has_ef = schedule.ef_drive.amplitude != 0.0;
    const bool has_f0g1 = schedule.f0g1_drive.amplitude != 0.0;
    const double w1 = effective_carrier_ef(model, schedule);
    const double w2 = effective_carrier_f0g1(model, schedule);
    if (has_ef && !(w1 > 0.0))
        throw ValidationError("dynamics: active ef drive needs a positive carrier frequency");
    if (has_f0g1 && !(w2 > 0.0))
        throw ValidationError("dynamics: active f0g1 drive needs a positive carrier frequency");

    // lab-frame level energies
    const double Ee = model.omega_ge + model.detuning_q;
    const double Ef = 2.0 * (model.omega_ge + model.detuning_q) + model.alpha;
    const double wr = model.omega_r + model.detuning_r;
    const double eq[3] = {0.0, Ee, Ef};

    // rotating-frame level frequencies F(q, m) = fq[q] + m * fbar, picked so
    // every active drive term is static; unused freedoms fall back to the lab
    // energies which makes the undriven case a plain interaction picture
    double fq[3] = {0.0, 0.0, 0.0};
    double fbar = 0.0;
    if (model.frame == Frame::rotating) {
        fq[1] = Ee;
        fq[2] = has_ef ? fq[1] + w1 : Ef;
        fbar = has_f0g1 ? fq[2] - w2 : wr;
    }

    Terms out;
    out.diag.resize(dims.dim());
    for (int q = 0; q < 3; ++q)
        for (int m = 0; m < nf; ++m)
            out.diag[dims.index(q, m)] = (eq[q] + m * wr) - (fq[q] + m * fbar);

    auto add_op = [&](std::vector<Trip> trips, double rate, int channel) {
        if (trips.empty()) return;
        out.ops.push_back({std::move(trips), rate, channel});
    };

    if (model.lambda_c != 0.0) {
        std::vector<Trip> l1, l2;
        for (int m = 1; m < nf; ++m) {
            l1.push_back({dims.index(1, m - 1), dims.index(0, m), model.lambda_c * std::sqrt(m)});
            l2.push_back({dims.index(2, m - 1), dims.index(1, m),
                          model.lambda_c * std::sqrt(2.0) * std::sqrt(m)});
        }
        add_op(std::move(l1), fq[1] - fbar, 0);
        add_op(std::move(l2), fq[2] - fq[1] - fbar, 0);
    }
    if (has_ef) {
        std::vector<Trip> low, high;
        for (int m = 0; m < nf; ++m) {
            low.push_back({dims.index(1, m), dims.index(0, m), 1.0 / std::sqrt(2.0)});
            high.push_back({dims.index(2, m), dims.index(1, m), 1.0});
        }
        add_op(std::move(low), fq[1] - w1, 1);
        add_op(std::move(high), fq[2] - fq[1] - w1, 1);
    }
    if (has_f0g1) {
        std::vector<Trip> g;
        for (int m = 1; m < nf; ++m)
            g.push_back({dims.index(2, m - 1), dims.index(0, m), std::sqrt(m)});
        add_op(std::move(g), fq[2] - fbar - w2, 2);
    }

    double f = out.diag.maxCoeff() - out.diag.minCoeff();
    for (const auto& op : out.ops) f = std::max(f, std::abs(op.rate));
    out.f_max = f;
    return out;
}

struct QubitJump {
    int from;
    int to;
    double rate;
};

struct Engine {
    hilbert::SpaceDims dims;
    Terms terms;
    MatrixXcd C;        // constant elementwise part of the generator
    MatrixXd Mdown;     // per-unit-rate D[a] anticommutator factors
    MatrixXd Mup;       // per-unit-rate D[a^dag] anticommutator factors
    std::vector<QubitJump> jumps;
    double kd_const = 0.0;
    double ku_const = 0.0;
    const qcr::QcrRateTable* table = nullptr;
    pulses::FlatTopPulse bias{}, env_ef{}, env_f0g1{};
    bool has_bias = false;
    std::vector<double> sq_gain;  // sqrt((m+1)(mm+1)) lookup, (nf-1)^2

    double bias_u(double t) const {
        if (!has_bias) return 0.0;
        return pulses::envelope(bias, t) / bias.amplitude;
    }

    void rhs(double t, const MatrixXcd& rho, MatrixXcd& out) const;
};

void Engine::rhs(double t, const MatrixXcd& rho, MatrixXcd& out) const {
    const int d = dims.dim();
    const int nf = dims.n_fock;
    out = C.cwiseProduct(rho);

    double td = 0.0, tu = 0.0;
    if (table) {
        const double u = bias_u(t);
        td = table->gamma_down(u);
        tu = table->gamma_up(u);
        const double* pd = Mdown.data();
        const double* pu = Mup.data();
        const complex<double>* pr = rho.data();
        complex<double>* po = out.data();
        const int n2 = d * d;
        for (int k = 0; k < n2; ++k) po[k] += (td * pd[k] + tu * pu[k]) * pr[k];
    }

    const double gd = kd_const + td;
    const double gu = ku_const + tu;
    if (gd != 0.0) {
        for (int q = 0; q < 3; ++q)
            for (int p = 0; p < 3; ++p)
                for (int m = 0; m + 1 < nf; ++m)
                    for (int mm = 0; mm + 1 < nf; ++mm)
                        out(dims.index(q, m), dims.index(p, mm)) +=
                            gd * sq_gain[m * (nf - 1) + mm] *
                            rho(dims.index(q, m + 1), dims.index(p, mm + 1));
    }
    if (gu != 0.0) {
        for (int q = 0; q < 3; ++q)
            for (int p = 0; p < 3; ++p)
                for (int m = 1; m < nf; ++m)
                    for (int mm = 1; mm < nf; ++mm)
                        out(dims.index(q, m), dims.index(p, mm)) +=
                            gu * std::sqrt(double(m) * mm) *
                            rho(dims.index(q, m - 1), dims.index(p, mm - 1));
    }
    for (const auto& jp : jumps) {
        for (int m = 0; m < nf; ++m)
            for (int mm = 0; mm < nf; ++mm)
                out(dims.index(jp.to, m), dims.index(jp.to, mm)) +=
                    jp.rate * rho(dims.index(jp.from, m), dims.index(jp.from, mm));
    }

    for (const auto& op : terms.ops) {
        double amp = 1.0;
        if (op.channel == 1) amp = pulses::envelope(env_ef, t);
        else if (op.channel == 2) amp = pulses::envelope(env_f0g1, t);
        if (amp == 0.0) continue;
        const complex<double> z = amp * std::exp(kI * (op.rate * t));
        for (const auto& tr : op.trips) {
            const complex<double> h = z * tr.v;
            const complex<double> mih = -kI * h;
            out.row(tr.i) += mih * rho.row(tr.j);
            out.col(tr.j) -= mih * rho.col(tr.i);
            const complex<double> mihc = -kI * std::conj(h);
            out.row(tr.j) += mihc * rho.row(tr.i);
            out.col(tr.i) -= mihc * rho.col(tr.j);
        }
    }
}

Engine build_engine(const HamiltonianModel& model, const DissipatorSet& diss,
                    const pulses::PulseSchedule& schedule) {
    Engine eng;
    eng.dims = model.dims;
    eng.terms = build_terms(model, schedule);
    eng.env_ef = schedule.ef_drive;
    eng.env_f0g1 = schedule.f0g1_drive;
    eng.bias = schedule.qcr_bias;
    eng.has_bias = schedule.qcr_bias.amplitude != 0.0;
    eng.table = diss.qcr_table;

    if (eng.table && eng.has_bias) {
        const double vp = eng.table->v_plateau();
        if (std::abs(vp - eng.bias.amplitude) > 1e-9 * std::max(std::abs(vp), 1e-300))
            throw ValidationError(
                "dynamics: QCR rate table plateau does not match the bias pulse amplitude");
    }

    eng.kd_const = diss.kappa_r * (1.0 + diss.N_tr);
    eng.ku_const = diss.kappa_r * diss.N_tr;
    eng.jumps = {
        {1, 0, diss.gamma_ge * (1.0 + diss.n_th) + diss.gamma_T_ge * (1.0 + diss.N_T_q)},
        {0, 1, diss.gamma_ge * diss.n_th + diss.gamma_T_ge * diss.N_T_q},
        {2, 1, diss.gamma_ef * (1.0 + diss.n_th_ef) + diss.gamma_T_ef * (1.0 + diss.N_T_q)},
        {1, 2, diss.gamma_ef * diss.n_th_ef + diss.gamma_T_ef * diss.N_T_q},
    };
    const double deph[2] = {0.5 * diss.gamma_phi_ge, 0.5 * diss.gamma_phi_ef};
    for (double r : {eng.kd_const, eng.ku_const, deph[0], deph[1]})
        if (r < 0.0) throw ValidationError("dynamics: negative dissipator rate");
    for (const auto& jp : eng.jumps)
        if (jp.rate < 0.0) throw ValidationError("dynamics: negative dissipator rate");
    eng.jumps.erase(std::remove_if(eng.jumps.begin(), eng.jumps.end(),
                                   [](const QubitJump& j) { return j.rate == 0.0; }),
                    eng.jumps.end());

    const int d = model.dims.dim();
    const int nf = model.dims.n_fock;
    eng.C.resize(d, d);
    eng.Mdown.resize(d, d);
    eng.Mup.resize(d, d);
    // dephasing z-vectors per qubit level, coherence rates deph[c]
    const double zge[3] = {-1.0, 1.0, 0.0};
    const double zef[3] = {0.0, -1.0, 1.0};
    for (int j = 0; j < d; ++j) {
        const int qj = j / nf, mj = j % nf;
        const double wj = (mj < nf - 1) ? mj + 1.0 : 0.0;
        for (int i = 0; i < d; ++i) {
            const int qi = i / nf, mi = i % nf;
            const double wi = (mi < nf - 1) ? mi + 1.0 : 0.0;
            complex<double> c = -kI * (eng.terms.diag[i] - eng.terms.diag[j]);
            c += deph[0] * (zge[qi] * zge[qj] - 0.5 * (zge[qi] * zge[qi] + zge[qj] * zge[qj]));
            c += deph[1] * (zef[qi] * zef[qj] - 0.5 * (zef[qi] * zef[qi] + zef[qj] * zef[qj]));
            for (const auto& jp : eng.jumps)
                c -= 0.5 * jp.rate * ((qi == jp.from ? 1.0 : 0.0) + (qj == jp.from ? 1.0 : 0.0));
            eng.Mdown(i, j) = -0.5 * (mi + mj);
            eng.Mup(i, j) = -0.5 * (wi + wj);
            c += eng.kd_const * eng.Mdown(i, j) + eng.ku_const * eng.Mup(i, j);
            eng.C(i, j) = c;
        }
    }
    eng.sq_gain.resize(size_t(nf - 1) * (nf - 1));
    for (int m = 0; m + 1 < nf; ++m)
        for (int mm = 0; mm + 1 < nf; ++mm)
            eng.sq_gain[m * (nf - 1) + mm] = std::sqrt(double(m + 1) * (mm + 1));
    return eng;
}

MatrixXcd assemble_hamiltonian(const hilbert::SpaceDims& dims, const Terms& terms,
                               const pulses::FlatTopPulse& env_ef,
                               const pulses::FlatTopPulse& env_f0g1, double t) {
    MatrixXcd H = MatrixXcd::Zero(dims.dim(), dims.dim());
    H.diagonal() = terms.diag.cast<complex<double>>();
    for (const auto& op : terms.ops) {
        double amp = 1.0;
        if (op.channel == 1) amp = pulses::envelope(env_ef, t);
        else if (op.channel == 2) amp = pulses::envelope(env_f0g1, t);
        if (amp == 0.0) continue;
        const complex<double> z = amp * std::exp(kI * (op.rate * t));
        for (const auto& tr : op.trips) {
            H(tr.i, tr.j) += z * tr.v;
            H(tr.j, tr.i) += std::conj(z * tr.v);
        }
    }
    return H;
}

MatrixXcd kron(const MatrixXcd& A, const MatrixXcd& B) {
    MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace

HamiltonianModel model_from_params(const params::DeviceParams& p, Frame frame,
                                   double carrier_ef, double carrier_f0g1) {
    HamiltonianModel m;
    m.dims.n_fock = p.n_fock;
    m.frame = frame;
    m.omega_r = p.omega_r;
    m.omega_ge = p.omega_ge;
    m.alpha = p.alpha;
    m.lambda_c = p.lambda_c;
    m.detuning_r = p.detuning_r;
    m.detuning_q = p.detuning_q;
    m.carrier_ef = carrier_ef;
    m.carrier_f0g1 = carrier_f0g1;
    return m;
}

DissipatorSet dissipators_from_params(const params::DeviceParams& p,
                                      const params::DerivedParams& d,
                                      const qcr::QcrRateTable* table) {
    DissipatorSet s;
    s.kappa_r = p.kappa_r;
    s.N_tr = p.N_tr;
    s.gamma_ge = d.gamma_ge;
    s.n_th = d.n_th;
    s.gamma_ef = d.gamma_ef;
    s.n_th_ef = p.n_th_ef;
    s.gamma_phi_ge = d.gamma_phi_ge;
    s.gamma_phi_ef = d.gamma_phi_ef;
    s.gamma_T_ge = p.gamma_T_ge;
    s.gamma_T_ef = p.gamma_T_ef;
    s.N_T_q = p.N_T_q;
    s.qcr_table = table;
    return s;
}

Eigen::MatrixXcd hamiltonian_matrix(const HamiltonianModel& model,
                                    const pulses::PulseSchedule& schedule, double t) {
    const Terms terms = build_terms(model, schedule);
    return assemble_hamiltonian(model.dims, terms, schedule.ef_drive, schedule.f0g1_drive, t);
}

PopulationTrace evolve(const hilbert::DensityMatrix& rho0, const HamiltonianModel& model,
                       const DissipatorSet& diss, const pulses::PulseSchedule& schedule,
                       const std::vector<double>& t_grid, const EvolveOptions& opt) {
    if (!(rho0.dims == model.dims))
        throw ValidationError("evolve: state and model dimensions differ");
    if (t_grid.empty()) throw ValidationError("evolve: empty sample grid");
    for (size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            throw ValidationError("evolve: sample grid must be strictly increasing");

    const Engine eng = build_engine(model, diss, schedule);
    const double t0 = t_grid.front();
    const double t1 = t_grid.back();

    PopulationTrace out;
    out.samples.reserve(t_grid.size());
    out.final_state.dims = model.dims;

    size_t next = 0;
    auto record = [&](double t, const MatrixXcd& y) {
        const int d = model.dims.dim();
        const int nf = model.dims.n_fock;
        TraceSample s;
        s.t = t;
        complex<double> tr = 0.0;
        double pops[3] = {0.0, 0.0, 0.0};
        for (int i = 0; i < d; ++i) {
            const complex<double> dii = y(i, i);
            tr += dii;
            pops[i / nf] += dii.real();
            s.n_mean += (i % nf) * dii.real();
        }
        s.P_g = pops[0];
        s.P_e = pops[1];
        s.P_f = pops[2];
        s.trace_err = std::abs(tr - 1.0);
        double herm = 0.0;
        for (int j = 0; j < d; ++j)
            for (int i = 0; i <= j; ++i)
                herm = std::max(herm, std::abs(y(i, j) - std::conj(y(j, i))));
        s.herm_err = herm;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (y + y.adjoint()),
                                                    Eigen::EigenvaluesOnly);
        s.min_eig = es.eigenvalues().minCoeff();

        if (s.trace_err >= 1e-8)
            throw NumericalError("evolve: trace deviates by " + std::to_string(s.trace_err) +
                                 " at t = " + std::to_string(t));
        if (s.herm_err >= 1e-10)
            throw NumericalError("evolve: hermiticity deviates by " + std::to_string(s.herm_err) +
                                 " at t = " + std::to_string(t));
        if (s.min_eig <= -1e-7)
            throw NumericalError("evolve: negative eigenvalue " + std::to_string(s.min_eig) +
                                 " at t = " + std::to_string(t));
        out.samples.push_back(s);
        out.final_state.rho = y;
    };

    if (t_grid.size() == 1) {
        record(t0, rho0.rho);
        return out;
    }

    // stop the stepper at the sample grid and at every envelope feature so no
    // step straddles a pulse edge
    std::vector<double> stops = t_grid;
    auto add_stop = [&](double t) {
        if (!(t > t0 && t < t1)) return;
        auto it = std::lower_bound(stops.begin(), stops.end(), t);
        const double tol = 1e-12 * std::max(1.0, std::abs(t));
        if (it != stops.end() && std::abs(*it - t) <= tol) return;
        if (it != stops.begin() && std::abs(*(it - 1) - t) <= tol) return;
        stops.insert(it, t);
    };
    for (const auto* p : {&schedule.ef_drive, &schedule.f0g1_drive, &schedule.qcr_bias}) {
        if (p->amplitude == 0.0) continue;
        double lo = 0.0, hi = 0.0;
        pulses::envelope_support(*p, lo, hi);
        add_stop(lo);
        add_stop(hi);
        add_stop(p->t_start + p->t_rise);
        add_stop(p->t_start + p->tau - p->t_fall);
    }

    auto cb = [&](double t, const MatrixXcd& y) {
        if (next >= t_grid.size()) return;
        if (std::abs(t - t_grid[next]) <= 1e-12 * std::max(1.0, std::abs(t))) {
            record(t, y);
            ++next;
        }
    };
    numerics::OdeRhs rhs = [&eng](double t, const MatrixXcd& y, MatrixXcd& dydt) {
        eng.rhs(t, y, dydt);
    };

    if (opt.fixed_step_rk4) {
        if (!(opt.rk4_dt > 0.0))
            throw ValidationError("evolve: fixed-step mode needs a positive rk4_dt");
        out.stats = numerics::integrate_rk4(rhs, t0, t1, rho0.rho, opt.rk4_dt, stops, cb);
    } else {
        numerics::OdeOptions oopt;
        oopt.rel_tol = opt.rel_tol;
        oopt.abs_tol = opt.abs_tol;
        oopt.max_phase_freq = eng.terms.f_max;
        out.stats = numerics::integrate_adaptive(rhs, t0, t1, rho0.rho, stops, cb, oopt);
    }
    if (out.samples.size() != t_grid.size())
        throw NumericalError("evolve: integrator missed " +
                             std::to_string(t_grid.size() - out.samples.size()) +
                             " sample times");
    return out;
}

hilbert::DensityMatrix steady_state(const HamiltonianModel& model, const DissipatorSet& diss,
                                    double bias_fraction) {
    const auto& dims = model.dims;
    const int d = dims.dim();

    HamiltonianModel stat = model;
    stat.frame = Frame::literal;
    const pulses::PulseSchedule off{};  // zero amplitudes: static Hamiltonian
    const MatrixXcd H = hamiltonian_matrix(stat, off, 0.0);

    double gd = diss.kappa_r * (1.0 + diss.N_tr);
    double gu = diss.kappa_r * diss.N_tr;
    if (diss.qcr_table) {
        gd += diss.qcr_table->gamma_down(bias_fraction);
        gu += diss.qcr_table->gamma_up(bias_fraction);
    }

    const MatrixXcd a = hilbert::annihilation_resonator(dims);
    Eigen::Matrix3cd u;
    std::vector<std::pair<double, MatrixXcd>> channels;
    channels.emplace_back(gd, a);
    channels.emplace_back(gu, a.adjoint());
    auto qubit_unit = [&](int to, int from) {
        u.setZero();
        u(to, from) = 1.0;
        return hilbert::qubit_op(dims, u);
    };
    channels.emplace_back(diss.gamma_ge * (1.0 + diss.n_th) +
                              diss.gamma_T_ge * (1.0 + diss.N_T_q),
                          qubit_unit(0, 1));
    channels.emplace_back(diss.gamma_ge * diss.n_th + diss.gamma_T_ge * diss.N_T_q,
                          qubit_unit(1, 0));
    channels.emplace_back(diss.gamma_ef * (1.0 + diss.n_th_ef) +
                              diss.gamma_T_ef * (1.0 + diss.N_T_q),
                          qubit_unit(1, 2));
    channels.emplace_back(diss.gamma_ef * diss.n_th_ef + diss.gamma_T_ef * diss.N_T_q,
                          qubit_unit(2, 1));
    u.setZero();
    u(0, 0) = -1.0;
    u(1, 1) = 1.0;
    channels.emplace_back(0.5 * diss.gamma_phi_ge, hilbert::qubit_op(dims, u));
    u.setZero();
    u(1, 1) = -1.0;
    u(2, 2) = 1.0;
    channels.emplace_back(0.5 * diss.gamma_phi_ef, hilbert::qubit_op(dims, u));

    const MatrixXcd eye = MatrixXcd::Identity(d, d);
    MatrixXcd L = -kI * (kron(eye, H) - kron(H.transpose(), eye));
    for (const auto& [rate, A] : channels) {
        if (rate == 0.0) continue;
        const MatrixXcd AdA = A.adjoint() * A;
        L += rate * (kron(A.conjugate(), A) - 0.5 * kron(eye, AdA) -
                     0.5 * kron(AdA.transpose(), eye));
    }

    const double scale = L.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw NumericalError("steady_state: zero generator");
    L /= scale;

    Eigen::BDCSVD<MatrixXcd> svd(L, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();  // descending
    const double smax = sv(0);
    int null_dim = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) < 1e-8 * smax) ++null_dim;
    if (null_dim == 0)
        throw NumericalError("steady_state: no stationary state found (smallest normalized "
                             "singular value " +
                             std::to_string(sv(sv.size() - 1)) + ")");
    if (null_dim > 1)
        throw NumericalError("steady_state: degenerate null space (dimension " +
                             std::to_string(null_dim) + ")");

    const Eigen::VectorXcd v = svd.matrixV().col(sv.size() - 1);
    MatrixXcd rho = Eigen::Map<const MatrixXcd>(v.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const complex<double> tr = rho.trace();
    if (std::abs(tr) < 1e-10)
        throw NumericalError("steady_state: null vector has vanishing trace");
    rho /= tr;

    const Eigen::Map<const Eigen::VectorXcd> vec(rho.data(), d * d);
    const double residual = (L * vec).norm() / vec.norm();
    if (residual >= 1e-10)
        throw NumericalError("steady_state: residual " + std::to_string(residual) +
                             " on the unit-normalized generator");
    return {dims, rho};
}

double frame_equivalence_check(const hilbert::DensityMatrix& rho0,
                               const HamiltonianModel& model, const DissipatorSet& diss,
                               const pulses::PulseSchedule& schedule,
                               const std::vector<double>& t_grid, double threshold,
                               const EvolveOptions& opt) {
    HamiltonianModel lit = model;
    lit.frame = Frame::literal;
    HamiltonianModel rot = model;
    rot.frame = Frame::rotating;
    const PopulationTrace a = evolve(rho0, lit, diss, schedule, t_grid, opt);
    const PopulationTrace b = evolve(rho0, rot, diss, schedule, t_grid, opt);
    double dev = 0.0;
    for (size_t k = 0; k < a.samples.size(); ++k) {
        dev = std::max(dev, std::abs(a.samples[k].P_g - b.samples[k].P_g));
        dev = std::max(dev, std::abs(a.samples[k].P_e - b.samples[k].P_e));
        dev = std::max(dev, std::abs(a.samples[k].P_f - b.samples[k].P_f));
    }
    if (dev > threshold)
        throw NumericalError("frame_equivalence_check: populations deviate by " +
                             std::to_string(dev) + " (threshold " + std::to_string(threshold) +
                             ")");
    return dev;
}

}  // namespace qcr::dynamics
