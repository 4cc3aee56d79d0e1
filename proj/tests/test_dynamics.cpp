#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "qcr/constants.hpp"
#include "qcr/dynamics.hpp"
#include "qcr/errors.hpp"
#include "qcr/hilbert.hpp"
#include "qcr/numerics.hpp"
#include "qcr/params.hpp"
#include "qcr/pulses.hpp"
#include "qcr/qcr.hpp"
#include "test_config.hpp"

using namespace qcr;
using namespace ::qcr::dynamics;
namespace qcrj = ::qcr::qcr;
using consts::two_pi;

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

struct DrivenSetup {
    params::DeviceParams p;
    params::DerivedParams d;
    qcrj::JunctionParams jp;
    qcrj::QcrRateTable table;
    HamiltonianModel model;
    DissipatorSet diss;
    pulses::PulseSchedule schedule;
    double V_b = 0.0;
};

// Full reset configuration with every channel active; carriers at the bare
// transition frequencies (fine for consistency checks).
DrivenSetup driven_setup(Frame frame, double tau = 50e-9) {
    DrivenSetup s;
    s.p = testcfg::device();
    s.d = params::derive(s.p);
    s.jp = qcrj::junction_from_device(s.p, s.d);
    s.V_b = pulses::bias_from_ratio(testcfg::kBiasRatio, s.jp.Delta);
    s.table = qcrj::QcrRateTable(s.jp, s.p.omega_r, s.V_b, 129);
    const double carrier_ef = s.p.omega_ef;
    const double carrier_f0g1 = s.d.omega_f0g1_bare;
    s.model = model_from_params(s.p, frame, carrier_ef, carrier_f0g1);
    s.diss = dissipators_from_params(s.p, s.d, &s.table);
    const double g = two_pi * testcfg::kGRabi2piMHz * 1e6;
    const double omega = two_pi * 20.05e6;
    s.schedule = pulses::reset_schedule(tau, s.V_b, g, omega);
    return s;
}

// Pure state spread over several levels, with nontrivial phases.
hilbert::DensityMatrix rich_state(const hilbert::SpaceDims& dims) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dims.dim());
    psi(dims.index(0, 0)) = 0.6;
    psi(dims.index(1, 0)) = std::complex<double>(0.5, 0.2);
    psi(dims.index(2, 0)) = std::complex<double>(-0.3, 0.4);
    psi(dims.index(0, 1)) = std::complex<double>(0.2, -0.3);
    psi(dims.index(1, 1)) = 0.15;
    psi(dims.index(2, 2)) = std::complex<double>(0.1, 0.1);
    psi.normalize();
    hilbert::DensityMatrix rho{dims, psi * psi.adjoint()};
    return rho;
}

// Reference Lindblad right-hand side assembled from dense operators.
void dense_rhs(const DrivenSetup& s, double t, const Eigen::MatrixXcd& rho,
               Eigen::MatrixXcd& out) {
    const auto& dims = s.model.dims;
    Eigen::MatrixXcd H = hamiltonian_matrix(s.model, s.schedule, t);
    out = -kI * (H * rho - rho * H);

    auto channel = [&](const Eigen::MatrixXcd& A, double rate) {
        if (rate == 0.0) return;
        Eigen::MatrixXcd AdA = A.adjoint() * A;
        out += rate * (A * rho * A.adjoint() - 0.5 * (AdA * rho + rho * AdA));
    };

    const double u = s.schedule.qcr_bias.amplitude > 0.0
                         ? pulses::envelope(s.schedule.qcr_bias, t) / s.schedule.qcr_bias.amplitude
                         : 0.0;
    auto a = hilbert::annihilation_resonator(dims);
    channel(a, s.diss.kappa_r * (1.0 + s.diss.N_tr) + s.table.gamma_down(u));
    channel(a.adjoint(), s.diss.kappa_r * s.diss.N_tr + s.table.gamma_up(u));

    Eigen::Matrix3cd ge = Eigen::Matrix3cd::Zero();
    ge(0, 1) = 1.0;
    Eigen::Matrix3cd ef = Eigen::Matrix3cd::Zero();
    ef(1, 2) = 1.0;
    channel(hilbert::qubit_op(dims, ge),
            s.diss.gamma_ge * (1.0 + s.diss.n_th) + s.diss.gamma_T_ge * (1.0 + s.diss.N_T_q));
    channel(hilbert::qubit_op(dims, ge).adjoint(),
            s.diss.gamma_ge * s.diss.n_th + s.diss.gamma_T_ge * s.diss.N_T_q);
    channel(hilbert::qubit_op(dims, ef),
            s.diss.gamma_ef * (1.0 + s.diss.n_th_ef) + s.diss.gamma_T_ef * (1.0 + s.diss.N_T_q));
    channel(hilbert::qubit_op(dims, ef).adjoint(),
            s.diss.gamma_ef * s.diss.n_th_ef + s.diss.gamma_T_ef * s.diss.N_T_q);

    Eigen::Matrix3cd zge = Eigen::Matrix3cd::Zero();
    zge(0, 0) = -1.0;
    zge(1, 1) = 1.0;
    Eigen::Matrix3cd zef = Eigen::Matrix3cd::Zero();
    zef(1, 1) = -1.0;
    zef(2, 2) = 1.0;
    channel(hilbert::qubit_op(dims, zge), 0.5 * s.diss.gamma_phi_ge);
    channel(hilbert::qubit_op(dims, zef), 0.5 * s.diss.gamma_phi_ef);
}

// Bare qubit with the resonator decoupled: relaxation/excitation/dephasing only.
HamiltonianModel bare_model(const params::DeviceParams& p, int n_fock = 2) {
    HamiltonianModel m;
    m.dims = hilbert::SpaceDims{n_fock};
    m.frame = Frame::rotating;
    m.omega_r = p.omega_r;
    m.omega_ge = p.omega_ge;
    m.alpha = p.alpha;
    m.lambda_c = 0.0;
    return m;
}

pulses::PulseSchedule idle(double t_end) {
    pulses::PulseSchedule s;
    s.t_end = t_end;
    return s;
}

}  // namespace

TEST_CASE("hamiltonian matrix is hermitian through the pulse edges") {
    for (Frame frame : {Frame::literal, Frame::rotating}) {
        auto s = driven_setup(frame);
        for (double t : {-3e-9, 1e-9, 10e-9, 48.3e-9, 60e-9}) {
            Eigen::MatrixXcd H = hamiltonian_matrix(s.model, s.schedule, t);
            const double scale = H.cwiseAbs().maxCoeff();
            CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * scale);
        }
    }
}

TEST_CASE("structured generator agrees with the dense Lindblad superoperator") {
    for (Frame frame : {Frame::literal, Frame::rotating}) {
        const std::string frame_name = frame == Frame::literal ? "literal" : "rotating";
        CAPTURE(frame_name);
        auto s = driven_setup(frame);
        auto rho0 = rich_state(s.model.dims);

        // the literal frame carries the full carrier phases, so its fixed step
        // has to resolve them well enough to keep the state positive
        const double t0 = 10e-9, t1 = 10.1e-9;
        const double dt = frame == Frame::literal ? 1e-13 : 1e-12;

        EvolveOptions opt;
        opt.fixed_step_rk4 = true;
        opt.rk4_dt = dt;
        auto trace = evolve(rho0, s.model, s.diss, s.schedule, {t0, t1}, opt);

        Eigen::MatrixXcd ref;
        numerics::integrate_rk4(
            [&](double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dydt) {
                dense_rhs(s, t, y, dydt);
            },
            t0, t1, rho0.rho, dt, {},
            [&](double, const Eigen::MatrixXcd& y) { ref = y; });

        REQUIRE(ref.size() > 0);
        CHECK((trace.final_state.rho - ref).cwiseAbs().maxCoeff() < 5e-12);
    }
}

TEST_CASE("quantum channel acts linearly on states") {
    auto s = driven_setup(Frame::rotating, 30e-9);
    auto rho1 = hilbert::thermal_state(s.model.dims, 0.15);
    auto rho2 = hilbert::basis_state(s.model.dims, 1, 0);
    const double alpha = 0.3;
    hilbert::DensityMatrix mix{s.model.dims,
                               alpha * rho1.rho + (1.0 - alpha) * rho2.rho};

    std::vector<double> grid{0.0, 30e-9};
    auto t1 = evolve(rho1, s.model, s.diss, s.schedule, grid);
    auto t2 = evolve(rho2, s.model, s.diss, s.schedule, grid);
    auto tm = evolve(mix, s.model, s.diss, s.schedule, grid);

    const double expect = alpha * t1.samples.back().P_e + (1.0 - alpha) * t2.samples.back().P_e;
    CHECK(tm.samples.back().P_e == doctest::Approx(expect).epsilon(5e-7));
}

TEST_CASE("thermal state is a fixed point of the undriven qubit channels") {
    auto p = testcfg::device();
    auto d = params::derive(p);
    auto m = bare_model(p);
    DissipatorSet diss;
    diss.gamma_ge = d.gamma_ge;
    diss.n_th = d.n_th;
    diss.gamma_phi_ge = d.gamma_phi_ge;
    diss.kappa_r = p.kappa_r;

    auto rho0 = hilbert::thermal_state(m.dims, 0.15);
    auto trace = evolve(rho0, m, diss, idle(3e-6), {0.0, 1.5e-6, 3e-6});
    for (const auto& smp : trace.samples) {
        CHECK(std::abs(smp.P_e - 0.15) < 1e-9);
        CHECK(smp.trace_err < 1e-10);
    }
}

TEST_CASE("photon number decays at kappa_r") {
    auto p = testcfg::device();
    auto m = bare_model(p, 4);
    DissipatorSet diss;
    diss.kappa_r = p.kappa_r;

    auto rho0 = hilbert::basis_state(m.dims, 0, 1);
    const double T = 1.0 / p.kappa_r;
    auto trace = evolve(rho0, m, diss, idle(T), {0.0, T});
    CHECK(trace.samples.back().n_mean ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("coherence decays at exactly the dephasing rate") {
    auto p = testcfg::device();
    auto d = params::derive(p);
    auto m = bare_model(p);
    DissipatorSet diss;
    diss.gamma_phi_ge = d.gamma_phi_ge;

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(m.dims.dim());
    psi(m.dims.index(0, 0)) = 1.0 / std::sqrt(2.0);
    psi(m.dims.index(1, 0)) = 1.0 / std::sqrt(2.0);
    hilbert::DensityMatrix rho0{m.dims, psi * psi.adjoint()};

    const double T = 2e-6;
    auto trace = evolve(rho0, m, diss, idle(T), {0.0, T});
    const double c = std::abs(trace.final_state.rho(m.dims.index(0, 0), m.dims.index(1, 0)));
    CHECK(c == doctest::Approx(0.5 * std::exp(-d.gamma_phi_ge * T)).epsilon(1e-6));
}

TEST_CASE("steady state solves the undriven generator") {
    auto p = testcfg::device();
    auto d = params::derive(p);
    auto m = bare_model(p, 5);
    DissipatorSet diss;
    diss.kappa_r = p.kappa_r;
    diss.N_tr = 0.1;
    diss.gamma_ge = d.gamma_ge;
    diss.n_th = d.n_th;
    diss.gamma_ef = d.gamma_ef;  // without it the f level is disconnected
    diss.gamma_phi_ge = d.gamma_phi_ge;
    diss.gamma_phi_ef = d.gamma_phi_ef;

    auto rho = steady_state(m, diss);
    auto pops = hilbert::populations(rho);
    CHECK(pops.P_e == doctest::Approx(0.15).epsilon(1e-9));

    // truncated geometric ladder at r = N_tr / (1 + N_tr)
    const double r = 0.1 / 1.1;
    double norm = 0.0, mean = 0.0;
    for (int mph = 0; mph < 5; ++mph) {
        norm += std::pow(r, mph);
        mean += mph * std::pow(r, mph);
    }
    CHECK(pops.n_mean == doctest::Approx(mean / norm).epsilon(1e-9));
}

TEST_CASE("steady state reports a degenerate null space when nothing dissipates") {
    auto p = testcfg::device();
    auto m = bare_model(p);
    DissipatorSet none;
    CHECK_THROWS_AS(steady_state(m, none), NumericalError);
}

TEST_CASE("both frames produce the same populations") {
    auto s = driven_setup(Frame::rotating, 20e-9);
    auto rho0 = hilbert::thermal_state(s.model.dims, 0.15);
    std::vector<double> grid{0.0, 10e-9, 20e-9};
    const double dev =
        frame_equivalence_check(rho0, s.model, s.diss, s.schedule, grid, 1e-3);
    CHECK(dev < 1e-4);
}

TEST_CASE("unused Fock headroom does not change bare qubit dynamics") {
    auto p = testcfg::device();
    auto d = params::derive(p);
    DissipatorSet diss;
    diss.kappa_r = p.kappa_r;
    diss.gamma_ge = d.gamma_ge;
    diss.n_th = d.n_th;

    std::vector<double> grid{0.0, 5e-6, 10e-6};
    // tight tolerances so controller noise stays well below the threshold and
    // any true truncation coupling would stand out
    EvolveOptions opt;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-13;
    auto small = bare_model(p, 2);
    auto big = bare_model(p, 6);
    auto ts = evolve(hilbert::basis_state(small.dims, 1, 0), small, diss, idle(10e-6), grid, opt);
    auto tb = evolve(hilbert::basis_state(big.dims, 1, 0), big, diss, idle(10e-6), grid, opt);
    for (size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(ts.samples[i].P_e - tb.samples[i].P_e) < 1e-10);
}

TEST_CASE("evolve validates its inputs") {
    auto s = driven_setup(Frame::rotating, 20e-9);
    auto rho0 = hilbert::thermal_state(s.model.dims, 0.15);

    CHECK_THROWS_AS(evolve(rho0, s.model, s.diss, s.schedule, {}), ValidationError);
    CHECK_THROWS_AS(evolve(rho0, s.model, s.diss, s.schedule, {10e-9, 10e-9}), ValidationError);

    auto rho_small = hilbert::thermal_state(hilbert::SpaceDims{3}, 0.15);
    CHECK_THROWS_AS(evolve(rho_small, s.model, s.diss, s.schedule, {0.0, 1e-9}),
                    ValidationError);

    EvolveOptions bad;
    bad.fixed_step_rk4 = true;
    CHECK_THROWS_AS(evolve(rho0, s.model, s.diss, s.schedule, {0.0, 1e-9}, bad),
                    ValidationError);

    auto broken = rho0;
    broken.rho *= 0.9;  // trace 0.9
    CHECK_THROWS_AS(evolve(broken, s.model, s.diss, s.schedule, {0.0, 1e-9}), NumericalError);

    // active drive with no carrier to lock to
    auto no_carrier = s.model;
    no_carrier.carrier_ef = 0.0;
    CHECK_THROWS_AS(evolve(rho0, no_carrier, s.diss, s.schedule, {0.0, 1e-9}),
                    ValidationError);

    // rate table sampled for a different plateau than the scheduled bias
    auto wrong_bias = s.schedule;
    wrong_bias.qcr_bias.amplitude *= 1.5;
    CHECK_THROWS_AS(evolve(rho0, s.model, s.diss, wrong_bias, {0.0, 1e-9}), ValidationError);
}

TEST_CASE("trace samples land on the requested grid") {
    auto s = driven_setup(Frame::rotating, 20e-9);
    auto rho0 = hilbert::thermal_state(s.model.dims, 0.15);
    std::vector<double> grid{0.0, 7e-9, 13e-9, 20e-9};
    auto trace = evolve(rho0, s.model, s.diss, s.schedule, grid);
    REQUIRE(trace.samples.size() == grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        CHECK(trace.samples[i].t == doctest::Approx(grid[i]).epsilon(1e-12));
}
