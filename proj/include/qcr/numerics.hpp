#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace qcr::numerics {

// ---------------------------------------------------------------------------
// Adaptive quadrature (Gauss-Kronrod 7/15 with global panel refinement).
// Caller-supplied breakpoints become initial panel boundaries; integrable
// endpoint singularities and sharp Fermi edges should sit on breakpoints.
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;  // number of panel bisections performed
    int evaluations = 0;
};

QuadratureResult integrate(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints,
                           const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// ODE integration on complex matrix states (density matrices, amplitudes).
// Embedded Dormand-Prince 5(4) with PI step control, plus fixed-step RK4.
// max_phase_freq (rad/s) enforces the step cap dt <= 1/(50 * f), f = w/2pi.
// ---------------------------------------------------------------------------

using OdeRhs = std::function<void(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dydt)>;

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_phase_freq = 0.0;  // rad/s; 0 disables the cap
    double initial_step = 0.0;    // 0 -> automatic
    long max_steps = 200'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    double min_step = 0.0;
    double max_step = 0.0;
    double step_cap = 0.0;  // the dt cap actually applied (0 = none)
};

// Integrates y' = rhs(t, y) from t0 to t1, calling sample(t, y) at t0, at each
// time in sample_times (strictly increasing, within [t0, t1]) and at t1.
OdeStats integrate_adaptive(const OdeRhs& rhs, double t0, double t1, const Eigen::MatrixXcd& y0,
                            const std::vector<double>& sample_times,
                            const std::function<void(double, const Eigen::MatrixXcd&)>& sample,
                            const OdeOptions& opt = {});

OdeStats integrate_rk4(const OdeRhs& rhs, double t0, double t1, const Eigen::MatrixXcd& y0,
                       double dt, const std::vector<double>& sample_times,
                       const std::function<void(double, const Eigen::MatrixXcd&)>& sample);

// ---------------------------------------------------------------------------
// Least squares.
// ---------------------------------------------------------------------------

// y ~ a + b x, returns {a, b} plus standard errors from the residual variance.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_sigma = 0.0;
    double slope_sigma = 0.0;
    double residual_norm = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Residual callback: given parameters p, fill r with model(p) - data (size fixed).
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

struct FitOptions {
    int max_iterations = 200;
    double step_rel_tol = 1e-10;   // converged when |dp| < tol * (|p| + tol)
    Eigen::VectorXd lower;         // optional box bounds (empty = none)
    Eigen::VectorXd upper;
};

struct FitReport {
    Eigen::VectorXd params;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double jacobian_cond = 0.0;          // condition estimate at the solution
    std::vector<int> active_bounds;      // indices pinned at a bound
    Eigen::VectorXd param_sigmas;        // 1-sigma from linearized covariance
};

// Gauss-Newton with Levenberg damping and forward-difference Jacobians.
FitReport nonlinear_least_squares(const ResidualFn& fn, int n_residuals,
                                  const Eigen::VectorXd& guess, const FitOptions& opt = {});

// ---------------------------------------------------------------------------
// Hermitian eigensolver wrapper (validated results).
// ---------------------------------------------------------------------------

struct EigenSystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXcd vectors; // columns
};

// Requires ||M - M^dag||_max <= herm_tol * ||M||_max; verifies residuals.
EigenSystem hermitian_eigen(const Eigen::MatrixXcd& M, double herm_tol = 1e-10);

}  // namespace qcr::numerics
