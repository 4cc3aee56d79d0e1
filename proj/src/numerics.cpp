#include "qcr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "qcr/errors.hpp"

namespace qcr::numerics {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEstimate {
    double value;
    double error;
    double resabs;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b, int& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    double fv[15];
    fv[7] = f(c);
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    evals += 15;

    double resk = kWgk[7] * fv[7];
    double resabs = std::abs(resk);
    double resg = kWg[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        resk += kWgk[j] * (fv[j] + fv[14 - j]);
        resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
        if (j % 2 == 1) resg += kWg[j / 2] * (fv[j] + fv[14 - j]);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fv[7] - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv[j] - reskh) + std::abs(fv[14 - j] - reskh));

    double err = std::abs((resk - resg) * h);
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double round = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    err = std::max(err, round);
    return {resk * h, err, resabs};
}

struct Panel {
    double a, b, value, error;
    long seq;  // insertion order, tie-breaker for deterministic refinement
};
struct PanelLess {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.seq > y.seq;
    }
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f,
                           const std::vector<double>& breakpoints, const QuadratureSpec& spec) {
    if (breakpoints.size() < 2) throw NumericalError("integrate: need at least two breakpoints");
    std::vector<double> pts = breakpoints;
    std::sort(pts.begin(), pts.end());

    QuadratureResult res;
    std::priority_queue<Panel, std::vector<Panel>, PanelLess> heap;
    long seq = 0;
    double total = 0.0, total_err = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i] == pts[i + 1]) continue;
        auto est = gk15(f, pts[i], pts[i + 1], res.evaluations);
        heap.push({pts[i], pts[i + 1], est.value, est.error, seq++});
        total += est.value;
        total_err += est.error;
    }

    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (total_err > tolerance() && !heap.empty()) {
        if (res.subdivisions >= spec.max_subdivisions)
            throw NumericalError("integrate: panel budget exhausted before reaching tolerance");
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating resolution; keep its estimate and stop refining it
            continue;
        }
        auto left = gk15(f, worst.a, mid, res.evaluations);
        auto right = gk15(f, mid, worst.b, res.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error, seq++});
        heap.push({mid, worst.b, right.value, right.error, seq++});
        ++res.subdivisions;
    }

    res.value = total;
    res.error_estimate = total_err;
    return res;
}

// ---------------------------------------------------------------------------
// ODE
// ---------------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (error coefficients), b*7 = 1/40
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

double error_norm(const Eigen::MatrixXcd& err, const Eigen::MatrixXcd& y0,
                  const Eigen::MatrixXcd& y1, double atol, double rtol) {
    double acc = 0.0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            atol + rtol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
        const double q = std::abs(err.data()[i]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

std::vector<double> make_stops(double t0, double t1, const std::vector<double>& sample_times) {
    std::vector<double> stops;
    stops.reserve(sample_times.size() + 1);
    for (double t : sample_times)
        if (t > t0 && t < t1) stops.push_back(t);
    std::sort(stops.begin(), stops.end());
    stops.push_back(t1);
    return stops;
}

}  // namespace

OdeStats integrate_adaptive(const OdeRhs& rhs, double t0, double t1, const Eigen::MatrixXcd& y0,
                            const std::vector<double>& sample_times,
                            const std::function<void(double, const Eigen::MatrixXcd&)>& sample,
                            const OdeOptions& opt) {
    OdeStats stats;
    if (t1 <= t0) {
        sample(t0, y0);
        return stats;
    }
    const double cap =
        opt.max_phase_freq > 0.0 ? 1.0 / (50.0 * opt.max_phase_freq / (2.0 * M_PI)) : 0.0;
    stats.step_cap = cap;

    Eigen::MatrixXcd y = y0;
    Eigen::MatrixXcd k1(y.rows(), y.cols()), k2(y.rows(), y.cols()), k3(y.rows(), y.cols()),
        k4(y.rows(), y.cols()), k5(y.rows(), y.cols()), k6(y.rows(), y.cols()),
        k7(y.rows(), y.cols()), ytmp(y.rows(), y.cols()), ynew(y.rows(), y.cols()),
        yerr(y.rows(), y.cols());

    sample(t0, y);
    const auto stops = make_stops(t0, t1, sample_times);
    size_t stop_idx = 0;

    double h = opt.initial_step > 0.0 ? opt.initial_step : (t1 - t0) / 100.0;
    if (cap > 0.0) h = std::min(h, cap);
    double t = t0;
    rhs(t, y, k1);
    bool k1_fresh = true;
    stats.min_step = std::numeric_limits<double>::infinity();

    while (t < t1) {
        if (stats.accepted + stats.rejected >= opt.max_steps)
            throw NumericalError("ode: step budget exceeded at t = " + std::to_string(t));
        double h_try = h;
        if (cap > 0.0) h_try = std::min(h_try, cap);
        const double next_stop = stops[stop_idx];
        bool hit_stop = false;
        if (t + h_try >= next_stop - 1e-14 * std::max(1.0, std::abs(next_stop))) {
            h_try = next_stop - t;
            hit_stop = true;
        }
        if (h_try < 1e-18)
            throw NumericalError("ode: step size underflow at t = " + std::to_string(t));

        if (!k1_fresh) rhs(t, y, k1);
        ytmp = y + h_try * (a21 * k1);
        rhs(t + c2 * h_try, ytmp, k2);
        ytmp = y + h_try * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h_try, ytmp, k3);
        ytmp = y + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h_try, ytmp, k4);
        ytmp = y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h_try, ytmp, k5);
        ytmp = y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h_try, ytmp, k6);
        ynew = y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h_try, ynew, k7);
        yerr = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double err = error_norm(yerr, y, ynew, opt.abs_tol, opt.rel_tol);
        if (err <= 1.0) {
            t += h_try;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            k1_fresh = true;
            ++stats.accepted;
            stats.min_step = std::min(stats.min_step, h_try);
            stats.max_step = std::max(stats.max_step, h_try);
            if (hit_stop) {
                sample(t, y);
                ++stop_idx;
                if (stop_idx >= stops.size()) break;
            }
            const double factor =
                err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h = h_try * factor;
        } else {
            ++stats.rejected;
            k1_fresh = true;  // k1 still valid at t
            h = h_try * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    if (!std::isfinite(stats.min_step)) stats.min_step = 0.0;
    return stats;
}

OdeStats integrate_rk4(const OdeRhs& rhs, double t0, double t1, const Eigen::MatrixXcd& y0,
                       double dt, const std::vector<double>& sample_times,
                       const std::function<void(double, const Eigen::MatrixXcd&)>& sample) {
    OdeStats stats;
    if (dt <= 0.0) throw NumericalError("rk4: dt must be positive");
    Eigen::MatrixXcd y = y0;
    Eigen::MatrixXcd k1(y.rows(), y.cols()), k2(y.rows(), y.cols()), k3(y.rows(), y.cols()),
        k4(y.rows(), y.cols()), ytmp(y.rows(), y.cols());
    sample(t0, y);
    if (t1 <= t0) return stats;
    const auto stops = make_stops(t0, t1, sample_times);
    size_t stop_idx = 0;
    double t = t0;
    stats.min_step = std::numeric_limits<double>::infinity();
    while (stop_idx < stops.size()) {
        double h = dt;
        const double next_stop = stops[stop_idx];
        bool hit_stop = false;
        if (t + h >= next_stop - 1e-14 * std::max(1.0, std::abs(next_stop))) {
            h = next_stop - t;
            hit_stop = true;
        }
        if (h > 0.0) {
            rhs(t, y, k1);
            ytmp = y + (0.5 * h) * k1;
            rhs(t + 0.5 * h, ytmp, k2);
            ytmp = y + (0.5 * h) * k2;
            rhs(t + 0.5 * h, ytmp, k3);
            ytmp = y + h * k3;
            rhs(t + h, ytmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            ++stats.accepted;
            stats.min_step = std::min(stats.min_step, h);
            stats.max_step = std::max(stats.max_step, h);
        } else {
            t = next_stop;
        }
        if (hit_stop) {
            sample(t, y);
            ++stop_idx;
        }
    }
    if (!std::isfinite(stats.min_step)) stats.min_step = 0.0;
    return stats;
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw FitError("fit_line: need at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw FitError("fit_line: degenerate abscissa");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ssr += r * r;
    }
    fit.residual_norm = std::sqrt(ssr);
    const double dof = std::max(1.0, n - 2.0);
    const double s2 = ssr / dof;
    fit.slope_sigma = std::sqrt(s2 / sxx);
    fit.intercept_sigma = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    return fit;
}

namespace {

void clamp_to_bounds(Eigen::VectorXd& p, const FitOptions& opt) {
    if (opt.lower.size() == p.size())
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::max(p[i], opt.lower[i]);
    if (opt.upper.size() == p.size())
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::min(p[i], opt.upper[i]);
}

}  // namespace

FitReport nonlinear_least_squares(const ResidualFn& fn, int n_residuals,
                                  const Eigen::VectorXd& guess, const FitOptions& opt) {
    const int np = static_cast<int>(guess.size());
    if (np == 0 || n_residuals < np)
        throw FitError("nonlinear_least_squares: underdetermined problem");

    Eigen::VectorXd p = guess;
    clamp_to_bounds(p, opt);
    Eigen::VectorXd r(n_residuals), r_trial(n_residuals), rp(n_residuals);
    fn(p, r);
    double cost = r.squaredNorm();
    if (!std::isfinite(cost)) throw FitError("nonlinear_least_squares: non-finite residuals at guess");

    Eigen::MatrixXd J(n_residuals, np);
    double lambda = 1e-3;
    FitReport report;
    report.converged = false;

    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        // forward-difference Jacobian
        for (int j = 0; j < np; ++j) {
            const double hj = 1e-7 * std::max(std::abs(p[j]), 1e-7);
            Eigen::VectorXd pj = p;
            pj[j] += hj;
            fn(pj, rp);
            J.col(j) = (rp - r) / hj;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;

        bool accepted = false;
        Eigen::VectorXd dp(np);
        for (int inner = 0; inner < 40; ++inner) {
            Eigen::MatrixXd A = JtJ;
            for (int j = 0; j < np; ++j)
                A(j, j) += lambda * std::max(JtJ(j, j), 1e-30);
            dp = -A.ldlt().solve(g);
            Eigen::VectorXd p_trial = p + dp;
            clamp_to_bounds(p_trial, opt);
            fn(p_trial, r_trial);
            const double cost_trial = r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial <= cost) {
                dp = p_trial - p;
                p = p_trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!accepted) break;

        double rel_step = 0.0;
        for (int j = 0; j < np; ++j)
            rel_step = std::max(rel_step, std::abs(dp[j]) / (std::abs(p[j]) + opt.step_rel_tol));
        if (rel_step < opt.step_rel_tol) {
            report.converged = true;
            ++iter;
            break;
        }
    }

    report.params = p;
    report.residual_norm = std::sqrt(cost);
    report.iterations = iter;

    // condition estimate and linearized sigmas at the solution
    for (int j = 0; j < np; ++j) {
        const double hj = 1e-7 * std::max(std::abs(p[j]), 1e-7);
        Eigen::VectorXd pj = p;
        pj[j] += hj;
        fn(pj, rp);
        J.col(j) = (rp - r) / hj;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    report.jacobian_cond =
        sv[np - 1] > 0.0 ? sv[0] / sv[np - 1] : std::numeric_limits<double>::infinity();
    const double dof = std::max(1, n_residuals - np);
    const double s2 = cost / dof;
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::MatrixXd cov = JtJ.ldlt().solve(Eigen::MatrixXd::Identity(np, np)) * s2;
    report.param_sigmas.resize(np);
    for (int j = 0; j < np; ++j)
        report.param_sigmas[j] = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;

    if (opt.lower.size() == p.size())
        for (int j = 0; j < np; ++j)
            if (p[j] <= opt.lower[j]) report.active_bounds.push_back(j);
    if (opt.upper.size() == p.size())
        for (int j = 0; j < np; ++j)
            if (p[j] >= opt.upper[j]) report.active_bounds.push_back(j);
    return report;
}

EigenSystem hermitian_eigen(const Eigen::MatrixXcd& M, double herm_tol) {
    if (M.rows() != M.cols()) throw NumericalError("hermitian_eigen: matrix not square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const double asym = (M - M.adjoint()).cwiseAbs().maxCoeff();
    if (asym > herm_tol * scale)
        throw NumericalError("hermitian_eigen: input is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (M + M.adjoint()));
    if (solver.info() != Eigen::Success)
        throw NumericalError("hermitian_eigen: solver failed to converge");
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};

    const double res_tol = 1e-9 * scale * static_cast<double>(M.rows());
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        const double res = (M * sys.vectors.col(k) - sys.values[k] * sys.vectors.col(k)).norm();
        if (res > res_tol)
            throw NumericalError("hermitian_eigen: eigenpair residual above tolerance");
    }
    return sys;
}

}  // namespace qcr::numerics
