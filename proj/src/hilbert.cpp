#include "qcr/hilbert.hpp"

#include <cmath>

#include "qcr/errors.hpp"

namespace qcr::hilbert {

bool operator==(const SpaceDims& a, const SpaceDims& b) { return a.n_fock == b.n_fock; }

Eigen::MatrixXcd annihilation_resonator(const SpaceDims& dims) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dims.dim(), dims.dim());
    for (int q = 0; q < SpaceDims::n_qubit; ++q)
        for (int m = 1; m < dims.n_fock; ++m)
            a(dims.index(q, m - 1), dims.index(q, m)) = std::sqrt(static_cast<double>(m));
    return a;
}

Eigen::MatrixXcd lowering_qubit(const SpaceDims& dims) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(dims.dim(), dims.dim());
    for (int m = 0; m < dims.n_fock; ++m) {
        b(dims.index(0, m), dims.index(1, m)) = 1.0;
        b(dims.index(1, m), dims.index(2, m)) = std::sqrt(2.0);
    }
    return b;
}

Eigen::MatrixXcd qubit_op(const SpaceDims& dims, const Eigen::Matrix3cd& op) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dims.dim(), dims.dim());
    for (int q = 0; q < 3; ++q)
        for (int p = 0; p < 3; ++p) {
            if (op(q, p) == std::complex<double>(0.0, 0.0)) continue;
            for (int m = 0; m < dims.n_fock; ++m)
                out(dims.index(q, m), dims.index(p, m)) = op(q, p);
        }
    return out;
}

DensityMatrix thermal_state(const SpaceDims& dims, double P_e) {
    if (!(P_e >= 0.0 && P_e < 0.5))
        throw ValidationError("thermal_state: P_e must lie in [0, 0.5)");
    DensityMatrix s{dims, Eigen::MatrixXcd::Zero(dims.dim(), dims.dim())};
    s.rho(dims.index(0, 0), dims.index(0, 0)) = 1.0 - P_e;
    s.rho(dims.index(1, 0), dims.index(1, 0)) = P_e;
    return s;
}

DensityMatrix basis_state(const SpaceDims& dims, int q, int m) {
    if (q < 0 || q >= 3 || m < 0 || m >= dims.n_fock)
        throw ValidationError("basis_state: level index out of range");
    DensityMatrix s{dims, Eigen::MatrixXcd::Zero(dims.dim(), dims.dim())};
    s.rho(dims.index(q, m), dims.index(q, m)) = 1.0;
    return s;
}

Populations populations(const DensityMatrix& state) {
    const auto& rho = state.rho;
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-8)
        throw NumericalError("populations: density matrix non-Hermitian beyond tolerance");

    Populations p;
    p.basis.resize(state.dims.dim());
    double sum = 0.0;
    for (int q = 0; q < 3; ++q) {
        double pq = 0.0;
        for (int m = 0; m < state.dims.n_fock; ++m) {
            const double w = rho(state.dims.index(q, m), state.dims.index(q, m)).real();
            p.basis[state.dims.index(q, m)] = w;
            pq += w;
            p.n_mean += m * w;
            sum += w;
        }
        if (q == 0) p.P_g = pq;
        if (q == 1) p.P_e = pq;
        if (q == 2) p.P_f = pq;
    }
    p.trace_err = std::abs(sum - 1.0);
    return p;
}

}  // namespace qcr::hilbert
