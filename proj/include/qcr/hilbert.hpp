#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qcr::hilbert {

// Three-level transmon (|g>, |e>, |f>) tensor a truncated Fock ladder.
// Basis ordering is qubit-major and fixed everywhere: index = q * n_fock + m.
struct SpaceDims {
    int n_fock = 5;
    static constexpr int n_qubit = 3;
    int dim() const { return n_qubit * n_fock; }
    int index(int q, int m) const { return q * n_fock + m; }
};

bool operator==(const SpaceDims& a, const SpaceDims& b);

// Resonator annihilation: <q, m-1| a |q, m> = sqrt(m).
Eigen::MatrixXcd annihilation_resonator(const SpaceDims& dims);

// Qubit lowering, truncated three-level ladder: <g|b|e> = 1, <e|b|f> = sqrt(2).
Eigen::MatrixXcd lowering_qubit(const SpaceDims& dims);

// Embed a 3x3 qubit operator as op (x) identity_fock.
Eigen::MatrixXcd qubit_op(const SpaceDims& dims, const Eigen::Matrix3cd& op);

struct DensityMatrix {
    SpaceDims dims;
    Eigen::MatrixXcd rho;
};

// Diagonal (1-P_e, P_e, 0) on the qubit, vacuum resonator. Requires 0 <= P_e < 0.5.
DensityMatrix thermal_state(const SpaceDims& dims, double P_e);

// Pure |q, m><q, m|.
DensityMatrix basis_state(const SpaceDims& dims, int q, int m);

struct Populations {
    std::vector<double> basis;  // diagonal real parts, basis order
    double P_g = 0.0;
    double P_e = 0.0;
    double P_f = 0.0;
    double n_mean = 0.0;
    double trace_err = 0.0;  // |sum - 1|
};

// Throws NumericalError when rho is non-Hermitian beyond 1e-8 (max entry).
Populations populations(const DensityMatrix& state);

}  // namespace qcr::hilbert
