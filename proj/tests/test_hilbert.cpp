#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "doctest.h"
#include "qcr/errors.hpp"
#include "qcr/hilbert.hpp"

using namespace qcr;
using namespace qcr::hilbert;

TEST_CASE("basis indexing is qubit-major") {
    SpaceDims dims{4};
    CHECK(dims.dim() == 12);
    CHECK(dims.index(0, 0) == 0);
    CHECK(dims.index(0, 3) == 3);
    CHECK(dims.index(1, 0) == 4);
    CHECK(dims.index(2, 3) == 11);
}

TEST_CASE("annihilation operator has sqrt(m) elements and truncated commutator") {
    SpaceDims dims{5};
    auto a = annihilation_resonator(dims);
    for (int q = 0; q < 3; ++q)
        for (int m = 1; m < 5; ++m)
            CHECK(std::abs(a(dims.index(q, m - 1), dims.index(q, m)) - std::sqrt(double(m))) <
                  1e-14);

    Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
    for (int q = 0; q < 3; ++q) {
        for (int m = 0; m < 4; ++m)
            CHECK(std::abs(comm(dims.index(q, m), dims.index(q, m)) - 1.0) < 1e-13);
        // top rung of the truncated ladder
        CHECK(std::abs(comm(dims.index(q, 4), dims.index(q, 4)) + 4.0) < 1e-13);
    }
}

TEST_CASE("qubit lowering operator matches the three-level ladder") {
    SpaceDims dims{3};
    auto b = lowering_qubit(dims);
    for (int m = 0; m < 3; ++m) {
        CHECK(std::abs(b(dims.index(0, m), dims.index(1, m)) - 1.0) < 1e-14);
        CHECK(std::abs(b(dims.index(1, m), dims.index(2, m)) - std::sqrt(2.0)) < 1e-14);
    }
    CHECK(b.cwiseAbs().sum() == doctest::Approx(3.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-13));
}

TEST_CASE("qubit_op embeds a 3x3 operator with an identity on the resonator") {
    SpaceDims dims{2};
    Eigen::Matrix3cd z = Eigen::Matrix3cd::Zero();
    z(0, 0) = -1.0;
    z(1, 1) = 1.0;
    auto Z = qubit_op(dims, z);
    CHECK(Z.rows() == 6);
    CHECK(std::abs(Z(dims.index(0, 0), dims.index(0, 0)) + 1.0) < 1e-15);
    CHECK(std::abs(Z(dims.index(0, 1), dims.index(0, 1)) + 1.0) < 1e-15);
    CHECK(std::abs(Z(dims.index(1, 0), dims.index(1, 0)) - 1.0) < 1e-15);
    CHECK(std::abs(Z(dims.index(2, 1), dims.index(2, 1))) < 1e-15);
}

TEST_CASE("thermal state populates g and e only") {
    SpaceDims dims{5};
    auto rho = thermal_state(dims, 0.15);
    auto pops = populations(rho);
    CHECK(pops.P_g == doctest::Approx(0.85).epsilon(1e-14));
    CHECK(pops.P_e == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(pops.P_f == doctest::Approx(0.0));
    CHECK(pops.n_mean == doctest::Approx(0.0));
    CHECK(pops.trace_err < 1e-14);

    CHECK_THROWS_AS(thermal_state(dims, 0.5), ValidationError);
    CHECK_THROWS_AS(thermal_state(dims, -0.01), ValidationError);
}

TEST_CASE("basis state occupies a single level") {
    SpaceDims dims{5};
    auto rho = basis_state(dims, 2, 3);
    auto pops = populations(rho);
    CHECK(pops.P_f == doctest::Approx(1.0));
    CHECK(pops.n_mean == doctest::Approx(3.0));
    CHECK_THROWS_AS(basis_state(dims, 3, 0), ValidationError);
    CHECK_THROWS_AS(basis_state(dims, 0, 5), ValidationError);
}

TEST_CASE("populations rejects a non-hermitian matrix") {
    SpaceDims dims{2};
    auto rho = basis_state(dims, 0, 0);
    rho.rho(0, 3) = 0.5;  // no conjugate partner
    CHECK_THROWS_AS(populations(rho), NumericalError);
}
