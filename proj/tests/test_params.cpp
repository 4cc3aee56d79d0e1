#include <cmath>

#include "doctest.h"
#include "qcr/constants.hpp"
#include "qcr/errors.hpp"
#include "qcr/params.hpp"
#include "test_config.hpp"

using namespace qcr;
using namespace qcr::params;
using consts::two_pi;

TEST_CASE("lab-unit config parses into SI fields") {
    auto p = testcfg::device();
    CHECK(p.omega_r == doctest::Approx(two_pi * 6.538e9).epsilon(1e-14));
    CHECK(p.omega_ge == doctest::Approx(two_pi * 4.663e9).epsilon(1e-14));
    CHECK(p.omega_ef == doctest::Approx(two_pi * 4.401e9).epsilon(1e-14));
    CHECK(p.alpha == doctest::Approx(-two_pi * 261.8e6).epsilon(1e-14));
    CHECK(p.lambda_c == doctest::Approx(two_pi * 136e6).epsilon(1e-14));
    CHECK(p.omega_f0g1_measured == doctest::Approx(two_pi * 2.499e9).epsilon(1e-14));
    CHECK(p.kappa_r == doctest::Approx(2.36e6).epsilon(1e-14));
    CHECK(p.T1 == doctest::Approx(9.6e-6).epsilon(1e-14));
    CHECK(p.T2_star == doctest::Approx(2.3e-6).epsilon(1e-14));
    CHECK(p.P_e_thermal == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(p.R_T == doctest::Approx(72e3).epsilon(1e-14));
    CHECK(p.Delta == doctest::Approx(193e-6 * consts::e_charge).epsilon(1e-14));
    CHECK(p.gamma_D == doctest::Approx(1.3e-4).epsilon(1e-14));
    CHECK(p.T_N == doctest::Approx(0.060).epsilon(1e-14));
    CHECK(p.C_c == doctest::Approx(22.7e-15).epsilon(1e-14));
    CHECK(p.n_fock == 5);
    CHECK(p.delta_d() == doctest::Approx(two_pi * 1.875e9).epsilon(1e-12));
}

TEST_CASE("missing and malformed keys raise config errors") {
    CHECK_THROWS_AS(parse_params("resonator_freq_GHz = 6.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_params("resonator_freq_GHz 6.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_params(testcfg::device_config_text() + "unknown_knob = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_params(testcfg::device_config_text() + "n_fock = 5\n"), ConfigError);

    auto bad_value = testcfg::device_config_text();
    bad_value.replace(bad_value.find("6.538"), 5, "6.5x8");
    CHECK_THROWS_AS(parse_params(bad_value), ConfigError);
}

TEST_CASE("validation rejects inconsistent physics") {
    auto swap_value = [](std::string text, const std::string& key, const std::string& val) {
        auto pos = text.find(key);
        auto eol = text.find('\n', pos);
        text.replace(pos, eol - pos, key + " = " + val);
        return text;
    };

    // T2* beyond the 2 T1 ceiling passes parsing but fails in derive
    auto p_bad_t2 = parse_params(
        swap_value(testcfg::device_config_text(), "T2_star_us", "20.0"));
    CHECK_THROWS_AS(derive(p_bad_t2), ValidationError);

    CHECK_THROWS_AS(
        parse_params(swap_value(testcfg::device_config_text(), "anharmonicity_MHz", "-100")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_params(swap_value(testcfg::device_config_text(), "thermal_excited_population",
                                "0.6")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_params(swap_value(testcfg::device_config_text(), "dynes_parameter", "1.5")),
        ValidationError);
}

TEST_CASE("redundant detuning key is checked against the frequency difference") {
    // omega_r - omega_ge = 1.875 GHz for this device
    CHECK_NOTHROW(parse_params(testcfg::device_config_text() + "detuning_rq_GHz = 1.875\n"));
    CHECK_THROWS_AS(parse_params(testcfg::device_config_text() + "detuning_rq_GHz = 1.876\n"),
                    ValidationError);
}

TEST_CASE("SI dump round-trips every field bit-exactly") {
    auto p = testcfg::device();
    auto text = to_config_text(p);
    auto q = parse_params(text);
    CHECK(q.omega_r == p.omega_r);
    CHECK(q.omega_ge == p.omega_ge);
    CHECK(q.omega_ef == p.omega_ef);
    CHECK(q.alpha == p.alpha);
    CHECK(q.lambda_c == p.lambda_c);
    CHECK(q.omega_f0g1_measured == p.omega_f0g1_measured);
    CHECK(q.kappa_r == p.kappa_r);
    CHECK(q.T1 == p.T1);
    CHECK(q.T2_star == p.T2_star);
    CHECK(q.P_e_thermal == p.P_e_thermal);
    CHECK(q.R_T == p.R_T);
    CHECK(q.Delta == p.Delta);
    CHECK(q.gamma_D == p.gamma_D);
    CHECK(q.T_N == p.T_N);
    CHECK(q.m2_coupling == p.m2_coupling);
    CHECK(q.EJ_over_EC == p.EJ_over_EC);
    CHECK(q.C_q == p.C_q);
    CHECK(q.n_fock == p.n_fock);
}

TEST_CASE("derived quantities match hand-computed values") {
    auto p = testcfg::device();
    auto d = derive(p);

    // C_sigma = C_c + 2 C_j + C_m = 22.7 + 10 + 5 fF
    CHECK(d.C_sigma == doctest::Approx(37.7e-15).epsilon(1e-12));
    // E_N = e^2 / (2 C_sigma) = 2.1249 ueV
    CHECK(d.E_N / consts::ueV == doctest::Approx(2.1249).epsilon(1e-4));
    // wbar_f0g1 = 2 w_ge + alpha - w_r = 2.5262 GHz
    CHECK(d.omega_f0g1_bare / two_pi / 1e9 == doctest::Approx(2.5262).epsilon(1e-10));

    // thermal qubit: P_e = 0.15 -> n_th = 3/14, rates split 1/T1
    CHECK(d.n_th == doctest::Approx(3.0 / 14.0).epsilon(1e-12));
    CHECK(d.gamma_ge == doctest::Approx(72916.6666666667).epsilon(1e-10));
    CHECK(d.Gamma_up_q == doctest::Approx(15625.0).epsilon(1e-10));
    CHECK(d.Gamma_down_q == doctest::Approx(88541.6666666667).epsilon(1e-10));
    CHECK(d.Gamma_up_q + d.Gamma_down_q == doctest::Approx(1.0 / p.T1).epsilon(1e-12));
    CHECK(d.gamma_phi_ge == doctest::Approx(382699.275362319).epsilon(1e-10));

    // ef defaults double the ge channel
    CHECK(d.gamma_ef == doctest::Approx(2.0 * d.gamma_ge).epsilon(1e-14));
    CHECK(d.gamma_phi_ef == doctest::Approx(2.0 * d.gamma_phi_ge).epsilon(1e-14));
}

TEST_CASE("overrides replace derived defaults") {
    auto p = testcfg::device();
    p.gamma_ef_override = 1e5;
    p.gamma_phi_ef_override = 2e5;
    p.C_sigma_override = 40e-15;
    auto d = derive(p);
    CHECK(d.gamma_ef == doctest::Approx(1e5));
    CHECK(d.gamma_phi_ef == doctest::Approx(2e5));
    CHECK(d.C_sigma == doctest::Approx(40e-15));
    CHECK(d.E_N == doctest::Approx(consts::e_charge * consts::e_charge / 80e-15).epsilon(1e-12));
}
