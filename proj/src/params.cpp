#include "qcr/params.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"

namespace qcr::params {

namespace {

using consts::two_pi;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (kv.count(key))
            throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = val;
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        double x = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + val + "' as a number");
    }
}

class Reader {
  public:
    explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    double require(const std::string& key, const std::string& symbol) {
        auto it = kv_.find(key);
        if (it == kv_.end())
            throw ConfigError("missing required key: " + key + " (" + symbol + ")");
        seen_.push_back(key);
        return parse_double(key, it->second);
    }

    double optional(const std::string& key, double fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        seen_.push_back(key);
        return parse_double(key, it->second);
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    void reject_unknown() const {
        for (const auto& [key, val] : kv_) {
            bool known = false;
            for (const auto& s : seen_)
                if (s == key) { known = true; break; }
            if (!known) throw ConfigError("config: unknown key '" + key + "'");
        }
    }

  private:
    std::map<std::string, std::string> kv_;
    std::vector<std::string> seen_;
};

void validate(const DeviceParams& p, bool delta_d_supplied, double delta_d_in) {
    auto fail = [](const std::string& rule) { throw ValidationError("validation failed: " + rule); };

    if (!(p.omega_r > p.omega_ge && p.omega_ge > p.omega_ef && p.omega_ef > 0))
        fail("frequencies must satisfy omega_r > omega_ge > omega_ef > 0");
    if (!(p.alpha < 0)) fail("alpha must be negative");
    if (std::abs(p.alpha - (p.omega_ef - p.omega_ge)) > two_pi * 1e6)
        fail("alpha and omega_ef - omega_ge disagree by more than 1 MHz");
    if (delta_d_supplied) {
        double recomputed = p.omega_r - p.omega_ge;
        if (std::abs(delta_d_in - recomputed) > 1e-9 * std::abs(recomputed))
            fail("delta_d does not match omega_r - omega_ge within 1e-9 relative");
    }
    if (!(p.lambda_c >= 0)) fail("lambda must be nonnegative");
    if (!(p.kappa_r > 0)) fail("kappa_r must be positive");
    if (!(p.T1 > 0 && p.T2_star > 0)) fail("T1 and T2_star must be positive");
    if (!(p.P_e_thermal >= 0 && p.P_e_thermal < 0.5))
        fail("thermal_excited_population must lie in [0, 0.5)");
    if (!(p.R_T > 0)) fail("tunnel resistance must be positive");
    if (!(p.Delta > 0)) fail("gap energy must be positive");
    if (!(p.gamma_D >= 0 && p.gamma_D < 1)) fail("dynes_parameter must lie in [0, 1)");
    if (!(p.T_N > 0)) fail("electron temperature must be positive");
    if (!(p.C_c > 0 && p.C_j > 0 && p.C_m > 0)) fail("capacitances must be positive");
    if (p.C_sigma_override != 0 && !(p.C_sigma_override > 0))
        fail("island_total_capacitance override must be positive");
    if (!(p.m2_coupling > 0 && p.m2_coupling <= 1)) fail("m2_coupling must lie in (0, 1]");
    if (p.n_fock < 2) fail("n_fock must be at least 2");
    if (!(p.N_tr >= 0 && p.n_th_ef >= 0 && p.gamma_T_ge >= 0 && p.gamma_T_ef >= 0 &&
          p.N_T_q >= 0))
        fail("occupations and optional channel rates must be nonnegative");
}

DeviceParams from_lab_units(Reader& r) {
    using namespace consts;
    DeviceParams p;
    p.omega_r = two_pi * GHz * r.require("resonator_freq_GHz", "omega_r");
    p.omega_ge = two_pi * GHz * r.require("qubit_ge_freq_GHz", "omega_ge");
    p.omega_ef = two_pi * GHz * r.require("qubit_ef_freq_GHz", "omega_ef");
    p.alpha = two_pi * MHz * r.require("anharmonicity_MHz", "alpha");
    p.lambda_c = two_pi * MHz * r.require("coupling_freq_MHz", "lambda");
    p.kappa_r = r.require("kappa_r", "kappa_r");
    p.T1 = us * r.require("T1_us", "T1");
    p.T2_star = us * r.require("T2_star_us", "T2_star");
    p.P_e_thermal = r.require("thermal_excited_population", "P_e_thermal");
    p.R_T = kOhm * r.require("tunnel_resistance_kOhm", "R_T");
    p.Delta = ueV * r.require("gap_energy_ueV", "Delta");
    p.gamma_D = r.require("dynes_parameter", "gamma_D");
    p.T_N = mK * r.require("electron_temperature_mK", "T_N");
    p.C_c = fF * r.require("coupling_capacitance_fF", "C_c");
    p.C_j = fF * r.require("junction_capacitance_fF", "C_j");
    p.C_m = fF * r.require("island_capacitance_fF", "C_m");
    p.m2_coupling = r.require("m2_coupling", "m2");

    p.omega_f0g1_measured = two_pi * GHz * r.optional("f0g1_freq_GHz", 0.0);
    p.detuning_r = two_pi * MHz * r.optional("stark_detuning_r_MHz", 0.0);
    p.detuning_q = two_pi * MHz * r.optional("stark_detuning_q_MHz", 0.0);
    p.N_tr = r.optional("line_thermal_occupation", 0.0);
    p.n_th_ef = r.optional("ef_thermal_occupation", 0.0);
    p.gamma_T_ge = r.optional("qcr_qubit_ge_rate", 0.0);
    p.gamma_T_ef = r.optional("qcr_qubit_ef_rate", 0.0);
    p.N_T_q = r.optional("qcr_qubit_occupation", 0.0);
    p.C_sigma_override = fF * r.optional("island_total_capacitance_fF", 0.0);
    p.gamma_ef_override = r.optional("ef_relaxation_rate", 0.0);
    p.gamma_phi_ef_override = r.optional("ef_dephasing_rate", 0.0);
    p.EJ_over_EC = r.optional("EJ_over_EC", 0.0);
    p.C_q = fF * r.optional("qubit_capacitance_fF", 0.0);
    p.n_fock = static_cast<int>(r.optional("n_fock", 5.0));

    bool dd = r.has("detuning_rq_GHz");
    double dd_in = two_pi * GHz * r.optional("detuning_rq_GHz", 0.0);
    r.reject_unknown();
    validate(p, dd, dd_in);
    return p;
}

struct SiField {
    const char* key;
    double DeviceParams::* member;
};

constexpr SiField kSiFields[] = {
    {"omega_r", &DeviceParams::omega_r},
    {"omega_ge", &DeviceParams::omega_ge},
    {"omega_ef", &DeviceParams::omega_ef},
    {"alpha", &DeviceParams::alpha},
    {"lambda_c", &DeviceParams::lambda_c},
    {"omega_f0g1_measured", &DeviceParams::omega_f0g1_measured},
    {"detuning_r", &DeviceParams::detuning_r},
    {"detuning_q", &DeviceParams::detuning_q},
    {"kappa_r", &DeviceParams::kappa_r},
    {"T1", &DeviceParams::T1},
    {"T2_star", &DeviceParams::T2_star},
    {"P_e_thermal", &DeviceParams::P_e_thermal},
    {"R_T", &DeviceParams::R_T},
    {"Delta", &DeviceParams::Delta},
    {"gamma_D", &DeviceParams::gamma_D},
    {"T_N", &DeviceParams::T_N},
    {"C_c", &DeviceParams::C_c},
    {"C_j", &DeviceParams::C_j},
    {"C_m", &DeviceParams::C_m},
    {"C_sigma_override", &DeviceParams::C_sigma_override},
    {"m2_coupling", &DeviceParams::m2_coupling},
    {"N_tr", &DeviceParams::N_tr},
    {"n_th_ef", &DeviceParams::n_th_ef},
    {"gamma_T_ge", &DeviceParams::gamma_T_ge},
    {"gamma_T_ef", &DeviceParams::gamma_T_ef},
    {"N_T_q", &DeviceParams::N_T_q},
    {"gamma_ef_override", &DeviceParams::gamma_ef_override},
    {"gamma_phi_ef_override", &DeviceParams::gamma_phi_ef_override},
    {"EJ_over_EC", &DeviceParams::EJ_over_EC},
    {"C_q", &DeviceParams::C_q},
};

DeviceParams from_si_dump(Reader& r) {
    DeviceParams p;
    for (const auto& f : kSiFields) p.*(f.member) = r.require(f.key, "SI dump field");
    p.n_fock = static_cast<int>(r.require("n_fock", "SI dump field"));
    validate(p, false, 0.0);
    return p;
}

}  // namespace

DeviceParams parse_params(const std::string& text) {
    auto kv = parse_kv(text);
    if (auto it = kv.find("format"); it != kv.end()) {
        if (it->second != "si-dump")
            throw ConfigError("config: unknown format tag '" + it->second + "'");
        kv.erase(it);
        Reader r(std::move(kv));
        return from_si_dump(r);
    }
    Reader r(std::move(kv));
    return from_lab_units(r);
}

DeviceParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_params(buf.str());
}

std::string to_config_text(const DeviceParams& p) {
    std::ostringstream out;
    out << "format = si-dump\n";
    char num[64];
    for (const auto& f : kSiFields) {
        std::snprintf(num, sizeof num, "%.17g", p.*(f.member));
        out << f.key << " = " << num << "\n";
    }
    out << "n_fock = " << p.n_fock << "\n";
    return out.str();
}

DerivedParams derive(const DeviceParams& p) {
    if (p.T2_star > 2.0 * p.T1)
        throw ValidationError("validation failed: T2_star exceeds 2*T1 (negative pure dephasing)");

    DerivedParams d;
    d.C_sigma = p.C_sigma_override > 0 ? p.C_sigma_override : p.C_c + 2.0 * p.C_j + p.C_m;
    d.E_N = consts::e_charge * consts::e_charge / (2.0 * d.C_sigma);
    d.omega_f0g1_bare = 2.0 * p.omega_ge + p.alpha - p.omega_r;

    d.n_th = p.P_e_thermal / (1.0 - 2.0 * p.P_e_thermal);
    d.gamma_ge = (1.0 / p.T1) / (1.0 + 2.0 * d.n_th);
    d.Gamma_up_q = d.gamma_ge * d.n_th;
    d.Gamma_down_q = d.gamma_ge * (1.0 + d.n_th);
    d.gamma_phi_ge = 1.0 / p.T2_star - 1.0 / (2.0 * p.T1);

    d.gamma_ef = p.gamma_ef_override > 0 ? p.gamma_ef_override : 2.0 * d.gamma_ge;
    d.gamma_phi_ef = p.gamma_phi_ef_override > 0 ? p.gamma_phi_ef_override : 2.0 * d.gamma_phi_ge;
    return d;
}

}  // namespace qcr::params
