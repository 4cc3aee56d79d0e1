#include "qcr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qcr/constants.hpp"
#include "qcr/errors.hpp"
#include "qcr/io.hpp"
#include "qcr/params.hpp"
#include "qcr/protocols.hpp"

namespace qcr::cli {

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

// out/foo.csv + "fit" -> out/foo_fit.csv
std::string companion(const std::string& path, const std::string& suffix) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size()) + "_" + suffix + ext;
    return path + "_" + suffix;
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw ValidationError("step count must be at least 1");
    std::vector<double> v(static_cast<size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i)
        v[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    v.back() = hi;
    return v;
}

// "eq2" selects the closed-form optimal amplitude; a number is Omega/2pi in MHz.
std::optional<double> parse_omega_rule(const std::string& text) {
    if (text == "eq2") return std::nullopt;
    try {
        size_t used = 0;
        const double mhz = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        if (mhz < 0.0) throw ValidationError("--omega: negative amplitude");
        return mhz * consts::MHz * consts::two_pi;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("--omega: expected 'eq2' or a number in MHz, got '" + text + "'");
    }
}

struct RunScope {
    io::RunManifest manifest;
    std::string manifest_path;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    RunScope(const std::string& command_line, const std::string& primary_out) {
        manifest.command = command_line;
        manifest.tool_version = kToolVersion;
        manifest_path = primary_out + ".manifest.json";
    }
    void load_config(const std::string& path, params::DeviceParams& p) {
        if (path.empty())
            throw ConfigError("no config file: pass --config or set QCRSIM_CONFIG");
        p = params::load_params(path);
        manifest.config_path = path;
        manifest.config_digest = io::digest_file(path);
        manifest.resolved_params = params::to_config_text(p);
    }
    template <typename Fn>
    void run(Fn&& body) {
        try {
            body();
            finish("ok", "");
        } catch (const std::exception& e) {
            finish("error", e.what());
            throw;
        }
    }
    void finish(const std::string& status, const std::string& error) {
        manifest.status = status;
        manifest.error = error;
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        try {
            io::write_manifest(manifest_path, manifest);
        } catch (const std::exception& e) {
            std::cerr << "warning: manifest not written: " << e.what() << "\n";
        }
    }
};

struct KappaSweepArgs {
    std::string config, out = "out/kappa_sweep.csv";
    double bias_min = 0.0, bias_max = 2.2;
    int bias_steps = 45;
    double dt_ab_ns = 200.0;
    int jobs = 1;
};

void run_kappa_sweep(const KappaSweepArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        const auto grid = linspace(a.bias_min, a.bias_max, a.bias_steps);
        const auto res =
            protocols::kappa_sweep(grid, p, {}, a.dt_ab_ns * consts::ns, a.jobs);

        std::vector<io::Column> cols(6);
        cols[0].name = "eVb_over_2Delta";
        cols[1].name = "gamma_down";
        cols[2].name = "gamma_up";
        cols[3].name = "delta_gamma";
        cols[4].name = "kappa_eff_theory";
        cols[5].name = "kappa_eff_ringdown";
        for (const auto& pt : res.points) {
            cols[0].values.push_back(pt.bias_ratio);
            cols[1].values.push_back(pt.gamma_down);
            cols[2].values.push_back(pt.gamma_up);
            cols[3].values.push_back(pt.delta_gamma);
            cols[4].values.push_back(pt.kappa_eff_theory);
            cols[5].values.push_back(pt.kappa_eff_ringdown);
        }
        io::write_csv(a.out, cols);
        scope.manifest.outputs = {a.out};
        std::cout << a.out << ": " << res.points.size() << " bias points, kappa_r extracted "
                  << io::format_value(res.kappa_r_extracted) << " 1/s\n";
    });
}

struct ResetSweepArgs {
    std::string config, out = "out/reset_sweep.csv", omega = "eq2";
    double bias_min = 0.9, bias_max = 1.2;
    int bias_steps = 4;
    double tau_min_ns = 0.0, tau_max_ns = 300.0;
    int tau_steps = 7;
    double g_rabi_mhz = 28.4;
    int jobs = 1;
};

void run_reset_sweep(const ResetSweepArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        const auto omega = parse_omega_rule(a.omega);
        const auto bias = linspace(a.bias_min, a.bias_max, a.bias_steps);
        std::vector<double> tau;
        for (double t_ns : linspace(a.tau_min_ns, a.tau_max_ns, a.tau_steps))
            tau.push_back(t_ns * consts::ns);
        const auto rho0 =
            hilbert::thermal_state(hilbert::SpaceDims{p.n_fock}, p.P_e_thermal);
        const auto g = protocols::reset_sweep(bias, tau, a.g_rabi_mhz * consts::MHz * consts::two_pi,
                                              omega, rho0, p, a.jobs);

        std::vector<io::Column> cols(5);
        cols[0].name = "eVb_over_2Delta";
        cols[1].name = "tau_ns";
        cols[2].name = "residual_pe";
        cols[3].name = "residual_pf";
        cols[4].name = "ok";
        for (size_t i = 0; i < g.bias_ratios.size(); ++i)
            for (size_t j = 0; j < g.tau.size(); ++j) {
                const auto& c = g.cells[i][j];
                cols[0].values.push_back(g.bias_ratios[i]);
                cols[1].values.push_back(g.tau[j] / consts::ns);
                cols[2].values.push_back(c.residual_pe);
                cols[3].values.push_back(c.residual_pf);
                cols[4].values.push_back(c.ok ? 1.0 : 0.0);
                if (!c.ok)
                    std::cerr << "cell (" << g.bias_ratios[i] << ", " << g.tau[j] / consts::ns
                              << " ns) failed: " << c.error << "\n";
            }
        io::write_csv(a.out, cols);

        const std::string contour_path = companion(a.out, "contour");
        std::vector<io::Column> ccols(4);
        ccols[0].name = "eVb_over_2Delta";
        ccols[1].name = "tau99_ns";
        ccols[2].name = "omega_rabi_mhz";
        ccols[3].name = "kappa_eff";
        for (size_t i = 0; i < g.bias_ratios.size(); ++i) {
            ccols[0].values.push_back(g.bias_ratios[i]);
            ccols[1].values.push_back(g.tau99[i] / consts::ns);
            ccols[2].values.push_back(g.omega_used[i] / consts::two_pi / consts::MHz);
            ccols[3].values.push_back(g.kappa_eff[i]);
        }
        io::write_csv(contour_path, ccols);
        scope.manifest.outputs = {a.out, contour_path};
        std::cout << a.out << ": " << g.bias_ratios.size() << "x" << g.tau.size() << " grid, "
                  << g.failed_cells << " failed cells\n";
        if (g.failed_cells > 0)
            throw NumericalError("reset-sweep: " + std::to_string(g.failed_cells) +
                                 " cells failed");
    });
}

struct ResetArgs {
    std::string config, out = "out/reset.csv", omega = "eq2";
    double bias = 1.03;
    double tau_ns = 0.0;
    double g_rabi_mhz = 28.4;
};

void run_reset(const ResetArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        if (!(a.tau_ns > 0.0)) throw ConfigError("--tau-ns must be positive");
        const auto omega = parse_omega_rule(a.omega);
        const auto rho0 =
            hilbert::thermal_state(hilbert::SpaceDims{p.n_fock}, p.P_e_thermal);
        const auto ctx =
            protocols::make_reset_context(pulses::bias_from_ratio(a.bias, p.Delta), p);
        const auto r = protocols::simulate_reset(ctx, a.tau_ns * consts::ns,
                                                 a.g_rabi_mhz * consts::MHz * consts::two_pi,
                                                 omega, rho0, p);

        std::vector<io::Column> cols(6);
        cols[0].name = "t_ns";
        cols[1].name = "P_g";
        cols[2].name = "P_e";
        cols[3].name = "P_f";
        cols[4].name = "n_mean";
        cols[5].name = "trace_err";
        for (const auto& s : r.trace.samples) {
            cols[0].values.push_back(s.t / consts::ns);
            cols[1].values.push_back(s.P_g);
            cols[2].values.push_back(s.P_e);
            cols[3].values.push_back(s.P_f);
            cols[4].values.push_back(s.n_mean);
            cols[5].values.push_back(s.trace_err);
        }
        io::write_csv(a.out, cols);

        const std::string summary_path = companion(a.out, "summary");
        io::write_csv(summary_path,
                      {{"residual_pe", {r.residual_pe}},
                       {"residual_pf", {r.residual_pf}},
                       {"omega_rabi_mhz", {r.omega_used / consts::two_pi / consts::MHz}},
                       {"kappa_eff_plateau", {r.kappa_eff_plateau}},
                       {"drive_validity", {static_cast<double>(r.drive_validity)}}});
        scope.manifest.outputs = {a.out, summary_path};
        std::cout << summary_path << ": residual_pe " << io::format_value(r.residual_pe)
                  << "\n";
    });
}

struct IvArgs {
    std::string config, out, fit_path;
    std::vector<double> synth;  // v_max_uV, steps
};

std::vector<protocols::IvSample> read_iv_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::vector<protocols::IvSample> data;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const bool header = line.find_first_not_of("+-.,0123456789eE \t\r") != std::string::npos;
        if (header) {
            if (lineno == 1) continue;
            throw ConfigError(path + ": unparsable line " + std::to_string(lineno));
        }
        std::istringstream ss(line);
        std::string v_text, i_text;
        if (!std::getline(ss, v_text, ',') || !std::getline(ss, i_text, ','))
            throw ConfigError(path + ": expected two columns at line " + std::to_string(lineno));
        protocols::IvSample s;
        s.V = std::stod(v_text) * 1e-6;  // uV
        s.I = std::stod(i_text) * 1e-9;  // nA
        data.push_back(s);
    }
    return data;
}

void run_iv(const IvArgs& a, const std::string& cmdline) {
    const bool fitting = !a.fit_path.empty();
    if (fitting == !a.synth.empty())
        throw ConfigError("iv: pass exactly one of --fit or --synth");
    const std::string out = !a.out.empty() ? a.out : (fitting ? "out/iv_fit.csv" : "out/iv.csv");
    RunScope scope(cmdline, out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        const auto jp = qcr::junction_from_device(p, params::derive(p));

        if (!fitting) {
            const double v_max = a.synth[0] * 1e-6;
            const int steps = static_cast<int>(a.synth[1]);
            const auto data = protocols::synth_iv(jp, v_max, steps);
            std::vector<io::Column> cols(2);
            cols[0].name = "V_uV";
            cols[1].name = "I_nA";
            for (const auto& s : data) {
                cols[0].values.push_back(s.V / 1e-6);
                cols[1].values.push_back(s.I / 1e-9);
            }
            io::write_csv(out, cols);
            scope.manifest.outputs = {out};
            std::cout << out << ": " << data.size() << " samples\n";
            return;
        }

        const auto data = read_iv_csv(a.fit_path);
        const auto fit = protocols::fit_iv(data, jp);
        io::write_csv(
            out,
            {{"R_T_kOhm", {fit.params.R_T / consts::kOhm}},
             {"Delta_ueV", {fit.params.Delta / consts::ueV}},
             {"T_N_mK", {fit.params.T_N / consts::mK}},
             {"gamma_D", {fit.params.gamma_D}},
             {"residual_norm", {fit.residual_norm}},
             {"iterations", {static_cast<double>(fit.iterations)}},
             {"sigma_R_T", {fit.sigmas[0]}},
             {"sigma_Delta", {fit.sigmas[1]}},
             {"sigma_T_N", {fit.sigmas[2]}},
             {"sigma_gamma_D", {fit.sigmas[3]}},
             {"flag_R_T", {fit.unidentifiable[0] ? 1.0 : 0.0}},
             {"flag_Delta", {fit.unidentifiable[1] ? 1.0 : 0.0}},
             {"flag_T_N", {fit.unidentifiable[2] ? 1.0 : 0.0}},
             {"flag_gamma_D", {fit.unidentifiable[3] ? 1.0 : 0.0}}});
        scope.manifest.outputs = {out};
        std::cout << out << ": R_T " << io::format_value(fit.params.R_T / consts::kOhm)
                  << " kOhm, Delta " << io::format_value(fit.params.Delta / consts::ueV)
                  << " ueV\n";
    });
}

struct RingdownArgs {
    std::string config, out = "out/ringdown.csv";
    double bias = 1.03;
    std::vector<double> taus_ns = {60.0, 100.0, 140.0, 180.0};
    double dt_ab_ns = 200.0;
};

void run_ringdown(const RingdownArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        std::vector<double> taus;
        for (double t_ns : a.taus_ns) taus.push_back(t_ns * consts::ns);
        const auto r = protocols::ringdown(pulses::bias_from_ratio(a.bias, p.Delta), taus, p,
                                           a.dt_ab_ns * consts::ns);

        std::vector<io::Column> cols(3);
        cols[0].name = "tau_ns";
        cols[1].name = "ratio";
        cols[2].name = "ln_ratio";
        for (size_t i = 0; i < r.tau.size(); ++i) {
            cols[0].values.push_back(r.tau[i] / consts::ns);
            cols[1].values.push_back(r.ratio[i]);
            cols[2].values.push_back(std::log(r.ratio[i]));
        }
        io::write_csv(a.out, cols);

        const std::string fit_path = companion(a.out, "fit");
        io::write_csv(fit_path, {{"delta_gamma", {r.fit.delta_gamma}},
                                 {"delta_gamma_sigma", {r.fit.delta_gamma_sigma}},
                                 {"intercept", {r.fit.intercept}},
                                 {"kappa_from_intercept", {r.fit.kappa_from_intercept}},
                                 {"fit_residual_norm", {r.fit.fit_residual_norm}}});
        scope.manifest.outputs = {a.out, fit_path};
        std::cout << fit_path << ": delta_gamma " << io::format_value(r.fit.delta_gamma)
                  << " 1/s\n";
    });
}

struct RpmArgs {
    std::string out = "out/rpm.csv";
    double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
};

void run_rpm(const RpmArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        const auto est = protocols::rpm_estimate(a.a1, a.a2, a.b1, a.b2);
        io::write_csv(a.out, {{"P_e", {est.P_e}},
                              {"out_of_range", {est.out_of_range ? 1.0 : 0.0}}});
        scope.manifest.outputs = {a.out};
        std::cout << a.out << ": P_e " << io::format_value(est.P_e) << "\n";
    });
}

struct T1Args {
    std::string config, out = "out/t1.csv";
    double t_max_us = 50.0;
    int samples = 201;
};

void run_t1(const T1Args& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        const auto trace = protocols::t1_trace(p, a.t_max_us * consts::us, a.samples);
        const auto fit = protocols::t1_fit(trace);
        const double pe_ss = protocols::steady_state_pe(p);

        std::vector<io::Column> cols(4);
        cols[0].name = "t_us";
        cols[1].name = "P_e";
        cols[2].name = "P_g";
        cols[3].name = "P_f";
        for (const auto& s : trace.samples) {
            cols[0].values.push_back(s.t / consts::us);
            cols[1].values.push_back(s.P_e);
            cols[2].values.push_back(s.P_g);
            cols[3].values.push_back(s.P_f);
        }
        io::write_csv(a.out, cols);

        const std::string fit_path = companion(a.out, "fit");
        io::write_csv(fit_path, {{"T1_us", {fit.T1 / consts::us}},
                                 {"T1_sigma_us", {fit.T1_sigma / consts::us}},
                                 {"P_inf", {fit.P_inf}},
                                 {"P_inf_sigma", {fit.P_inf_sigma}},
                                 {"P0", {fit.P0}},
                                 {"residual_norm", {fit.residual_norm}},
                                 {"degenerate", {fit.degenerate ? 1.0 : 0.0}},
                                 {"P_e_steady", {pe_ss}}});
        scope.manifest.outputs = {a.out, fit_path};
        std::cout << fit_path << ": T1 " << io::format_value(fit.T1 / consts::us) << " us\n";
    });
}

struct SpectrumArgs {
    std::string config, out = "out/spectrum.csv";
};

void run_spectrum(const SpectrumArgs& a, const std::string& cmdline) {
    RunScope scope(cmdline, a.out);
    scope.run([&] {
        params::DeviceParams p;
        scope.load_config(a.config, p);
        const auto sp = protocols::dressed_spectrum(p);
        const auto ghz = [](double w) { return io::format_value(w / consts::two_pi / consts::GHz); };

        std::vector<std::vector<std::string>> rows = {
            {"ge_bare_GHz", ghz(sp.omega_ge_bare)},
            {"ge_dressed_GHz", ghz(sp.omega_ge_dressed)},
            {"ef_bare_GHz", ghz(sp.omega_ef_bare)},
            {"ef_dressed_GHz", ghz(sp.omega_ef_dressed)},
            {"f0g1_bare_GHz", ghz(sp.omega_f0g1_bare)},
            {"f0g1_dressed_GHz", ghz(sp.omega_f0g1_dressed)},
        };
        const char* names = "gef";
        for (const auto& lvl : sp.levels) {
            const std::string tag =
                std::string("level_") + names[lvl.q] + std::to_string(lvl.m);
            rows.push_back({tag + "_bare_GHz", ghz(lvl.bare)});
            rows.push_back({tag + "_dressed_GHz", ghz(lvl.dressed)});
        }
        io::write_csv_rows(a.out, {"quantity", "value_GHz"}, rows);
        scope.manifest.outputs = {a.out};
        std::cout << a.out << ": f0g1_dressed " << ghz(sp.omega_f0g1_dressed) << " GHz\n";
    });
}

}  // namespace

int run_cli(int argc, char** argv) {
    const std::string cmdline = join_args(argc, argv);
    CLI::App app{"Pulse-level simulator of QCR-assisted superconducting qubit initialization"};
    app.require_subcommand(1);

    KappaSweepArgs ks;
    auto* ks_cmd = app.add_subcommand(
        "kappa-sweep", "Resonator decay rate vs bias: theory and ringdown extraction");
    ks_cmd->add_option("--config", ks.config, "parameter file")->envname("QCRSIM_CONFIG");
    ks_cmd->add_option("--bias-min", ks.bias_min, "eV_b/2Delta start")->capture_default_str();
    ks_cmd->add_option("--bias-max", ks.bias_max, "eV_b/2Delta end")->capture_default_str();
    ks_cmd->add_option("--bias-steps", ks.bias_steps, "number of bias points")
        ->capture_default_str();
    ks_cmd->add_option("--dt-ab-ns", ks.dt_ab_ns, "ringdown measurement window, ns")
        ->capture_default_str();
    ks_cmd->add_option("--jobs", ks.jobs, "worker threads")->capture_default_str();
    ks_cmd->add_option("--out", ks.out, "output CSV")->capture_default_str();
    ks_cmd->callback([&] { run_kappa_sweep(ks, cmdline); });

    ResetSweepArgs rs;
    auto* rs_cmd = app.add_subcommand(
        "reset-sweep", "Residual excited population over a bias x pulse-length grid");
    rs_cmd->add_option("--config", rs.config, "parameter file")->envname("QCRSIM_CONFIG");
    rs_cmd->add_option("--bias-min", rs.bias_min, "eV_b/2Delta start")->capture_default_str();
    rs_cmd->add_option("--bias-max", rs.bias_max, "eV_b/2Delta end")->capture_default_str();
    rs_cmd->add_option("--bias-steps", rs.bias_steps, "number of bias points")
        ->capture_default_str();
    rs_cmd->add_option("--tau-min-ns", rs.tau_min_ns, "shortest pulse, ns")
        ->capture_default_str();
    rs_cmd->add_option("--tau-max-ns", rs.tau_max_ns, "longest pulse, ns")
        ->capture_default_str();
    rs_cmd->add_option("--tau-steps", rs.tau_steps, "number of pulse lengths")
        ->capture_default_str();
    rs_cmd->add_option("--g-rabi-mhz", rs.g_rabi_mhz, "f0g1 drive amplitude g/2pi, MHz")
        ->capture_default_str();
    rs_cmd->add_option("--omega", rs.omega,
                       "ef drive amplitude: 'eq2' for the closed-form optimum, or MHz")
        ->capture_default_str();
    rs_cmd->add_option("--jobs", rs.jobs, "worker threads")->capture_default_str();
    rs_cmd->add_option("--out", rs.out, "output CSV")->capture_default_str();
    rs_cmd->callback([&] { run_reset_sweep(rs, cmdline); });

    ResetArgs rst;
    auto* rst_cmd =
        app.add_subcommand("reset", "Single reset window: population trace and residuals");
    rst_cmd->add_option("--config", rst.config, "parameter file")->envname("QCRSIM_CONFIG");
    rst_cmd->add_option("--bias", rst.bias, "eV_b/2Delta")->capture_default_str();
    rst_cmd->add_option("--tau-ns", rst.tau_ns, "pulse length, ns")->required();
    rst_cmd->add_option("--g-rabi-mhz", rst.g_rabi_mhz, "f0g1 drive amplitude g/2pi, MHz")
        ->capture_default_str();
    rst_cmd->add_option("--omega", rst.omega,
                        "ef drive amplitude: 'eq2' for the closed-form optimum, or MHz")
        ->capture_default_str();
    rst_cmd->add_option("--out", rst.out, "output CSV")->capture_default_str();
    rst_cmd->callback([&] { run_reset(rst, cmdline); });

    IvArgs iv;
    auto* iv_cmd = app.add_subcommand("iv", "SINIS tunneling current: synthesize or fit");
    iv_cmd->add_option("--config", iv.config, "parameter file")->envname("QCRSIM_CONFIG");
    iv_cmd->add_option("--fit", iv.fit_path, "CSV of V_uV,I_nA samples to fit");
    iv_cmd->add_option("--synth", iv.synth, "v_max_uV and step count")->expected(2);
    iv_cmd->add_option("--out", iv.out, "output CSV (default out/iv.csv or out/iv_fit.csv)");
    iv_cmd->callback([&] { run_iv(iv, cmdline); });

    RingdownArgs rd;
    auto* rd_cmd = app.add_subcommand(
        "ringdown", "Amplitude-ratio decay measurement at one bias, with line fit");
    rd_cmd->add_option("--config", rd.config, "parameter file")->envname("QCRSIM_CONFIG");
    rd_cmd->add_option("--bias", rd.bias, "eV_b/2Delta")->capture_default_str();
    rd_cmd->add_option("--taus-ns", rd.taus_ns, "comma-separated pulse lengths, ns")
        ->delimiter(',')
        ->capture_default_str();
    rd_cmd->add_option("--dt-ab-ns", rd.dt_ab_ns, "measurement window, ns")
        ->capture_default_str();
    rd_cmd->add_option("--out", rd.out, "output CSV")->capture_default_str();
    rd_cmd->callback([&] { run_ringdown(rd, cmdline); });

    RpmArgs rpm;
    auto* rpm_cmd = app.add_subcommand(
        "rpm", "Residual-population estimate from four readout amplitudes");
    rpm_cmd->add_option("--a1", rpm.a1, "pi_ge + pi_ef sequence amplitude")->required();
    rpm_cmd->add_option("--a2", rpm.a2, "pi_ge + 2pi_ef sequence amplitude")->required();
    rpm_cmd->add_option("--b1", rpm.b1, "pi_ef sequence amplitude")->required();
    rpm_cmd->add_option("--b2", rpm.b2, "2pi_ef sequence amplitude")->required();
    rpm_cmd->add_option("--out", rpm.out, "output CSV")->capture_default_str();
    rpm_cmd->callback([&] { run_rpm(rpm, cmdline); });

    T1Args t1;
    auto* t1_cmd = app.add_subcommand("t1", "Free relaxation of |e,0> with exponential fit");
    t1_cmd->add_option("--config", t1.config, "parameter file")->envname("QCRSIM_CONFIG");
    t1_cmd->add_option("--t-max-us", t1.t_max_us, "trace length, us")->capture_default_str();
    t1_cmd->add_option("--samples", t1.samples, "sample count")->capture_default_str();
    t1_cmd->add_option("--out", t1.out, "output CSV")->capture_default_str();
    t1_cmd->callback([&] { run_t1(t1, cmdline); });

    SpectrumArgs sp;
    auto* sp_cmd = app.add_subcommand("spectrum", "Bare and dressed level table");
    sp_cmd->add_option("--config", sp.config, "parameter file")->envname("QCRSIM_CONFIG");
    sp_cmd->add_option("--out", sp.out, "output CSV")->capture_default_str();
    sp_cmd->callback([&] { run_spectrum(sp, cmdline); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace qcr::cli
