#include "wml/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wml/approx_solution.hpp"
#include "wml/checks.hpp"
#include "wml/io.hpp"
#include "wml/parametrix.hpp"
#include "wml/profile.hpp"

namespace wml {

namespace {

std::string g6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

Json fit_json(const RateFit& f) { return {{"p", f.p}, {"A", f.A}, {"residual", f.residual}}; }

BlowupParams params_of(double nu) {
    BlowupParams p;
    p.nu = nu;
    return p;
}

void run_profile(const RunConfig& cfg, Manifest& m, std::ostream& log, bool verbose) {
    const auto approx = assemble(params_of(cfg.nu), cfg.order, cfg.tol);
    const double lam = approx.params.lambda(cfg.t0);
    const double r_hi = std::min(cfg.t0, approx.max_radius(cfg.t0));
    const double r_spot = 1 / lam;

    std::vector<double> rs;
    const int n = 1000;
    for (int i = 1; i <= n; ++i) rs.push_back(r_hi * i / n);
    if (r_spot < r_hi) {
        rs.push_back(r_spot);
        std::sort(rs.begin(), rs.end());
    }
    const Eigen::Index k = static_cast<Eigen::Index>(rs.size());
    Eigen::VectorXd r(k), R(k), u(k), ut(k), res(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto jet = approx.jet(cfg.t0, rs[i]);
        r(i) = rs[i];
        R(i) = lam * rs[i];
        u(i) = jet.u;
        ut(i) = jet.ut;
        res(i) = approx.residual(cfg.t0, rs[i]);
    }
    write_csv(m.file("approx_t0.csv"), {"r", "R", "u", "ut", "residual"}, {r, R, u, ut, res});
    auto& out = m.results();
    out["t0"] = cfg.t0;
    out["lambda_t0"] = lam;
    out["max_radius"] = r_hi;
    out["max_abs_residual"] = res.cwiseAbs().maxCoeff();
    if (r_spot < r_hi) {
        out["u_at_R_equal_1"] = approx(cfg.t0, r_spot);
        out["u_at_R_equal_1_minus_half_pi"] = approx(cfg.t0, r_spot) - std::acos(-1.0) / 2;
    }

    if (approx.v1) {
        const auto& v1 = *approx.v1;
        write_profile(m.file("first_correction.csv"), v1.profile, cfg.nu,
                      {{"d1", v1.d1}, {"d2", v1.d2}, {"fit_residual", v1.fit_residual}});
        m.file("first_correction.json");
        const auto& e1 = *approx.e1;
        write_profile(m.file("first_error.csv"), e1.profile, cfg.nu,
                      {{"c", {e1.c(0), e1.c(1), e1.c(2), e1.c(3)}},
                       {"fit_residual", e1.fit_residual},
                       {"fit_range", {e1.fit_lo, e1.fit_hi}}});
        m.file("first_error.json");
        out["first_correction"] = {{"d1", v1.d1}, {"d2", v1.d2}, {"fit_residual", v1.fit_residual}};
        out["first_error"] = {{"c", {e1.c(0), e1.c(1), e1.c(2), e1.c(3)}}, {"fit_residual", e1.fit_residual}};
    }
    if (approx.v2) {
        const auto& s = *approx.v2;
        const Eigen::VectorXd a = uniform_grid(0, s.W1.a_max(), 401);
        auto col = [&](const SelfSimilarSolution& w) { return Eigen::VectorXd(a.unaryExpr([&](double x) { return w(x); })); };
        write_csv(m.file("second_correction.csv"), {"a", "W1", "W0", "Wt1", "Wt0"},
                  {a, col(s.W1), col(s.W0), col(s.Wt1), col(s.Wt0)});
        const double lo = 0.1, hi = s.W1.a_max();
        Json resid = Json::object();
        resid["W1"] = lbeta_residual(s.W1, SeriesRhs::polynomial({0.0, s.c(0)}), lo, hi, 200);
        resid["W0"] = lbeta_residual(s.W0, coupling_rhs(s.W1, cfg.nu, cfg.nu, 1, s.c(1)), lo, hi, 200);
        resid["Wt1"] = lbeta_residual(s.Wt1, SeriesRhs::polynomial({s.c(2)}), lo, hi, 200);
        resid["Wt0"] = lbeta_residual(s.Wt0, coupling_rhs(s.Wt1, cfg.nu, 2 * cfg.nu, 0, s.c(3)), lo, hi, 200);
        out["second_correction"] = {{"ode_residual", resid}};
    }
    if (verbose) log << "profile: order " << cfg.order << ", max |residual| " << g6(res.cwiseAbs().maxCoeff()) << "\n";
}

void run_spectral(const RunConfig& cfg, Manifest& m, std::ostream& log, bool verbose) {
    const auto opt = SpectralOptions::from(cfg.tol);
    const auto t = connection_and_measure(opt.xi_grid(), opt);
    write_spectral_tables(m.file("spectral_tables.csv"), t);
    m.results() = {{"hi_slope", t.hi_slope},
                   {"hi_intercept", t.hi_intercept},
                   {"low_model", {{"P", t.low_P}, {"Q", t.low_Q}, {"S", t.low_S}}},
                   {"xi_points", t.xi.size()}};
    if (verbose) log << "spectral: last-decade slope of rho " << g6(t.hi_slope) << "\n";
}

void run_parametrix(const RunConfig& cfg, Manifest& m, std::ostream& log, bool verbose) {
    const auto approx = assemble(params_of(cfg.nu), cfg.order, cfg.tol);
    const auto sopt = SpectralOptions::from(cfg.tol);
    const SpectralMeasure rho(connection_and_measure(sopt.xi_grid(), sopt));
    auto popt = ParametrixOptions::from(cfg.tol);
    popt.tail_rel = cfg.tol.zeroth_tail_rel;
    const auto& p = approx.params;
    const double tau0 = p.tau(cfg.t0), tau1 = p.tau(cfg.source_t_min);
    const auto z = zeroth_iterate(approx, log_grid(tau0, tau1, cfg.tau_slices), log_grid(tau0, tau1 / 10, cfg.tau_out),
                                  log_grid(cfg.xi_out_min, cfg.xi_out_max, cfg.xi_out), rho, sopt, popt);
    write_source(m.file("source.csv"), z.source);
    write_source(m.file("x0.csv"), z.x0);
    write_csv(m.file("x0_norms.csv"), {"tau", "norm"}, {z.x0.tau_grid, z.norms});

    const auto samples = latin_hypercube(cfg.bound_samples, cfg.seed, 1, 10, 10, 1e-3, 1e3);
    const auto b = bound_check(cfg.nu, samples, ParametrixOptions::from(cfg.tol));
    m.results() = {{"source_decay_N", z.source.decay_N},
                   {"x0_decay_N", z.x0.decay_N},
                   {"norm_decay_fit", z.decay_fit},
                   {"alpha", z.alpha},
                   {"bound", {{"C", b.C}, {"ratio_max", b.ratio_max}, {"C_half", b.C_half},
                              {"ratio_max_half", b.ratio_max_half}, {"dS_at_diagonal", b.dS_at_diagonal},
                              {"stable", b.stable}}}};
    if (verbose) log << "parametrix: source decay " << g6(z.source.decay_N) << ", bound C " << g6(b.C) << "\n";
}

SimulationOptions sim_options(const RunConfig& cfg) {
    SimulationOptions so;
    so.t0 = cfg.t0;
    so.r_max = cfg.sim_r_max;
    so.dr = cfg.sim_dr;
    so.cfl = cfg.sim_cfl;
    so.blend_fraction = cfg.tol.blend_fraction;
    so.underresolved = cfg.tol.underresolved;
    so.t_min = cfg.sim_t_min;
    so.samples = cfg.sim_samples;
    so.snapshot_times = cfg.snapshot_times;
    return so;
}

Json run_json(const SimulationRun& run, double nu) {
    Json j = {{"nu", nu}, {"target_p", 1 + nu}};
    if (run.fit_error.empty()) {
        j["fit"] = fit_json(run.rate.fit);
        j["relative_error"] = std::abs(run.rate.fit.p - (1 + nu)) / (1 + nu);
        j["span"] = run.rate.t.front() / run.rate.t.back();
        j["within_10_percent"] = std::abs(run.rate.fit.p - (1 + nu)) <= 0.1 * (1 + nu);
    } else {
        j["fit_error"] = run.fit_error;
    }
    j["samples"] = run.rate.t.size();
    j["energy_drift"] = run.energy_drift;
    j["t_stop"] = run.t_stop;
    j["stop_reason"] = run.reason.empty() ? "t_floor" : run.reason;
    j["steps"] = run.steps;
    j["seconds"] = run.seconds;
    return j;
}

void run_simulate(const RunConfig& cfg, Manifest& m, std::ostream& log, bool verbose) {
    const auto approx = assemble(params_of(cfg.nu), cfg.order, cfg.tol);
    const auto run = simulate(approx, sim_options(cfg));
    write_rate_series(m.file("rate.csv"), run.rate, run.eloc);
    char name[32];
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
        write_snapshot(m.file(name), run.snapshots[i]);
    }
    m.results() = run_json(run, cfg.nu);
    m.results()["snapshot_times"] = Json::array();
    for (const auto& s : run.snapshots) m.results()["snapshot_times"].push_back(s.t);
    if (!run.fit_error.empty()) m.warn(run.fit_error);
    if (verbose) log << "simulate: p " << g6(run.rate.fit.p) << " (target " << g6(1 + cfg.nu) << ")\n";
}

void run_verify_rate(const RunConfig& cfg, Manifest& m, std::ostream& log, bool verbose) {
    Json runs = Json::array();
    for (double nu : cfg.rate_nus) {
        const auto approx = assemble(params_of(nu), cfg.order, cfg.tol);
        auto so = sim_options(cfg);
        so.snapshot_times.clear();
        const auto run = simulate(approx, so);
        write_rate_series(m.file("rate_nu" + g6(nu) + ".csv"), run.rate, run.eloc);
        runs.push_back(run_json(run, nu));
        if (!run.fit_error.empty()) m.warn("nu=" + g6(nu) + ": " + run.fit_error);
        if (verbose) log << "verify-rate: nu " << g6(nu) << ", p " << g6(run.rate.fit.p) << "\n";
    }
    m.results() = {{"runs", runs}};
}

bool run_test_all(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    AcceptanceOptions opt;
    opt.tol = cfg.tol;
    opt.seed = cfg.seed;
    Json list = Json::array();
    bool all = true;
    run_acceptance(opt, [&](const CheckResult& r) {
        log << format_result(r) << "\n" << std::flush;
        list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"informational", r.informational},
                        {"detail", r.detail}, {"seconds", r.seconds}});
        all = all && (r.informational || r.pass);
    });
    write_json(m.file("acceptance.json"), list);
    m.results() = {{"all_passed", all}, {"criteria", list.size()}};
    return all;
}

Json error_record(const std::string& kind, const std::string& message) {
    return {{"error", kind}, {"message", message}};
}

} // namespace

std::string config_error_record(const ConfigError& e) {
    Json rec = error_record("config", "invalid configuration");
    rec["fields"] = e.fields();
    return rec.dump();
}

int dispatch(const RunConfig& cfg, std::ostream& log, std::ostream& err, bool verbose) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        err << config_error_record(e) << "\n";
        return exit_config;
    }
    static const char* known[] = {"profile", "spectral", "parametrix", "simulate", "verify-rate", "test-all"};
    if (std::find(std::begin(known), std::end(known), cfg.subcommand) == std::end(known)) {
        err << error_record("config", "unknown subcommand: " + cfg.subcommand).dump() << "\n";
        return exit_config;
    }

    Manifest m(cfg.out, cfg.subcommand);
    m.set_inputs(config_entries(cfg), cfg.seed);
    int code = exit_ok;
    try {
        if (cfg.subcommand == "profile") run_profile(cfg, m, log, verbose);
        else if (cfg.subcommand == "spectral") run_spectral(cfg, m, log, verbose);
        else if (cfg.subcommand == "parametrix") run_parametrix(cfg, m, log, verbose);
        else if (cfg.subcommand == "simulate") run_simulate(cfg, m, log, verbose);
        else if (cfg.subcommand == "verify-rate") run_verify_rate(cfg, m, log, verbose);
        else if (!run_test_all(cfg, m, log)) code = exit_checks_failed;
    } catch (const NumericalError& e) {
        Json rec = error_record("numerical", e.what());
        rec["module"] = e.module();
        m.write(rec);
        err << rec.dump() << "\n";
        return exit_numerical;
    } catch (const ContractViolation& e) {
        const Json rec = error_record("contract", e.what());
        m.write(rec);
        err << rec.dump() << "\n";
        return exit_config;
    }
    m.write(code == exit_ok ? Json("ok") : Json("checks failed"));
    return code;
}

} // namespace wml
