#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wml/approx_solution.hpp"
#include "wml/wave.hpp"

using namespace wml;

namespace {

ApproxSolution approx_for(double nu, int order) {
    BlowupParams p;
    p.nu = nu;
    return assemble(p, order);
}

WaveField static_q(double lam, double r_max, int n) {
    WaveField f;
    f.t = 1;
    f.r = cell_centred_grid(r_max, n);
    f.u = f.r.unaryExpr([&](double x) { return ground_state(lam * x); });
    f.ut = Eigen::VectorXd::Zero(n);
    return f;
}

double deviation_after_unit_time(int n) {
    const auto f = static_q(1, 8, n);
    EvolveOptions opt;
    opt.lambda_out = 1;
    const auto res = evolve(f, 0, opt);
    return (res.last.u - f.u).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("order 0 initial data is the rescaled ground state") {
    const auto a = approx_for(0.5, 0);
    const auto f = init_from_profile(a, 0.5, 1.5, 1e-3);
    const double lam = a.params.lambda(0.5);
    for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(f.u(i) == doctest::Approx(ground_state(lam * f.r(i))).epsilon(1e-14));
    CHECK(a(0.5, 0.0) == 0.0);
    CHECK(std::abs(f.u(0) / f.r(0)) < 2 * lam);
}

TEST_CASE("blend must be resolved") {
    CHECK_THROWS_AS(init_from_profile(approx_for(0.5, 2), 0.5, 1.5, 0.01), NumericalError);
}

TEST_CASE("initial energy is closer to 4 deep in the blow-up regime") {
    const auto a = approx_for(0.5, 2);
    const double e1 = reduced_energy(init_from_profile(a, 0.5, 1.5, 2.5e-4));
    const double e2 = reduced_energy(init_from_profile(a, 0.25, 0.75, 1.25e-4));
    const double e3 = reduced_energy(init_from_profile(a, 0.02, 0.06, 1e-5));
    CHECK(std::abs(e3 - 4) < std::abs(e1 - 4));
}

TEST_CASE("static ground state is preserved to second order") {
    const double d1 = deviation_after_unit_time(400), d2 = deviation_after_unit_time(800);
    CHECK(d1 < 1e-3);
    CHECK(d1 / d2 == doctest::Approx(4).epsilon(0.2));
}

TEST_CASE("time reversal") {
    const auto a = approx_for(0.5, 2);
    const auto f = init_from_profile(a, 0.5, 1.5, 1e-3);
    EvolveOptions opt;
    opt.lambda_out = a.params.lambda(0.5);
    const auto fwd = evolve(f, 0.45, opt);
    const auto back = evolve(fwd.last, 0.5, opt);
    CHECK(back.last.t == doctest::Approx(0.5));
    CHECK((back.last.u - f.u).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("evolve stops on request and records snapshots") {
    const auto f = static_q(1, 4, 200);
    EvolveOptions opt;
    opt.lambda_out = 1;
    int calls = 0;
    const auto res = evolve(f, 0, opt, {0.9, 0.5}, [&](const WaveField&) { return ++calls < 50; });
    CHECK(res.truncated);
    CHECK(res.reason == "observer");
    CHECK(res.steps == 50);
    CHECK(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].t == doctest::Approx(0.9).epsilon(0.01));
}

TEST_CASE("extract_lambda on an exact profile") {
    for (double lam : {1.0, 7.0, 30.0}) {
        const auto f = static_q(lam, 2, 4000);
        CHECK(std::abs(extract_lambda(f) - lam) <= f.dr() * lam * lam);
        auto g = f;
        for (Eigen::Index i = 0; i < g.size(); ++i)
            if (g.r(i) > 2 / lam) g.u(i) += 0.3 * std::sin(g.r(i));
        CHECK(extract_lambda(g) == extract_lambda(f));
    }
    auto flat = static_q(1, 2, 100);
    flat.u.setZero();
    CHECK_THROWS_AS(extract_lambda(flat), NumericalError);
}

TEST_CASE("rate fit on synthetic series") {
    RateSeries exact, noisy;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0, 0.05);
    for (double t : log_grid(1e-3, 1e-1, 30)) {
        exact.push(t, std::pow(t, -1.5));
        noisy.push(t, 2 * std::pow(t, -1.5) * (1 + noise(rng)));
    }
    const auto e = rate_fit(exact);
    CHECK(e.p == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(e.A == doctest::Approx(1).epsilon(1e-10));
    CHECK(std::abs(rate_fit(noisy).p - 1.5) < 0.05);

    RateSeries shortspan;
    for (double t : log_grid(0.1, 0.3, 10)) shortspan.push(t, 1 / t);
    CHECK_THROWS_AS(rate_fit(shortspan), NumericalError);
}

TEST_CASE("local error energy of an exact profile vanishes") {
    const double t = 0.2, lam = 40;
    auto f = static_q(lam, 1, 20000);
    f.t = t;
    const double p = 2;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double R = lam * f.r(i);
        f.ut(i) = -ground_state_slope(R) * R * p / t;
    }
    CHECK(local_error_energy(f, lam, p) < 1e-12);
}

TEST_CASE("simulation conserves energy until under-resolution") {
    const auto a = approx_for(1.0, 2);
    SimulationOptions so;
    so.dr = 1e-3;
    so.samples = 16;
    so.snapshot_times = {0.5, 0.2};
    const auto run = simulate(a, so);
    CHECK(run.energy_drift < 5e-3);
    CHECK(run.snapshots.size() == 2);
    CHECK(run.rate.t.size() >= 8);
    for (std::size_t i = 1; i < run.rate.t.size(); ++i) CHECK(run.rate.t[i] < run.rate.t[i - 1]);
}

TEST_CASE("simulated lambda t^2 stays in a factor-2 band for nu = 1" * doctest::may_fail()) {
    const auto run = simulate(approx_for(1.0, 2), SimulationOptions{});
    double lo = INFINITY, hi = 0;
    for (std::size_t i = 0; i < run.rate.t.size(); ++i) {
        const double v = run.rate.lambda[i] * run.rate.t[i] * run.rate.t[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(run.rate.t.front() / run.rate.t.back() >= 10);
    CHECK(lo >= 0.5);
    CHECK(hi <= 2);
}

TEST_CASE("simulated nu = 0.25 rate within 10% of 1.25" * doctest::may_fail()) {
    const auto run = simulate(approx_for(0.25, 2), SimulationOptions{});
    REQUIRE(run.fit_error.empty());
    CHECK(run.rate.fit.p == doctest::Approx(1.25).epsilon(0.1));
}

TEST_CASE("local error energy ratio has no growth trend along a run") {
    const auto run = simulate(approx_for(0.5, 2), SimulationOptions{});
    REQUIRE(run.eloc.size() >= 8);
    int rising = 0;
    for (std::size_t i = 1; i < run.eloc.size(); ++i) rising += run.eloc[i] > run.eloc[i - 1];
    CHECK(rising < static_cast<int>(run.eloc.size()) / 2);
    CHECK(run.eloc.back() <= run.eloc.front());
}

TEST_CASE("order 2 data has smaller local error energy than order 0 data" * doctest::may_fail()) {
    auto eloc = [](int order) {
        const auto a = approx_for(0.5, order);
        const auto f = init_from_profile(a, 0.5, 1.5, 2e-4);
        return local_error_energy(f, extract_lambda(f), 1.5);
    };
    CHECK(eloc(2) < eloc(0));
}
