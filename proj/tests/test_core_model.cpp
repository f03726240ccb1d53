#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wml/core_model.hpp"

using namespace wml;
using std::numbers::pi;

namespace {

WaveField slice(double t, const Eigen::VectorXd& r, const std::function<double(double, double)>& u) {
    WaveField f;
    f.t = t;
    f.r = r;
    f.u = r.unaryExpr([&](double x) { return u(t, x); });
    f.ut = Eigen::VectorXd::Zero(r.size());
    return f;
}

double max_residual(double dr, const std::function<double(double, double)>& u, double lo, double hi) {
    const Eigen::VectorXd r = cell_centred_grid(hi, static_cast<int>(std::lround(hi / dr)));
    const double dt = dr;
    const auto res = pde_residual(slice(1 - dt, r, u), slice(1, r, u), slice(1 + dt, r, u));
    double m = 0;
    for (Eigen::Index i = 0; i < res.grid.size(); ++i)
        if (res.grid(i) >= lo) m = std::max(m, std::abs(res.values(i)));
    return m;
}

} // namespace

TEST_CASE("ground state values") {
    CHECK(ground_state(0.0) == 0.0);
    CHECK(ground_state(1.0) == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(std::abs(ground_state(1e3) - pi) < 2e-3);
    CHECK(ground_state_slope(0.0) == 2.0);
}

TEST_CASE("double-angle identities of Q") {
    for (double R : {1e-3, 0.3, 1.0, 2.5, 40.0}) {
        CHECK(cos_2q(R) == doctest::Approx(std::cos(2 * ground_state(R))).epsilon(1e-13));
        CHECK(sin_2q(R) == doctest::Approx(std::sin(2 * ground_state(R))).epsilon(1e-13));
    }
}

TEST_CASE("e0 closed form examples") {
    CHECK(e0_closed_form(1, 1, 1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(e0_closed_form(2, 1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    for (double nu : {0.1, 0.5, 3.0}) CHECK(e0_closed_form(0.7, 0, nu) == 0.0);
    CHECK_THROWS_AS(e0_closed_form(0, 1, 1), ContractViolation);
}

TEST_CASE("e0 scales as t^-2 at fixed R") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 1);
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng), R = 10 * u(rng), nu = 2 * u(rng);
        CHECK(e0_closed_form(t, R, nu) * t * t == doctest::Approx(e0_scaled(R, nu)).epsilon(1e-13));
    }
}

TEST_CASE("pde residual of the zero field vanishes exactly") {
    const Eigen::VectorXd r = cell_centred_grid(1, 50);
    auto zero = [](double, double) { return 0.0; };
    const auto res = pde_residual(slice(0.9, r, zero), slice(1, r, zero), slice(1.1, r, zero));
    CHECK(res.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pde residual of static Q is second order in dr") {
    auto Q = [](double, double r) { return ground_state(r); };
    const double e1 = max_residual(0.02, Q, 0.2, 4), e2 = max_residual(0.01, Q, 0.2, 4);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 == doctest::Approx(4).epsilon(0.1));
}

TEST_CASE("pde residual of Q(lambda(t) r) matches e0") {
    for (double nu : {0.25, 1.0}) {
        BlowupParams p;
        p.nu = nu;
        const double t = 0.5, lam = p.lambda(t);
        for (double R : {0.2, 0.6, 1.1}) {
            const double x = R / lam, h = 2e-3;
            Eigen::VectorXd r(3);
            r << x * (1 - h), x, x * (1 + h);
            auto u = [&](double tt, double rr) { return ground_state(p.lambda(tt) * rr); };
            const auto res = pde_residual(slice(t - h * t, r, u), slice(t, r, u), slice(t + h * t, r, u));
            CHECK(res.values(0) == doctest::Approx(e0_closed_form(t, R, nu)).epsilon(1e-3));
        }
    }
}

TEST_CASE("pde residual rejects mismatched slices") {
    const Eigen::VectorXd r = cell_centred_grid(1, 10);
    auto zero = [](double, double) { return 0.0; };
    CHECK_THROWS_AS(pde_residual(slice(0.9, r, zero), slice(1, r, zero), slice(1.2, r, zero)), ContractViolation);
}

TEST_CASE("reduced energy of the ground state is 4") {
    const Eigen::VectorXd r = cell_centred_grid(2000, 400000);
    WaveField f;
    f.r = r;
    f.ut = Eigen::VectorXd::Zero(r.size());
    f.u = Eigen::VectorXd::Zero(r.size());
    CHECK(reduced_energy(f) == 0.0);
    for (double lam : {1.0, 10.0}) {
        f.u = r.unaryExpr([&](double x) { return ground_state(lam * x); });
        // the exterior beyond r_max carries 4 / (1 + (lam r_max)^2)
        CHECK(reduced_energy(f) == doctest::Approx(4 - 4 / (1 + std::pow(lam * 2000, 2))).epsilon(2e-4));
    }
}

TEST_CASE("reduced energy restricted to a ball") {
    const Eigen::VectorXd r = cell_centred_grid(50, 50000);
    WaveField f;
    f.r = r;
    f.ut = Eigen::VectorXd::Zero(r.size());
    f.u = r.unaryExpr([](double x) { return ground_state(x); });
    // int_0^1 8r/(1+r^2)^2 dr = 2
    CHECK(reduced_energy(f, 1.0) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(reduced_energy(f, 0.0) == 0.0);
}

TEST_CASE("self-similar context") {
    BlowupParams p;
    p.nu = 0.5;
    const auto c = make_context(p, 0.25, 0.1);
    CHECK(c.a == doctest::Approx(0.4));
    CHECK(c.R == doctest::Approx(p.lambda(0.25) * 0.1));
    CHECK(p.lambda_of_tau(p.tau(0.3)) == doctest::Approx(p.lambda(0.3)).epsilon(1e-13));
    CHECK(p.t_of_tau(p.tau(0.3)) == doctest::Approx(0.3).epsilon(1e-13));
}
