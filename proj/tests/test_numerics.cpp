#include <doctest.h>

#include <cmath>

#include "wml/numerics.hpp"

using namespace wml;

TEST_CASE("Gauss-Legendre is exact to degree 2n - 1") {
    const auto q = gauss_legendre(8);
    for (int k = 0; k <= 15; ++k) {
        double s = 0;
        for (Eigen::Index i = 0; i < q.nodes.size(); ++i) s += q.weights(i) * std::pow(q.nodes(i), k);
        const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1));
    }
    const auto c = composite_gauss(0, 3, 4);
    CHECK(c.weights.sum() == doctest::Approx(3).epsilon(1e-14));
}

TEST_CASE("Simpson weights integrate cubics exactly") {
    for (int n : {5, 6, 9, 10}) {
        const double h = 2.0 / (n - 1);
        const Eigen::VectorXd w = simpson_weights(n, h);
        const Eigen::VectorXd x = uniform_grid(0, 2, n);
        CHECK(w.dot(x.array().cube().matrix()) == doctest::Approx(4).epsilon(1e-13));
    }
}

TEST_CASE("grids") {
    const auto g = log_grid(1e-2, 1e2, 5);
    CHECK(g(0) == doctest::Approx(1e-2));
    CHECK(g(2) == doctest::Approx(1.0));
    CHECK(g(4) == doctest::Approx(1e2));
    CHECK(uniform_grid(0, 1, 3)(1) == doctest::Approx(0.5));
}

TEST_CASE("cubic spline reproduces a cubic with exact end slopes") {
    const Eigen::VectorXd x = uniform_grid(0, 2, 9);
    auto f = [](double t) { return t * t * t - 2 * t + 1; };
    CubicSpline s(x, x.unaryExpr(f), -2, 10);
    for (double t : {0.1, 0.77, 1.5, 1.99}) {
        CHECK(s(t) == doctest::Approx(f(t)).epsilon(1e-12));
        CHECK(s.derivative(t) == doctest::Approx(3 * t * t - 2).epsilon(1e-11));
    }
}

TEST_CASE("quintic Hermite reproduces a quintic") {
    const Eigen::VectorXd x = uniform_grid(-1, 1, 4);
    auto f = [](double t) { return std::pow(t, 5) - t * t; };
    auto df = [](double t) { return 5 * std::pow(t, 4) - 2 * t; };
    auto d2f = [](double t) { return 20 * std::pow(t, 3) - 2; };
    QuinticHermite q(x, x.unaryExpr(f), x.unaryExpr(df), x.unaryExpr(d2f));
    for (double t : {-0.9, 0.05, 0.8}) {
        const auto v = q.eval(t);
        CHECK(v[0] == doctest::Approx(f(t)).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(df(t)).epsilon(1e-11));
        CHECK(v[2] == doctest::Approx(d2f(t)).epsilon(1e-10));
    }
}

TEST_CASE("least squares and line fit") {
    Eigen::MatrixXd A(4, 2);
    A << 1, 0, 1, 1, 1, 2, 1, 3;
    const Eigen::VectorXd y = A * Eigen::Vector2d(0.5, -2);
    const auto fit = least_squares(A, y);
    CHECK(fit.coeffs(0) == doctest::Approx(0.5));
    CHECK(fit.coeffs(1) == doctest::Approx(-2));
    CHECK(fit.relative_residual < 1e-14);
    const auto line = fit_line(A.col(1), y);
    CHECK(line.slope == doctest::Approx(-2));
    CHECK(line.intercept == doctest::Approx(0.5));
}

TEST_CASE("adaptive quadrature on short and long intervals") {
    auto f = [](double x) { return x; };
    CHECK(integrate_adaptive(f, 0, 1e-6, 1e-30, 1e-12, "test") == doctest::Approx(5e-13).epsilon(1e-12));
    CHECK(integrate_adaptive([](double x) { return std::exp(-x); }, 0, 40, 1e-14, 1e-12, "test") ==
          doctest::Approx(1 - std::exp(-40.0)).epsilon(1e-12));
    CHECK(integrate_adaptive([](double x) { return std::cos(x); }, 0, 1e-9, 1e-30, 1e-12, "test") ==
          doctest::Approx(std::sin(1e-9)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature reports its module on failure") {
    try {
        integrate_adaptive([](double x) { return std::sin(1 / x) / x; }, 1e-12, 1, 1e-30, 1e-15, "probe");
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.module() == "probe");
    }
}

TEST_CASE("Fehlberg integrator on the harmonic oscillator") {
    auto rhs = [](const std::array<double, 2>& x, double) { return std::array<double, 2>{x[1], -x[0]}; };
    const auto x = integrate_to<2>(rhs, {0.0, 1.0}, 0, 10, OdeOptions{}, "test");
    CHECK(x[0] == doctest::Approx(std::sin(10.0)).epsilon(1e-10));
    const auto back = integrate_to<2>(rhs, {0.0, 1.0}, 0, -3, OdeOptions{}, "test");
    CHECK(back[0] == doctest::Approx(std::sin(-3.0)).epsilon(1e-10));
}

TEST_CASE("parallel_for visits each index once and forwards exceptions") {
    std::vector<int> hits(100, 0);
    parallel_for(100, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](int i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a("", 0) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
}
