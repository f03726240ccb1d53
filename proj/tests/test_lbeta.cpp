#include <doctest.h>

#include <cmath>

#include "wml/approx_solution.hpp"
#include "wml/lbeta.hpp"

using namespace wml;

TEST_CASE("zero rhs with zero data gives zero") {
    for (Parity par : {Parity::odd, Parity::even}) {
        const auto W = solve_lbeta(0.5, SeriesRhs::zero(), par, par == Parity::odd ? 3 : 2);
        for (double a : {0.01, 0.3, 0.9, 0.99}) CHECK(W(a) == 0.0);
    }
}

TEST_CASE("homogeneous regular solution from Frobenius data") {
    const auto W = solve_lbeta(0.5, SeriesRhs::zero(), Parity::odd, 1, 1.0);
    CHECK(W.coefficient(1) == 1.0);
    CHECK(lbeta_residual(W, SeriesRhs::zero(), 0.05, 0.99, 50) < 1e-8);
    CHECK_THROWS_AS(solve_lbeta(0.5, SeriesRhs::zero(), Parity::even, 2, 1.0), NumericalError);
    // a constant source cannot feed an odd expansion
    CHECK_THROWS_AS(solve_lbeta(0.5, SeriesRhs::polynomial({1}), Parity::odd, 3), NumericalError);
}

TEST_CASE("back-substitution at the collocation points") {
    const double delta = Tolerances{}.delta_edge;
    for (double beta : {0.25, 0.5, 2.0}) {
        const auto rhs = SeriesRhs::polynomial({0, 1.3, 0, -0.4});
        const auto W = solve_lbeta(beta, rhs, Parity::odd, 3);
        for (double a : {0.1, 0.3, 0.5, 0.7, 0.9 * (1 - delta)}) {
            const auto [w, dw, d2w] = W.eval(a);
            CHECK(std::abs(apply_lbeta(beta, a, w, dw, d2w) - rhs.value(a)) < 1e-6);
        }
    }
}

TEST_CASE("back-substitution by finite differences") {
    const auto rhs = SeriesRhs::polynomial({2.0, 0, 1});
    const auto W = solve_lbeta(1.0, rhs, Parity::even, 2);
    for (double a : {0.2, 0.6, 0.95}) {
        const double h = 1e-4;
        const double d1 = (W(a + h) - W(a - h)) / (2 * h), d2 = (W(a + h) - 2 * W(a) + W(a - h)) / (h * h);
        CHECK(apply_lbeta(1.0, a, W(a), d1, d2) == doctest::Approx(rhs.value(a)).epsilon(1e-5));
    }
}

TEST_CASE("linearity in the rhs") {
    const auto A = SeriesRhs::polynomial({0, 1}), B = SeriesRhs::polynomial({0, 0, 0, 1});
    const auto C = SeriesRhs::polynomial({0, 2, 0, -3});
    const auto wa = solve_lbeta(0.6, A, Parity::odd, 3), wb = solve_lbeta(0.6, B, Parity::odd, 3),
               wc = solve_lbeta(0.6, C, Parity::odd, 3);
    for (double a : {0.05, 0.4, 0.8, 0.99}) CHECK(std::abs(wc(a) - 2 * wa(a) + 3 * wb(a)) < 1e-8 * std::abs(wc(a)) + 1e-14);
}

TEST_CASE("parity of the Frobenius series") {
    const auto odd = solve_lbeta(0.5, SeriesRhs::polynomial({0, 1}), Parity::odd, 3);
    const auto even = solve_lbeta(1.0, SeriesRhs::polynomial({1}), Parity::even, 2);
    for (std::size_t k = 0; k < odd.series.size(); ++k) {
        if (k % 2 == 0 || k < 3) CHECK(odd.coefficient(k) == 0.0);
        if (k % 2 == 1 || k < 2) CHECK(even.coefficient(k) == 0.0);
    }
    // the indicial equation gives 8 w_3 = 1 and 3 w_2 = 1
    CHECK(odd.coefficient(3) == doctest::Approx(1.0 / 8));
    CHECK(even.coefficient(2) == doctest::Approx(1.0 / 3));
    CHECK(odd(-0.3) == -odd(0.3));
    CHECK(even(-0.3) == even(0.3));
}

TEST_CASE("edge exponent beta + 1/2 at the light cone") {
    // W = g0 + g1 (1 - a)^{beta + 1/2}, so W'' ~ (1 - a)^{beta - 3/2}
    for (double beta : {0.25, 0.5}) {
        const auto W = solve_lbeta(beta, SeriesRhs::polynomial({0, 1}), Parity::odd, 3);
        const double s1 = 1e-2, s2 = 1.2e-3;
        const double slope = std::log(std::abs(W.eval(1 - s2)[2] / W.eval(1 - s1)[2])) / std::log(s2 / s1);
        CHECK(slope == doctest::Approx(beta - 1.5).epsilon(0.05));
    }
}

TEST_CASE("second-correction components solve the matched system") {
    BlowupParams p;
    p.nu = 0.5;
    const auto approx = assemble(p, 2);
    const auto& s = *approx.v2;
    const double lo = 0.1, hi = s.W1.a_max();
    // the a c1 source of W1 carries no coupling term
    CHECK(lbeta_residual(s.W1, SeriesRhs::polynomial({0, s.c(0)}), lo, hi, 50) < 1e-6);
    CHECK(lbeta_residual(s.W0, coupling_rhs(s.W1, 0.5, 0.5, 1, s.c(1)), lo, hi, 50) < 1e-6);
    CHECK(lbeta_residual(s.Wt1, SeriesRhs::polynomial({s.c(2)}), lo, hi, 50) < 1e-6);
    CHECK(lbeta_residual(s.Wt0, coupling_rhs(s.Wt1, 0.5, 1.0, 0, s.c(3)), lo, hi, 50) < 1e-6);
    CHECK(s.W1.beta == 0.5);
    CHECK(s.Wt1.beta == 1.0);
}
