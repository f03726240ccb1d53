#include "wml/lbeta.hpp"

#include <algorithm>
#include <string>

namespace wml {

namespace {

const char* kModule = "profile_builder";

double taylor_at(const std::vector<double>& c, std::size_t k) { return k < c.size() ? c[k] : 0.0; }

double horner(const std::vector<double>& c, double a) {
    double s = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * a + *it;
    return s;
}

} // namespace

SeriesRhs SeriesRhs::polynomial(std::vector<double> coeffs) {
    SeriesRhs r;
    r.taylor = coeffs;
    r.value = [c = std::move(coeffs)](double a) { return horner(c, a); };
    return r;
}

LBetaOptions LBetaOptions::from(const Tolerances& tol) {
    LBetaOptions o;
    o.series_order = tol.frobenius_order;
    o.a_switch = tol.a_switch;
    o.delta_edge = tol.delta_edge;
    o.nodes = tol.a_nodes;
    o.ode.rel = tol.ode_rel;
    o.ode.abs = tol.ode_abs;
    return o;
}

std::array<double, 3> SelfSimilarSolution::eval_series(double a) const {
    double v = 0, d = 0, dd = 0;
    for (int k = static_cast<int>(series.size()) - 1; k >= 0; --k) {
        dd = dd * a + 2 * d;
        d = d * a + v;
        v = v * a + series[k];
    }
    return {v, d, dd};
}

std::array<double, 3> SelfSimilarSolution::eval(double a) const {
    if (a < 0) {
        auto r = eval(-a);
        if (parity == Parity::odd) return {-r[0], r[1], -r[2]};
        return {r[0], -r[1], r[2]};
    }
    if (a > a_max_ * (1 + 1e-14))
        throw ContractViolation("SelfSimilarSolution: a=" + std::to_string(a) + " beyond the table edge " +
                                std::to_string(a_max_));
    if (a <= a_switch_ || table_.empty()) return eval_series(a);
    const double y = -std::log1p(-a);
    const auto [v, vy, vyy] = table_.eval(y);
    // dW/dy = (1-a) W',  d2W/dy2 = (1-a)^2 W'' - (1-a) W'
    const double e = 1 - a;
    const double d1 = vy / e;
    const double d2 = (vyy + vy) / (e * e);
    return {v, d1, d2};
}

SelfSimilarSolution solve_lbeta(double beta, const SeriesRhs& rhs, Parity parity, int leading,
                                double frobenius_data, const LBetaOptions& opt) {
    require(std::isfinite(beta), "solve_lbeta: beta must be finite");
    require(static_cast<bool>(rhs.value), "solve_lbeta: rhs has no pointwise evaluator");
    require(opt.a_switch > 0 && opt.a_switch < 0.5, "solve_lbeta: a_switch must lie in (0, 0.5)");
    require(opt.delta_edge > 0 && opt.delta_edge < 0.5, "solve_lbeta: delta_edge must lie in (0, 0.5)");
    require(opt.nodes >= 8 && opt.series_order >= 2, "solve_lbeta: too few nodes or series terms");
    const bool odd = parity == Parity::odd;
    if (leading < 1 || (leading % 2 == 1) != odd)
        throw NumericalError(kModule, "solve_lbeta: leading order " + std::to_string(leading) +
                                          " does not match the declared parity");
    if (frobenius_data != 0 && !(odd && leading == 1))
        throw NumericalError(kModule, "solve_lbeta: nonzero Frobenius datum is incompatible with leading order " +
                                          std::to_string(leading) + " (indicial roots are +1 and -1)");

    double scale = 0;
    for (double c : rhs.taylor) scale = std::max(scale, std::abs(c));
    const double zero_tol = 1e-13 * std::max(1.0, scale);
    for (std::size_t n = 0; n < rhs.taylor.size(); ++n) {
        const bool wrong_parity = (n % 2 == 0) == odd; // rhs_n feeds w_{n+2}
        const bool below_leading = static_cast<int>(n) + 2 < leading;
        if ((wrong_parity || below_leading) && std::abs(rhs.taylor[n]) > zero_tol)
            throw NumericalError(kModule, "solve_lbeta: rhs Taylor coefficient a^" + std::to_string(n) + " = " +
                                              std::to_string(rhs.taylor[n]) +
                                              (wrong_parity ? " violates the declared parity"
                                                            : " is incompatible with the declared leading order"));
    }

    SelfSimilarSolution sol;
    sol.beta = beta;
    sol.parity = parity;
    sol.leading_order = leading;
    sol.a_switch_ = opt.a_switch;
    sol.a_max_ = 1 - opt.delta_edge;
    const std::size_t K = static_cast<std::size_t>(leading + 2 * opt.series_order + 6);
    sol.series.assign(K + 1, 0.0);
    if (odd) sol.series[1] = frobenius_data;
    for (std::size_t m = 2; m <= K; ++m) {
        const double n = static_cast<double>(m) - 2;
        sol.series[m] = (taylor_at(rhs.taylor, m - 2) + (n - beta) * (n + 1 - beta) * sol.series[m - 2]) /
                        ((n + 1) * (n + 3));
    }
    sol.series_terms_ = static_cast<int>(K + 1);

    // the pointwise rhs must agree with its Taylor data inside the series region
    {
        const double probe = 0.5 * opt.a_switch;
        const double tv = horner(rhs.taylor, probe), fv = rhs.value(probe);
        if (std::abs(tv - fv) > 1e-8 * std::max(1.0, std::abs(fv)))
            throw NumericalError(kModule, "solve_lbeta: rhs values and Taylor coefficients disagree at a=" +
                                              std::to_string(probe));
    }

    const int n = opt.nodes;
    const double y0 = -std::log1p(-opt.a_switch), y1 = -std::log(opt.delta_edge);
    const Eigen::VectorXd ys = uniform_grid(y0, y1, n);
    sol.a_nodes.resize(n);
    for (int i = 0; i < n; ++i) sol.a_nodes(i) = -std::expm1(-ys(i));
    sol.a_nodes(0) = opt.a_switch;
    sol.w.resize(n);
    sol.dw.resize(n);
    sol.d2w.resize(n);

    auto second = [&](double a, double W, double dW) {
        return (rhs.value(a) - (1 / a + 2 * (beta - 1) * a) * dW - (beta - beta * beta - 1 / (a * a)) * W) /
               (1 - a * a);
    };
    using State = std::array<double, 2>;
    auto ode = [&](const State& s, double a) { return State{s[1], second(a, s[0], s[1])}; };
    const auto start = sol.eval_series(opt.a_switch);
    std::vector<double> stops(sol.a_nodes.data() + 1, sol.a_nodes.data() + n);
    sol.w(0) = start[0];
    sol.dw(0) = start[1];
    sol.d2w(0) = second(opt.a_switch, start[0], start[1]);
    OdeOptions o = opt.ode;
    if (o.first_step == 0) o.first_step = 1e-4;
    integrate_through<2>(
        ode, State{start[0], start[1]}, opt.a_switch, std::span<const double>(stops),
        [&](std::size_t i, double a, const State& s) {
            sol.w(i + 1) = s[0];
            sol.dw(i + 1) = s[1];
            sol.d2w(i + 1) = second(a, s[0], s[1]);
        },
        o, kModule);

    Eigen::VectorXd vy(n), vyy(n);
    for (int i = 0; i < n; ++i) {
        const double e = 1 - sol.a_nodes(i);
        vy(i) = e * sol.dw(i);
        vyy(i) = e * e * sol.d2w(i) - e * sol.dw(i);
    }
    Eigen::VectorXd yk = ys;
    sol.table_ = QuinticHermite(yk, sol.w, vy, vyy);
    return sol;
}

double lbeta_residual(const SelfSimilarSolution& sol, const SeriesRhs& rhs, double lo, double hi, int n) {
    require(lo > 0 && hi <= sol.a_max() && lo < hi && n >= 2, "lbeta_residual: bad sampling range");
    double m = 0;
    for (int i = 0; i < n; ++i) {
        const double a = lo + (hi - lo) * i / (n - 1);
        const auto [W, dW, d2W] = sol.eval(a);
        m = std::max(m, std::abs(apply_lbeta(sol.beta, a, W, dW, d2W) - rhs.value(a)));
    }
    return m;
}

} // namespace wml
