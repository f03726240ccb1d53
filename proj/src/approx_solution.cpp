#include "wml/approx_solution.hpp"

#include <limits>
#include <string>

namespace wml {

SeriesRhs coupling_rhs(const SelfSimilarSolution& W, double nu, double gamma, int power, double c) {
    const double k0 = (1 + nu) * (2 * gamma - 1);
    SeriesRhs r;
    r.value = [&W, nu, k0, power, c](double a) {
        const auto [w, dw, d2w] = W.eval(a);
        (void)d2w;
        return c * std::pow(a, power) - (k0 * w + 2 * (1 / a - (1 + nu) * a) * dw);
    };
    const std::size_t K = W.series.size() >= 2 ? W.series.size() - 2 : 0;
    r.taylor.assign(K, 0.0);
    for (std::size_t n = 0; n < K; ++n) {
        const double F = (k0 - 2 * (1 + nu) * static_cast<double>(n)) * W.coefficient(n) +
                         2 * static_cast<double>(n + 2) * W.coefficient(n + 2);
        r.taylor[n] = -F;
    }
    if (static_cast<std::size_t>(power) < K) r.taylor[power] += c;
    return r;
}

SecondCorrection second_correction(double nu, const Eigen::Vector4d& c, const LBetaOptions& opt) {
    require(nu > 0, "second_correction: nu must be positive");
    SecondCorrection s;
    s.nu = nu;
    s.c = c;
    s.W1 = solve_lbeta(nu, SeriesRhs::polynomial({0.0, c(0)}), Parity::odd, 3, 0.0, opt);
    s.W0 = solve_lbeta(nu, coupling_rhs(s.W1, nu, nu, 1, c(1)), Parity::odd, 3, 0.0, opt);
    s.Wt1 = solve_lbeta(2 * nu, SeriesRhs::polynomial({c(2)}), Parity::even, 2, 0.0, opt);
    s.Wt0 = solve_lbeta(2 * nu, coupling_rhs(s.Wt1, nu, 2 * nu, 0, c(3)), Parity::even, 2, 0.0, opt);
    return s;
}

double FieldJet::residual(double r) const {
    if (r <= 0) return 0.0;
    return utt - urr - ur / r + std::sin(2 * u) / (2 * r * r);
}

namespace {

// f, x f', x (x f')' for a function of one self-similar variable
struct Jet1 {
    double v = 0, d1 = 0, d2 = 0;
};

Jet1 operator*(const Jet1& f, const Jet1& g) {
    return {f.v * g.v, f.d1 * g.v + f.v * g.d1, f.d2 * g.v + 2 * f.d1 * g.d1 + f.v * g.d2};
}

Jet1 from_derivatives(double x, double f, double df, double d2f) {
    return {f, x * df, x * df + x * x * d2f};
}

// Accumulates t^alpha A(a) B(R) in terms of t d/dt and r d/dr.
struct Accumulator {
    double q; // R = r t^{-q}
    double v = 0, T1 = 0, T2 = 0, S1 = 0, S2 = 0;
    void add(double t, double alpha, const Jet1& A, const Jet1& B) {
        const double p = std::pow(t, alpha);
        const double AB = A.v * B.v;
        v += p * AB;
        S1 += p * (A.d1 * B.v + A.v * B.d1);
        S2 += p * (A.d2 * B.v + 2 * A.d1 * B.d1 + A.v * B.d2);
        const double t1 = alpha * AB - A.d1 * B.v - q * A.v * B.d1;
        T1 += p * t1;
        T2 += p * (alpha * alpha * AB - 2 * alpha * (A.d1 * B.v + q * A.v * B.d1) +
                   (A.d2 * B.v + 2 * q * A.d1 * B.d1 + q * q * A.v * B.d2));
    }
};

Jet1 self_similar(const SelfSimilarSolution& W, double a) {
    const auto [w, dw, d2w] = W.eval(a);
    return from_derivatives(a, w, dw, d2w);
}

} // namespace

double ApproxSolution::max_radius(double t) const {
    if (order < 2) return std::numeric_limits<double>::infinity();
    return v2->W1.a_max() * t;
}

FieldJet ApproxSolution::jet(double t, double r) const {
    require(t > 0, "ApproxSolution: t must be positive");
    if (r < 0) {
        auto j = jet(t, -r);
        return {-j.u, -j.ut, -j.utt, j.ur, -j.urr};
    }
    if (r > max_radius(t))
        throw ContractViolation("ApproxSolution: r=" + std::to_string(r) + " outside r <= (1-delta) t at t=" +
                                std::to_string(t));
    const double nu = params.nu, q = 1 + nu;
    const double R = params.lambda(t) * r;
    const double a = r / t;
    Accumulator acc{q};
    const Jet1 one{1, 0, 0};
    {
        const double s = 1 + R * R;
        acc.add(t, 0, one, Jet1{ground_state(R), 2 * R / s, 2 * R * (1 - R * R) / (s * s)});
    }
    if (order >= 1) {
        const auto [g, dg, d2g] = v1->jet(R);
        acc.add(t, 2 * nu, one, from_derivatives(R, g, dg, d2g));
    }
    if (order >= 2 && r > 0) {
        const double s = 1 + R * R;
        const Jet1 L{0.5 * std::log1p(R * R), R * R / s, 2 * R * R / (s * s)};
        const Jet1 P{R / std::sqrt(s), R / (s * std::sqrt(s)), R * (1 - 2 * R * R) / (s * s * std::sqrt(s))};
        acc.add(t, nu, self_similar(v2->W1, a), L);
        acc.add(t, nu, self_similar(v2->W0, a), one);
        acc.add(t, 2 * nu, self_similar(v2->Wt1, a), P * L);
        acc.add(t, 2 * nu, self_similar(v2->Wt0, a), P);
    }
    FieldJet j;
    j.u = acc.v;
    j.ut = acc.T1 / t;
    j.utt = (acc.T2 - acc.T1) / (t * t);
    if (r > 0) {
        j.ur = acc.S1 / r;
        j.urr = (acc.S2 - acc.S1) / (r * r);
    } else {
        j.ur = 2 * params.lambda(t);
        j.urr = 0;
    }
    return j;
}

double ApproxSolution::residual(double t, double r) const { return jet(t, r).residual(r); }

ApproxSolution assemble(const BlowupParams& p, int order, const Tolerances& tol) {
    p.validate();
    require(order >= 0 && order <= 2, "assemble: order must be 0, 1 or 2");
    ApproxSolution s;
    s.params = p;
    s.order = order;
    if (order >= 1) {
        auto v1 = std::make_shared<FirstCorrection>(
            first_correction(p.nu, log_grid(tol.r_min, tol.r_max, tol.r_points), tol));
        s.e1 = std::make_shared<FirstError>(first_error_expansion(*v1));
        s.v1 = v1;
    }
    if (order >= 2) s.v2 = std::make_shared<SecondCorrection>(second_correction(p.nu, s.e1->c, LBetaOptions::from(tol)));
    return s;
}

} // namespace wml
