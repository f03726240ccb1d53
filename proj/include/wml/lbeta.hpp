#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "wml/numerics.hpp"
#include "wml/tolerances.hpp"

namespace wml {

enum class Parity { even, odd };

/// Right-hand side of L_beta W = F on [0, 1): pointwise values plus the
/// Taylor coefficients at a = 0. Coefficients past the end of `taylor` are
/// taken to be zero, so the list must cover every nonzero term up to the
/// series truncation.
struct SeriesRhs {
    std::function<double(double)> value;
    std::vector<double> taylor;

    /// Polynomial rhs sum_k coeffs[k] a^k.
    static SeriesRhs polynomial(std::vector<double> coeffs);
    static SeriesRhs zero() { return polynomial({}); }
};

struct LBetaOptions {
    int series_order = 8;      // number of series terms kept below a_switch
    double a_switch = 0.05;
    double delta_edge = 1e-3;  // the table stops at a = 1 - delta_edge
    int nodes = 600;           // table nodes, uniform in y = -log(1 - a)
    OdeOptions ode{};

    static LBetaOptions from(const Tolerances& tol);
};

/// L_beta W = (1 - a^2) W'' + (1/a + 2(beta - 1) a) W' + (beta - beta^2 - 1/a^2) W.
inline double apply_lbeta(double beta, double a, double W, double dW, double d2W) {
    return (1 - a * a) * d2W + (1 / a + 2 * (beta - 1) * a) * dW + (beta - beta * beta - 1 / (a * a)) * W;
}

/// Solution of L_beta W = F regular at a = 0: a Frobenius series below
/// a_switch and an RK7(8) table above it, interpolated with quintic Hermite
/// polynomials in y = -log(1 - a).
class SelfSimilarSolution {
public:
    double beta = 0;
    Parity parity = Parity::odd;
    int leading_order = 1;
    std::vector<double> series; // w_k, coefficient of a^k
    Eigen::VectorXd a_nodes, w, dw, d2w;

    /// {W, W', W''} at a in [0, 1 - delta_edge]; negative a uses the parity.
    std::array<double, 3> eval(double a) const;
    double operator()(double a) const { return eval(a)[0]; }
    double a_switch() const { return a_switch_; }
    double a_max() const { return a_max_; }

    /// Taylor coefficient of a^k of the solution (0 past the stored series).
    double coefficient(std::size_t k) const { return k < series.size() ? series[k] : 0.0; }

private:
    friend SelfSimilarSolution solve_lbeta(double, const SeriesRhs&, Parity, int, double, const LBetaOptions&);
    std::array<double, 3> eval_series(double a) const;
    double a_switch_ = 0.05, a_max_ = 1 - 1e-3;
    int series_terms_ = 0;
    QuinticHermite table_;
};

/// Solves L_beta W = rhs with the declared parity and leading power a^leading.
/// `frobenius_data` is the coefficient of the homogeneous regular solution
/// (~ a) and must vanish unless parity is odd with leading order 1.
SelfSimilarSolution solve_lbeta(double beta, const SeriesRhs& rhs, Parity parity, int leading,
                                double frobenius_data = 0.0, const LBetaOptions& opt = {});

/// max |L_beta W - rhs| over n points uniform in [lo, hi].
double lbeta_residual(const SelfSimilarSolution& sol, const SeriesRhs& rhs, double lo, double hi, int n);

} // namespace wml
