#pragma once

#include <Eigen/Dense>

#include <memory>

#include "wml/core_model.hpp"
#include "wml/lbeta.hpp"
#include "wml/profile.hpp"
#include "wml/tolerances.hpp"

namespace wml {

/// Self-similar profiles of the second correction:
///   L_nu W1 = a c1,           L_nu W0 = a c2 - F(W1, nu),
///   L_2nu Wt1 = c3,           L_2nu Wt0 = c4 - F(Wt1, 2nu),
/// with the coupling F(W, g) = (1+nu)(2g - 1) W + 2(1/a - (1+nu) a) W'.
struct SecondCorrection {
    double nu = 0;
    Eigen::Vector4d c = Eigen::Vector4d::Zero();
    SelfSimilarSolution W1, W0, Wt1, Wt0;
};

/// Rhs c - F(W, gamma) for the log-free part, with matching Taylor data.
SeriesRhs coupling_rhs(const SelfSimilarSolution& W, double nu, double gamma, int power, double c);

SecondCorrection second_correction(double nu, const Eigen::Vector4d& c, const LBetaOptions& opt = {});

/// u and its first and second partial derivatives at one point.
struct FieldJet {
    double u = 0, ut = 0, utt = 0, ur = 0, urr = 0;
    /// u_tt - u_rr - u_r / r + sin(2u) / (2 r^2)
    double residual(double r) const;
};

/// Approximate solution of order k in {0, 1, 2}:
///   k = 0: Q(lambda r)
///   k = 1: Q(lambda r) + v_1
///   k = 2: Q(lambda r) + v_1 + w_2 + wt_2, valid for r <= (1 - delta_edge) t.
class ApproxSolution {
public:
    BlowupParams params;
    int order = 2;
    std::shared_ptr<const FirstCorrection> v1;
    std::shared_ptr<const FirstError> e1;
    std::shared_ptr<const SecondCorrection> v2;

    double operator()(double t, double r) const { return jet(t, r).u; }
    /// Exact derivatives of the assembled expression.
    FieldJet jet(double t, double r) const;
    /// PDE residual e of the approximate solution.
    double residual(double t, double r) const;
    /// Largest admissible r at time t (infinite for k < 2).
    double max_radius(double t) const;
};

ApproxSolution assemble(const BlowupParams& p, int order, const Tolerances& tol = {});

} // namespace wml
