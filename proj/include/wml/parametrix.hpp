#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "wml/approx_solution.hpp"
#include "wml/numerics.hpp"
#include "wml/spectral.hpp"
#include "wml/tolerances.hpp"

namespace wml {

/// lambda as a function of the renormalized time: (nu tau)^{(1+nu)/nu}.
inline double lambda_of_tau(double nu, double tau) { return std::pow(nu * tau, (1 + nu) / nu); }

struct ParametrixOptions {
    OdeOptions ode{1e-11, 1e-20, 0.0, 50'000'000};
    int gauss_order = 8;
    double nodes_per_radian = 1.0; // sigma panels per unit of accumulated phase
    int min_panels = 16;
    double tail_rel = 1e-6;        // admissible |tail| / int |integrand|

    static ParametrixOptions from(const Tolerances& tol) {
        ParametrixOptions o;
        o.ode.rel = tol.ode_rel;
        o.ode.abs = tol.ode_abs;
        o.tail_rel = tol.tail_rel;
        return o;
    }
};

/// S(tau, sigma, xi): solution of S'' + lambda^{-2}(tau) xi S = 0 in tau with
/// S = 0 and dS/dtau = -1 at tau = sigma, evaluated for tau <= sigma.
double symbol_S(double nu, double tau, double sigma, double xi, const ParametrixOptions& opt = {});
/// {S, dS/dtau}.
std::array<double, 2> symbol_S_jet(double nu, double tau, double sigma, double xi,
                                   const ParametrixOptions& opt = {});
/// S(tau, sigma_k, xi) for increasing sigma_k >= tau from a single forward solve
/// in sigma (y(tau) = 0, y'(tau) = 1).
Eigen::VectorXd symbol_S_row(double nu, double tau, const Eigen::VectorXd& sigma, double xi,
                             const ParametrixOptions& opt = {});

struct BoundSample {
    double tau, sigma, xi;
};

/// Latin-hypercube sample, log-uniform in tau, sigma/tau and xi.
std::vector<BoundSample> latin_hypercube(int n, std::uint64_t seed, double tau_lo, double tau_hi,
                                         double ratio_hi, double xi_lo, double xi_hi);

struct BoundReport {
    double C = 0;              // fitted exponent
    double ratio_max = 0;      // max |S| / (sigma (sigma/tau)^C (1 + tau^{-2/nu} xi)^{-1/2})
    double ratio_max_half = 0; // same on the first half of the sample
    double C_half = 0;
    double dS_at_diagonal = 0; // max |dS/dtau(sigma, sigma) + 1|
    bool stable = false;
};

BoundReport bound_check(double nu, const std::vector<BoundSample>& samples, const ParametrixOptions& opt = {});

/// Source f(sigma, xi) on a tensor grid, or a closed-form evaluator.
struct SourceSample {
    Eigen::VectorXd tau_grid;
    Eigen::VectorXd xi_grid;
    Eigen::MatrixXd values; // rows follow tau_grid, columns follow xi_grid
    double decay_N = 0;     // declared envelope sigma^{-N}
    std::function<double(double, double)> exact;

    void validate() const;
    double tau_max() const;
    /// Bilinear in (log sigma, log xi); constant continuation below the first
    /// xi column, zero above the last and past tau_max.
    double operator()(double sigma, double xi) const;
    /// Fitted envelope exponent of max_xi |f| over the last tau decade.
    double fitted_decay() const;
};

/// Duhamel integral int_tau^{tau_max} S(tau, sigma, eta) k(sigma) dsigma plus
/// a power-law tail beyond tau_max.
double duhamel(double nu, double tau, double eta, double tau_max, const std::function<double(double)>& k,
               const ParametrixOptions& opt = {}, double* tail_out = nullptr);

/// x(tau, xi) = int (lambda(tau)/lambda(sigma))^{3/2} (rho(xi_s)/rho(xi))^{1/2}
///              S(tau, sigma, lambda(tau)^2 xi) f(sigma, xi_s) dsigma,
/// xi_s = (lambda(tau)/lambda(sigma))^2 xi.
double apply_U(double nu, const SourceSample& f, double tau, double xi, const SpectralMeasure& rho,
               const ParametrixOptions& opt = {}, double* tail_out = nullptr);

struct ZerothIterate {
    SourceSample source; // transformed residual lambda^{-2} F[R^{1/2} e]
    SourceSample x0;     // U applied to it
    Eigen::VectorXd norms; // ||x0(tau, .)|| in L^{2, alpha}_rho per output tau
    double alpha = 0;
    double decay_fit = 0;  // fitted exponent of the norms
};

/// Transforms the cone-truncated residual of `approx` on each source slice
/// and applies U at the output times and frequencies (xi_out log-uniform).
ZerothIterate zeroth_iterate(const ApproxSolution& approx, const Eigen::VectorXd& tau_grid,
                             const Eigen::VectorXd& tau_out, const Eigen::VectorXd& xi_out,
                             const SpectralMeasure& rho,
                             const SpectralOptions& sopt, const ParametrixOptions& opt = {},
                             double residual_scale = 1.0);

} // namespace wml
