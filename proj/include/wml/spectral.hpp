#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <string>

#include "wml/core_model.hpp"
#include "wml/numerics.hpp"
#include "wml/tolerances.hpp"

namespace wml {

using cplx = std::complex<double>;

/// V(R) = 3/(4R^2) - 8/(1+R^2)^2, so that L = -d^2/dR^2 + V.
inline double spectral_potential(double R) {
    const double s = 1 + R * R;
    return 0.75 / (R * R) - 8.0 / (s * s);
}

/// f g' - f' g.
inline cplx wronskian(cplx f, cplx df, cplx g, cplx dg) { return f * dg - df * g; }

struct SpectralOptions {
    double r0 = 1e-3;          // series/integrator switch for phi and theta
    int series_terms = 8;
    double weyl_far = 50;      // psi+ launched at weyl_far * max(1, xi^{-1/2})
    double match_radius = 5;   // a(xi) matched at match_radius * max(1, xi^{-1/2})
    double xi_min = 1e-4, xi_max = 1e4;
    int xi_points = 512;
    double transform_r_max = 12;
    double panel = 0.05;
    int gauss_order = 8;
    OdeOptions ode{};

    static SpectralOptions from(const Tolerances& tol);
    Eigen::VectorXd xi_grid() const { return log_grid(xi_min, xi_max, xi_points); }
};

enum class EigenKind { regular, secondary, weyl_plus };

/// Samples of a solution of L f = xi f and of its derivative on a grid.
struct Eigenfunction {
    double xi = 0;
    EigenKind kind = EigenKind::regular;
    Eigen::VectorXd grid;
    Eigen::VectorXcd values, derivs;
    bool extended = false; // weyl_plus: launch radius moved past the grid end

    Eigen::VectorXd real() const { return values.real(); }
};

/// Frobenius data {phi, phi'} with phi ~ R^{3/2}.
std::array<double, 2> regular_series(double xi, double R, int terms = 8);
/// Frobenius data {theta, theta'} with theta ~ R^{-1/2}/2 and W(theta, phi) = 1.
std::array<double, 2> secondary_series(double xi, double R, int terms = 8);
/// Truncated large-R expansion {psi+, psi+'}.
std::array<cplx, 2> weyl_asymptotic(double xi, double R);

Eigenfunction regular_eigenfunction(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt = {});
Eigenfunction secondary_eigenfunction(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt = {});
Eigenfunction weyl_solution(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt = {});

/// max |f'' - (V - xi) f| / max |f| at interval midpoints, with f and f''
/// taken from a quintic Hermite interpolant of the nodal data.
double eigen_residual(const Eigenfunction& ef);

struct SpectralTables {
    Eigen::VectorXd xi;
    Eigen::VectorXcd a;
    Eigen::VectorXd rho;
    Eigen::VectorXd r_match;
    // |a|^2 / xi = low_P L^2 + low_Q L + low_S, L = log xi, on the first decade
    double low_P = 0, low_Q = 0, low_S = 0;
    // log rho = hi_intercept + hi_slope log xi on the last decade
    double hi_slope = 0, hi_intercept = 0;
};

/// a(xi) at one frequency, together with the matching radius used.
cplx connection_coefficient(double xi, const SpectralOptions& opt = {}, double r_match = 0);

SpectralTables connection_and_measure(const Eigen::VectorXd& xi_grid, const SpectralOptions& opt = {});

/// Interpolated spectral density rho = 1/(4 pi |a|^2): cubic in (log xi, log rho)
/// inside the table, the small-xi fit 1/(4 pi xi (P L^2 + Q L + S)) below and a
/// power law above.
class SpectralMeasure {
public:
    SpectralMeasure() = default;
    explicit SpectralMeasure(const SpectralTables& tables);
    double operator()(double xi) const;
    /// int_0^{xi} rho from the small-xi fit.
    double low_mass(double xi) const;
    const SpectralTables& tables() const { return tables_; }

private:
    SpectralTables tables_;
    CubicSpline log_rho_;
};

struct SpectralCoefficients {
    Eigen::VectorXd xi;
    Eigen::VectorXd values;

    /// (int |x|^2 <xi>^{2 alpha} rho dxi)^{1/2} by Simpson in log xi.
    double norm(double alpha, const SpectralMeasure& rho) const;
};

/// Distorted Fourier transform on a composite Gauss-Legendre grid in R and
/// a log-spaced xi grid. The phi(R, xi) table is cached on disk when
/// WMLAB_CACHE_DIR is set.
class DistortedFourier {
public:
    DistortedFourier(const SpectralOptions& opt, std::shared_ptr<const SpectralMeasure> rho);

    SpectralCoefficients forward(const std::function<double(double)>& f) const;
    SpectralCoefficients forward(const RadialProfile& f) const;
    /// Inverse on an arbitrary positive grid; phi columns are solved on demand.
    RadialProfile inverse(const SpectralCoefficients& x, const Eigen::VectorXd& grid) const;
    /// int |x|^2 rho dxi including the small-xi tail.
    double spectral_norm2(const SpectralCoefficients& x) const;
    /// int |f|^2 dR on the transform quadrature.
    double radial_norm2(const std::function<double(double)>& f) const;

    const QuadratureRule& nodes() const { return nodes_; }
    const Eigen::VectorXd& xi() const { return xi_; }
    const SpectralMeasure& measure() const { return *rho_; }
    const SpectralOptions& options() const { return opt_; }
    /// Simpson weights for dxi over the xi grid (Simpson in log xi).
    const Eigen::VectorXd& xi_weights() const { return xi_w_; }

private:
    SpectralOptions opt_;
    std::shared_ptr<const SpectralMeasure> rho_;
    QuadratureRule nodes_;
    Eigen::VectorXd xi_, xi_w_;
    Eigen::MatrixXd phi_; // rows: xi, cols: R nodes
};

/// phi(R, xi) for every (xi, R) pair; rows follow xi.
Eigen::MatrixXd regular_table(const Eigen::VectorXd& xi, const Eigen::VectorXd& R, const SpectralOptions& opt);

/// Cache helpers; return false when the cache is disabled or the entry is missing.
bool load_cached_matrix(const std::string& name, std::uint64_t key, Eigen::MatrixXd& out);
void store_cached_matrix(const std::string& name, std::uint64_t key, const Eigen::MatrixXd& m);

} // namespace wml
