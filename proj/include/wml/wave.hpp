#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "wml/approx_solution.hpp"
#include "wml/core_model.hpp"

namespace wml {

/// Initial data at t0 on the cell-centred grid of width dr up to r_max: the
/// approximate solution for r <= (1 - blend) t0, the static profile
/// Q(lambda(t0) r) with zero velocity for r >= t0, and a smooth blend between.
WaveField init_from_profile(const ApproxSolution& approx, double t0, double r_max, double dr,
                            double blend_fraction = 0.05);

/// Right-hand side (u_t, u_tt) of the discretized equation with an outgoing
/// condition on u - Q(lambda_out r) at r_max.
struct WaveOperator {
    double lambda_out = 0; // scale of the static exterior profile
    void operator()(const WaveField& f, Eigen::VectorXd& du, Eigen::VectorXd& dut) const;
};

struct EvolveOptions {
    double cfl = 0.5;
    double underresolved = 0.05;   // stop once lambda_est * dr exceeds this
    double lambda_out = 0;         // exterior profile scale for the boundary
};

struct EvolveResult {
    std::vector<WaveField> snapshots; // one per requested time that was reached
    WaveField last;
    bool truncated = false;
    std::string reason;               // "under-resolved", "non-finite", "observer" or ""
    long steps = 0;
};

/// Classical RK4 with dt = cfl dr, stepping from field.t to t_end in either
/// direction. `observe` is called after every step; returning false stops
/// the run. Snapshots are taken at the step closest to each requested time.
EvolveResult evolve(const WaveField& field, double t_end, const EvolveOptions& opt,
                    const std::vector<double>& snapshot_times = {},
                    const std::function<bool(const WaveField&)>& observe = {});

/// 1/r* for the smallest r* with u(r*) = pi/2 (linear interpolation).
double extract_lambda(const WaveField& field);

struct RateFit {
    double p = 0;        // lambda ~ A t^{-p}
    double A = 0;
    double residual = 0; // rms of log lambda about the fit
};

struct RateSeries {
    std::vector<double> t, lambda;
    RateFit fit;

    void push(double tt, double l) {
        t.push_back(tt);
        lambda.push_back(l);
    }
};

/// Least squares on log lambda against log t; needs 8 samples spanning a
/// factor of 4 in t.
RateFit rate_fit(const RateSeries& series);

/// Reduced energy of u - Q(lambda_est r) over r < cone_factor t, with the
/// velocity of the reference taken along lambda ~ t^{-p}.
double local_error_energy(const WaveField& field, double lambda_est, double p, double cone_factor = 1.0);

struct SimulationOptions {
    double t0 = 0.5;
    double r_max = 1.5;
    double dr = 2e-4;
    double cfl = 0.5;
    double blend_fraction = 0.05;
    double underresolved = 0.05;
    double t_min = 0;      // optional earlier stop
    int samples = 64;      // rate samples, log-spaced in t
    std::vector<double> snapshot_times; // extra fields kept in SimulationRun::snapshots
};

struct SimulationRun {
    RateSeries rate;
    std::vector<double> eloc;          // E_loc (t lambda) / log^2 t at each rate sample
    std::vector<double> energy;        // reduced energy at each rate sample
    double energy_drift = 0;           // max |E - E_0| / E_0
    bool truncated = false;
    std::string reason;
    std::string fit_error; // set when the samples cannot support a rate fit
    double t_stop = 0;
    long steps = 0;
    double seconds = 0;
    std::vector<WaveField> snapshots; // at the requested snapshot_times that were reached
};

/// Evolves profile data toward t = 0 until under-resolution and fits the rate.
SimulationRun simulate(const ApproxSolution& approx, const SimulationOptions& opt);

} // namespace wml
