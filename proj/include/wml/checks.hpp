#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wml/spectral.hpp"
#include "wml/tolerances.hpp"
#include "wml/wave.hpp"

namespace wml {

/// Outcome of one acceptance criterion.
struct CheckResult {
    std::string id;              // "1".."11", or "10a" style for extra lines
    std::string name;
    bool pass = false;
    bool informational = false;  // printed, never counted as a failure
    std::string detail;
    double seconds = 0;
};

/// One line: "PASS 3 e0 consistency | detail | 0.12 s".
std::string format_result(const CheckResult& r);

CheckResult check_fundamental_wronskian();
CheckResult check_spectral_wronskian(const Tolerances& tol);
CheckResult check_e0_consistency();
CheckResult check_first_correction(const Tolerances& tol);
CheckResult check_residual_improvement(const Tolerances& tol);
CheckResult check_lbeta(const Tolerances& tol);
/// Builds the spectral tables on first use and keeps them in `measure`.
CheckResult check_unitarity(const Tolerances& tol, std::shared_ptr<const SpectralMeasure>& measure);
CheckResult check_measure_asymptotics(const Tolerances& tol, std::shared_ptr<const SpectralMeasure>& measure);
CheckResult check_parametrix(const Tolerances& tol, std::shared_ptr<const SpectralMeasure>& measure,
                             std::uint64_t seed);
CheckResult check_parametrix_bound(const Tolerances& tol, std::uint64_t seed);
/// Rate reproduction from t0 = 0.5; the runs are appended to `runs`.
CheckResult check_rate(const Tolerances& tol, std::vector<SimulationRun>* runs = nullptr);
/// The same pipeline started where t lambda is large; informational.
std::vector<CheckResult> asymptotic_rate_runs(const Tolerances& tol, std::vector<SimulationRun>* runs = nullptr);
CheckResult check_local_energy(const std::vector<SimulationRun>& runs);

struct AcceptanceOptions {
    Tolerances tol;
    std::uint64_t seed = 20240601;
    bool asymptotic_runs = true;
};

/// Runs every criterion in order, reporting each result as it completes.
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt,
                                        const std::function<void(const CheckResult&)>& report = {});

} // namespace wml
