#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wml/tolerances.hpp"

namespace wml {

/// Field-level validation failures, reported together.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> fields);
    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

struct RunConfig {
    std::string subcommand;
    double nu = 0.5;
    int order = 2;
    double t0 = 0.5;
    std::uint64_t seed = 20240601;
    std::string out = "out";
    Tolerances tol;

    // parametrix
    double source_t_min = 1e-5;    // last source slice, as a time
    int tau_slices = 48;
    int tau_out = 6;
    int xi_out = 25;
    double xi_out_min = 1e-3, xi_out_max = 1e3;
    int bound_samples = 1000;

    // simulate
    double sim_r_max = 1.5;
    double sim_dr = 2e-4;
    double sim_cfl = 0.5;
    double sim_t_min = 0;
    int sim_samples = 64;
    std::vector<double> snapshot_times;

    // verify-rate
    std::vector<double> rate_nus{0.25, 0.5, 1.0};

    /// Throws ConfigError listing every offending field.
    void validate() const;
};

/// Applies `key = value` lines (TOML-style sections prefix keys with
/// "section.") or a JSON object (nested objects flatten the same way).
/// Unknown keys and malformed values are rejected.
void apply_config_text(RunConfig& cfg, const std::string& text);
RunConfig load_config(const std::string& path, const std::string& subcommand);

/// Every accepted key with its current value, in documentation order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

} // namespace wml
