#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "wml/core_model.hpp"
#include "wml/parametrix.hpp"
#include "wml/spectral.hpp"
#include "wml/wave.hpp"

namespace wml {

using Json = nlohmann::ordered_json;

/// Columns of equal length under a header, 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);
void write_json(const std::filesystem::path& path, const Json& j);

/// Two-column (R, value) CSV plus a JSON sidecar with the profile metadata.
void write_profile(const std::filesystem::path& csv, const RadialProfile& p, double nu, const Json& extra = {});
void write_spectral_tables(const std::filesystem::path& csv, const SpectralTables& t);
/// Long format (tau, xi, value) for a sampled source or iterate.
void write_source(const std::filesystem::path& csv, const SourceSample& s);
void write_rate_series(const std::filesystem::path& csv, const RateSeries& r, const std::vector<double>& eloc);
void write_snapshot(const std::filesystem::path& csv, const WaveField& f);

/// Collects the files a run emits and writes manifest.json next to them.
class Manifest {
public:
    Manifest(std::filesystem::path dir, std::string subcommand);

    /// Registers a file (relative to the output directory) and returns its full path.
    std::filesystem::path file(const std::string& name);
    void set_inputs(const std::vector<std::pair<std::string, std::string>>& entries, std::uint64_t seed);
    Json& results() { return results_; }
    void warn(const std::string& msg) { warnings_.push_back(msg); }
    /// Writes manifest.json; `status` is "ok" or an error record.
    void write(const Json& status = "ok") const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::string subcommand_;
    std::vector<std::string> files_;
    std::vector<std::string> warnings_;
    Json inputs_ = Json::object();
    std::string inputs_hash_;
    Json results_ = Json::object();
    double started_ = 0;
};

} // namespace wml
