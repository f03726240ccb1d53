#include "wml/io.hpp"

#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>

namespace wml {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns) {
    require(header.size() == columns.size(), "write_csv: header and column counts differ");
    const Eigen::Index n = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns) require(c.size() == n, "write_csv: columns differ in length");
    auto out = open_out(path);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << g17(columns[j](i));
        out << '\n';
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_profile(const std::filesystem::path& csv, const RadialProfile& p, double nu, const Json& extra) {
    write_csv(csv, {"R", "value"}, {p.grid, p.values});
    Json meta = {{"nu", nu},
                 {"vanishing_order", p.vanishing_order},
                 {"log_growth", {p.log_growth.first, p.log_growth.second}},
                 {"points", p.grid.size()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = *it;
    auto side = csv;
    side.replace_extension(".json");
    write_json(side, meta);
}

void write_spectral_tables(const std::filesystem::path& csv, const SpectralTables& t) {
    write_csv(csv, {"xi", "re_a", "im_a", "rho"}, {t.xi, t.a.real(), t.a.imag(), t.rho});
}

void write_source(const std::filesystem::path& csv, const SourceSample& s) {
    const Eigen::Index nt = s.tau_grid.size(), nx = s.xi_grid.size();
    Eigen::VectorXd tau(nt * nx), xi(nt * nx), v(nt * nx);
    for (Eigen::Index i = 0; i < nt; ++i)
        for (Eigen::Index j = 0; j < nx; ++j) {
            tau(i * nx + j) = s.tau_grid(i);
            xi(i * nx + j) = s.xi_grid(j);
            v(i * nx + j) = s.exact ? s.exact(s.tau_grid(i), s.xi_grid(j)) : s.values(i, j);
        }
    write_csv(csv, {"tau", "xi", "value"}, {tau, xi, v});
}

void write_rate_series(const std::filesystem::path& csv, const RateSeries& r, const std::vector<double>& eloc) {
    const Eigen::Index n = static_cast<Eigen::Index>(r.t.size());
    Eigen::VectorXd t(n), l(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i) = r.t[i];
        l(i) = r.lambda[i];
        e(i) = static_cast<std::size_t>(i) < eloc.size() ? eloc[i] : std::nan("");
    }
    write_csv(csv, {"t", "lambda", "eloc_ratio"}, {t, l, e});
}

void write_snapshot(const std::filesystem::path& csv, const WaveField& f) {
    write_csv(csv, {"r", "u", "ut"}, {f.r, f.u, f.ut});
}

Manifest::Manifest(std::filesystem::path dir, std::string subcommand)
    : dir_(std::move(dir)), subcommand_(std::move(subcommand)), started_(now_seconds()) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path Manifest::file(const std::string& name) {
    require(std::find(files_.begin(), files_.end(), name) == files_.end(), "Manifest: file registered twice: " + name);
    files_.push_back(name);
    return dir_ / name;
}

void Manifest::set_inputs(const std::vector<std::pair<std::string, std::string>>& entries, std::uint64_t seed) {
    inputs_ = Json::object();
    std::string canon;
    for (const auto& [k, v] : entries) {
        inputs_[k] = v;
        if (k != "out") canon += k + "=" + v + "\n";
    }
    canon += "subcommand=" + subcommand_ + "\nseed=" + std::to_string(seed) + "\n";
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon.data(), canon.size())));
    inputs_hash_ = buf;
}

void Manifest::write(const Json& status) const {
    Json m;
    m["subcommand"] = subcommand_;
    m["status"] = status;
    m["inputs_hash"] = inputs_hash_;
    m["inputs"] = inputs_;
    m["versions"] = {{"wmlab", "1.0.0"},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"compiler", __VERSION__}};
    m["wall_seconds"] = now_seconds() - started_;
    m["files"] = files_;
    m["warnings"] = warnings_;
    m["results"] = results_;
    write_json(dir_ / "manifest.json", m);
}

} // namespace wml
