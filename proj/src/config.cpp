#include "wml/config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace wml {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc() && r.ptr == t.data() + t.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

bool parse_list(const std::string& s, std::vector<double>& out) {
    std::string t = trim(s);
    if (!t.empty() && t.front() == '[') {
        if (t.back() != ']') return false;
        t = t.substr(1, t.size() - 2);
    }
    out.clear();
    if (trim(t).empty()) return true;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_double(item, v)) return false;
        out.push_back(v);
    }
    return true;
}

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

struct Key {
    std::string name;
    std::function<bool(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

Key real(std::string name, double RunConfig::*m) {
    return {name, [m](RunConfig& c, const std::string& v) { return parse_double(v, c.*m); },
            [m](const RunConfig& c) { return fmt(c.*m); }};
}
Key real_tol(std::string name, double Tolerances::*m) {
    return {name, [m](RunConfig& c, const std::string& v) { return parse_double(v, c.tol.*m); },
            [m](const RunConfig& c) { return fmt(c.tol.*m); }};
}
Key integer(std::string name, int RunConfig::*m) {
    return {name,
            [m](RunConfig& c, const std::string& v) {
                long long x;
                if (!parse_int(v, x) || x < INT32_MIN || x > INT32_MAX) return false;
                c.*m = static_cast<int>(x);
                return true;
            },
            [m](const RunConfig& c) { return std::to_string(c.*m); }};
}
Key integer_tol(std::string name, int Tolerances::*m) {
    return {name,
            [m](RunConfig& c, const std::string& v) {
                long long x;
                if (!parse_int(v, x) || x < INT32_MIN || x > INT32_MAX) return false;
                c.tol.*m = static_cast<int>(x);
                return true;
            },
            [m](const RunConfig& c) { return std::to_string(c.tol.*m); }};
}
Key list(std::string name, std::vector<double> RunConfig::*m) {
    return {name, [m](RunConfig& c, const std::string& v) { return parse_list(v, c.*m); },
            [m](const RunConfig& c) { return fmt_list(c.*m); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        real("nu", &RunConfig::nu),
        integer("order", &RunConfig::order),
        real("t0", &RunConfig::t0),
        {"seed",
         [](RunConfig& c, const std::string& v) {
             long long x;
             if (!parse_int(v, x) || x < 0) return false;
             c.seed = static_cast<std::uint64_t>(x);
             return true;
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"out", [](RunConfig& c, const std::string& v) { c.out = unquote(trim(v)); return !c.out.empty(); },
         [](const RunConfig& c) { return c.out; }},

        real_tol("ode.rel", &Tolerances::ode_rel),
        real_tol("ode.abs", &Tolerances::ode_abs),
        real_tol("quad.abs", &Tolerances::quad_abs),
        real_tol("quad.rel", &Tolerances::quad_rel),

        real_tol("profile.r_min", &Tolerances::r_min),
        real_tol("profile.r_max", &Tolerances::r_max),
        integer_tol("profile.r_points", &Tolerances::r_points),
        integer_tol("profile.frobenius_order", &Tolerances::frobenius_order),
        real_tol("profile.a_switch", &Tolerances::a_switch),
        real_tol("profile.delta_edge", &Tolerances::delta_edge),
        integer_tol("profile.a_nodes", &Tolerances::a_nodes),

        real_tol("spectral.xi_min", &Tolerances::xi_min),
        real_tol("spectral.xi_max", &Tolerances::xi_max),
        integer_tol("spectral.xi_points", &Tolerances::xi_points),
        real_tol("spectral.r0", &Tolerances::spectral_r0),
        real_tol("spectral.transform_r_max", &Tolerances::transform_r_max),
        real_tol("spectral.transform_panel", &Tolerances::transform_panel),
        real_tol("spectral.weyl_far", &Tolerances::weyl_far),
        real_tol("spectral.match_radius", &Tolerances::match_radius),

        real_tol("parametrix.tail_rel", &Tolerances::tail_rel),
        real_tol("parametrix.zeroth_tail_rel", &Tolerances::zeroth_tail_rel),
        real("parametrix.source_t_min", &RunConfig::source_t_min),
        integer("parametrix.tau_slices", &RunConfig::tau_slices),
        integer("parametrix.tau_out", &RunConfig::tau_out),
        integer("parametrix.xi_out", &RunConfig::xi_out),
        real("parametrix.xi_out_min", &RunConfig::xi_out_min),
        real("parametrix.xi_out_max", &RunConfig::xi_out_max),
        integer("parametrix.bound_samples", &RunConfig::bound_samples),

        real("simulate.r_max", &RunConfig::sim_r_max),
        real("simulate.dr", &RunConfig::sim_dr),
        real("simulate.cfl", &RunConfig::sim_cfl),
        real_tol("simulate.blend_fraction", &Tolerances::blend_fraction),
        real_tol("simulate.underresolved", &Tolerances::underresolved),
        real("simulate.t_min", &RunConfig::sim_t_min),
        integer("simulate.samples", &RunConfig::sim_samples),
        list("simulate.snapshot_times", &RunConfig::snapshot_times),

        list("verify_rate.nus", &RunConfig::rate_nus),
    };
    return k;
}

const Key* find_key(const std::string& name) {
    for (const auto& k : keys())
        if (k.name == name) return &k;
    return nullptr;
}

void assign(RunConfig& cfg, const std::string& key, const std::string& value, std::vector<std::string>& errors) {
    const Key* k = find_key(key);
    if (!k) {
        errors.push_back(key + ": unknown key");
        return;
    }
    if (!k->set(cfg, value)) errors.push_back(key + ": cannot parse '" + trim(value) + "'");
}

void flatten(const nlohmann::json& j, const std::string& prefix, RunConfig& cfg, std::vector<std::string>& errors) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            flatten(*it, key, cfg, errors);
        } else if (it->is_string()) {
            assign(cfg, key, it->get<std::string>(), errors);
        } else {
            assign(cfg, key, it->dump(), errors);
        }
    }
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> fields)
    : std::runtime_error("invalid configuration: " + join(fields)), fields_(std::move(fields)) {}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::vector<std::string> errors;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError({std::string("json: ") + e.what()});
        }
        flatten(j, "", cfg, errors);
    } else {
        std::stringstream ss(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            assign(cfg, section.empty() ? key : section + "." + key, line.substr(eq + 1), errors);
        }
    }
    if (!errors.empty()) throw ConfigError(errors);
}

RunConfig load_config(const std::string& path, const std::string& subcommand) {
    RunConfig cfg;
    cfg.subcommand = subcommand;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError({"config: cannot read " + path});
        std::stringstream ss;
        ss << in.rdbuf();
        apply_config_text(cfg, ss.str());
    }
    return cfg;
}

void RunConfig::validate() const {
    std::vector<std::string> e;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) e.push_back(msg);
    };
    need(nu > 0, "nu: must be positive");
    need(order >= 0 && order <= 2, "order: must be 0, 1 or 2");
    need(t0 > 0 && t0 < 1, "t0: must lie in (0, 1)");
    need(tol.ode_rel > 0 && tol.ode_abs > 0, "ode.rel, ode.abs: must be positive");
    need(tol.quad_rel > 0 && tol.quad_abs > 0, "quad.rel, quad.abs: must be positive");
    need(tol.r_min > 0 && tol.r_max > 100 * tol.r_min, "profile.r_min, profile.r_max: need 0 < r_min and r_max > 100 r_min");
    need(tol.r_max >= 1e3, "profile.r_max: the large-R fits use [1e2, 1e3], so r_max must be at least 1e3");
    need(tol.r_points >= 256, "profile.r_points: need at least 256");
    need(tol.frobenius_order >= 2 && tol.frobenius_order <= 20, "profile.frobenius_order: must lie in [2, 20]");
    need(tol.a_switch > 0 && tol.a_switch < 0.5, "profile.a_switch: must lie in (0, 0.5)");
    need(tol.delta_edge > 0 && tol.delta_edge < 0.1, "profile.delta_edge: must lie in (0, 0.1)");
    need(tol.a_nodes >= 50, "profile.a_nodes: need at least 50");
    need(tol.xi_min > 0 && tol.xi_max > 100 * tol.xi_min, "spectral.xi_min, spectral.xi_max: need 0 < xi_min, xi_max > 100 xi_min");
    need(tol.xi_points >= 64, "spectral.xi_points: need at least 64");
    need(tol.spectral_r0 > 0 && tol.spectral_r0 <= 1e-2, "spectral.r0: must lie in (0, 1e-2]");
    need(tol.transform_r_max > 1, "spectral.transform_r_max: must exceed 1");
    need(tol.transform_panel > 0 && tol.transform_panel < tol.transform_r_max, "spectral.transform_panel: must be positive and below transform_r_max");
    need(tol.weyl_far > tol.match_radius && tol.match_radius > 0, "spectral.weyl_far, spectral.match_radius: need 0 < match_radius < weyl_far");
    need(tol.tail_rel > 0 && tol.tail_rel < 1, "parametrix.tail_rel: must lie in (0, 1)");
    need(tol.zeroth_tail_rel > 0 && tol.zeroth_tail_rel < 1, "parametrix.zeroth_tail_rel: must lie in (0, 1)");
    need(source_t_min > 0 && source_t_min < t0 / 100, "parametrix.source_t_min: must lie in (0, t0/100)");
    need(source_t_min <= 0 || nu <= 0 || std::pow(t0 / source_t_min, nu) >= 20,
         "parametrix.source_t_min: (t0 / source_t_min)^nu must be at least 20 so outputs fit below tau_max / 10");
    need(tau_slices >= 8, "parametrix.tau_slices: need at least 8");
    need(tau_out >= 2, "parametrix.tau_out: need at least 2");
    need(xi_out >= 3 && xi_out % 2 == 1, "parametrix.xi_out: need an odd count of at least 3 (Simpson)");
    need(xi_out_min > 0 && xi_out_max > xi_out_min, "parametrix.xi_out_min, parametrix.xi_out_max: need 0 < min < max");
    need(bound_samples >= 8, "parametrix.bound_samples: need at least 8");
    need(sim_r_max >= 2 * t0, "simulate.r_max: must be at least 2 t0");
    need(sim_dr > 0 && sim_dr < t0 / 100, "simulate.dr: must lie in (0, t0/100)");
    need(sim_cfl > 0 && sim_cfl < 1, "simulate.cfl: must lie in (0, 1)");
    need(tol.blend_fraction > 0 && tol.blend_fraction < 0.5, "simulate.blend_fraction: must lie in (0, 0.5)");
    need(tol.blend_fraction * t0 >= 8 * sim_dr, "simulate.blend_fraction: blend region must span at least 8 cells");
    need(tol.underresolved > 0 && tol.underresolved < 1, "simulate.underresolved: must lie in (0, 1)");
    need(sim_t_min >= 0 && sim_t_min < t0, "simulate.t_min: must lie in [0, t0)");
    need(sim_samples >= 8, "simulate.samples: need at least 8");
    for (double s : snapshot_times) need(s > 0 && s <= t0, "simulate.snapshot_times: entries must lie in (0, t0]");
    need(!rate_nus.empty(), "verify_rate.nus: need at least one value");
    for (double v : rate_nus) need(v > 0, "verify_rate.nus: entries must be positive");
    need(!out.empty(), "out: must not be empty");
    if (!e.empty()) throw ConfigError(e);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.emplace_back(k.name, k.get(cfg));
    return out;
}

} // namespace wml
