#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include "wml/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"wmlab: numerical lab for corotational wave-map blow-up"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool verbose = false;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key-value or JSON configuration file");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized sampling");
    app.add_option("--set", overrides, "override one key, as key=value");
    app.add_flag("--verbose,-v", verbose, "progress on stderr");

    const std::pair<const char*, const char*> subcommands[] = {
        {"profile", "approximate solution at t0 and its corrections"},
        {"spectral", "distorted Fourier tables a(xi) and rho(xi)"},
        {"parametrix", "source projection, zeroth iterate and bound check"},
        {"simulate", "evolve order-k data and fit the concentration rate"},
        {"verify-rate", "simulate once per nu in verify_rate.nus"},
        {"test-all", "run every acceptance criterion"},
    };
    for (const auto& [name, about] : subcommands) app.add_subcommand(name, about);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : wml::exit_config;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    wml::RunConfig cfg;
    try {
        cfg = wml::load_config(config_path, sub);
        std::string text;
        for (const auto& o : overrides) text += o + "\n";
        wml::apply_config_text(cfg, text);
    } catch (const wml::ConfigError& e) {
        std::cerr << wml::config_error_record(e) << "\n";
        return wml::exit_config;
    }
    if (*out_opt) cfg.out = out_dir;
    if (*seed_opt) cfg.seed = seed;
    return wml::dispatch(cfg, std::cout, std::cerr, verbose);
}
