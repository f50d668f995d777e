#include <CLI11.hpp>

#include "migflux/cli.hpp"
#include "migflux/common.hpp"
#include "migflux/kernels.hpp"

namespace migflux::cli {

Invocation parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Invocation inv;
    auto& c = inv.config;
    std::string isa = "auto";

    CLI::App app{"Intercity migration flux analysis", "migflux"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.set_config("--config", "", "key=value file; command-line flags take precedence");
    app.require_subcommand(1);

    app.add_option("--messages", c.messages, "geotagged message log csv");
    app.add_option("--registry", c.registry, "raw location code to city id csv");
    app.add_option("--cities", c.cities, "city attribute csv");
    app.add_option("--cost-travel-km", c.cost_travel_km, "road distance table");
    app.add_option("--cost-travel-min", c.cost_travel_min, "road travel time table");
    app.add_option("--directed-flux", c.directed_flux);
    app.add_option("--undirected-flux", c.undirected_flux);
    app.add_option("--assignments", c.assignments, "cluster assignment csv");
    app.add_option("--covariate", c.covariate, "pair covariate csv city_a,city_b,value");
    app.add_option("--province-patterns", c.province_patterns);
    app.add_option("--province-covariate", c.province_covariate, "province_id,value");
    app.add_option("--window-begin", c.window_begin, "inclusive, ISO-8601 or epoch seconds")->capture_default_str();
    app.add_option("--window-end", c.window_end, "exclusive")->capture_default_str();
    app.add_option("--families", c.families)->delimiter(',')->capture_default_str();
    app.add_option("--metrics", c.metrics)->delimiter(',')->capture_default_str();
    app.add_option("--diameter-km", c.diameter_km)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--k", c.k)->check(CLI::Range(2, 64))->capture_default_str();
    app.add_option("--k-min", c.k_min)->check(CLI::Range(2, 64))->capture_default_str();
    app.add_option("--k-max", c.k_max)->check(CLI::Range(2, 64))->capture_default_str();
    app.add_option("--restarts", c.restarts)->check(CLI::Range(1, 10000))->capture_default_str();
    app.add_option("--max-iter", c.max_iter)->check(CLI::Range(1, 1000000))->capture_default_str();
    app.add_option("--seed", c.seed)->capture_default_str();
    app.add_flag("--representatives", c.representatives, "also write heuristic representative cities");
    app.add_option("--locality-metric", c.locality_metric, "neighbour ordering for locality and GDP match curves")
        ->check(CLI::IsMember({"geo_km", "travel_km", "travel_min"}))
        ->capture_default_str();
    app.add_option("--correlate-patterns", c.correlate_patterns)->delimiter(',')->capture_default_str();
    app.add_option("--synth-mode", c.synth_mode)->check(CLI::IsMember({"gravity", "patterns"}))->capture_default_str();
    app.add_option("--synth-family", c.synth_family)->capture_default_str();
    app.add_option("--synth-metric", c.synth_metric)->capture_default_str();
    app.add_option("--synth-cities", c.synth_cities)->check(CLI::Range(2, 100000))->capture_default_str();
    app.add_option("--synth-pairs", c.synth_pairs)->check(CLI::Range(1, 100000000))->capture_default_str();
    app.add_option("--synth-cities-per-pattern", c.synth_cities_per_pattern)->check(CLI::Range(3, 10000))->capture_default_str();
    app.add_option("--synth-log-a", c.synth_log_a)->capture_default_str();
    app.add_option("--synth-alpha", c.synth_alpha)->capture_default_str();
    app.add_option("--synth-beta", c.synth_beta)->capture_default_str();
    app.add_option("--synth-gamma", c.synth_gamma)->capture_default_str();
    app.add_option("--synth-noise", c.synth_noise)->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_flag("--synth-messages", c.synth_messages, "also write a message log realizing the directed flux");
    app.add_option("--out", c.out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", c.workers, "worker threads; outputs do not depend on it")->check(CLI::Range(1u, 1024u))->capture_default_str();
    app.add_option("--isa", isa, "inner loop kernels")->check(CLI::IsMember({"auto", "scalar", "avx2"}))->capture_default_str();

    const std::pair<const char*, const char*> commands[] = {
        {"extract", "message log to directed and undirected flux"},
        {"fit", "gravity model comparison"},
        {"cluster", "k scan, spherical k-means, pattern labels, per-pattern fits and indices"},
        {"indices", "development index, province ratios, locality and GDP match curves"},
        {"correlate", "Pearson correlation of flux or pattern shares against a covariate"},
        {"synth", "synthetic inputs with known parameters"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help)->fallthrough()->callback([&inv, n = name] { inv.command = n; });
    }

    try {
        app.parse(argc, argv);
        if (c.k_min > c.k_max) throw CLI::ValidationError("--k-min", "must not exceed --k-max");
        if (isa == "scalar") kernels::set_active_isa(kernels::Isa::scalar);
        if (isa == "avx2") {
            if (!kernels::isa_available(kernels::Isa::avx2)) throw CLI::ValidationError("--isa", "avx2 not available");
            kernels::set_active_isa(kernels::Isa::avx2);
        }
    } catch (const CLI::ParseError& e) {
        inv.exit_code = app.exit(e, out, err) == 0 ? kSuccess : kFatal;
    }
    return inv;
}

}  // namespace migflux::cli
