#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace migflux::cli {

enum ExitCode : int { kSuccess = 0, kFatal = 1, kPartial = 2 };

struct RunConfig {
    // Inputs
    std::filesystem::path messages;
    std::filesystem::path registry;
    std::filesystem::path cities;
    std::filesystem::path cost_travel_km;
    std::filesystem::path cost_travel_min;
    std::filesystem::path directed_flux;
    std::filesystem::path undirected_flux;
    std::filesystem::path assignments;
    std::filesystem::path covariate;           // city_a,city_b,value
    std::filesystem::path province_patterns;   // province_id,p1..p4
    std::filesystem::path province_covariate;  // province_id,value

    // Extraction window, ISO-8601 or epoch seconds; half-open [begin, end).
    std::string window_begin = "2017-01-13T00:00:00+08:00";
    std::string window_end = "2017-02-22T00:00:00+08:00";

    std::vector<std::string> families = {"GM", "AVEG_GM", "G_GM", "DIRG_GM"};
    std::vector<std::string> metrics = {"geo_km", "travel_km", "travel_min"};
    double diameter_km = 12742.0;

    int k = 4;
    int k_min = 2;
    int k_max = 8;
    int restarts = 10;
    int max_iter = 300;
    std::uint64_t seed = 20170113;
    bool representatives = false;
    std::vector<std::string> correlate_patterns = {"III", "IV"};
    std::string locality_metric = "travel_min";

    // synth
    std::string synth_mode = "gravity";  // gravity | patterns
    std::string synth_family = "G_GM";
    std::string synth_metric = "travel_min";
    int synth_cities = 40;
    int synth_pairs = 300;
    int synth_cities_per_pattern = 8;
    double synth_log_a = -5;
    double synth_alpha = 1;
    double synth_beta = 1;
    double synth_gamma = 0.5;
    double synth_noise = 0;
    bool synth_messages = false;

    std::filesystem::path out_dir = "out";
    unsigned workers = 1;  // never affects outputs

    /// Stable text of every setting that can influence outputs.
    std::string canonical() const;
    std::uint64_t hash() const;
    /// `# key: value` block written at the top of every output file.
    std::string metadata_header() const;
};

struct Invocation {
    std::string command;
    RunConfig config;
    int exit_code = -1;  // set when parsing already finished the run (help, errors)
};

/// Flags plus an optional `--config file` of key=value lines; flags win.
Invocation parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_extract(const RunConfig& config, std::ostream& log);
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_cluster(const RunConfig& config, std::ostream& log);
int cmd_indices(const RunConfig& config, std::ostream& log);
int cmd_correlate(const RunConfig& config, std::ostream& log);
int cmd_synth(const RunConfig& config, std::ostream& log);

/// Dispatches and maps library errors to exit code 1.
int run(const Invocation& invocation, std::ostream& log);

}  // namespace migflux::cli
