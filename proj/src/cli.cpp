#include "migflux/cli.hpp"

#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "migflux/clustering.hpp"
#include "migflux/csv.hpp"
#include "migflux/geo.hpp"
#include "migflux/gravity.hpp"
#include "migflux/indices.hpp"
#include "migflux/ingest.hpp"
#include "migflux/synth.hpp"

namespace migflux::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMaxSynthTrips = 5'000'000;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Named per-stage seed derived from the run seed.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) { return splitmix64(seed ^ fnv1a(stage)); }

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::ifstream open_in(const fs::path& path, std::string_view what) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + std::string(what) + " '" + path.string() + "'");
    return in;
}

void write_file(const fs::path& path, const std::string& header, const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << header;
    body(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

geo::CityTable load_cities(const RunConfig& c) {
    if (c.cities.empty()) throw Error("--cities is required");
    auto in = open_in(c.cities, "city attributes");
    return geo::CityTable::load(in);
}

std::optional<geo::CostMatrix> load_cost(const fs::path& path, geo::Metric m) {
    if (path.empty()) return std::nullopt;
    auto in = open_in(path, "cost table");
    return geo::load_cost_table(in, m);
}

ingest::FluxMatrix load_flux(const fs::path& path, bool directed) {
    auto in = open_in(path, "flux csv");
    auto f = ingest::FluxMatrix::read_csv(in);
    if (f.directed() != directed) {
        throw FormatError("flux csv '" + path.string() + "' is " + (f.directed() ? "directed" : "undirected"));
    }
    return f;
}

ingest::FluxMatrix load_undirected(const RunConfig& c) {
    if (!c.undirected_flux.empty()) return load_flux(c.undirected_flux, false);
    if (!c.directed_flux.empty()) return load_flux(c.directed_flux, true).symmetrized();
    throw Error("--undirected-flux or --directed-flux is required");
}

geo::CostMatrix require_travel_time(const RunConfig& c) {
    auto t = load_cost(c.cost_travel_min, geo::Metric::travel_min);
    if (!t) throw Error("--cost-travel-min is required");
    return std::move(*t);
}

// Cost used to rank neighbours in the locality and GDP match curves.
geo::CostMatrix locality_cost(const RunConfig& c, const geo::CityTable& cities, const geo::CostMatrix& travel_time) {
    const auto m = geo::parse_metric(c.locality_metric);
    if (!m) throw FormatError("unknown cost metric '" + c.locality_metric + "'");
    switch (*m) {
        case geo::Metric::travel_min: return travel_time;
        case geo::Metric::geo_km: return geo::geo_cost_matrix(cities, c.diameter_km);
        case geo::Metric::travel_km: {
            auto t = load_cost(c.cost_travel_km, geo::Metric::travel_km);
            if (!t) throw Error("--cost-travel-km is required for --locality-metric travel_km");
            return std::move(*t);
        }
    }
    throw ContractError("unreachable metric");
}

std::string sanitize(std::string s) {
    for (auto& ch : s) {
        if (ch == ',' || ch == '\n') ch = ';';
    }
    return s;
}

indices::PatternedFlux patterned_from_model(const clustering::ClusterModel& model,
                                            const clustering::PatternLabeling& labeling,
                                            const clustering::FeatureSet& features, const geo::CityTable& cities) {
    indices::PatternedFlux pf;
    for (std::size_t i = 0; i < features.features.size(); ++i) {
        const int cl = model.assignments[i];
        if (cl < 0) continue;
        const auto& f = features.features[i];
        pf.add(f.pair.a, f.pair.b, f.flux, labeling.label_of_cluster[static_cast<std::size_t>(cl)]);
    }
    for (const auto& [id, c] : cities.all()) pf.province_of[id] = c.province_id;
    return pf;
}

void write_indices(const RunConfig& c, const indices::PatternedFlux& pf, const ingest::FluxMatrix& flux,
                   const geo::CityTable& cities, const geo::CostMatrix& travel_time, std::ostream& log) {
    const auto cost = locality_cost(c, cities, travel_time);
    const auto report = indices::compute_report(pf, flux, cities, cost, c.workers);
    indices::write_report(report, c.out_dir, c.metadata_header());
    log << "indices: " << report.development.size() << " cities, " << report.province_patterns.size()
        << " provinces\n";
    if (c.representatives) {
        const auto reps = indices::representative_cities(pf);
        write_file(c.out_dir / "representatives.csv",
                   c.metadata_header() + "# heuristic: share >= 0.5 (I, II, IV) or 0.4 (III); not validated\n",
                   [&](std::ostream& out) {
                       out << "city_id,pattern_label,share\n";
                       for (const auto& r : reps) {
                           out << r.city << ',' << pattern_name(r.label) << ',' << csv::format_double(r.share) << '\n';
                       }
                   });
    }
}

}  // namespace

std::string RunConfig::canonical() const {
    std::ostringstream s;
    s << "messages=" << messages.string() << '\n'
      << "registry=" << registry.string() << '\n'
      << "cities=" << cities.string() << '\n'
      << "cost_travel_km=" << cost_travel_km.string() << '\n'
      << "cost_travel_min=" << cost_travel_min.string() << '\n'
      << "directed_flux=" << directed_flux.string() << '\n'
      << "undirected_flux=" << undirected_flux.string() << '\n'
      << "assignments=" << assignments.string() << '\n'
      << "covariate=" << covariate.string() << '\n'
      << "province_patterns=" << province_patterns.string() << '\n'
      << "province_covariate=" << province_covariate.string() << '\n'
      << "window=" << window_begin << ".." << window_end << '\n'
      << "families=" << join(families) << '\n'
      << "metrics=" << join(metrics) << '\n'
      << "diameter_km=" << csv::format_double(diameter_km) << '\n'
      << "k=" << k << " k_range=" << k_min << ".." << k_max << '\n'
      << "restarts=" << restarts << " max_iter=" << max_iter << '\n'
      << "seed=" << seed << '\n'
      << "representatives=" << representatives << '\n'
      << "correlate_patterns=" << join(correlate_patterns) << '\n'
      << "locality_metric=" << locality_metric << '\n'
      << "synth=" << synth_mode << ',' << synth_family << ',' << synth_metric << ',' << synth_cities << ','
      << synth_pairs << ',' << synth_cities_per_pattern << ',' << csv::format_double(synth_log_a) << ','
      << csv::format_double(synth_alpha) << ',' << csv::format_double(synth_beta) << ','
      << csv::format_double(synth_gamma) << ',' << csv::format_double(synth_noise) << ',' << synth_messages << '\n';
    return s.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

std::string RunConfig::metadata_header() const {
    std::ostringstream s;
    s << "# tool: " << kToolVersion << '\n'
      << "# seed: " << seed << '\n'
      << "# config_hash: " << hex(hash()) << '\n'
      << "# earth_diameter_km: " << csv::format_double(diameter_km) << '\n'
      << "# log: natural\n"
      << "# p_values: normal approximation for coefficients; F distribution for f_stat\n";
    return s.str();
}

int cmd_extract(const RunConfig& c, std::ostream& log) {
    if (c.messages.empty()) throw Error("--messages is required");
    ingest::CityRegistry registry;
    if (!c.registry.empty()) {
        auto in = open_in(c.registry, "city registry");
        registry = ingest::CityRegistry::load(in);
    } else {
        const auto ids = load_cities(c).ids();
        registry = ingest::CityRegistry::identity(ids);
    }
    const ingest::TimeWindow window{ingest::parse_time_arg(c.window_begin), ingest::parse_time_arg(c.window_end)};
    if (window.end <= window.begin) throw Error("empty extraction window");

    auto in = open_in(c.messages, "message log");
    const auto parsed = ingest::parse_messages(in, registry, window);
    auto result = ingest::extract(parsed.messages, c.workers);
    result.stats.rejects = parsed.rejects;

    const auto header = c.metadata_header();
    write_file(c.out_dir / "flux_directed.csv", header, [&](std::ostream& o) { result.directed.write_csv(o); });
    write_file(c.out_dir / "flux_undirected.csv", header, [&](std::ostream& o) { result.undirected.write_csv(o); });
    const auto& s = result.stats;
    write_file(c.out_dir / "extract_meta.txt", header, [&](std::ostream& o) {
        o << "window_begin=" << window.begin << '\n'
          << "window_end=" << window.end << '\n'
          << "timestamp_format="
          << (parsed.format == ingest::TimestampFormat::iso8601 ? "iso8601" : "epoch_seconds") << '\n'
          << "messages=" << s.messages << '\n'
          << "rejected_malformed=" << s.rejects.malformed << '\n'
          << "rejected_unknown_city=" << s.rejects.unknown_city << '\n'
          << "rejected_out_of_window=" << s.rejects.out_of_window << '\n'
          << "users=" << s.users << '\n'
          << "stationary_users=" << s.stationary_users << '\n'
          << "adjacent_posts=" << s.adjacent_posts << '\n'
          << "transitions=" << s.transitions << '\n'
          << "cities=" << result.directed.city_count() << '\n'
          << "directed_pairs=" << result.directed.pair_count() << '\n'
          << "undirected_pairs=" << result.undirected.pair_count() << '\n';
    });
    log << "extract: " << s.messages << " messages, " << s.rejects.total() << " rejected, " << s.transitions
        << " transitions, " << result.directed.city_count() << " cities\n";
    if (s.messages == 0) {
        log << "warning: no usable messages; flux files are empty\n";
        return kPartial;
    }
    return kSuccess;
}

int cmd_fit(const RunConfig& c, std::ostream& log) {
    const auto cities = load_cities(c);
    std::optional<ingest::FluxMatrix> directed, undirected;
    if (!c.directed_flux.empty()) directed = load_flux(c.directed_flux, true);
    if (!c.undirected_flux.empty()) {
        undirected = load_flux(c.undirected_flux, false);
    } else if (directed) {
        undirected = directed->symmetrized();
    }
    if (!directed && !undirected) throw Error("--undirected-flux or --directed-flux is required");

    std::vector<gravity::Family> families;
    for (const auto& name : c.families) {
        const auto f = gravity::parse_family(name);
        if (!f) throw FormatError("unknown model family '" + name + "'");
        families.push_back(*f);
    }
    std::vector<geo::Metric> metrics;
    for (const auto& name : c.metrics) {
        const auto m = geo::parse_metric(name);
        if (!m) throw FormatError("unknown cost metric '" + name + "'");
        metrics.push_back(*m);
    }

    const auto geo_cost = geo::geo_cost_matrix(cities, c.diameter_km);
    const auto travel_km = load_cost(c.cost_travel_km, geo::Metric::travel_km);
    const auto travel_min = load_cost(c.cost_travel_min, geo::Metric::travel_min);
    gravity::ModelInputs inputs;
    inputs.directed = directed ? &*directed : nullptr;
    inputs.undirected = undirected ? &*undirected : nullptr;
    inputs.cities = &cities;
    inputs.costs[geo::Metric::geo_km] = &geo_cost;
    if (travel_km) inputs.costs[geo::Metric::travel_km] = &*travel_km;
    if (travel_min) inputs.costs[geo::Metric::travel_min] = &*travel_min;

    const auto cells = gravity::compare_models(inputs, families, metrics, c.workers);
    const auto header = c.metadata_header();
    write_file(c.out_dir / "fits.csv", header, [&](std::ostream& o) { gravity::write_fit_table(o, cells); });
    bool partial = false;
    for (const auto& cell : cells) {
        const auto name = std::string(gravity::family_name(cell.spec.family)) + "_" +
                          std::string(geo::metric_name(cell.spec.cost_metric)) + ".csv";
        std::string cell_header = header;
        cell_header += "# excluded_missing_cost: " + std::to_string(cell.table.excluded_missing_cost) + "\n";
        if (!cell.ok()) cell_header += "# error: " + sanitize(cell.error) + "\n";
        write_file(c.out_dir / "predictions" / name, cell_header,
                   [&](std::ostream& o) { gravity::write_predictions(o, cell); });
        if (cell.ok()) {
            log << gravity::family_name(cell.spec.family) << '/' << geo::metric_name(cell.spec.cost_metric)
                << ": gamma=" << cell.fit->gamma << " ssi=" << cell.ssi << '\n';
        } else {
            partial = true;
            log << gravity::family_name(cell.spec.family) << '/' << geo::metric_name(cell.spec.cost_metric)
                << ": error: " << cell.error << '\n';
        }
    }
    return partial ? kPartial : kSuccess;
}

int cmd_cluster(const RunConfig& c, std::ostream& log) {
    const auto cities = load_cities(c);
    const auto flux = load_undirected(c);
    const auto travel_time = require_travel_time(c);
    const auto features = clustering::build_features(flux, cities, travel_time);
    const auto vectors = features.vectors();
    log << "cluster: " << features.features.size() << " trajectories, " << features.excluded_missing
        << " excluded for missing data\n";

    clustering::KMeansOptions options;
    options.max_iter = c.max_iter;
    options.restarts = c.restarts;
    options.workers = c.workers;

    std::vector<clustering::ScanPoint> elbow, sil;
    std::optional<clustering::ClusterModel> chosen;
    auto run_k = [&](int k) {
        options.k = k;
        options.seed = stage_seed(c.seed, "cluster.k=" + std::to_string(k));
        return clustering::kmeans_cosine(vectors, options);
    };
    for (int k = c.k_min; k <= c.k_max; ++k) {
        auto model = run_k(k);
        elbow.push_back({k, model.criterion});
        sil.push_back({k, clustering::silhouette(vectors, model.assignments, k, c.workers)});
        if (k == c.k) chosen = std::move(model);
    }
    if (!chosen) chosen = run_k(c.k);

    const auto header = c.metadata_header();
    write_file(c.out_dir / "elbow.csv", header, [&](std::ostream& o) { clustering::write_scan(o, elbow); });
    write_file(c.out_dir / "silhouette.csv", header, [&](std::ostream& o) { clustering::write_scan(o, sil); });

    const auto& model = *chosen;
    const std::string model_header = header + "# k: " + std::to_string(model.k) +
                                     "\n# kmeans_seed: " + std::to_string(model.seed) +
                                     "\n# best_restart: " + std::to_string(model.best_restart) +
                                     "\n# excluded_zero_vectors: " + std::to_string(model.excluded_zero) + "\n";
    if (model.k != 4) {
        write_file(c.out_dir / "assignments.csv", model_header,
                   [&](std::ostream& o) { clustering::write_assignments(o, model, features, nullptr); });
        log << "warning: pattern labels, per-pattern fits and indices need k = 4\n";
        return kPartial;
    }

    const auto labeling = clustering::label_patterns(model, features);
    write_file(c.out_dir / "assignments.csv", model_header,
               [&](std::ostream& o) { clustering::write_assignments(o, model, features, &labeling); });
    std::string checks = model_header;
    checks += std::string("# check_pattern_I_min_travel_time: ") + (labeling.pattern_i_min_travel_time ? "yes" : "no") + "\n";
    checks += std::string("# check_pattern_II_max_gdp_product: ") + (labeling.pattern_ii_max_gdp_product ? "yes" : "no") + "\n";
    checks += std::string("# check_pattern_IV_max_travel_time: ") + (labeling.pattern_iv_max_travel_time ? "yes" : "no") + "\n";
    checks += std::string("# mean_flux_tie_broken_by_travel_time: ") + (labeling.tie_broken ? "yes" : "no") + "\n";
    write_file(c.out_dir / "patterns.csv", checks, [&](std::ostream& o) {
        o << "pattern_label,cluster,pairs,mean_flux,flux_share,mean_travel_time,mean_gdp_product\n";
        for (const auto& s : labeling.summary) {
            o << pattern_name(s.label) << ',' << s.cluster << ',' << s.pairs << ',' << csv::format_double(s.mean_flux)
              << ',' << csv::format_double(s.flux_share) << ',' << csv::format_double(s.mean_travel_time) << ','
              << csv::format_double(s.mean_gdp_product) << '\n';
        }
    });

    const auto fits = clustering::fit_per_pattern(model, labeling, features, cities, travel_time);
    bool partial = false;
    write_file(c.out_dir / "pattern_fits.csv", model_header, [&](std::ostream& o) {
        o << "pattern_label,gamma,log_a,r2,f_stat,f_pvalue,n_obs,ssi,status\n";
        for (const auto& pf : fits) {
            o << pattern_name(pf.label) << ',';
            if (pf.cell.ok()) {
                const auto& f = *pf.cell.fit;
                o << csv::format_double(f.gamma) << ',' << csv::format_double(f.log_a) << ','
                  << csv::format_double(f.r_squared) << ',' << csv::format_double(f.f_statistic) << ','
                  << csv::format_double(f.f_pvalue) << ',' << f.n_obs << ',' << csv::format_double(pf.cell.ssi)
                  << ",ok\n";
            } else {
                partial = true;
                o << ",,,,,,,error: " << sanitize(pf.cell.error) << '\n';
            }
        }
    });

    write_indices(c, patterned_from_model(model, labeling, features, cities), flux, cities, travel_time, log);
    return partial ? kPartial : kSuccess;
}

int cmd_indices(const RunConfig& c, std::ostream& log) {
    if (c.assignments.empty()) throw Error("--assignments is required");
    const auto cities = load_cities(c);
    const auto flux = load_undirected(c);
    const auto travel_time = require_travel_time(c);
    auto in = open_in(c.assignments, "assignment csv");
    const auto pf = indices::read_patterned_flux(in, flux, cities);
    write_indices(c, pf, flux, cities, travel_time, log);
    return kSuccess;
}

int cmd_correlate(const RunConfig& c, std::ostream& log) {
    struct Row {
        std::string measure;
        std::size_t n;
        double r;
    };
    std::vector<Row> rows;

    if (!c.covariate.empty()) {
        const auto flux = load_undirected(c);
        auto in = open_in(c.covariate, "covariate csv");
        const auto h = csv::read_header(in, "covariate csv");
        const auto ca = h.require("city_a", "covariate csv");
        const auto cb = h.require("city_b", "covariate csv");
        const auto cv = h.require("value", "covariate csv");
        std::map<CityPair, double> covariate;
        std::string line;
        while (csv::next_record(in, line)) {
            const auto f = csv::split(line);
            if (f.size() != h.size()) throw FormatError("covariate csv: bad row '" + line + "'");
            covariate[canonical(f[ca], f[cb])] += csv::parse_double(f[cv], "covariate value");
        }
        std::vector<double> xs, ys;
        for (const auto& [pair, count] : flux.entries()) {
            auto it = covariate.find(pair);
            if (it == covariate.end()) continue;
            xs.push_back(static_cast<double>(count));
            ys.push_back(it->second);
        }
        rows.push_back({"flux_vs_pair_covariate", xs.size(), indices::pearson(xs, ys)});
    }

    if (!c.province_patterns.empty() || !c.province_covariate.empty()) {
        if (c.province_patterns.empty() || c.province_covariate.empty()) {
            throw Error("--province-patterns and --province-covariate go together");
        }
        std::vector<std::size_t> columns;
        for (const auto& name : c.correlate_patterns) {
            const auto p = parse_pattern(name);
            if (!p) throw FormatError("unknown pattern '" + name + "'");
            columns.push_back(index_of(*p));
        }
        std::map<std::string, double> share;
        {
            auto in = open_in(c.province_patterns, "province patterns");
            const auto h = csv::read_header(in, "province patterns");
            const auto cp = h.require("province_id", "province patterns");
            std::array<std::size_t, 4> pc = {h.require("p1", "province patterns"), h.require("p2", "province patterns"),
                                             h.require("p3", "province patterns"), h.require("p4", "province patterns")};
            std::string line;
            while (csv::next_record(in, line)) {
                const auto f = csv::split(line);
                if (f.size() != h.size()) throw FormatError("province patterns: bad row '" + line + "'");
                double s = 0;
                for (auto col : columns) s += csv::parse_double(f[pc[col]], "pattern ratio");
                share[f[cp]] = s;
            }
        }
        auto in = open_in(c.province_covariate, "province covariate");
        const auto h = csv::read_header(in, "province covariate");
        const auto cp = h.require("province_id", "province covariate");
        const auto cv = h.require("value", "province covariate");
        std::vector<double> xs, ys;
        std::string line;
        while (csv::next_record(in, line)) {
            const auto f = csv::split(line);
            if (f.size() != h.size()) throw FormatError("province covariate: bad row '" + line + "'");
            auto it = share.find(f[cp]);
            if (it == share.end()) continue;
            xs.push_back(csv::parse_double(f[cv], "province covariate value"));
            ys.push_back(it->second);
        }
        rows.push_back({"province_covariate_vs_pattern_share", xs.size(), indices::pearson(xs, ys)});
    }
    if (rows.empty()) throw Error("nothing to correlate: give --covariate or --province-patterns/--province-covariate");

    write_file(c.out_dir / "correlation.csv", c.metadata_header() + "# patterns: " + join(c.correlate_patterns) + "\n",
               [&](std::ostream& o) {
                   o << "measure,n,pearson\n";
                   for (const auto& r : rows) o << r.measure << ',' << r.n << ',' << csv::format_double(r.r) << '\n';
               });
    for (const auto& r : rows) log << r.measure << ": r=" << r.r << " (n=" << r.n << ")\n";
    return kSuccess;
}

int cmd_synth(const RunConfig& c, std::ostream& log) {
    const auto header = c.metadata_header();
    const auto seed = stage_seed(c.seed, "synth");
    auto write_world = [&](const synth::World& w) {
        write_file(c.out_dir / "cities.csv", header, [&](std::ostream& o) { w.cities.write_csv(o); });
        write_file(c.out_dir / "cost_geo_km.csv", header, [&](std::ostream& o) { w.cost(geo::Metric::geo_km).write_csv(o); });
        write_file(c.out_dir / "cost_travel_km.csv", header, [&](std::ostream& o) { w.cost(geo::Metric::travel_km).write_csv(o); });
        write_file(c.out_dir / "cost_travel_min.csv", header, [&](std::ostream& o) { w.cost(geo::Metric::travel_min).write_csv(o); });
    };

    if (c.synth_mode == "patterns") {
        const auto planted = synth::planted_patterns(static_cast<std::size_t>(c.synth_cities_per_pattern), seed);
        write_world(planted.world);
        write_file(c.out_dir / "flux_undirected.csv", header, [&](std::ostream& o) { planted.flux.write_csv(o); });
        write_file(c.out_dir / "planted.csv", header, [&](std::ostream& o) {
            o << "city_a,city_b,pattern_label\n";
            for (const auto& [pair, p] : planted.planted) o << pair.a << ',' << pair.b << ',' << pattern_name(p) << '\n';
        });
        log << "synth: planted " << planted.planted.size() << " pairs in 4 patterns\n";
        return kSuccess;
    }
    if (c.synth_mode != "gravity") throw Error("unknown synth mode '" + c.synth_mode + "'");

    synth::GravityParams params;
    const auto family = gravity::parse_family(c.synth_family);
    const auto metric = geo::parse_metric(c.synth_metric);
    if (!family) throw FormatError("unknown model family '" + c.synth_family + "'");
    if (!metric) throw FormatError("unknown cost metric '" + c.synth_metric + "'");
    params.family = *family;
    params.metric = *metric;
    params.log_a = c.synth_log_a;
    params.alpha = c.synth_alpha;
    params.beta = c.synth_beta;
    params.gamma = c.synth_gamma;
    params.noise_sigma = c.synth_noise;
    params.directed = true;
    const auto world = synth::gravity_world(params, static_cast<std::size_t>(c.synth_cities),
                                            static_cast<std::size_t>(c.synth_pairs), seed);
    const auto directed = synth::to_flux(world);
    write_world(world);
    write_file(c.out_dir / "flux_directed.csv", header, [&](std::ostream& o) { directed.write_csv(o); });
    write_file(c.out_dir / "flux_undirected.csv", header, [&](std::ostream& o) { directed.symmetrized().write_csv(o); });
    if (c.synth_messages) {
        if (directed.total() > kMaxSynthTrips) {
            throw DataError("total flux " + std::to_string(directed.total()) +
                            " too large for a message log; lower --synth-log-a");
        }
        const auto messages = synth::messages_for(directed, stage_seed(c.seed, "synth.messages"),
                                                  ingest::parse_time_arg(c.window_begin));
        write_file(c.out_dir / "messages.csv", "", [&](std::ostream& o) {
            o << "message_id,user_id,timestamp,city_id\n";
            for (const auto& m : messages) o << m.message_id << ',' << m.user_id << ',' << m.timestamp << ',' << m.city_id << '\n';
        });
    }
    log << "synth: " << directed.pair_count() << " directed pairs, total flux " << directed.total() << '\n';
    return kSuccess;
}

int run(const Invocation& inv, std::ostream& log) {
    if (inv.exit_code >= 0) return inv.exit_code;
    const auto& c = inv.config;
    try {
        for (const auto* p : {&c.messages, &c.registry, &c.cities, &c.cost_travel_km, &c.cost_travel_min,
                              &c.directed_flux, &c.undirected_flux, &c.assignments, &c.covariate,
                              &c.province_patterns, &c.province_covariate}) {
            if (!p->empty() && !fs::exists(*p)) throw Error("input file not found: " + p->string());
        }
        if (inv.command == "extract") return cmd_extract(c, log);
        if (inv.command == "fit") return cmd_fit(c, log);
        if (inv.command == "cluster") return cmd_cluster(c, log);
        if (inv.command == "indices") return cmd_indices(c, log);
        if (inv.command == "correlate") return cmd_correlate(c, log);
        if (inv.command == "synth") return cmd_synth(c, log);
        log << "error: unknown command '" << inv.command << "'\n";
        return kFatal;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kFatal;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kFatal;
    }
}

}  // namespace migflux::cli
