#include "migflux/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "migflux/csv.hpp"
#include "migflux/kernels.hpp"
#include "migflux/parallel.hpp"

namespace migflux::clustering {

std::vector<Vec3> FeatureSet::vectors() const {
    std::vector<Vec3> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.vector());
    return out;
}

FeatureSet build_features(const ingest::FluxMatrix& undirected, const geo::CityTable& cities,
                          const geo::CostMatrix& travel_time) {
    if (undirected.directed()) throw ContractError("build_features: undirected flux required");
    FeatureSet set;
    for (const auto& [pair, count] : undirected.entries()) {
        const auto* a = cities.find(pair.a);
        const auto* b = cities.find(pair.b);
        const auto t = travel_time.find(pair.a, pair.b);
        if (a == nullptr || b == nullptr || !t) {
            ++set.excluded_missing;
            continue;
        }
        TrajectoryFeature f;
        f.pair = pair;
        f.gdp_product = a->gdp * b->gdp;
        f.travel_time = *t;
        f.flux = static_cast<double>(count);
        set.features.push_back(std::move(f));
    }
    if (set.features.empty()) throw DataError("build_features: no pair has GDP and travel time");

    struct Coordinate {
        const char* name;
        double TrajectoryFeature::*raw;
        double TrajectoryFeature::*norm;
    };
    constexpr Coordinate coords[] = {
        {"gdp_product", &TrajectoryFeature::gdp_product, &TrajectoryFeature::g_norm},
        {"travel_time", &TrajectoryFeature::travel_time, &TrajectoryFeature::t_norm},
        {"flux", &TrajectoryFeature::flux, &TrajectoryFeature::f_norm},
    };
    for (const auto& c : coords) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& f : set.features) {
            lo = std::min(lo, f.*c.raw);
            hi = std::max(hi, f.*c.raw);
        }
        if (!(hi > lo)) throw DataError(std::string("degenerate feature: ") + c.name + " is constant");
        const double span = hi - lo;
        for (auto& f : set.features) f.*c.norm = std::clamp((f.*c.raw - lo) / span, 0.0, 1.0);
    }
    return set;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) {
        if (a >= 0) ++sizes[static_cast<std::size_t>(a)];
    }
    return sizes;
}

namespace {

// Distances below this are treated as the same direction during seeding.
constexpr double kSameDirection = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct UnitPoints {
    std::vector<double> x, y, z;
    std::vector<std::size_t> source;  // index into the caller's vectors

    std::size_t size() const { return x.size(); }
    kernels::Points3 view() const { return {x, y, z}; }
    kernels::Points3 view(std::size_t begin, std::size_t end) const {
        return {std::span(x).subspan(begin, end - begin), std::span(y).subspan(begin, end - begin),
                std::span(z).subspan(begin, end - begin)};
    }
};

UnitPoints normalize(std::span<const Vec3> vectors) {
    UnitPoints p;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (!(norm > 0)) continue;
        p.x.push_back(v[0] / norm);
        p.y.push_back(v[1] / norm);
        p.z.push_back(v[2] / norm);
        p.source.push_back(i);
    }
    return p;
}

struct RunResult {
    std::vector<int> labels;
    std::vector<double> centers;  // k x 3
    RunTrace trace;
};

std::vector<double> seed_centers(const UnitPoints& pts, int k, std::mt19937_64& rng) {
    const std::size_t n = pts.size();
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k) * 3);
    auto take = [&](std::size_t i) { centers.insert(centers.end(), {pts.x[i], pts.y[i], pts.z[i]}); };

    take(std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n))));
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        const double last[3] = {centers[centers.size() - 3], centers[centers.size() - 2], centers.back()};
        kernels::relax_min_distance(pts.view(), last, dist);
        double total = 0;
        for (double d : dist) {
            if (d > kSameDirection) total += d;
        }
        if (!(total > 0)) throw DataError("kmeans: fewer distinct directions than k");
        const double target = uniform01(rng) * total;
        double cumulative = 0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] <= kSameDirection) continue;
            cumulative += dist[i];
            pick = i;
            if (cumulative > target) break;
        }
        take(pick);
    }
    return centers;
}

// Moves the point least similar to its own centroid into each empty cluster.
void repair_empty(std::vector<int>& labels, std::vector<double>& best, int k) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        std::size_t pick = labels.size();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
            if (pick == labels.size() || best[i] < best[pick]) pick = i;
        }
        --counts[static_cast<std::size_t>(labels[pick])];
        labels[pick] = c;
        best[pick] = 1.0;
        counts[static_cast<std::size_t>(c)] = 1;
    }
}

// Cluster sums in point order; returns E = sum of their norms.
double cluster_sums(const UnitPoints& pts, std::span<const int> labels, int k, std::vector<double>& sums) {
    sums.assign(static_cast<std::size_t>(k) * 3, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        sums[3 * c] += pts.x[i];
        sums[3 * c + 1] += pts.y[i];
        sums[3 * c + 2] += pts.z[i];
    }
    double e = 0;
    for (int c = 0; c < k; ++c) {
        const auto* s = &sums[3 * static_cast<std::size_t>(c)];
        e += std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    }
    return e;
}

RunResult run_once(const UnitPoints& pts, int k, int max_iter, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RunResult run;
    run.trace.seed = seed;
    run.centers = seed_centers(pts, k, rng);

    const std::size_t n = pts.size();
    std::vector<int> labels(n, -1), previous(n, -1);
    std::vector<double> best(n), sums;
    for (int iter = 0; iter < max_iter; ++iter) {
        kernels::assign_max_dot(pts.view(), run.centers, labels, best);
        repair_empty(labels, best, k);
        const double e = cluster_sums(pts, labels, k, sums);
        run.trace.history.push_back(e);
        run.trace.iterations = iter + 1;
        for (int c = 0; c < k; ++c) {
            const auto* s = &sums[3 * static_cast<std::size_t>(c)];
            const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
            if (norm > 0) {
                for (int d = 0; d < 3; ++d) run.centers[3 * static_cast<std::size_t>(c) + d] = s[d] / norm;
            }
        }
        if (labels == previous) {
            run.trace.converged = true;
            break;
        }
        previous = labels;
    }
    run.trace.criterion = run.trace.history.back();
    run.labels = std::move(labels);
    return run;
}

}  // namespace

ClusterModel kmeans_cosine(std::span<const Vec3> vectors, const KMeansOptions& options) {
    if (options.k < 2) throw DataError("kmeans: k must be at least 2");
    if (options.restarts < 1 || options.max_iter < 1) throw DataError("kmeans: restarts and max_iter must be >= 1");
    const auto pts = normalize(vectors);
    if (pts.size() < static_cast<std::size_t>(options.k)) {
        throw DataError("kmeans: k = " + std::to_string(options.k) + " exceeds " + std::to_string(pts.size()) +
                        " usable vectors");
    }

    std::vector<RunResult> runs(static_cast<std::size_t>(options.restarts));
    parallel_for(runs.size(), options.workers, [&](std::size_t r) {
        const std::uint64_t sub = splitmix64(options.seed ^ splitmix64(0xC1A55E5ULL + r));
        runs[r] = run_once(pts, options.k, options.max_iter, sub);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].trace.criterion > runs[best].trace.criterion) best = r;
    }

    ClusterModel model;
    model.k = options.k;
    model.seed = options.seed;
    model.best_restart = static_cast<int>(best);
    model.criterion = runs[best].trace.criterion;
    model.excluded_zero = vectors.size() - pts.size();
    model.assignments.assign(vectors.size(), -1);
    for (std::size_t i = 0; i < pts.size(); ++i) model.assignments[pts.source[i]] = runs[best].labels[i];
    for (int c = 0; c < options.k; ++c) {
        const auto* s = &runs[best].centers[3 * static_cast<std::size_t>(c)];
        model.centroids.push_back({s[0], s[1], s[2]});
    }
    for (auto& run : runs) model.runs.push_back(std::move(run.trace));
    return model;
}

double criterion_value(std::span<const Vec3> vectors, std::span<const int> assignments, int k) {
    std::vector<Vec3> sums(static_cast<std::size_t>(k), Vec3{0, 0, 0});
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (assignments[i] < 0) continue;
        const auto& v = vectors[i];
        const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (!(norm > 0)) continue;
        auto& s = sums[static_cast<std::size_t>(assignments[i])];
        for (int d = 0; d < 3; ++d) s[d] += v[d] / norm;
    }
    double e = 0;
    for (const auto& s : sums) e += std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    return e;
}

double silhouette(std::span<const Vec3> vectors, std::span<const int> assignments, int k, unsigned workers) {
    if (k < 2) throw ContractError("silhouette: k must be at least 2");
    const auto all = normalize(vectors);
    UnitPoints pts;
    std::vector<int> labels;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const int l = assignments[all.source[i]];
        if (l < 0) continue;
        if (l >= k) throw ContractError("silhouette: assignment out of range");
        pts.x.push_back(all.x[i]);
        pts.y.push_back(all.y[i]);
        pts.z.push_back(all.z[i]);
        labels.push_back(l);
    }
    const std::size_t n = pts.size();
    if (n == 0) return 0;

    std::vector<double> sums(static_cast<std::size_t>(k) * 3, 0.0);
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        sums[3 * c] += pts.x[i];
        sums[3 * c + 1] += pts.y[i];
        sums[3 * c + 2] += pts.z[i];
        counts[c] += 1;
    }

    // Sum over a cluster of (1 - v.u) is |C| - v.S_C, so each point needs only k dots.
    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    const auto uk = static_cast<std::size_t>(k);
    std::vector<double> score(n, 0.0);
    parallel_for(chunks, workers, [&](std::size_t chunk) {
        const std::size_t begin = chunk * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        std::vector<double> dots((end - begin) * uk);
        kernels::dots_to_centers(pts.view(begin, end), sums, dots);
        for (std::size_t i = begin; i < end; ++i) {
            const auto own = static_cast<std::size_t>(labels[i]);
            const double size = counts[own];
            if (size < 2) continue;
            const double* d = &dots[(i - begin) * uk];
            const double self = pts.x[i] * pts.x[i] + pts.y[i] * pts.y[i] + pts.z[i] * pts.z[i];
            const double a = std::max(0.0, ((size - 1) - (d[own] - self)) / (size - 1));
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < uk; ++c) {
                if (c == own || counts[c] == 0) continue;
                b = std::min(b, std::max(0.0, (counts[c] - d[c]) / counts[c]));
            }
            if (!std::isfinite(b)) continue;
            const double denom = std::max(a, b);
            score[i] = denom > 0 ? (b - a) / denom : 0.0;
        }
    });
    return std::accumulate(score.begin(), score.end(), 0.0) / static_cast<double>(n);
}

std::vector<ScanPoint> elbow_scan(std::span<const Vec3> vectors, std::span<const int> ks, KMeansOptions options) {
    std::vector<ScanPoint> out;
    for (int k : ks) {
        options.k = k;
        out.push_back({k, kmeans_cosine(vectors, options).criterion});
    }
    return out;
}

std::vector<ScanPoint> silhouette_scan(std::span<const Vec3> vectors, std::span<const int> ks,
                                       KMeansOptions options) {
    std::vector<ScanPoint> out;
    for (int k : ks) {
        options.k = k;
        const auto model = kmeans_cosine(vectors, options);
        out.push_back({k, silhouette(vectors, model.assignments, k, options.workers)});
    }
    return out;
}

void write_scan(std::ostream& out, std::span<const ScanPoint> scan) {
    out << "k,score\n";
    for (const auto& p : scan) out << p.k << ',' << csv::format_double(p.score) << '\n';
}

PatternLabeling label_patterns(const ClusterModel& model, const FeatureSet& features) {
    if (model.k != 4) throw ContractError("label_patterns: k must be 4, got " + std::to_string(model.k));
    if (model.assignments.size() != features.features.size()) {
        throw ContractError("label_patterns: model and features differ in length");
    }
    std::array<PatternSummary, 4> by_cluster{};
    double grand_total = 0;
    for (std::size_t i = 0; i < features.features.size(); ++i) {
        const int c = model.assignments[i];
        if (c < 0) continue;
        const auto& f = features.features[i];
        auto& s = by_cluster[static_cast<std::size_t>(c)];
        ++s.pairs;
        s.total_flux += f.flux;
        s.mean_travel_time += f.travel_time;
        s.mean_gdp_product += f.gdp_product;
        grand_total += f.flux;
    }
    for (int c = 0; c < 4; ++c) {
        auto& s = by_cluster[static_cast<std::size_t>(c)];
        s.cluster = c;
        if (s.pairs == 0) throw DataError("label_patterns: empty cluster " + std::to_string(c));
        const auto n = static_cast<double>(s.pairs);
        s.mean_flux = s.total_flux / n;
        s.mean_travel_time /= n;
        s.mean_gdp_product /= n;
        s.flux_share = grand_total > 0 ? s.total_flux / grand_total : 0;
    }

    std::array<int, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int l, int r) {
        const auto& a = by_cluster[static_cast<std::size_t>(l)];
        const auto& b = by_cluster[static_cast<std::size_t>(r)];
        if (a.mean_flux != b.mean_flux) return a.mean_flux > b.mean_flux;
        if (a.mean_travel_time != b.mean_travel_time) return a.mean_travel_time < b.mean_travel_time;
        return l < r;
    });

    PatternLabeling out;
    for (std::size_t rank = 0; rank < 4; ++rank) {
        const auto c = static_cast<std::size_t>(order[rank]);
        const auto label = kAllPatterns[rank];
        out.label_of_cluster[c] = label;
        out.summary[rank] = by_cluster[c];
        out.summary[rank].label = label;
        if (rank > 0 && out.summary[rank].mean_flux == out.summary[rank - 1].mean_flux) out.tie_broken = true;
    }
    const auto& s = out.summary;
    out.pattern_i_min_travel_time = true;
    out.pattern_iv_max_travel_time = true;
    for (std::size_t p = 1; p < 4; ++p) {
        out.pattern_i_min_travel_time &= s[0].mean_travel_time <= s[p].mean_travel_time;
        out.pattern_iv_max_travel_time &= s[3].mean_travel_time >= s[p - 1].mean_travel_time;
    }
    out.pattern_ii_max_gdp_product =
        s[1].mean_gdp_product >= s[2].mean_gdp_product && s[1].mean_gdp_product >= s[3].mean_gdp_product;
    return out;
}

std::vector<PatternFit> fit_per_pattern(const ClusterModel& model, const PatternLabeling& labeling,
                                        const FeatureSet& features, const geo::CityTable& cities,
                                        const geo::CostMatrix& travel_time) {
    std::array<std::vector<gravity::PairFlow>, 4> flows;
    for (std::size_t i = 0; i < features.features.size(); ++i) {
        const int c = model.assignments[i];
        if (c < 0) continue;
        const auto& f = features.features[i];
        flows[index_of(labeling.label_of_cluster[static_cast<std::size_t>(c)])].push_back({f.pair, f.flux});
    }
    const gravity::ModelSpec spec{gravity::Family::G_GM, geo::Metric::travel_min};
    std::vector<PatternFit> out;
    for (auto p : kAllPatterns) {
        out.push_back({p, gravity::fit_cell(spec, flows[index_of(p)], false, cities, travel_time)});
    }
    return out;
}

void write_assignments(std::ostream& out, const ClusterModel& model, const FeatureSet& features,
                       const PatternLabeling* labeling) {
    out << "city_a,city_b,cluster,pattern_label\n";
    for (std::size_t i = 0; i < features.features.size(); ++i) {
        const int c = model.assignments[i];
        if (c < 0) continue;
        const auto& p = features.features[i].pair;
        out << p.a << ',' << p.b << ',' << c << ',';
        if (labeling != nullptr) out << pattern_name(labeling->label_of_cluster[static_cast<std::size_t>(c)]);
        out << '\n';
    }
}

}  // namespace migflux::clustering
