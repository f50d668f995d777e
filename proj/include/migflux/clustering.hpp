#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "migflux/geo.hpp"
#include "migflux/gravity.hpp"
#include "migflux/ingest.hpp"
#include "migflux/pattern.hpp"

namespace migflux::clustering {

using Vec3 = std::array<double, 3>;

/// Normalized (GDP product, travel time, flux) of one undirected city pair,
/// together with the raw values the normalization came from.
struct TrajectoryFeature {
    CityPair pair;
    double g_norm = 0;
    double t_norm = 0;
    double f_norm = 0;
    double gdp_product = 0;
    double travel_time = 0;
    double flux = 0;

    Vec3 vector() const { return {g_norm, t_norm, f_norm}; }
};

struct FeatureSet {
    std::vector<TrajectoryFeature> features;
    std::size_t excluded_missing = 0;  // pairs lacking GDP or a travel time

    std::vector<Vec3> vectors() const;
};

/// Min-max normalizes each coordinate over the included pairs. The flux is used
/// raw, without a log transform, so a few very busy pairs compress everything
/// else towards f_norm = 0. Throws DataError("degenerate feature: <name>") when
/// a coordinate is constant.
FeatureSet build_features(const ingest::FluxMatrix& undirected, const geo::CityTable& cities,
                          const geo::CostMatrix& travel_time);

struct KMeansOptions {
    int k = 4;
    std::uint64_t seed = 1;
    int max_iter = 300;
    int restarts = 10;
    unsigned workers = 1;
};

struct RunTrace {
    std::uint64_t seed = 0;
    double criterion = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // criterion after each assignment/update step
};

struct ClusterModel {
    int k = 0;
    std::uint64_t seed = 0;
    // One entry per input vector; -1 marks a zero vector left out of clustering.
    std::vector<int> assignments;
    std::vector<Vec3> centroids;  // unit norm
    double criterion = 0;
    int best_restart = 0;
    std::size_t excluded_zero = 0;
    std::vector<RunTrace> runs;  // one per restart, in restart order

    std::vector<std::size_t> cluster_sizes() const;
};

/// Spherical k-means maximizing E = sum_k sqrt(sum_{v,u in C_k} cos(v,u)),
/// which for unit vectors equals sum_k |sum_{v in C_k} v|. Seeding is
/// k-means++ on cosine distance; each restart draws from its own sub-seed and
/// the best (criterion, lowest restart index) wins. Throws DataError when k < 2,
/// when fewer than k nonzero vectors exist, or when the vectors span fewer
/// than k distinct directions.
ClusterModel kmeans_cosine(std::span<const Vec3> vectors, const KMeansOptions& options);

/// E for an arbitrary assignment (-1 entries ignored).
double criterion_value(std::span<const Vec3> vectors, std::span<const int> assignments, int k);

/// Mean silhouette with distance 1 - cos. Singletons score 0; excluded (-1)
/// vectors are skipped.
double silhouette(std::span<const Vec3> vectors, std::span<const int> assignments, int k, unsigned workers = 1);

struct ScanPoint {
    int k = 0;
    double score = 0;
};

/// Criterion per k; each k runs kmeans_cosine with the same options.
std::vector<ScanPoint> elbow_scan(std::span<const Vec3> vectors, std::span<const int> ks, KMeansOptions options);
std::vector<ScanPoint> silhouette_scan(std::span<const Vec3> vectors, std::span<const int> ks, KMeansOptions options);
void write_scan(std::ostream& out, std::span<const ScanPoint> scan);

struct PatternSummary {
    Pattern label = Pattern::I;
    int cluster = 0;
    std::size_t pairs = 0;
    double total_flux = 0;
    double mean_flux = 0;
    double flux_share = 0;
    double mean_travel_time = 0;
    double mean_gdp_product = 0;
};

struct PatternLabeling {
    std::array<Pattern, 4> label_of_cluster{};
    std::array<PatternSummary, 4> summary{};  // indexed by pattern
    bool tie_broken = false;
    // Cross-checks against the expected pattern profiles.
    bool pattern_i_min_travel_time = false;
    bool pattern_ii_max_gdp_product = false;  // among II-IV
    bool pattern_iv_max_travel_time = false;
};

/// Labels the k = 4 clusters I..IV by descending mean raw flux; ties go to the
/// lower mean travel time. Throws ContractError if model.k != 4.
PatternLabeling label_patterns(const ClusterModel& model, const FeatureSet& features);

struct PatternFit {
    Pattern label = Pattern::I;
    gravity::CellResult cell;
};

/// G_GM fit on travel time restricted to each pattern's pairs.
std::vector<PatternFit> fit_per_pattern(const ClusterModel& model, const PatternLabeling& labeling,
                                        const FeatureSet& features, const geo::CityTable& cities,
                                        const geo::CostMatrix& travel_time);

/// `city_a,city_b,cluster,pattern_label`
void write_assignments(std::ostream& out, const ClusterModel& model, const FeatureSet& features,
                       const PatternLabeling* labeling);

}  // namespace migflux::clustering
