#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "migflux/geo.hpp"
#include "migflux/ingest.hpp"
#include "migflux/pattern.hpp"

namespace migflux::indices {

struct LabeledFlux {
    double flux = 0;
    Pattern label = Pattern::I;
};

/// Undirected pair flux, each pair carrying one pattern label.
struct PatternedFlux {
    std::map<CityPair, LabeledFlux> entries;
    std::map<CityId, std::string> province_of;

    void add(const CityId& a, const CityId& b, double flux, Pattern label);
    PatternedFlux scaled(double k) const;
};

/// Joins `city_a,city_b,cluster,pattern_label` rows with the flux and the
/// province column of the city table. Pairs without a label are skipped.
PatternedFlux read_patterned_flux(std::istream& assignments, const ingest::FluxMatrix& undirected,
                                  const geo::CityTable& cities);

/// Share of city flux on Pattern I and II pairs. Throws DataError("no flux").
double development_index(const PatternedFlux& pf, const CityId& city);

/// Share of city flux in one pattern (used by the representative-city heuristic).
double pattern_share(const PatternedFlux& pf, const CityId& city, Pattern p);

/// p(k, P) for k = I..IV. Pairs inside the province count once per member
/// endpoint. Throws DataError for a province without flux.
std::array<double, 4> province_pattern_ratio(const PatternedFlux& pf, const std::string& province);

struct CurvePoint {
    std::size_t r = 0;
    double value = 0;
};

/// c(i, r): cumulative flux share of the r neighbours nearest by `cost`
/// (ties by city id). Throws ContractError when the city has no neighbour
/// with both flux and cost.
std::vector<CurvePoint> locality_curve(const ingest::FluxMatrix& undirected, const geo::CostMatrix& cost,
                                       const CityId& city);

/// l(r, i) = (sum of GDP of the r nearest cities by `cost`) / (r * GDP_i).
/// Neighbours are the cities with a cost entry to `city`.
std::vector<CurvePoint> gdp_match_curve(const geo::CityTable& cities, const geo::CostMatrix& cost,
                                        const CityId& city);

/// Sample Pearson correlation. Requires equal lengths >= 3 and nonzero variances.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct IndexReport {
    std::map<CityId, double> development;
    std::map<std::string, std::array<double, 4>> province_patterns;
    std::map<CityId, std::vector<CurvePoint>> locality;
    std::map<CityId, std::vector<CurvePoint>> gdp_match;
};

/// Every index for every city and province present in the inputs. Cities are
/// evaluated independently on `workers` threads.
IndexReport compute_report(const PatternedFlux& pf, const ingest::FluxMatrix& undirected,
                           const geo::CityTable& cities, const geo::CostMatrix& cost, unsigned workers = 1);

/// Writes di.csv, province_patterns.csv, locality/<city>.csv and gdp_match/<city>.csv.
/// Each file starts with `header` (metadata lines, may be empty).
void write_report(const IndexReport& report, const std::filesystem::path& dir, const std::string& header);

struct Representative {
    CityId city;
    Pattern label = Pattern::I;
    double share = 0;
};

/// Heuristic, not a validated reproduction: cities whose flux share in a
/// pattern reaches the threshold (0.5 for I, II and IV; 0.4 for III).
std::vector<Representative> representative_cities(const PatternedFlux& pf);

}  // namespace migflux::indices
