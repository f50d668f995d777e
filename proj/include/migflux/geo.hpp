#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "migflux/common.hpp"
#include "migflux/ingest.hpp"

namespace migflux::geo {

inline constexpr double kEarthDiameterKm = 12742.0;

struct LonLat {
    double lon_deg = 0;
    double lat_deg = 0;
};

/// Haversine great-circle distance. `diameter_km` is the sphere's diameter,
/// so the result lies in [0, diameter_km * pi / 2].
double great_circle_km(LonLat a, LonLat b, double diameter_km = kEarthDiameterKm);

struct CityAttributes {
    CityId city_id;
    std::string name;
    LonLat position;
    double gdp = 0;
    double gdp_per_capita = 0;
    double population = 0;
    std::string province_id;
};

class CityTable {
public:
    CityTable() = default;

    /// Throws DataError when an invariant (coordinate range, positive masses) fails
    /// or the id is already present.
    void add(CityAttributes city);
    const CityAttributes* find(const CityId& id) const;
    const CityAttributes& at(const CityId& id) const;
    std::size_t size() const { return cities_.size(); }
    std::vector<CityId> ids() const;
    const std::map<CityId, CityAttributes>& all() const { return cities_; }

    /// `city_id,name,longitude,latitude,gdp,gdp_per_capita,population,province_id`
    static CityTable load(std::istream& in);
    void write_csv(std::ostream& out) const;

private:
    std::map<CityId, CityAttributes> cities_;
};

enum class Metric { geo_km, travel_km, travel_min };

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);
inline constexpr Metric kAllMetrics[] = {Metric::geo_km, Metric::travel_km, Metric::travel_min};

/// Symmetric per-pair cost; keys are canonical pairs.
class CostMatrix {
public:
    explicit CostMatrix(Metric metric) : metric_(metric) {}

    Metric metric() const { return metric_; }
    /// Throws DataError for nonpositive costs, self pairs or a conflicting duplicate.
    void set(const CityId& a, const CityId& b, double cost);
    std::optional<double> find(const CityId& a, const CityId& b) const;
    std::size_t size() const { return entries_.size(); }
    const std::map<CityPair, double>& entries() const { return entries_; }

    /// Multiplies every cost by k > 0.
    CostMatrix scaled(double k) const;
    void write_csv(std::ostream& out) const;

private:
    Metric metric_;
    std::map<CityPair, double> entries_;
};

/// Reads `city_a,city_b,cost`. Consistent duplicates (either orientation) are
/// merged; conflicting ones throw DataError("conflicting duplicate ...").
CostMatrix load_cost_table(std::istream& in, Metric metric);

/// Great-circle distances for every unordered pair of cities in the table.
CostMatrix geo_cost_matrix(const CityTable& cities, double diameter_km = kEarthDiameterKm);

struct CoverageReport {
    std::vector<CityPair> missing;  // flux keys (as stored) without a cost
    std::size_t covered = 0;
};

CoverageReport coverage_report(const ingest::FluxMatrix& flux, const CostMatrix& costs);

}  // namespace migflux::geo
