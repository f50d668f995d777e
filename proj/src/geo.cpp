#include "migflux/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "migflux/csv.hpp"

namespace migflux::geo {

double great_circle_km(LonLat a, LonLat b, double diameter_km) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double phi_a = a.lat_deg * deg;
    const double phi_b = b.lat_deg * deg;
    const double half_dphi = (a.lat_deg - b.lat_deg) * deg / 2.0;
    const double half_dlambda = (a.lon_deg - b.lon_deg) * deg / 2.0;
    const double s1 = std::sin(half_dphi);
    const double s2 = std::sin(half_dlambda);
    const double h = std::clamp(s1 * s1 + std::cos(phi_a) * std::cos(phi_b) * s2 * s2, 0.0, 1.0);
    return diameter_km * std::asin(std::sqrt(h));
}

void CityTable::add(CityAttributes city) {
    const auto& id = city.city_id;
    if (id.empty()) throw DataError("city table: empty city_id");
    const auto& p = city.position;
    if (!(p.lon_deg >= -180 && p.lon_deg <= 180 && p.lat_deg >= -90 && p.lat_deg <= 90)) {
        throw DataError("city table: coordinates out of range for '" + id + "'");
    }
    if (!(city.gdp > 0 && city.gdp_per_capita > 0 && city.population > 0)) {
        throw DataError("city table: gdp, gdp_per_capita and population must be positive for '" + id + "'");
    }
    auto key = id;
    if (!cities_.emplace(std::move(key), std::move(city)).second) {
        throw DataError("city table: duplicate city_id '" + id + "'");
    }
}

const CityAttributes* CityTable::find(const CityId& id) const {
    auto it = cities_.find(id);
    return it == cities_.end() ? nullptr : &it->second;
}

const CityAttributes& CityTable::at(const CityId& id) const {
    if (const auto* c = find(id)) return *c;
    throw DataError("city table: unknown city '" + id + "'");
}

std::vector<CityId> CityTable::ids() const {
    std::vector<CityId> out;
    out.reserve(cities_.size());
    for (const auto& [id, _] : cities_) out.push_back(id);
    return out;
}

CityTable CityTable::load(std::istream& in) {
    constexpr std::string_view what = "city attributes";
    const auto h = csv::read_header(in, what);
    const auto c_id = h.require("city_id", what);
    const auto c_name = h.require("name", what);
    const auto c_lon = h.require("longitude", what);
    const auto c_lat = h.require("latitude", what);
    const auto c_gdp = h.require("gdp", what);
    const auto c_pc = h.require("gdp_per_capita", what);
    const auto c_pop = h.require("population", what);
    const auto c_prov = h.require("province_id", what);
    CityTable table;
    std::string line;
    while (csv::next_record(in, line)) {
        auto f = csv::split(line);
        if (f.size() != h.size()) throw FormatError("city attributes: bad row '" + line + "'");
        CityAttributes c;
        c.city_id = std::move(f[c_id]);
        c.name = std::move(f[c_name]);
        c.position = {csv::parse_double(f[c_lon], "longitude"), csv::parse_double(f[c_lat], "latitude")};
        c.gdp = csv::parse_double(f[c_gdp], "gdp");
        c.gdp_per_capita = csv::parse_double(f[c_pc], "gdp_per_capita");
        c.population = csv::parse_double(f[c_pop], "population");
        c.province_id = std::move(f[c_prov]);
        table.add(std::move(c));
    }
    return table;
}

void CityTable::write_csv(std::ostream& out) const {
    out << "city_id,name,longitude,latitude,gdp,gdp_per_capita,population,province_id\n";
    for (const auto& [id, c] : cities_) {
        out << id << ',' << c.name << ',' << csv::format_double(c.position.lon_deg) << ','
            << csv::format_double(c.position.lat_deg) << ',' << csv::format_double(c.gdp) << ','
            << csv::format_double(c.gdp_per_capita) << ',' << csv::format_double(c.population) << ','
            << c.province_id << '\n';
    }
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::geo_km: return "geo_km";
        case Metric::travel_km: return "travel_km";
        case Metric::travel_min: return "travel_min";
    }
    return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
    for (auto m : kAllMetrics) {
        if (metric_name(m) == name) return m;
    }
    return std::nullopt;
}

void CostMatrix::set(const CityId& a, const CityId& b, double cost) {
    if (a == b) throw DataError("cost table: self pair '" + a + "'");
    if (!(cost > 0) || !std::isfinite(cost)) {
        throw DataError("cost table: nonpositive cost for (" + a + "," + b + ")");
    }
    auto [it, inserted] = entries_.try_emplace(canonical(a, b), cost);
    if (!inserted && it->second != cost) {
        throw DataError("cost table: conflicting duplicate for (" + a + "," + b + ")");
    }
}

std::optional<double> CostMatrix::find(const CityId& a, const CityId& b) const {
    auto it = entries_.find(canonical(a, b));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

CostMatrix CostMatrix::scaled(double k) const {
    if (!(k > 0)) throw ContractError("CostMatrix::scaled: factor must be positive");
    CostMatrix out(metric_);
    for (const auto& [pair, c] : entries_) out.entries_.emplace(pair, c * k);
    return out;
}

void CostMatrix::write_csv(std::ostream& out) const {
    out << "city_a,city_b,cost\n";
    for (const auto& [pair, c] : entries_) out << pair.a << ',' << pair.b << ',' << csv::format_double(c) << '\n';
}

CostMatrix load_cost_table(std::istream& in, Metric metric) {
    constexpr std::string_view what = "cost table";
    const auto h = csv::read_header(in, what);
    const auto ca = h.require("city_a", what);
    const auto cb = h.require("city_b", what);
    const auto cc = h.require("cost", what);
    CostMatrix out(metric);
    std::string line;
    while (csv::next_record(in, line)) {
        const auto f = csv::split(line);
        if (f.size() != h.size()) throw FormatError("cost table: bad row '" + line + "'");
        out.set(f[ca], f[cb], csv::parse_double(f[cc], "cost"));
    }
    return out;
}

CostMatrix geo_cost_matrix(const CityTable& cities, double diameter_km) {
    CostMatrix out(Metric::geo_km);
    const auto& all = cities.all();
    for (auto i = all.begin(); i != all.end(); ++i) {
        for (auto j = std::next(i); j != all.end(); ++j) {
            const double d = great_circle_km(i->second.position, j->second.position, diameter_km);
            // Co-located cities have no usable cost; leave them uncovered.
            if (d > 0) out.set(i->first, j->first, d);
        }
    }
    return out;
}

CoverageReport coverage_report(const ingest::FluxMatrix& flux, const CostMatrix& costs) {
    CoverageReport report;
    for (const auto& [pair, count] : flux.entries()) {
        if (costs.find(pair.a, pair.b)) {
            ++report.covered;
        } else {
            report.missing.push_back(pair);
        }
    }
    return report;
}

}  // namespace migflux::geo
