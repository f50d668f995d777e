#include "migflux/indices.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "migflux/csv.hpp"
#include "migflux/parallel.hpp"

namespace migflux::indices {

void PatternedFlux::add(const CityId& a, const CityId& b, double flux, Pattern label) {
    if (a == b) throw ContractError("patterned flux: self pair '" + a + "'");
    if (!(flux >= 0)) throw DataError("patterned flux: negative flux");
    auto [it, inserted] = entries.try_emplace(canonical(a, b), LabeledFlux{flux, label});
    if (!inserted) throw DataError("patterned flux: duplicate pair (" + a + "," + b + ")");
}

PatternedFlux PatternedFlux::scaled(double k) const {
    PatternedFlux out = *this;
    for (auto& [pair, lf] : out.entries) lf.flux *= k;
    return out;
}

PatternedFlux read_patterned_flux(std::istream& assignments, const ingest::FluxMatrix& undirected,
                                  const geo::CityTable& cities) {
    constexpr std::string_view what = "assignment csv";
    const auto h = csv::read_header(assignments, what);
    const auto ca = h.require("city_a", what);
    const auto cb = h.require("city_b", what);
    const auto cl = h.require("pattern_label", what);
    PatternedFlux pf;
    std::string line;
    while (csv::next_record(assignments, line)) {
        const auto f = csv::split(line);
        if (f.size() != h.size()) throw FormatError("assignment csv: bad row '" + line + "'");
        if (f[cl].empty()) continue;
        const auto label = parse_pattern(f[cl]);
        if (!label) throw FormatError("assignment csv: unknown pattern '" + f[cl] + "'");
        const auto count = undirected.at(f[ca], f[cb]);
        if (count == 0) throw DataError("assignment csv: pair (" + f[ca] + "," + f[cb] + ") has no flux");
        pf.add(f[ca], f[cb], static_cast<double>(count), *label);
    }
    for (const auto& [id, c] : cities.all()) pf.province_of[id] = c.province_id;
    return pf;
}

namespace {

// Flux per pattern over the pairs touching `city`.
std::array<double, 4> city_pattern_flux(const PatternedFlux& pf, const CityId& city) {
    std::array<double, 4> sums{};
    for (const auto& [pair, lf] : pf.entries) {
        if (pair.a == city || pair.b == city) sums[index_of(lf.label)] += lf.flux;
    }
    return sums;
}

double di_from(const std::array<double, 4>& s, const CityId& city) {
    const double good = s[0] + s[1];
    const double total = good + (s[2] + s[3]);
    if (!(total > 0)) throw DataError("development index: no flux for city '" + city + "'");
    return good / total;
}

std::array<double, 4> ratio_from(const std::array<double, 4>& s, const std::string& province) {
    const double total = s[0] + s[1] + s[2] + s[3];
    if (!(total > 0)) throw DataError("province pattern ratio: no flux for province '" + province + "'");
    return {s[0] / total, s[1] / total, s[2] / total, s[3] / total};
}

struct Neighbour {
    double cost;
    CityId id;
    double weight;
};

void sort_neighbours(std::vector<Neighbour>& n) {
    std::sort(n.begin(), n.end(), [](const Neighbour& l, const Neighbour& r) {
        if (l.cost != r.cost) return l.cost < r.cost;
        return l.id < r.id;
    });
}

std::vector<CurvePoint> cumulative_share(const std::vector<Neighbour>& n) {
    std::vector<double> cumulative;
    cumulative.reserve(n.size());
    double run = 0;
    for (const auto& x : n) cumulative.push_back(run += x.weight);
    std::vector<CurvePoint> out;
    out.reserve(n.size());
    for (std::size_t r = 0; r < n.size(); ++r) out.push_back({r + 1, cumulative[r] / run});
    return out;
}

std::vector<CurvePoint> gdp_ratio(const std::vector<Neighbour>& n, double own_gdp) {
    std::vector<CurvePoint> out;
    out.reserve(n.size());
    double run = 0;
    for (std::size_t r = 0; r < n.size(); ++r) {
        run += n[r].weight;
        out.push_back({r + 1, run / (static_cast<double>(r + 1) * own_gdp)});
    }
    return out;
}

const CityId& other_end(const CityPair& p, const CityId& city) { return p.a == city ? p.b : p.a; }

}  // namespace

double development_index(const PatternedFlux& pf, const CityId& city) {
    return di_from(city_pattern_flux(pf, city), city);
}

double pattern_share(const PatternedFlux& pf, const CityId& city, Pattern p) {
    const auto s = city_pattern_flux(pf, city);
    const double total = s[0] + s[1] + s[2] + s[3];
    if (!(total > 0)) throw DataError("pattern share: no flux for city '" + city + "'");
    return s[index_of(p)] / total;
}

std::array<double, 4> province_pattern_ratio(const PatternedFlux& pf, const std::string& province) {
    std::array<double, 4> sums{};
    for (const auto& [pair, lf] : pf.entries) {
        for (const auto* end : {&pair.a, &pair.b}) {
            auto it = pf.province_of.find(*end);
            if (it != pf.province_of.end() && it->second == province) sums[index_of(lf.label)] += lf.flux;
        }
    }
    return ratio_from(sums, province);
}

std::vector<CurvePoint> locality_curve(const ingest::FluxMatrix& undirected, const geo::CostMatrix& cost,
                                       const CityId& city) {
    if (undirected.directed()) throw ContractError("locality curve: undirected flux required");
    std::vector<Neighbour> n;
    for (const auto& [pair, count] : undirected.entries()) {
        if (pair.a != city && pair.b != city) continue;
        const auto c = cost.find(pair.a, pair.b);
        if (!c) continue;
        n.push_back({*c, other_end(pair, city), static_cast<double>(count)});
    }
    if (n.empty()) throw ContractError("locality curve: city '" + city + "' has no neighbour with flux and cost");
    sort_neighbours(n);
    return cumulative_share(n);
}

std::vector<CurvePoint> gdp_match_curve(const geo::CityTable& cities, const geo::CostMatrix& cost,
                                        const CityId& city) {
    const double own = cities.at(city).gdp;
    std::vector<Neighbour> n;
    for (const auto& [pair, c] : cost.entries()) {
        if (pair.a != city && pair.b != city) continue;
        const auto& other = other_end(pair, city);
        if (const auto* attrs = cities.find(other)) n.push_back({c, other, attrs->gdp});
    }
    if (n.empty()) throw ContractError("gdp match curve: city '" + city + "' has no neighbour with a cost");
    sort_neighbours(n);
    return gdp_ratio(n, own);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ContractError("pearson: length mismatch");
    if (xs.size() < 3) throw ContractError("pearson: need at least 3 observations");
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0) || !(syy > 0)) throw DataError("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

IndexReport compute_report(const PatternedFlux& pf, const ingest::FluxMatrix& undirected,
                           const geo::CityTable& cities, const geo::CostMatrix& cost, unsigned workers) {
    std::map<CityId, std::array<double, 4>> per_city;
    std::map<std::string, std::array<double, 4>> per_province;
    for (const auto& [pair, lf] : pf.entries) {
        for (const auto* end : {&pair.a, &pair.b}) {
            per_city[*end][index_of(lf.label)] += lf.flux;
            if (auto it = pf.province_of.find(*end); it != pf.province_of.end()) {
                per_province[it->second][index_of(lf.label)] += lf.flux;
            }
        }
    }

    IndexReport report;
    for (const auto& [city, sums] : per_city) {
        const double total = sums[0] + sums[1] + sums[2] + sums[3];
        if (total > 0) report.development[city] = di_from(sums, city);
    }
    for (const auto& [province, sums] : per_province) {
        const double total = sums[0] + sums[1] + sums[2] + sums[3];
        if (total > 0) report.province_patterns[province] = ratio_from(sums, province);
    }

    // Neighbour lists for every city in one pass over the flux and the cost table.
    std::map<CityId, std::vector<Neighbour>> flux_nb, gdp_nb;
    for (const auto& [pair, count] : undirected.entries()) {
        const auto c = cost.find(pair.a, pair.b);
        if (!c) continue;
        flux_nb[pair.a].push_back({*c, pair.b, static_cast<double>(count)});
        flux_nb[pair.b].push_back({*c, pair.a, static_cast<double>(count)});
    }
    for (const auto& [pair, c] : cost.entries()) {
        const auto* a = cities.find(pair.a);
        const auto* b = cities.find(pair.b);
        if (a == nullptr || b == nullptr) continue;
        gdp_nb[pair.a].push_back({c, pair.b, b->gdp});
        gdp_nb[pair.b].push_back({c, pair.a, a->gdp});
    }

    std::vector<CityId> curve_cities;
    for (const auto& [city, _] : flux_nb) curve_cities.push_back(city);
    std::vector<std::vector<CurvePoint>> loc(curve_cities.size()), gdp(curve_cities.size());
    parallel_for(curve_cities.size(), workers, [&](std::size_t i) {
        const auto& city = curve_cities[i];
        auto n = flux_nb.at(city);
        sort_neighbours(n);
        loc[i] = cumulative_share(n);
        if (const auto* attrs = cities.find(city)) {
            auto g = gdp_nb.at(city);
            sort_neighbours(g);
            gdp[i] = gdp_ratio(g, attrs->gdp);
        }
    });
    for (std::size_t i = 0; i < curve_cities.size(); ++i) {
        report.locality[curve_cities[i]] = std::move(loc[i]);
        if (!gdp[i].empty()) report.gdp_match[curve_cities[i]] = std::move(gdp[i]);
    }
    return report;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << header;
    return out;
}

void write_curve(const std::filesystem::path& path, const std::string& header, std::string_view column,
                 const std::vector<CurvePoint>& curve) {
    auto out = open_out(path, header);
    out << "r," << column << '\n';
    for (const auto& p : curve) out << p.r << ',' << csv::format_double(p.value) << '\n';
}

}  // namespace

void write_report(const IndexReport& report, const std::filesystem::path& dir, const std::string& header) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "locality");
    fs::create_directories(dir / "gdp_match");
    {
        auto out = open_out(dir / "di.csv", header);
        out << "city_id,di\n";
        for (const auto& [city, di] : report.development) out << city << ',' << csv::format_double(di) << '\n';
    }
    {
        auto out = open_out(dir / "province_patterns.csv", header);
        out << "province_id,p1,p2,p3,p4\n";
        for (const auto& [province, p] : report.province_patterns) {
            out << province;
            for (double v : p) out << ',' << csv::format_double(v);
            out << '\n';
        }
    }
    for (const auto& [city, curve] : report.locality) write_curve(dir / "locality" / (city + ".csv"), header, "c", curve);
    for (const auto& [city, curve] : report.gdp_match) write_curve(dir / "gdp_match" / (city + ".csv"), header, "l", curve);
}

std::vector<Representative> representative_cities(const PatternedFlux& pf) {
    std::set<CityId> cities;
    for (const auto& [pair, lf] : pf.entries) {
        cities.insert(pair.a);
        cities.insert(pair.b);
    }
    constexpr std::array<double, 4> threshold = {0.5, 0.5, 0.4, 0.5};
    std::vector<Representative> out;
    for (const auto& city : cities) {
        const auto s = city_pattern_flux(pf, city);
        const double total = s[0] + s[1] + s[2] + s[3];
        if (!(total > 0)) continue;
        for (auto p : kAllPatterns) {
            const double share = s[index_of(p)] / total;
            if (share >= threshold[index_of(p)]) out.push_back({city, p, share});
        }
    }
    return out;
}

}  // namespace migflux::indices
