#include "migflux/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace migflux::synth {

namespace {

std::string city_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "C%04zu", i);
    return buf;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53); }
    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform(0, 1) * static_cast<double>(n))); }
    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

geo::CityTable random_cities(std::size_t n, Rng& rng, const std::vector<double>* gdp = nullptr) {
    geo::CityTable t;
    for (std::size_t i = 0; i < n; ++i) {
        geo::CityAttributes c;
        c.city_id = city_name(i);
        c.name = "city" + std::to_string(i);
        c.position = {rng.uniform(75, 135), rng.uniform(18, 53)};
        c.gdp = gdp ? (*gdp)[i] : std::exp(rng.uniform(3, 9));
        c.population = std::exp(rng.uniform(4, 7));
        c.gdp_per_capita = std::exp(rng.uniform(0, 3));
        c.province_id = "P" + std::to_string(i % 7);
        t.add(std::move(c));
    }
    return t;
}

// Road distance and time derived from the great-circle distance with
// independent per-pair detour factors so the three metrics are not collinear.
void fill_costs(World& w, Rng& rng) {
    auto geo_cost = geo::geo_cost_matrix(w.cities);
    geo::CostMatrix km(geo::Metric::travel_km), minutes(geo::Metric::travel_min);
    for (const auto& [pair, d] : geo_cost.entries()) {
        const double road = d * rng.uniform(1.05, 1.8);
        km.set(pair.a, pair.b, road);
        minutes.set(pair.a, pair.b, road * std::exp(rng.uniform(-2, 2)));
    }
    w.costs.emplace(geo::Metric::geo_km, std::move(geo_cost));
    w.costs.emplace(geo::Metric::travel_km, std::move(km));
    w.costs.emplace(geo::Metric::travel_min, std::move(minutes));
}

}  // namespace

World gravity_world(const GravityParams& params, std::size_t cities, std::size_t pairs, std::uint64_t seed) {
    const bool directed = params.directed || gravity::requires_directed(params.family);
    const std::size_t available = directed ? cities * (cities - 1) : cities * (cities - 1) / 2;
    if (cities < 2 || pairs > available) throw ContractError("gravity_world: not enough cities for the pair count");

    Rng rng(seed);
    World w;
    w.directed = directed;
    w.cities = random_cities(cities, rng);
    fill_costs(w, rng);

    const auto ids = w.cities.ids();
    const auto source = gravity::mass_source(params.family);
    const double alpha = gravity::fixed_mass_exponents(params.family) ? 1.0 : params.alpha;
    const double beta = gravity::fixed_mass_exponents(params.family) ? 1.0 : params.beta;
    const auto& cost = w.cost(params.metric);
    std::set<CityPair> used;
    while (used.size() < pairs) {
        const auto i = rng.index(cities);
        const auto j = rng.index(cities);
        if (i == j) continue;
        CityPair p{ids[i], ids[j]};
        if (!directed) p = canonical(std::move(p));
        used.insert(std::move(p));
    }
    for (const auto& p : used) {
        const double log_f = params.log_a + alpha * std::log(gravity::mass_of(w.cities.at(p.a), source)) +
                             beta * std::log(gravity::mass_of(w.cities.at(p.b), source)) -
                             params.gamma * std::log(*cost.find(p.a, p.b));
        const double noise = params.noise_sigma > 0 ? params.noise_sigma * rng.normal() : 0.0;
        w.flows.push_back({p, std::exp(log_f + noise)});
    }
    return w;
}

ingest::FluxMatrix to_flux(const World& world) {
    ingest::FluxMatrix f(world.directed);
    for (const auto& flow : world.flows) {
        f.add(flow.pair.a, flow.pair.b, static_cast<std::uint64_t>(std::max(1.0, std::round(flow.flux))));
    }
    return f;
}

PlantedPatterns planted_patterns(std::size_t cities_per_pattern, std::uint64_t seed) {
    if (cities_per_pattern < 3) throw ContractError("planted_patterns: need at least 3 cities per pattern");
    // Normalized (GDP product, travel time, flux) profile of each pattern.
    constexpr double profile[4][3] = {
        {0.35, 0.05, 0.90},
        {0.90, 0.35, 0.30},
        {0.30, 0.45, 0.08},
        {0.05, 0.90, 0.01},
    };
    constexpr double jitter = 0.02;
    constexpr double gdp_floor = 0.01, gdp_scale = 1e6;

    Rng rng(seed);
    const std::size_t n = 4 * cities_per_pattern;
    std::vector<double> gdp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = i / cities_per_pattern;
        gdp[i] = std::sqrt(gdp_scale * (gdp_floor + profile[p][0])) * std::exp(rng.uniform(-jitter, jitter) / 2);
    }

    PlantedPatterns out;
    out.world.cities = random_cities(n, rng, &gdp);
    fill_costs(out.world, rng);
    const auto ids = out.world.cities.ids();

    // Travel time is overwritten: inside a group it follows the profile,
    // across groups it is arbitrary (no flux there).
    geo::CostMatrix minutes(geo::Metric::travel_min);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t pi = i / cities_per_pattern, pj = j / cities_per_pattern;
            double t = rng.uniform(0.2, 1.0);
            if (pi == pj) {
                t = std::max(0.0, profile[pi][1] + rng.uniform(-jitter, jitter));
                const double f = std::max(0.0, profile[pi][2] + rng.uniform(-jitter / 4, jitter / 4));
                const auto count = static_cast<std::uint64_t>(std::llround(10 + 10000 * f));
                out.flux.add(ids[i], ids[j], count);
                out.world.flows.push_back({canonical(ids[i], ids[j]), static_cast<double>(count)});
                out.planted[canonical(ids[i], ids[j])] = kAllPatterns[pi];
            }
            minutes.set(ids[i], ids[j], 30 + 1000 * t);
        }
    }
    out.world.costs.erase(geo::Metric::travel_min);
    out.world.costs.emplace(geo::Metric::travel_min, std::move(minutes));
    return out;
}

std::vector<ingest::GeoMessage> messages_for(const ingest::FluxMatrix& directed, std::uint64_t seed,
                                             std::int64_t window_begin) {
    if (!directed.directed()) throw ContractError("messages_for: directed flux required");
    Rng rng(seed);
    std::vector<ingest::GeoMessage> out;
    std::size_t user = 0, message = 0;
    auto post = [&](const std::string& u, std::int64_t t, const CityId& c) {
        out.push_back({"m" + std::to_string(message++), u, t, c});
    };
    for (const auto& [pair, count] : directed.entries()) {
        for (std::uint64_t k = 0; k < count; ++k) {
            const auto u = "u" + std::to_string(user++);
            std::int64_t t = window_begin + static_cast<std::int64_t>(rng.uniform(0, 86400.0 * 10));
            const auto before = 1 + rng.index(3);
            const auto after = 1 + rng.index(3);
            for (std::size_t i = 0; i < before; ++i) post(u, t += 1 + static_cast<std::int64_t>(rng.uniform(0, 7200)), pair.a);
            for (std::size_t i = 0; i < after; ++i) post(u, t += 1 + static_cast<std::int64_t>(rng.uniform(0, 7200)), pair.b);
        }
    }
    // Stationary users contribute messages but no transitions.
    const auto stationary = std::max<std::size_t>(1, user / 5);
    for (std::size_t s = 0; s < stationary && !directed.entries().empty(); ++s) {
        const auto u = "s" + std::to_string(s);
        const auto& city = std::next(directed.entries().begin(), static_cast<long>(rng.index(directed.pair_count())))->first.a;
        std::int64_t t = window_begin + static_cast<std::int64_t>(rng.uniform(0, 86400.0 * 10));
        for (int i = 0; i < 3; ++i) post(u, t += 60, city);
    }
    // Shuffle so ordering has to be recovered by the extractor.
    std::mt19937_64 shuffle_rng(seed ^ 0x5bd1e995ULL);
    std::shuffle(out.begin(), out.end(), shuffle_rng);
    return out;
}

}  // namespace migflux::synth
