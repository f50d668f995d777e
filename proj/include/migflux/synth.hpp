#pragma once

// Forward generators with known parameters, used by the oracle tests and the
// `synth` subcommand.

#include <cstdint>
#include <map>
#include <vector>

#include "migflux/geo.hpp"
#include "migflux/gravity.hpp"
#include "migflux/ingest.hpp"
#include "migflux/pattern.hpp"

namespace migflux::synth {

struct GravityParams {
    gravity::Family family = gravity::Family::G_GM;
    geo::Metric metric = geo::Metric::travel_min;
    double log_a = 0;
    double alpha = 1;  // ignored (fixed at 1) unless family is DIRG_GM
    double beta = 1;
    double gamma = 0.5;
    double noise_sigma = 0;  // sd of multiplicative lognormal noise
    bool directed = false;   // forced on for DIRG_GM
};

struct World {
    geo::CityTable cities;
    std::map<geo::Metric, geo::CostMatrix> costs;
    std::vector<gravity::PairFlow> flows;  // real-valued flux
    bool directed = false;

    const geo::CostMatrix& cost(geo::Metric m) const { return costs.at(m); }
};

/// Random cities (positive masses spanning several orders of magnitude) and
/// costs for all three metrics, plus `pairs` distinct random pairs whose flux
/// follows the chosen family exactly (times lognormal noise if sigma > 0).
World gravity_world(const GravityParams& params, std::size_t cities, std::size_t pairs, std::uint64_t seed);

/// Rounds flows to counts >= 1.
ingest::FluxMatrix to_flux(const World& world);

struct PlantedPatterns {
    World world;  // undirected; travel_min costs drive the features
    ingest::FluxMatrix flux{false};
    std::map<CityPair, Pattern> planted;
};

/// Four disjoint city groups whose internal pairs sit in four distinct
/// directions of (GDP product, travel time, flux) space, ordered so that
/// descending mean flux reproduces the labels I..IV.
PlantedPatterns planted_patterns(std::size_t cities_per_pattern, std::uint64_t seed);

/// Random message log realizing a directed flux: one user per trip plus
/// stationary users and repeated posts in the same city.
std::vector<ingest::GeoMessage> messages_for(const ingest::FluxMatrix& directed, std::uint64_t seed,
                                             std::int64_t window_begin);

}  // namespace migflux::synth
