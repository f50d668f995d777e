#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "migflux/indices.hpp"
#include "support.hpp"

using namespace migflux;
using namespace migflux::indices;

namespace {

geo::CityAttributes city(const std::string& id, double gdp, const std::string& province) {
    return {id, id, {100, 30}, gdp, 1, 1, province};
}

PatternedFlux random_fixture(std::mt19937_64& rng, std::size_t cities) {
    PatternedFlux pf;
    std::uniform_real_distribution<double> flux(0.5, 1000);
    for (std::size_t i = 0; i < cities; ++i) {
        pf.province_of["C" + std::to_string(i)] = "P" + std::to_string(i % 3);
        for (std::size_t j = i + 1; j < cities; ++j) {
            if (rng() % 3 == 0) continue;
            pf.add("C" + std::to_string(i), "C" + std::to_string(j), flux(rng), kAllPatterns[rng() % 4]);
        }
    }
    return pf;
}

}  // namespace

TEST_CASE("development index example") {
    PatternedFlux pf;
    pf.add("X", "A", 2, Pattern::I);
    pf.add("X", "B", 3, Pattern::III);
    pf.add("X", "C", 5, Pattern::IV);
    CHECK(development_index(pf, "X") == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(development_index(pf, "A") == 1.0);
    CHECK(development_index(pf, "C") == 0.0);
    CHECK(pattern_share(pf, "X", Pattern::IV) == doctest::Approx(0.5));
    CHECK_THROWS_WITH_AS(development_index(pf, "nowhere"), doctest::Contains("no flux"), DataError);
}

TEST_CASE("province ratio example") {
    PatternedFlux pf;
    pf.province_of = {{"X", "P"}, {"A", "Q"}, {"B", "R"}};
    pf.add("X", "A", 12, Pattern::I);
    pf.add("X", "B", 2, Pattern::III);
    const auto p = province_pattern_ratio(pf, "P");
    CHECK(p[0] == doctest::Approx(12.0 / 14));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == doctest::Approx(2.0 / 14));
    CHECK(p[3] == 0.0);
    CHECK_THROWS_AS(province_pattern_ratio(pf, "Z"), DataError);
}

TEST_CASE("locality curve example") {
    ingest::FluxMatrix f(false);
    f.add("X", "A", 5);
    f.add("X", "B", 3);
    f.add("X", "C", 2);
    f.add("A", "B", 100);
    geo::CostMatrix t(geo::Metric::travel_min);
    t.set("X", "A", 1);
    t.set("X", "B", 2);
    t.set("X", "C", 3);
    const auto c = locality_curve(f, t, "X");
    REQUIRE(c.size() == 3);
    CHECK(c[0].r == 1);
    CHECK(c[0].value == doctest::Approx(0.5));
    CHECK(c[1].value == doctest::Approx(0.8));
    CHECK(c[2].r == 3);
    CHECK(c[2].value == 1.0);
    CHECK_THROWS_AS(locality_curve(f, t, "Y"), ContractError);
}

TEST_CASE("gdp match example") {
    geo::CityTable cities;
    cities.add(city("X", 2, "P"));
    cities.add(city("A", 4, "P"));
    cities.add(city("B", 2, "P"));
    geo::CostMatrix t(geo::Metric::travel_min);
    t.set("X", "A", 1);
    t.set("X", "B", 2);
    const auto l = gdp_match_curve(cities, t, "X");
    REQUIRE(l.size() == 2);
    CHECK(l[0].value == doctest::Approx(2.0));
    CHECK(l[1].value == doctest::Approx(1.5));
}

TEST_CASE("pearson") {
    CHECK(testing::rel_err(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1, 4}), 0.6546536707079771) <
          1e-14);
    CHECK(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{8, 6, 4, 2}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), DataError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ContractError);
}

TEST_CASE("identities hold on random fixtures and under rescaling") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pf = random_fixture(rng, 4 + static_cast<std::size_t>(trial % 8));
        if (pf.entries.empty()) continue;
        const double k = 0.001 + static_cast<double>(trial) * 37.5;
        const auto scaled = pf.scaled(k);

        ingest::FluxMatrix flux(false);
        geo::CostMatrix cost(geo::Metric::travel_min);
        geo::CityTable cities;
        for (const auto& [id, prov] : pf.province_of) cities.add(city(id, 1 + static_cast<double>(rng() % 100), prov));
        for (const auto& [pair, lf] : pf.entries) {
            flux.add(pair.a, pair.b, 1 + static_cast<std::uint64_t>(lf.flux));
            cost.set(pair.a, pair.b, 1 + static_cast<double>(rng() % 7));
        }
        const auto report = compute_report(pf, flux, cities, cost, 1 + trial % 4);
        const auto report_scaled = compute_report(scaled, flux, cities, cost, 1);
        for (const auto& [c, di] : report.development) {
            CHECK(di >= 0);
            CHECK(di <= 1);
            CHECK(di == doctest::Approx(report_scaled.development.at(c)).epsilon(1e-12));
            CHECK(di == doctest::Approx(development_index(pf, c)).epsilon(1e-12));
        }
        for (const auto& [p, ratio] : report.province_patterns) {
            CHECK(ratio[0] + ratio[1] + ratio[2] + ratio[3] == doctest::Approx(1.0).epsilon(1e-12));
            const auto direct = province_pattern_ratio(pf, p);
            for (int i = 0; i < 4; ++i) {
                CHECK(ratio[i] == doctest::Approx(direct[i]).epsilon(1e-12));
                CHECK(ratio[i] == doctest::Approx(report_scaled.province_patterns.at(p)[i]).epsilon(1e-12));
            }
        }
        for (const auto& [c, curve] : report.locality) {
            for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].value >= curve[i - 1].value);
            CHECK(curve.back().value == 1.0);
        }
        ingest::FluxMatrix doubled(false);
        for (const auto& [pair, n] : flux.entries()) doubled.add(pair.a, pair.b, 3 * n);
        for (const auto& [c, curve] : report.locality) {
            const auto again = locality_curve(doubled, cost, c);
            for (std::size_t i = 0; i < curve.size(); ++i) CHECK(curve[i].value == doctest::Approx(again[i].value));
        }
    }
}

TEST_CASE("assignment csv round trip") {
    geo::CityTable cities;
    cities.add(city("A", 1, "P1"));
    cities.add(city("B", 1, "P2"));
    cities.add(city("C", 1, "P2"));
    ingest::FluxMatrix f(false);
    f.add("A", "B", 4);
    f.add("B", "C", 6);
    std::stringstream s("city_a,city_b,cluster,pattern_label\nA,B,0,II\nB,C,1,IV\nA,C,-1,\n");
    const auto pf = read_patterned_flux(s, f, cities);
    CHECK(pf.entries.size() == 2);
    CHECK(pf.entries.at(CityPair{"B", "C"}).flux == 6);
    CHECK(pf.entries.at(CityPair{"A", "B"}).label == Pattern::II);
    CHECK(pf.province_of.at("C") == "P2");
    CHECK(development_index(pf, "B") == doctest::Approx(0.4));

    std::stringstream bad("city_a,city_b,cluster,pattern_label\nA,B,0,V\n");
    CHECK_THROWS_AS(read_patterned_flux(bad, f, cities), FormatError);
}
