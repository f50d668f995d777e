#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "migflux/geo.hpp"
#include "support.hpp"

using namespace migflux;
using namespace migflux::geo;

namespace {

// Vincenty form of the central angle on a sphere, long double throughout.
double central_angle_oracle(LonLat a, LonLat b, double diameter) {
    const long double d2r = std::numbers::pi_v<long double> / 180;
    const long double p1 = a.lat_deg * d2r, p2 = b.lat_deg * d2r, dl = (b.lon_deg - a.lon_deg) * d2r;
    const long double y = std::hypot(std::cos(p2) * std::sin(dl),
                                     std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
    const long double x = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return static_cast<double>(diameter / 2.0L * std::atan2(y, x));
}

CityAttributes city(const char* id, double lon, double lat, const char* province = "P") {
    return {id, id, {lon, lat}, 10, 1, 5, province};
}

}  // namespace

TEST_CASE("haversine frozen values") {
    CHECK(testing::rel_err(great_circle_km({116.40, 39.90}, {121.47, 31.23}), 1067.077473174292) < 1e-12);
    CHECK(testing::rel_err(great_circle_km({113.26, 23.13}, {114.06, 22.54}), 105.00146326998684) < 1e-12);
    CHECK(testing::rel_err(great_circle_km({0, 89.9}, {180, 89.9}), 22.238985328911145) < 1e-9);
    CHECK(testing::rel_err(great_circle_km({10, 10}, {10, 10.001}), 0.11119492664462255) < 1e-9);
    CHECK(great_circle_km({0, 0}, {180, 0}) == doctest::Approx(12742 * std::numbers::pi / 2).epsilon(1e-15));
    CHECK(great_circle_km({0, 0}, {180, 0}, 2.0) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(great_circle_km({5, 5}, {5, 5}) == 0.0);
}

TEST_CASE("haversine agrees with the vincenty form") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lon(-180, 180), lat(-90, 90);
    for (int i = 0; i < 1000; ++i) {
        const LonLat a{lon(rng), lat(rng)}, b{lon(rng), lat(rng)};
        const double d = great_circle_km(a, b);
        CHECK(testing::rel_err(d, central_angle_oracle(a, b, kEarthDiameterKm)) < 1e-6);
        CHECK(d == doctest::Approx(great_circle_km(b, a)).epsilon(1e-12));
        CHECK(d <= kEarthDiameterKm * std::numbers::pi / 2 * (1 + 1e-12));
    }
}

TEST_CASE("city table validation") {
    CityTable t;
    t.add(city("A", 116, 40));
    CHECK_THROWS_AS(t.add(city("A", 0, 0)), DataError);
    CHECK_THROWS_AS(t.add(city("B", 0, 91)), DataError);
    CHECK_THROWS_AS(t.add(city("B", 181, 0)), DataError);
    auto bad = city("B", 0, 0);
    bad.gdp = 0;
    CHECK_THROWS_AS(t.add(bad), DataError);
    CHECK(t.find("B") == nullptr);
    CHECK_THROWS(t.at("B"));

    std::stringstream s("city_id,name,longitude,latitude,gdp,gdp_per_capita,population,province_id\n"
                        "X,\"Ex, city\",116.4,39.9,3000,10,300,P11\n");
    const auto loaded = CityTable::load(s);
    CHECK(loaded.at("X").name == "Ex, city");
    CHECK(loaded.at("X").province_id == "P11");
    std::stringstream missing("city_id,name,longitude\nX,x,1\n");
    CHECK_THROWS_AS(CityTable::load(missing), FormatError);
}

TEST_CASE("cost tables") {
    std::stringstream s("city_a,city_b,cost\nA,B,10\nB,A,10\nA,C,5\n");
    const auto c = load_cost_table(s, Metric::travel_min);
    CHECK(c.size() == 2);
    CHECK(*c.find("B", "A") == 10);
    CHECK_FALSE(c.find("B", "C"));
    CHECK(*c.scaled(3).find("A", "C") == 15);

    std::stringstream conflict("city_a,city_b,cost\nA,B,10\nB,A,11\n");
    CHECK_THROWS_WITH_AS(load_cost_table(conflict, Metric::travel_min), doctest::Contains("conflicting duplicate"),
                         DataError);
    CostMatrix m(Metric::travel_km);
    CHECK_THROWS_AS(m.set("A", "B", 0), DataError);
    CHECK_THROWS_AS(m.set("A", "A", 1), DataError);

    CHECK(parse_metric("travel_min") == Metric::travel_min);
    CHECK_FALSE(parse_metric("walking"));
}

TEST_CASE("geo cost matrix and coverage") {
    CityTable t;
    t.add(city("A", 116.40, 39.90));
    t.add(city("B", 121.47, 31.23));
    t.add(city("C", 113.26, 23.13));
    t.add(city("D", 113.26, 23.13));  // same spot as C: no usable distance
    const auto g = geo_cost_matrix(t);
    CHECK(g.size() == 5);
    CHECK_FALSE(g.find("C", "D"));
    CHECK(*g.find("B", "A") == doctest::Approx(1067.077473174292).epsilon(1e-12));

    ingest::FluxMatrix f(true);
    f.add("A", "B");
    f.add("D", "C");
    const auto cov = coverage_report(f, g);
    CHECK(cov.covered == 1);
    REQUIRE(cov.missing.size() == 1);
    CHECK(cov.missing[0] == CityPair{"D", "C"});
}

TEST_CASE("triangle inequality") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lon(70, 135), lat(18, 53);
    for (int i = 0; i < 1000; ++i) {
        const LonLat a{lon(rng), lat(rng)}, b{lon(rng), lat(rng)}, c{lon(rng), lat(rng)};
        const double ab = great_circle_km(a, b), bc = great_circle_km(b, c), ac = great_circle_km(a, c);
        CHECK(ac <= (ab + bc) * (1 + 1e-9));
    }
}
