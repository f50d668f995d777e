#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "migflux/gravity.hpp"
#include "migflux/synth.hpp"
#include "support.hpp"

using namespace migflux;
using namespace migflux::gravity;

namespace {

struct NormalEquations {
    std::vector<double> coef;
    std::vector<double> std_error;
    double rss = 0;
};

// Gauss-Jordan on [X'X | I | X'y] in long double.
NormalEquations brute_force_ols(const std::vector<double>& x, std::size_t p, const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<std::vector<long double>> m(p, std::vector<long double>(2 * p + 1, 0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t r = 0; r < n; ++r) m[i][j] += (long double)x[r * p + i] * x[r * p + j];
        m[i][p + i] = 1;
        for (std::size_t r = 0; r < n; ++r) m[i][2 * p] += (long double)x[r * p + i] * y[r];
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        std::swap(m[c], m[piv]);
        const long double d = m[c][c];
        for (auto& v : m[c]) v /= d;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = m[r][c];
            for (std::size_t k = 0; k <= 2 * p; ++k) m[r][k] -= f * m[c][k];
        }
    }
    NormalEquations out;
    for (std::size_t i = 0; i < p; ++i) out.coef.push_back((double)m[i][2 * p]);
    long double rss = 0;
    for (std::size_t r = 0; r < n; ++r) {
        long double fit = 0;
        for (std::size_t j = 0; j < p; ++j) fit += x[r * p + j] * m[j][2 * p];
        rss += (y[r] - fit) * (y[r] - fit);
    }
    out.rss = (double)rss;
    const long double s2 = rss / (long double)(n - p);
    for (std::size_t i = 0; i < p; ++i) out.std_error.push_back((double)std::sqrt(s2 * m[i][p + i]));
    return out;
}

geo::CityAttributes city(const char* id, double gdp, double pop, double per_capita) {
    return {id, id, {100, 30}, gdp, per_capita, pop, "P"};
}

}  // namespace

TEST_CASE("family names") {
    for (auto f : kAllFamilies) CHECK(parse_family(family_name(f)) == f);
    CHECK(family_name(Family::AVEG_GM) == "AVEG_GM");
    CHECK_FALSE(parse_family("gm"));
    CHECK(mass_source(Family::GM) == MassSource::population);
    CHECK(mass_source(Family::G_GM) == MassSource::gdp);
    CHECK(mass_source(Family::AVEG_GM) == MassSource::gdp_per_capita);
    CHECK(mass_source(Family::DIRG_GM) == MassSource::gdp);
}

TEST_CASE("ols frozen example") {
    const std::vector<double> x = {1, 0.5, 1, 1.5, 1, 2.0, 1, 3.5, 1, 4.0};
    const std::vector<double> y = {1.0, 2.2, 2.9, 4.1, 5.3};
    const auto r = ordinary_least_squares(x, 2, y);
    CHECK(testing::rel_err(r.coef[0], 0.4674698795180721) < 1e-12);
    CHECK(testing::rel_err(r.coef[1], 1.144578313253012) < 1e-12);
    CHECK(testing::rel_err(r.std_error[0], 0.25143898055505537) < 1e-10);
    CHECK(testing::rel_err(r.std_error[1], 0.0953762416629552) < 1e-10);
    CHECK(testing::rel_err(r.rss, 0.2265060240963857) < 1e-10);
    CHECK(testing::rel_err(r.r_squared, 0.9795940518832086) < 1e-10);
    CHECK(testing::rel_err(r.f_statistic, 144.01595744680887) < 1e-9);
    CHECK(testing::rel_err(r.f_pvalue, 0.001244812260530537) < 1e-8);
    CHECK(testing::rel_err(r.p_value[0], 6.30018791e-02) < 1e-8);
    CHECK(r.n == 5);
}

TEST_CASE("ols matches normal equations on small instances") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 1 + trial % 4;
        const std::size_t n = p + 1 + static_cast<std::size_t>(trial) % (10 - p);
        std::vector<double> x(n * p), y(n);
        for (std::size_t r = 0; r < n; ++r) {
            x[r * p] = 1;
            for (std::size_t j = 1; j < p; ++j) x[r * p + j] = u(rng);
            y[r] = u(rng);
        }
        const auto got = ordinary_least_squares(x, p, y);
        const auto want = brute_force_ols(x, p, y);
        for (std::size_t j = 0; j < p; ++j) {
            CHECK(std::abs(got.coef[j] - want.coef[j]) <= 1e-10 * std::max(1.0, std::abs(want.coef[j])));
            CHECK(std::abs(got.std_error[j] - want.std_error[j]) <= 1e-10 * std::max(1.0, want.std_error[j]));
        }
        CHECK(std::abs(got.rss - want.rss) <= 1e-10 * std::max(1.0, want.rss));
    }
}

TEST_CASE("ols degenerate inputs") {
    const std::vector<double> collinear = {1, 2, 1, 2, 1, 2, 1, 2};
    const std::vector<double> y = {1, 2, 3, 4};
    CHECK_THROWS_WITH_AS(ordinary_least_squares(collinear, 2, y), doctest::Contains("collinear"), DataError);
    CHECK_THROWS_AS(ordinary_least_squares(std::vector<double>{1, 1, 1, 2}, 2, std::vector<double>{1, 2}), DataError);
    const auto exact = ordinary_least_squares(std::vector<double>{1, 0, 1, 1, 1, 2}, 2, std::vector<double>{1, 3, 5});
    CHECK(exact.coef[1] == doctest::Approx(2).epsilon(1e-14));
    CHECK(exact.r_squared == 1.0);
}

TEST_CASE("ssi") {
    CHECK(ssi(std::vector<double>{10}, std::vector<double>{5}) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(ssi(std::vector<double>{0, 4}, std::vector<double>{4, 0}) == 0.0);
    CHECK_THROWS_AS(ssi(std::vector<double>{0, 0}, std::vector<double>{0, 0}), DataError);
    CHECK_THROWS(ssi(std::vector<double>{1}, std::vector<double>{1, 2}));

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cell(0, 3);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 9);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = cell(rng);
            b[i] = cell(rng) * 0.5;
        }
        a[0] += 1;
        const double s = ssi(a, b);
        CHECK(s >= 0);
        CHECK(s <= 1);
        CHECK(s == ssi(b, a));
        CHECK(ssi(a, a) == doctest::Approx(1.0).epsilon(1e-15));
        // disjoint support
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = a[i] > 0 ? 0 : 1;
        CHECK(ssi(a, d) == 0.0);
    }
}

TEST_CASE("design rows") {
    geo::CityTable cities;
    cities.add(city("A", 100, 10, 10));
    cities.add(city("B", 200, 40, 5));
    cities.add(city("C", 50, 25, 2));
    geo::CostMatrix cost(geo::Metric::travel_min);
    cost.set("A", "B", std::exp(1.0));
    cost.set("B", "C", std::exp(2.0));

    ingest::FluxMatrix f(false);
    f.add("A", "B", 4);
    f.add("B", "C", 2);
    f.add("A", "C", 9);  // no cost
    const auto t = design_rows({Family::GM, geo::Metric::travel_min}, f, cities, cost);
    CHECK(t.rows() == 2);
    CHECK(t.params == 2);
    CHECK(t.excluded_missing_cost == 1);
    CHECK(t.row(0)[1] == doctest::Approx(-1.0));
    CHECK(t.offset[0] == doctest::Approx(std::log(10.0 * 40)));
    CHECK(t.response[0] == doctest::Approx(std::log(4.0)));

    CHECK_THROWS_WITH_AS(design_rows({Family::DIRG_GM, geo::Metric::travel_min}, f, cities, cost),
                         doctest::Contains("directed"), ContractError);
    ingest::FluxMatrix d(true);
    d.add("B", "A", 3);
    CHECK_THROWS_AS(design_rows({Family::G_GM, geo::Metric::travel_min}, d, cities, cost), ContractError);
    const auto td = design_rows({Family::DIRG_GM, geo::Metric::travel_min}, d, cities, cost);
    CHECK(td.params == 4);
    CHECK(td.row(0)[1] == doctest::Approx(std::log(200.0)));
    CHECK(td.row(0)[2] == doctest::Approx(std::log(100.0)));
}

TEST_CASE("noiseless recovery for every family") {
    for (auto family : kAllFamilies) {
        synth::GravityParams p;
        p.family = family;
        p.metric = geo::Metric::travel_km;
        p.log_a = -2.5;
        p.alpha = 0.8;
        p.beta = 1.15;
        p.gamma = 0.45;
        const auto w = synth::gravity_world(p, 40, 200, 99);
        const auto cell = fit_cell({family, p.metric}, w.flows, w.directed, w.cities, w.cost(p.metric));
        REQUIRE_MESSAGE(cell.ok(), cell.error);
        const auto& fit = *cell.fit;
        CHECK(fit.n_obs == 200);
        CHECK(testing::rel_err(fit.gamma, p.gamma) < 1e-9);
        CHECK(testing::rel_err(fit.log_a, p.log_a) < 1e-9);
        if (family == Family::DIRG_GM) {
            CHECK(testing::rel_err(fit.alpha, p.alpha) < 1e-9);
            CHECK(testing::rel_err(fit.beta, p.beta) < 1e-9);
        } else {
            CHECK(fit.alpha == 1.0);
            CHECK(fit.beta == 1.0);
        }
        CHECK(cell.ssi == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("compare models grid") {
    synth::GravityParams p;
    p.family = Family::DIRG_GM;
    p.log_a = -4;
    p.noise_sigma = 0.2;
    auto w = synth::gravity_world(p, 25, 150, 4);
    const auto directed = synth::to_flux(w);
    const auto undirected = directed.symmetrized();
    ModelInputs in;
    in.directed = &directed;
    in.undirected = &undirected;
    in.cities = &w.cities;
    in.costs[geo::Metric::geo_km] = &w.cost(geo::Metric::geo_km);
    in.costs[geo::Metric::travel_km] = &w.cost(geo::Metric::travel_km);
    const auto cells = compare_models(in, kAllFamilies, geo::kAllMetrics, 2);
    REQUIRE(cells.size() == 12);
    int errored = 0;
    for (const auto& c : cells) {
        if (c.spec.cost_metric == geo::Metric::travel_min) {
            CHECK_FALSE(c.ok());
            ++errored;
        } else {
            CHECK(c.ok());
        }
    }
    CHECK(errored == 4);
    const auto again = compare_models(in, kAllFamilies, geo::kAllMetrics, 1);
    std::stringstream a, b;
    write_fit_table(a, cells);
    write_fit_table(b, again);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("error: ") != std::string::npos);
}
