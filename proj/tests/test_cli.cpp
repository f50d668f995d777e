#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "migflux/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using migflux::cli::kFatal;
using migflux::cli::kPartial;
using migflux::cli::kSuccess;

namespace {

int cli(std::vector<std::string> args, std::string* log_text = nullptr) {
    args.insert(args.begin(), "migflux");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::stringstream out, log;
    const auto inv = migflux::cli::parse_args(static_cast<int>(argv.size()), argv.data(), out, log);
    const int rc = migflux::cli::run(inv, log);
    if (log_text) *log_text = log.str() + out.str();
    return rc;
}

std::size_t data_rows(const fs::path& p) {
    std::size_t n = 0;
    std::istringstream s(testing::body_of(p));
    std::string line;
    std::getline(s, line);
    while (std::getline(s, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("help and bad usage") {
    std::string log;
    CHECK(cli({"--help"}, &log) == kSuccess);
    CHECK(log.find("cluster") != std::string::npos);
    CHECK(cli({}) == kFatal);
    CHECK(cli({"frobnicate"}) == kFatal);
    CHECK(cli({"fit", "--k", "1"}) == kFatal);
    CHECK(cli({"fit", "--cities", "/nonexistent/cities.csv", "--out", "x"}, &log) == kFatal);
    CHECK(log.find("not found") != std::string::npos);
}

TEST_CASE("synth, extract and fit") {
    const auto dir = testing::scratch_dir("cli_fit");
    const auto w = dir / "world";
    REQUIRE(cli({"synth", "--out", w.string(), "--synth-family", "DIRG_GM", "--synth-pairs", "120",
                 "--synth-cities", "20", "--synth-log-a", "-7", "--synth-messages"}) == kSuccess);
    const auto header = testing::slurp(w / "flux_directed.csv");
    CHECK(header.rfind("# tool: migflux", 0) == 0);
    CHECK(header.find("# seed: 20170113") != std::string::npos);
    CHECK(header.find("# config_hash: ") != std::string::npos);

    const auto ex = dir / "extract";
    REQUIRE(cli({"extract", "--messages", (w / "messages.csv").string(), "--cities", (w / "cities.csv").string(),
                 "--out", ex.string()}) == kSuccess);
    CHECK(testing::body_of(ex / "flux_directed.csv") == testing::body_of(w / "flux_directed.csv"));
    CHECK(testing::body_of(ex / "flux_undirected.csv") == testing::body_of(w / "flux_undirected.csv"));
    const auto meta = testing::slurp(ex / "extract_meta.txt");
    CHECK(meta.find("directed_pairs=120\n") != std::string::npos);
    CHECK(meta.find("cities=20\n") != std::string::npos);
    CHECK(meta.find("tool: migflux") != std::string::npos);

    const auto fit = dir / "fit";
    std::string log;
    CHECK(cli({"fit", "--cities", (w / "cities.csv").string(), "--directed-flux", (w / "flux_directed.csv").string(),
               "--cost-travel-km", (w / "cost_travel_km.csv").string(), "--cost-travel-min",
               (w / "cost_travel_min.csv").string(), "--out", fit.string()},
              &log) == kSuccess);
    CHECK(data_rows(fit / "fits.csv") == 12);
    CHECK(fs::exists(fit / "predictions" / "G_GM_travel_min.csv"));

    const auto partial = dir / "fit_partial";
    CHECK(cli({"fit", "--cities", (w / "cities.csv").string(), "--directed-flux", (w / "flux_directed.csv").string(),
               "--cost-travel-km", (w / "cost_travel_km.csv").string(), "--out", partial.string()}) == kPartial);
    const auto body = testing::body_of(partial / "fits.csv");
    CHECK(data_rows(partial / "fits.csv") == 12);
    std::size_t errored = 0;
    std::istringstream rows(body);
    std::string row;
    while (std::getline(rows, row)) {
        if (row.find(",error: ") != std::string::npos) {
            ++errored;
            CHECK(row.find("travel_min") != std::string::npos);
        }
    }
    CHECK(errored == 4);
}

TEST_CASE("empty log") {
    const auto dir = testing::scratch_dir("cli_empty");
    testing::spit(dir / "log.csv", "message_id,user_id,timestamp,city_id\n");
    testing::spit(dir / "registry.csv", "code,city_id\n110000,beijing\n");
    std::string log;
    CHECK(cli({"extract", "--messages", (dir / "log.csv").string(), "--registry", (dir / "registry.csv").string(),
               "--out", (dir / "out").string()},
              &log) == kPartial);
    CHECK(log.find("warning") != std::string::npos);
    CHECK(testing::body_of(dir / "out" / "flux_directed.csv") == "origin,destination,count\n");
    CHECK(testing::body_of(dir / "out" / "flux_undirected.csv") == "city_a,city_b,count\n");

    testing::spit(dir / "garbage.csv", "who,what\n1,2\n");
    CHECK(cli({"extract", "--messages", (dir / "garbage.csv").string(), "--registry",
               (dir / "registry.csv").string(), "--out", (dir / "out2").string()}) == kFatal);
}

TEST_CASE("cluster on planted patterns") {
    const auto dir = testing::scratch_dir("cli_cluster");
    const auto w = dir / "world";
    REQUIRE(cli({"synth", "--synth-mode", "patterns", "--out", w.string()}) == kSuccess);
    const auto out = dir / "cluster";
    REQUIRE(cli({"cluster", "--cities", (w / "cities.csv").string(), "--undirected-flux",
                 (w / "flux_undirected.csv").string(), "--cost-travel-min", (w / "cost_travel_min.csv").string(),
                 "--out", out.string()}) == kSuccess);
    CHECK(data_rows(out / "silhouette.csv") == 7);
    CHECK(data_rows(out / "elbow.csv") == 7);
    CHECK(data_rows(out / "pattern_fits.csv") == 4);
    CHECK(fs::exists(out / "di.csv"));
    CHECK(fs::exists(out / "province_patterns.csv"));
    CHECK(fs::exists(out / "locality" / "C0000.csv"));
    CHECK(fs::exists(out / "gdp_match" / "C0000.csv"));

    std::map<std::string, std::string> planted;
    {
        std::istringstream s(testing::body_of(w / "planted.csv"));
        std::string line;
        std::getline(s, line);
        while (std::getline(s, line)) {
            const auto c1 = line.find(','), c2 = line.rfind(',');
            planted[line.substr(0, c2)] = line.substr(c2 + 1);
            (void)c1;
        }
    }
    std::istringstream s(testing::body_of(out / "assignments.csv"));
    std::string line;
    std::getline(s, line);
    std::size_t matched = 0;
    while (std::getline(s, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        CHECK(planted.at(line.substr(0, c2)) == line.substr(c3 + 1));
        ++matched;
    }
    CHECK(matched == planted.size());

    const auto idx = dir / "indices";
    CHECK(cli({"indices", "--cities", (w / "cities.csv").string(), "--undirected-flux",
               (w / "flux_undirected.csv").string(), "--cost-travel-min", (w / "cost_travel_min.csv").string(),
               "--assignments", (out / "assignments.csv").string(), "--out", idx.string()}) == kSuccess);
    CHECK(testing::body_of(idx / "di.csv") == testing::body_of(out / "di.csv"));
    CHECK(testing::body_of(idx / "province_patterns.csv") == testing::body_of(out / "province_patterns.csv"));

    testing::spit(dir / "rd.csv", "province_id,value\nP0,1\nP1,2\nP2,3\nP3,4\nP4,5\nP5,6\nP6,7\n");
    CHECK(cli({"correlate", "--province-patterns", (out / "province_patterns.csv").string(), "--province-covariate",
               (dir / "rd.csv").string(), "--out", (dir / "corr").string()}) == kSuccess);
    CHECK(data_rows(dir / "corr" / "correlation.csv") == 1);
}

TEST_CASE("config file and flag precedence") {
    const auto dir = testing::scratch_dir("cli_config");
    testing::spit(dir / "run.ini", "synth-mode=patterns\nseed=5\nsynth-cities-per-pattern=4\nout=" +
                                        (dir / "from_file").string() + "\n");
    CHECK(cli({"synth", "--config", (dir / "run.ini").string()}) == kSuccess);
    CHECK(testing::slurp(dir / "from_file" / "planted.csv").find("# seed: 5\n") != std::string::npos);
    CHECK(cli({"synth", "--config", (dir / "run.ini").string(), "--seed", "6", "--out", (dir / "flag").string()}) ==
          kSuccess);
    CHECK(testing::slurp(dir / "flag" / "planted.csv").find("# seed: 6\n") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "from_file" / "flux_directed.csv"));
}

TEST_CASE("outputs do not depend on worker count") {
    const auto dir = testing::scratch_dir("cli_workers");
    const auto w = dir / "world";
    REQUIRE(cli({"synth", "--synth-mode", "patterns", "--synth-cities-per-pattern", "6", "--out", w.string()}) ==
            kSuccess);
    std::vector<std::string> bodies;
    for (const char* workers : {"1", "4", "8"}) {
        const auto out = dir / (std::string("w") + workers);
        REQUIRE(cli({"cluster", "--cities", (w / "cities.csv").string(), "--undirected-flux",
                     (w / "flux_undirected.csv").string(), "--cost-travel-min", (w / "cost_travel_min.csv").string(),
                     "--k-max", "5", "--restarts", "4", "--workers", workers, "--out", out.string()}) == kSuccess);
        bodies.push_back(testing::slurp(out / "assignments.csv") + testing::slurp(out / "silhouette.csv") +
                         testing::slurp(out / "pattern_fits.csv") + testing::slurp(out / "di.csv"));
    }
    CHECK(bodies[0] == bodies[1]);
    CHECK(bodies[0] == bodies[2]);
}

TEST_CASE("locality metric override") {
    const auto dir = testing::scratch_dir("cli_locality");
    const auto w = dir / "world";
    REQUIRE(cli({"synth", "--synth-mode", "patterns", "--synth-cities-per-pattern", "4", "--out", w.string()}) ==
            kSuccess);
    const std::vector<std::string> common = {"--cities", (w / "cities.csv").string(), "--undirected-flux",
                                             (w / "flux_undirected.csv").string(), "--cost-travel-min",
                                             (w / "cost_travel_min.csv").string(), "--k-max", "4"};
    auto args = common;
    args.insert(args.begin(), "cluster");
    args.insert(args.end(), {"--out", (dir / "t").string()});
    REQUIRE(cli(args) == kSuccess);
    args = common;
    args.insert(args.begin(), "cluster");
    args.insert(args.end(), {"--locality-metric", "geo_km", "--out", (dir / "g").string()});
    REQUIRE(cli(args) == kSuccess);
    CHECK(testing::body_of(dir / "t" / "di.csv") == testing::body_of(dir / "g" / "di.csv"));
    CHECK(testing::body_of(dir / "t" / "locality" / "C0000.csv") !=
          testing::body_of(dir / "g" / "locality" / "C0000.csv"));
    args.back() = (dir / "k").string();
    args[args.size() - 3] = "travel_km";
    CHECK(cli(args) == kFatal);
}
