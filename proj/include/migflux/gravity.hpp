#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "migflux/common.hpp"
#include "migflux/geo.hpp"
#include "migflux/ingest.hpp"

namespace migflux::gravity {

// GM: population masses. G_GM: GDP. AVEG_GM: GDP per capita. DIRG_GM: directed
// flux with separate origin and destination GDP exponents.
enum class Family { GM, G_GM, AVEG_GM, DIRG_GM };
enum class MassSource { population, gdp, gdp_per_capita };

inline constexpr Family kAllFamilies[] = {Family::GM, Family::AVEG_GM, Family::G_GM, Family::DIRG_GM};

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);
MassSource mass_source(Family f);
inline bool requires_directed(Family f) { return f == Family::DIRG_GM; }
inline bool fixed_mass_exponents(Family f) { return f != Family::DIRG_GM; }
double mass_of(const geo::CityAttributes& city, MassSource source);

struct ModelSpec {
    Family family = Family::G_GM;
    geo::Metric cost_metric = geo::Metric::travel_min;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Observed flux on one stored pair. For directed data `pair` is (origin, destination).
struct PairFlow {
    CityPair pair;
    double flux = 0;
};

std::vector<PairFlow> flows_of(const ingest::FluxMatrix& flux);

/// Log-space design. For the fixed-exponent families the mass term
/// ln(m_i * m_j) is moved into `offset` and the columns are (1, -ln C);
/// DIRG_GM uses (1, ln E_origin, ln E_destination, -ln C) with zero offset.
struct RegressionTable {
    ModelSpec spec;
    bool directed = false;
    std::vector<CityPair> pairs;
    std::vector<double> flux;
    std::vector<double> response;  // ln F
    std::vector<double> offset;
    std::vector<double> design;    // row-major, rows() x params
    std::size_t params = 0;
    std::size_t excluded_missing_cost = 0;

    std::size_t rows() const { return pairs.size(); }
    std::span<const double> row(std::size_t i) const { return {design.data() + i * params, params}; }
};

RegressionTable design_rows(const ModelSpec& spec, std::span<const PairFlow> flows, bool directed,
                            const geo::CityTable& cities, const geo::CostMatrix& costs);
RegressionTable design_rows(const ModelSpec& spec, const ingest::FluxMatrix& flux,
                            const geo::CityTable& cities, const geo::CostMatrix& costs);

/// Classical OLS with an explicit design. Throws DataError on rank deficiency
/// ("collinear regressors") or when rows <= params.
struct OlsResult {
    std::vector<double> coef;
    std::vector<double> std_error;
    std::vector<double> t_value;
    std::vector<double> p_value;  // two-sided, normal approximation
    double r_squared = 0;
    double f_statistic = 0;
    double f_pvalue = 0;  // exact F distribution
    double rss = 0;
    std::size_t n = 0;
};

OlsResult ordinary_least_squares(std::span<const double> design, std::size_t params,
                                 std::span<const double> response);

struct GravityFit {
    ModelSpec spec;
    double log_a = 0;
    double alpha = 1;
    double beta = 1;
    double gamma = 0;
    std::size_t n_obs = 0;
    double r_squared = 0;
    double f_statistic = 0;
    double f_pvalue = 0;
    std::vector<std::string> coef_names;
    std::vector<double> coef_stderr;
    std::vector<double> coef_p;
};

GravityFit fit(const RegressionTable& table);

struct Prediction {
    ModelSpec spec;
    std::map<CityPair, double> entries;
    std::map<CityPair, std::string> errors;  // pairs that could not be predicted
};

/// F_hat = a * m_i^alpha * m_j^beta / C^gamma for each requested pair.
Prediction predict(const GravityFit& fit, std::span<const CityPair> pairs, const geo::CityTable& cities,
                   const geo::CostMatrix& costs);

/// 2 * sum(min) / (sum(actual) + sum(predicted)). Throws DataError when both sums are zero.
double ssi(std::span<const double> actual, std::span<const double> predicted);
/// Requires the prediction to cover exactly the stored pairs of `actual`.
double ssi(const ingest::FluxMatrix& actual, const Prediction& predicted);

struct CellResult {
    ModelSpec spec;
    std::optional<GravityFit> fit;
    std::optional<Prediction> prediction;
    RegressionTable table;  // fitted pair universe with observed flux
    double ssi = 0;
    std::string error;

    bool ok() const { return fit.has_value(); }
};

/// Design, fit, predict and score one model on the given flows. Errors are
/// captured in the cell rather than thrown.
CellResult fit_cell(const ModelSpec& spec, std::span<const PairFlow> flows, bool directed,
                    const geo::CityTable& cities, const geo::CostMatrix& costs);

struct ModelInputs {
    const ingest::FluxMatrix* directed = nullptr;
    const ingest::FluxMatrix* undirected = nullptr;
    const geo::CityTable* cities = nullptr;
    std::map<geo::Metric, const geo::CostMatrix*> costs;  // a missing metric errors its cells
};

/// One fit + SSI per (family, metric). Failures are captured per cell.
std::vector<CellResult> compare_models(const ModelInputs& inputs, std::span<const Family> families,
                                       std::span<const geo::Metric> metrics, unsigned workers = 1);

/// `family,metric,alpha,beta,gamma,log_a,r2,f_stat,n_obs,ssi,status`
void write_fit_table(std::ostream& out, std::span<const CellResult> cells);
/// `origin,destination,actual,predicted`
void write_predictions(std::ostream& out, const CellResult& cell);

}  // namespace migflux::gravity
