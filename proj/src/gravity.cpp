#include "migflux/gravity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include "migflux/csv.hpp"
#include "migflux/parallel.hpp"

namespace migflux::gravity {

std::string_view family_name(Family f) {
    switch (f) {
        case Family::GM: return "GM";
        case Family::G_GM: return "G_GM";
        case Family::AVEG_GM: return "AVEG_GM";
        case Family::DIRG_GM: return "DIRG_GM";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view name) {
    for (auto f : kAllFamilies) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

MassSource mass_source(Family f) {
    switch (f) {
        case Family::GM: return MassSource::population;
        case Family::AVEG_GM: return MassSource::gdp_per_capita;
        case Family::G_GM:
        case Family::DIRG_GM: return MassSource::gdp;
    }
    return MassSource::gdp;
}

double mass_of(const geo::CityAttributes& city, MassSource source) {
    switch (source) {
        case MassSource::population: return city.population;
        case MassSource::gdp: return city.gdp;
        case MassSource::gdp_per_capita: return city.gdp_per_capita;
    }
    return 0;
}

std::vector<PairFlow> flows_of(const ingest::FluxMatrix& flux) {
    std::vector<PairFlow> out;
    out.reserve(flux.pair_count());
    for (const auto& [pair, count] : flux.entries()) out.push_back({pair, static_cast<double>(count)});
    return out;
}

namespace {

double positive_log(double v, const std::string& what) {
    if (!(v > 0) || !std::isfinite(v)) throw DataError("gravity: nonpositive " + what);
    return std::log(v);
}

}  // namespace

RegressionTable design_rows(const ModelSpec& spec, std::span<const PairFlow> flows, bool directed,
                            const geo::CityTable& cities, const geo::CostMatrix& costs) {
    if (requires_directed(spec.family) && !directed) {
        throw ContractError("gravity: directed flux required for DIRG_GM");
    }
    if (!requires_directed(spec.family) && directed) {
        throw ContractError("gravity: undirected flux required for " + std::string(family_name(spec.family)));
    }
    RegressionTable t;
    t.spec = spec;
    t.directed = directed;
    t.params = fixed_mass_exponents(spec.family) ? 2 : 4;
    const auto source = mass_source(spec.family);
    for (const auto& flow : flows) {
        const auto& [a, b] = flow.pair;
        const auto cost = costs.find(a, b);
        if (!cost) {
            ++t.excluded_missing_cost;
            continue;
        }
        const auto pair_name = "(" + a + "," + b + ")";
        const double log_f = positive_log(flow.flux, "flux for " + pair_name);
        const double log_ma = positive_log(mass_of(cities.at(a), source), "mass for " + a);
        const double log_mb = positive_log(mass_of(cities.at(b), source), "mass for " + b);
        const double log_c = positive_log(*cost, "cost for " + pair_name);
        t.pairs.push_back(flow.pair);
        t.flux.push_back(flow.flux);
        t.response.push_back(log_f);
        if (t.params == 2) {
            t.offset.push_back(log_ma + log_mb);
            t.design.insert(t.design.end(), {1.0, -log_c});
        } else {
            t.offset.push_back(0.0);
            t.design.insert(t.design.end(), {1.0, log_ma, log_mb, -log_c});
        }
    }
    return t;
}

RegressionTable design_rows(const ModelSpec& spec, const ingest::FluxMatrix& flux, const geo::CityTable& cities,
                            const geo::CostMatrix& costs) {
    const auto flows = flows_of(flux);
    return design_rows(spec, flows, flux.directed(), cities, costs);
}

OlsResult ordinary_least_squares(std::span<const double> design, std::size_t params,
                                 std::span<const double> response) {
    const std::size_t n = response.size();
    if (params == 0 || design.size() != n * params) throw ContractError("ols: design shape mismatch");
    if (n <= params) {
        throw DataError("ols: " + std::to_string(n) + " observations for " + std::to_string(params) + " parameters");
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> x(design.data(), static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(params));
    const Eigen::Map<const Eigen::VectorXd> y(response.data(), static_cast<Eigen::Index>(n));

    const Eigen::MatrixXd xm = x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xm);
    if (static_cast<std::size_t>(qr.rank()) < params) throw DataError("ols: collinear regressors");

    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - xm * beta;

    OlsResult r;
    r.n = n;
    r.coef.assign(beta.data(), beta.data() + params);
    r.rss = resid.squaredNorm();
    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    const auto df_resid = static_cast<double>(n - params);
    const auto df_model = static_cast<double>(params - 1);
    r.r_squared = tss > 0 ? std::clamp(1.0 - r.rss / tss, 0.0, 1.0) : 1.0;

    // (X^T X)^{-1} = P R^{-1} R^{-T} P^T
    const auto p = static_cast<Eigen::Index>(params);
    const Eigen::MatrixXd rmat = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv = rmat.inverse();
    const Eigen::MatrixXd cov_perm = rinv * rinv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * cov_perm * perm.transpose();

    const double sigma2 = r.rss / df_resid;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < params; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(jj, jj)));
        const double t = se > 0 ? r.coef[j] / se : (r.coef[j] == 0 ? 0.0 : inf);
        r.std_error.push_back(se);
        r.t_value.push_back(t);
        r.p_value.push_back(std::erfc(std::abs(t) / std::sqrt(2.0)));
    }

    if (params == 1) {
        r.f_statistic = 0;
        r.f_pvalue = 1;
    } else {
        const double ess = std::max(0.0, tss - r.rss);
        if (r.rss > 0) {
            r.f_statistic = (ess / df_model) / (r.rss / df_resid);
            const boost::math::fisher_f dist(df_model, df_resid);
            r.f_pvalue = boost::math::cdf(boost::math::complement(dist, r.f_statistic));
        } else {
            r.f_statistic = ess > 0 ? inf : 0;
            r.f_pvalue = ess > 0 ? 0 : 1;
        }
    }
    return r;
}

GravityFit fit(const RegressionTable& table) {
    std::vector<double> adjusted(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) adjusted[i] = table.response[i] - table.offset[i];
    const auto ols = ordinary_least_squares(table.design, table.params, adjusted);

    GravityFit f;
    f.spec = table.spec;
    f.n_obs = table.rows();
    f.r_squared = ols.r_squared;
    f.f_statistic = ols.f_statistic;
    f.f_pvalue = ols.f_pvalue;
    f.coef_stderr = ols.std_error;
    f.coef_p = ols.p_value;
    f.log_a = ols.coef[0];
    if (table.params == 2) {
        f.gamma = ols.coef[1];
        f.coef_names = {"log_a", "gamma"};
    } else {
        f.alpha = ols.coef[1];
        f.beta = ols.coef[2];
        f.gamma = ols.coef[3];
        f.coef_names = {"log_a", "alpha", "beta", "gamma"};
    }
    return f;
}

Prediction predict(const GravityFit& fit, std::span<const CityPair> pairs, const geo::CityTable& cities,
                   const geo::CostMatrix& costs) {
    Prediction out;
    out.spec = fit.spec;
    const auto source = mass_source(fit.spec.family);
    for (const auto& pair : pairs) {
        const auto* ca = cities.find(pair.a);
        const auto* cb = cities.find(pair.b);
        const auto cost = costs.find(pair.a, pair.b);
        if (ca == nullptr || cb == nullptr) {
            out.errors[pair] = "missing city attributes";
            continue;
        }
        if (!cost) {
            out.errors[pair] = "missing cost";
            continue;
        }
        // Evaluated in log space to avoid overflow of GDP products.
        const double log_pred = fit.log_a + fit.alpha * std::log(mass_of(*ca, source)) +
                                fit.beta * std::log(mass_of(*cb, source)) - fit.gamma * std::log(*cost);
        out.entries[pair] = std::exp(log_pred);
    }
    return out;
}

double ssi(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw ContractError("ssi: length mismatch");
    double shared = 0, sum_a = 0, sum_p = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        shared += std::min(actual[i], predicted[i]);
        sum_a += actual[i];
        sum_p += predicted[i];
    }
    if (sum_a + sum_p == 0) throw DataError("ssi: undefined for all-zero inputs");
    return 2.0 * shared / (sum_a + sum_p);
}

double ssi(const ingest::FluxMatrix& actual, const Prediction& predicted) {
    if (actual.pair_count() != predicted.entries.size()) {
        throw ContractError("ssi: prediction does not cover the actual pair set");
    }
    std::vector<double> a, p;
    a.reserve(actual.pair_count());
    p.reserve(actual.pair_count());
    for (const auto& [pair, count] : actual.entries()) {
        auto it = predicted.entries.find(pair);
        if (it == predicted.entries.end()) throw ContractError("ssi: prediction missing pair (" + pair.a + "," + pair.b + ")");
        a.push_back(static_cast<double>(count));
        p.push_back(it->second);
    }
    return ssi(a, p);
}

CellResult fit_cell(const ModelSpec& spec, std::span<const PairFlow> flows, bool directed,
                    const geo::CityTable& cities, const geo::CostMatrix& costs) {
    CellResult cell;
    cell.spec = spec;
    try {
        cell.table = design_rows(spec, flows, directed, cities, costs);
        cell.fit = fit(cell.table);
        cell.prediction = predict(*cell.fit, cell.table.pairs, cities, costs);
        std::vector<double> predicted;
        predicted.reserve(cell.table.rows());
        for (const auto& pair : cell.table.pairs) predicted.push_back(cell.prediction->entries.at(pair));
        cell.ssi = ssi(cell.table.flux, predicted);
    } catch (const Error& e) {
        cell.fit.reset();
        cell.prediction.reset();
        cell.error = e.what();
    }
    return cell;
}

namespace {

CellResult run_cell(const ModelSpec& spec, const ModelInputs& in) {
    const auto* flux = requires_directed(spec.family) ? in.directed : in.undirected;
    auto it = in.costs.find(spec.cost_metric);
    std::string missing;
    if (flux == nullptr) missing = requires_directed(spec.family) ? "no directed flux" : "no undirected flux";
    else if (in.cities == nullptr) missing = "no city attributes";
    else if (it == in.costs.end() || it->second == nullptr) {
        missing = "no cost table for " + std::string(geo::metric_name(spec.cost_metric));
    }
    if (!missing.empty()) {
        CellResult cell;
        cell.spec = spec;
        cell.error = missing;
        return cell;
    }
    const auto flows = flows_of(*flux);
    return fit_cell(spec, flows, flux->directed(), *in.cities, *it->second);
}

}  // namespace

std::vector<CellResult> compare_models(const ModelInputs& inputs, std::span<const Family> families,
                                       std::span<const geo::Metric> metrics, unsigned workers) {
    std::vector<ModelSpec> specs;
    for (auto m : metrics) {
        for (auto f : families) specs.push_back({f, m});
    }
    std::vector<CellResult> cells(specs.size());
    parallel_for(specs.size(), workers, [&](std::size_t i) { cells[i] = run_cell(specs[i], inputs); });
    return cells;
}

void write_fit_table(std::ostream& out, std::span<const CellResult> cells) {
    using csv::format_double;
    out << "family,metric,alpha,beta,gamma,log_a,r2,f_stat,n_obs,ssi,status\n";
    for (const auto& c : cells) {
        out << family_name(c.spec.family) << ',' << geo::metric_name(c.spec.cost_metric) << ',';
        if (c.ok()) {
            const auto& f = *c.fit;
            out << format_double(f.alpha) << ',' << format_double(f.beta) << ',' << format_double(f.gamma) << ','
                << format_double(f.log_a) << ',' << format_double(f.r_squared) << ','
                << format_double(f.f_statistic) << ',' << f.n_obs << ',' << format_double(c.ssi) << ",ok\n";
        } else {
            std::string msg = c.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '"', '\'');
            out << ",,,,,,,,error: " << msg << '\n';
        }
    }
}

void write_predictions(std::ostream& out, const CellResult& cell) {
    out << "origin,destination,actual,predicted\n";
    if (!cell.prediction) return;
    for (std::size_t i = 0; i < cell.table.rows(); ++i) {
        const auto& pair = cell.table.pairs[i];
        out << pair.a << ',' << pair.b << ',' << csv::format_double(cell.table.flux[i]) << ','
            << csv::format_double(cell.prediction->entries.at(pair)) << '\n';
    }
}

}  // namespace migflux::gravity
