// zib — Bayesian zero-inflated Bernoulli fitting, posterior grids, and the
// simulation harness. Exit codes: 0 success, 2 argument/parse error,
// 3 data validation error, 4 convergence failure.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zib/analytic.hpp"
#include "zib/csv.hpp"
#include "zib/fit.hpp"
#include "zib/model.hpp"
#include "zib/parallel.hpp"
#include "zib/simulation.hpp"

namespace {

using nlohmann::json;

struct ArgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string data_path;
    std::string outcome;
    std::vector<std::string> zi_cols;
    std::vector<std::string> nzi_cols;
    std::pair<double, double> omega_prior{0.0, 0.5};
    std::pair<double, double> p_prior{0.5, 1.0};
    double coef_sigma = 5.0;
    std::string sigma_mode = "fixed";
    int chains = 4;
    int iterations = 2000;
    int warmup = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_path;
    std::string format = "json";
};

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::pair<double, double> parse_interval(const std::string& s, const std::string& flag) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw ArgError(flag + " expects 'lo,hi'");
    }
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ArgError(flag + " expects numeric 'lo,hi'");
    }
}

zib::PriorConfig make_prior(const CommonOpts& o) {
    zib::PriorConfig prior;
    prior.omega_lo = o.omega_prior.first;
    prior.omega_hi = o.omega_prior.second;
    prior.p_lo = o.p_prior.first;
    prior.p_hi = o.p_prior.second;
    prior.coef_sigma_theta = o.coef_sigma;
    prior.coef_sigma_beta = o.coef_sigma;
    if (o.sigma_mode == "fixed") {
        prior.sigma_mode = zib::SigmaMode::fixed;
    } else if (o.sigma_mode == "hyper") {
        prior.sigma_mode = zib::SigmaMode::hyperprior;
    } else {
        throw ArgError("--sigma-mode must be 'fixed' or 'hyper'");
    }
    try {
        prior.validate();
    } catch (const std::invalid_argument& e) {
        throw ArgError(e.what());
    }
    return prior;
}

zib::ChainConfig make_chain_config(const CommonOpts& o) {
    zib::ChainConfig cfg;
    cfg.n_chains = o.chains;
    cfg.iterations = o.iterations;
    cfg.warmup = o.warmup;
    cfg.seed = o.seed;
    cfg.threads = zib::resolve_threads(o.threads);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ArgError(e.what());
    }
    return cfg;
}

zib::Dataset load_dataset(const CommonOpts& o) {
    if (o.data_path.empty()) throw ArgError("--data is required");
    if (o.outcome.empty()) throw ArgError("--outcome is required");

    zib::CsvTable table;
    try {
        table = zib::read_csv(o.data_path);
    } catch (const zib::CsvError& e) {
        throw ArgError(e.what());
    }
    if (table.rows.empty()) throw DataError("at least one observation required");

    std::size_t y_col = 0;
    std::vector<std::size_t> x_cols, z_cols;
    try {
        y_col = table.column(o.outcome);
        for (const auto& c : o.zi_cols) x_cols.push_back(table.column(c));
        for (const auto& c : o.nzi_cols) z_cols.push_back(table.column(c));
    } catch (const zib::CsvError& e) {
        throw DataError(e.what());
    }

    zib::Dataset data;
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    data.y.reserve(table.rows.size());
    data.X.resize(n, static_cast<Eigen::Index>(x_cols.size()));
    data.Z.resize(n, static_cast<Eigen::Index>(z_cols.size()));
    data.x_names = o.zi_cols;
    data.z_names = o.nzi_cols;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double v = table.rows[i][y_col];
        if (v != 0.0 && v != 1.0) {
            throw DataError("outcome column '" + o.outcome + "' has non-binary value " +
                            zib::format_double(v) + " at row " + std::to_string(i + 2));
        }
        data.y.push_back(static_cast<int>(v));
        for (std::size_t j = 0; j < x_cols.size(); ++j) {
            data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                table.rows[i][x_cols[j]];
        }
        for (std::size_t j = 0; j < z_cols.size(); ++j) {
            data.Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                table.rows[i][z_cols[j]];
        }
    }
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    return data;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        zib::write_text_atomic(out_path, content);
    }
}

json summary_json(const zib::PosteriorSummary& s) {
    return {{"median", s.median}, {"q025", s.q025}, {"q975", s.q975}, {"mean", s.mean}};
}

std::string fit_csv(const zib::FitResult& fit, const std::vector<std::string>& blocks) {
    std::ostringstream os;
    os << "param,block,median,q025,q975,mean,rhat,ess\n";
    for (std::size_t i = 0; i < fit.params.size(); ++i) {
        const auto& p = fit.params[i];
        os << p.name << ',' << blocks[i] << ',' << zib::format_double(p.summary.median) << ','
           << zib::format_double(p.summary.q025) << ',' << zib::format_double(p.summary.q975)
           << ',' << zib::format_double(p.summary.mean) << ',' << zib::format_double(p.rhat)
           << ',' << zib::format_double(p.ess) << '\n';
    }
    return os.str();
}

int cmd_fit(const CommonOpts& o) {
    const zib::PriorConfig prior = make_prior(o);
    const zib::Dataset data = load_dataset(o);

    if (o.zi_cols.empty() && o.nzi_cols.empty()) {
        const zib::SufficientStats stats = data.stats();
        const zib::FitResult fit = zib::fit_analytic_nocov(stats, prior);
        json doc;
        doc["method"] = "analytic";
        doc["n"] = stats.n;
        doc["s"] = stats.s;
        doc["parameters"] = {{"omega", summary_json(fit.params[0].summary)},
                             {"p", summary_json(fit.params[1].summary)}};
        if (o.format == "csv") {
            emit(o.out_path, fit_csv(fit, {"omega", "p"}));
        } else {
            emit(o.out_path, doc.dump(2) + "\n");
        }
        return 0;
    }

    const zib::ChainConfig cfg = make_chain_config(o);
    const zib::FitResult fit = zib::fit_mcmc_cov(data, prior, cfg);

    const std::size_t n_theta = o.zi_cols.size() + 1;
    const std::size_t n_beta = o.nzi_cols.size() + 1;
    auto display_name = [&](std::size_t i) -> std::string {
        if (i == 0 || i == n_theta) return "(Intercept)";
        if (i < n_theta) return o.zi_cols[i - 1];
        if (i < n_theta + n_beta) return o.nzi_cols[i - n_theta - 1];
        return fit.params[i].name;
    };

    json zi = json::array(), nzi = json::array(), hyper = json::array();
    std::vector<std::string> blocks;
    for (std::size_t i = 0; i < fit.params.size(); ++i) {
        json row = summary_json(fit.params[i].summary);
        row["name"] = display_name(i);
        row["rhat"] = fit.params[i].rhat;
        row["ess"] = fit.params[i].ess;
        if (i < n_theta) {
            zi.push_back(row);
            blocks.push_back("zero_inflated");
        } else if (i < n_theta + n_beta) {
            nzi.push_back(row);
            blocks.push_back("non_zero_inflated");
        } else {
            hyper.push_back(row);
            blocks.push_back("hyper");
        }
    }

    json doc;
    doc["method"] = "mcmc";
    doc["n"] = data.n();
    doc["chains"] = cfg.n_chains;
    doc["iterations"] = cfg.iterations;
    doc["warmup"] = cfg.warmup;
    doc["seed"] = cfg.seed;
    doc["zero_inflated"] = zi;
    doc["non_zero_inflated"] = nzi;
    if (!hyper.empty()) doc["hyper"] = hyper;
    doc["diagnostics"] = {{"max_rhat", fit.max_rhat},
                          {"min_ess", fit.min_ess},
                          {"accept_rate", fit.accept_rate},
                          {"converged", fit.converged}};

    if (o.format == "csv") {
        emit(o.out_path, fit_csv(fit, blocks));
    } else {
        emit(o.out_path, doc.dump(2) + "\n");
    }
    if (!fit.converged) {
        throw ConvergenceError("convergence failure: rhat > 1.1 on at least one parameter (max rhat " +
                               zib::format_double(fit.max_rhat) + ")");
    }
    return 0;
}

int cmd_posterior(const CommonOpts& o) {
    if (!o.zi_cols.empty() || !o.nzi_cols.empty()) {
        throw ArgError("posterior requires a no-covariate configuration");
    }
    const zib::PriorConfig prior = make_prior(o);
    const zib::Dataset data = load_dataset(o);
    const auto rows = zib::density_grids_for_plotting(data.stats(), prior);

    std::ostringstream os;
    os << "param,value,prior_density,posterior_density\n";
    for (const auto& r : rows) {
        os << (r.param == zib::ParamKind::omega ? "omega" : "p") << ','
           << zib::format_double(r.value) << ',' << zib::format_double(r.prior_density) << ','
           << zib::format_double(r.posterior_density) << '\n';
    }
    emit(o.out_path, os.str());
    return 0;
}

struct SimulateOpts {
    std::string mode;
    std::vector<double> omega, p;
    std::vector<double> beta0{0.5, 1.0, 2.0}, beta1{2.0, 3.0, 4.0}, beta2{3.0};
    std::vector<double> theta0{-0.5, -1.0, -2.0}, theta1{-2.0, -3.0, -4.0}, theta2{-3.0};
    std::vector<int> sizes{500, 1500};
    int replicates = 100;
};

int cmd_simulate(const SimulateOpts& so, const CommonOpts& o) {
    if (so.mode != "nocov" && so.mode != "cov") {
        throw ArgError("--mode must be 'nocov' or 'cov'");
    }
    if (so.replicates < 1) throw ArgError("--replicates must be >= 1");
    for (int n : so.sizes) {
        if (n < 1) throw ArgError("--n values must be >= 1");
    }
    const zib::PriorConfig prior = make_prior(o);
    const zib::ChainConfig cfg = make_chain_config(o);
    const int threads = zib::resolve_threads(o.threads);

    auto progress = [](const zib::SimResult& r, std::size_t i, std::size_t total) {
        std::cerr << "cell " << (i + 1) << "/" << total << " done: n=" << r.scenario.n;
        for (std::size_t p = 0; p < r.param_names.size(); ++p) {
            std::cerr << ' ' << r.param_names[p] << '=' << r.truth[p];
        }
        std::cerr << " (failed " << r.n_failed << ")\n";
    };

    std::vector<zib::SimResult> results;
    if (so.mode == "nocov") {
        zib::NocovGrid grid;
        grid.omega = so.omega.empty() ? std::vector<double>{0.1, 0.2, 0.3, 0.4} : so.omega;
        grid.p = so.p.empty() ? std::vector<double>{0.6, 0.7, 0.8, 0.9} : so.p;
        for (double v : grid.omega) {
            if (!(v >= 0.0 && v <= 1.0)) throw ArgError("--omega values must lie in [0, 1]");
        }
        for (double v : grid.p) {
            if (!(v >= 0.0 && v <= 1.0)) throw ArgError("--p values must lie in [0, 1]");
        }
        grid.sizes = so.sizes;
        grid.replicates = so.replicates;
        grid.seed = o.seed;
        grid.threads = threads;
        grid.prior = prior;
        results = zib::run_grid(grid, cfg, progress);
    } else {
        zib::CovGrid grid;
        grid.beta0 = so.beta0;
        grid.beta1 = so.beta1;
        grid.beta2 = so.beta2;
        grid.theta0 = so.theta0;
        grid.theta1 = so.theta1;
        grid.theta2 = so.theta2;
        grid.sizes = so.sizes;
        grid.replicates = so.replicates;
        grid.seed = o.seed;
        grid.threads = threads;
        grid.prior = prior;
        results = zib::run_grid(grid, cfg, progress);
    }
    const std::string out = o.out_path.empty() ? "zib_simulation.csv" : o.out_path;
    zib::write_text_atomic(out, zib::sim_results_csv(results));
    std::cerr << "wrote " << results.size() << " grid cells to " << out << "\n";
    return 0;
}

void add_common_flags(CLI::App* app, CommonOpts& o, bool with_data) {
    if (with_data) {
        app->add_option("--data", o.data_path, "input CSV path");
        app->add_option("--outcome", o.outcome, "outcome column name (values 0/1)");
        app->add_option("--zi-cols", [&o](const std::vector<std::string>& v) {
            o.zi_cols = split_names(v.at(0));
            return true;
        }, "comma-separated covariate columns for the zero-inflated part");
        app->add_option("--nzi-cols", [&o](const std::vector<std::string>& v) {
            o.nzi_cols = split_names(v.at(0));
            return true;
        }, "comma-separated covariate columns for the non-zero-inflated part");
    }
    app->add_option("--omega-prior", [&o](const std::vector<std::string>& v) {
        o.omega_prior = parse_interval(v.at(0), "--omega-prior");
        return true;
    }, "uniform prior support for omega as 'lo,hi' (default 0,0.5)");
    app->add_option("--p-prior", [&o](const std::vector<std::string>& v) {
        o.p_prior = parse_interval(v.at(0), "--p-prior");
        return true;
    }, "uniform prior support for p as 'lo,hi' (default 0.5,1)");
    app->add_option("--coef-sigma", o.coef_sigma, "normal prior sd for both coefficient blocks");
    app->add_option("--sigma-mode", o.sigma_mode, "fixed|hyper");
    app->add_option("--chains", o.chains, "number of MCMC chains");
    app->add_option("--iter", o.iterations, "post-warmup draws per chain");
    app->add_option("--warmup", o.warmup, "warmup iterations per chain");
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--threads", o.threads, "worker threads (0 = available parallelism)");
    app->add_option("--out", o.out_path, "output path (fit defaults to stdout)");
    app->add_option("--format", o.format, "json|csv (fit output)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian zero-inflated Bernoulli models"};
    app.require_subcommand(1);

    CommonOpts fit_opts, post_opts, sim_opts;
    SimulateOpts sim_grid;

    CLI::App* fit = app.add_subcommand("fit", "fit the model to a CSV dataset");
    add_common_flags(fit, fit_opts, true);

    CLI::App* posterior =
        app.add_subcommand("posterior", "write prior/posterior density grids (no-covariate model)");
    add_common_flags(posterior, post_opts, true);

    CLI::App* simulate = app.add_subcommand("simulate", "run a simulation grid");
    simulate->add_option("--mode", sim_grid.mode, "nocov|cov");
    simulate->add_option("--omega", sim_grid.omega, "true omega values (nocov grid)");
    simulate->add_option("--p", sim_grid.p, "true p values (nocov grid)");
    simulate->add_option("--beta0", sim_grid.beta0, "beta0 grid values (cov mode)");
    simulate->add_option("--beta1", sim_grid.beta1, "beta1 grid values (cov mode)");
    simulate->add_option("--beta2", sim_grid.beta2, "beta2 grid values (cov mode)");
    simulate->add_option("--theta0", sim_grid.theta0, "theta0 grid values (cov mode)");
    simulate->add_option("--theta1", sim_grid.theta1, "theta1 grid values (cov mode)");
    simulate->add_option("--theta2", sim_grid.theta2, "theta2 grid values (cov mode)");
    simulate->add_option("--n", sim_grid.sizes, "sample sizes");
    simulate->add_option("--replicates", sim_grid.replicates, "replicates per cell");
    add_common_flags(simulate, sim_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_opts);
        if (posterior->parsed()) return cmd_posterior(post_opts);
        if (simulate->parsed()) return cmd_simulate(sim_grid, sim_opts);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const ArgError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
