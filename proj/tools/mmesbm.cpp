// mmesbm: fit / cv / simulate / bootstrap / gof / predict for directed
// binary networks with actor covariates.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmesbm/bootstrap.hpp"
#include "mmesbm/beta_estimator.hpp"
#include "mmesbm/diagnostics.hpp"
#include "mmesbm/generator.hpp"
#include "mmesbm/io.hpp"
#include "mmesbm/network.hpp"
#include "mmesbm/selection.hpp"
#include "mmesbm/vb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mmesbm;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open \"" + path + "\"");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write \"" + path.string() + "\"");
    return out;
}

struct NetworkArgs {
    std::string edges_path;
    std::string adjacency_path;
    int n_actors = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--edges", edges_path, "edge list file (one \"i,j\" per line, 1-based)");
        cmd->add_option("--adjacency", adjacency_path, "dense 0/1 adjacency CSV (diagonal ignored)");
        cmd->add_option("--n-actors", n_actors, "actor count (required with --edges)");
    }

    Network load() const {
        if (!edges_path.empty()) {
            if (n_actors < 1) throw InputError("--edges requires --n-actors");
            auto in = open_input(edges_path);
            try {
                return load_edge_list(in, n_actors);
            } catch (const std::exception& e) {
                throw InputError(edges_path + ": " + e.what());
            }
        }
        if (!adjacency_path.empty()) {
            auto in = open_input(adjacency_path);
            try {
                return load_adjacency_csv(in);
            } catch (const std::exception& e) {
                throw InputError(adjacency_path + ": " + e.what());
            }
        }
        throw InputError("one of --edges or --adjacency is required");
    }
};

struct CovariateArgs {
    std::string covariates_path;
    std::string schema_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--covariates", covariates_path, "actor covariates CSV with header");
        cmd->add_option("--schema", schema_path, "covariate schema JSON");
    }

    CovariateMatrix load(int n_actors) const {
        if (covariates_path.empty()) return CovariateMatrix::intercept_only(n_actors);
        if (schema_path.empty()) throw InputError("--covariates requires --schema");
        auto schema_in = open_input(schema_path);
        std::vector<ColumnSpec> schema;
        try {
            schema = parse_schema_json(schema_in);
        } catch (const std::exception& e) {
            throw InputError(schema_path + ": " + e.what());
        }
        auto in = open_input(covariates_path);
        CovariateMatrix w;
        try {
            w = load_covariates(in, schema);
        } catch (const std::exception& e) {
            throw InputError(covariates_path + ": " + e.what());
        }
        if (w.n_actors != n_actors)
            throw InputError(covariates_path + ": row count " + std::to_string(w.n_actors) +
                             " does not match --n-actors " + std::to_string(n_actors));
        return w;
    }

    json echo() const {
        return {{"covariates", covariates_path}, {"schema", schema_path}};
    }
};

struct ConfigArgs {
    ModelConfig config;

    void attach(CLI::App* cmd, bool with_groups) {
        if (with_groups)
            cmd->add_option("--groups", config.n_groups, "number of latent groups")->required();
        cmd->add_option("--restarts", config.n_restarts, "random restarts, best ELBO kept");
        cmd->add_option("--max-iterations", config.max_iterations, "max coordinate-ascent sweeps");
        cmd->add_option("--tolerance", config.elbo_rel_tolerance, "relative ELBO stopping tolerance");
        cmd->add_option("--phi-inner", config.phi_inner_iterations,
                        "inner sender/receiver alternations per dyad");
        cmd->add_option("--beta-interval", config.beta_update_interval,
                        "sweeps between coefficient updates");
        cmd->add_option("--clip-bound", config.beta_clip_bound, "separability bound on |beta|");
        cmd->add_flag("--mom-average", config.mom_average_components,
                      "average the moment precision estimator over components");
        cmd->add_flag("!--no-covariate-step", config.estimate_covariates,
                      "freeze coefficients at their initial value");
        cmd->add_option("--jobs", config.n_jobs, "worker threads for folds/replicates");
        cmd->add_option("--seed", config.seed, "RNG seed");
    }

    json echo() const {
        return {{"n_groups", config.n_groups},
                {"n_restarts", config.n_restarts},
                {"max_iterations", config.max_iterations},
                {"elbo_rel_tolerance", config.elbo_rel_tolerance},
                {"phi_inner_iterations", config.phi_inner_iterations},
                {"beta_update_interval", config.beta_update_interval},
                {"beta_clip_bound", config.beta_clip_bound},
                {"mom_average_components", config.mom_average_components},
                {"estimate_covariates", config.estimate_covariates},
                {"n_jobs", config.n_jobs},
                {"seed", config.seed}};
    }
};

fs::path prepare_output(const std::string& dir) {
    fs::path out(dir);
    fs::create_directories(out);
    return out;
}

void write_run_config(const fs::path& out_dir, const std::string& command, const json& echo) {
    json j = echo;
    j["command"] = command;
    auto out = open_output(out_dir / "run_config.json");
    out << j.dump(2) << "\n";
}

Eigen::MatrixXd json_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw InputError(what + ": expected a matrix (list of rows)");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw InputError(what + ": ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

std::vector<int> parse_group_range(const std::string& s) {
    std::vector<int> out;
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        out.push_back(std::stoi(s));
        return out;
    }
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    if (lo < 1 || hi < lo) throw InputError("--groups: bad range \"" + s + "\"");
    for (int g = lo; g <= hi; ++g) out.push_back(g);
    return out;
}

void write_fit_outputs(const fs::path& out_dir, const FitResult& result,
                       const ModelConfig& config, const CovariateMatrix& covariates) {
    {
        auto out = open_output(out_dir / "fit.json");
        write_fit_json(out, result, config, covariates.column_names);
    }
    {
        auto out = open_output(out_dir / "tau.csv");
        std::vector<std::string> cols, rows;
        for (int g = 0; g < result.tau_hat.cols(); ++g) cols.push_back("tau_" + std::to_string(g + 1));
        for (int i = 0; i < result.tau_hat.rows(); ++i) rows.push_back(std::to_string(i + 1));
        write_matrix_csv(out, result.tau_hat, cols, rows);
    }
    {
        auto out = open_output(out_dir / "theta.csv");
        write_matrix_csv(out, result.theta_hat);
    }
    {
        auto out = open_output(out_dir / "beta.csv");
        std::vector<std::string> rows;
        for (int g = 0; g < result.beta.rows(); ++g) rows.push_back("group_" + std::to_string(g + 1));
        write_matrix_csv(out, result.beta, covariates.column_names, rows);
    }
    {
        auto out = open_output(out_dir / "elbo_trace.csv");
        out << "sweep,elbo\n";
        for (std::size_t s = 0; s < result.elbo_trace.size(); ++s)
            out << (s + 1) << "," << fmt_double(result.elbo_trace[s]) << "\n";
    }
}

int run_fit(const NetworkArgs& net_args, const CovariateArgs& cov_args, ConfigArgs& cfg,
            const std::string& output_dir) {
    const Network net = net_args.load();
    const CovariateMatrix covariates = cov_args.load(net.n_actors);
    const fs::path out_dir = prepare_output(output_dir);
    json echo = cfg.echo();
    echo["inputs"] = cov_args.echo();
    echo["inputs"]["edges"] = net_args.edges_path;
    echo["inputs"]["adjacency"] = net_args.adjacency_path;
    echo["inputs"]["n_actors"] = net.n_actors;
    write_run_config(out_dir, "fit", echo);

    const FitResult result = fit(net, covariates, std::nullopt, cfg.config);
    write_fit_outputs(out_dir, result, cfg.config, covariates);
    std::cout << "elbo " << fmt_double(result.elbo()) << " after " << result.iterations
              << " sweeps (" << (result.converged ? "converged" : "not converged") << ")\n";
    for (const auto& w : result.beta_diag.separability_warnings)
        std::cerr << "warning: " << w << "\n";
    if (!result.converged) return 2;
    return 0;
}

int run_cv(const NetworkArgs& net_args, const CovariateArgs& cov_args, ConfigArgs& cfg,
           const std::string& groups_range, int folds, const std::string& output_dir) {
    const Network net = net_args.load();
    const CovariateMatrix covariates = cov_args.load(net.n_actors);
    const std::vector<int> g_range = parse_group_range(groups_range);
    if (folds < 2) throw InputError("--folds must be >= 2");

    const fs::path out_dir = prepare_output(output_dir);
    json echo = cfg.echo();
    echo["inputs"] = cov_args.echo();
    echo["inputs"]["edges"] = net_args.edges_path;
    echo["groups_range"] = groups_range;
    echo["folds"] = folds;
    write_run_config(out_dir, "cv", echo);

    const CvReport report = cross_validate(net, covariates, g_range, folds, cfg.config,
                                           cfg.config.seed);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    {
        auto out = open_output(out_dir / "cv.csv");
        out << "G,fold,mean_loglik,fold_size\n";
        for (const auto& f : report.fold_scores)
            out << f.n_groups << "," << f.fold << "," << fmt_double(f.mean_loglik) << ","
                << f.fold_size << "\n";
    }
    {
        auto out = open_output(out_dir / "cv_summary.csv");
        out << "G,mean,stderr,folds_used\n";
        for (const auto& s : report.summary)
            out << s.n_groups << "," << fmt_double(s.mean) << "," << fmt_double(s.std_error)
                << "," << s.folds_used << "\n";
    }
    {
        auto out = open_output(out_dir / "folds.csv");
        report.folds.write_csv(out);
    }

    // ROC/AUC for the chosen model: pooled across folds plus per-fold curves
    std::vector<std::pair<double, int>> pooled;
    std::vector<std::vector<std::pair<double, int>>> per_fold(folds);
    for (const auto& p : report.predictions) {
        if (p.n_groups != report.chosen_G) continue;
        pooled.emplace_back(p.prob_link, p.y);
        per_fold[p.fold - 1].emplace_back(p.prob_link, p.y);
    }
    const RocResult pooled_roc = roc_auc(pooled);
    {
        auto out = open_output(out_dir / "roc.csv");
        out << "fpr,tpr,threshold\n";
        for (const auto& pt : pooled_roc.points)
            out << fmt_double(pt.fpr) << "," << fmt_double(pt.tpr) << ","
                << fmt_double(pt.threshold) << "\n";
    }
    {
        auto out = open_output(out_dir / "auc.csv");
        out << "scope,auc\n";
        out << "pooled," << fmt_double(pooled_roc.auc) << "\n";
        for (int f = 0; f < folds; ++f) {
            if (per_fold[f].empty()) continue;
            try {
                out << "fold_" << (f + 1) << "," << fmt_double(roc_auc(per_fold[f]).auc) << "\n";
            } catch (const std::invalid_argument&) {
                // single-class fold; no per-fold curve
            }
        }
    }
    std::cout << "chosen_G " << report.chosen_G << "\n";
    std::cout << "pooled_auc " << fmt_double(pooled_roc.auc) << "\n";
    return 0;
}

int run_simulate(const std::string& spec_path, const std::string& output_dir) {
    auto spec_in = open_input(spec_path);
    json j;
    try {
        j = json::parse(spec_in);
    } catch (const std::exception& e) {
        throw InputError(spec_path + ": " + e.what());
    }

    GenerativeSpec spec;
    spec.n_actors = j.at("n_actors").get<int>();
    spec.beta = json_matrix(j.at("beta"), "beta");
    if (j.contains("covariates_csv") && !j["covariates_csv"].get<std::string>().empty()) {
        CovariateArgs cov;
        cov.covariates_path = j["covariates_csv"].get<std::string>();
        cov.schema_path = j.value("schema", "");
        spec.covariates = cov.load(spec.n_actors);
    } else {
        spec.covariates = CovariateMatrix::intercept_only(spec.n_actors);
    }
    if (j.contains("theta")) {
        spec.theta = json_matrix(j["theta"], "theta");
    } else if (j.contains("theta_a") && j.contains("theta_b")) {
        spec.theta_a = json_matrix(j["theta_a"], "theta_a");
        spec.theta_b = json_matrix(j["theta_b"], "theta_b");
    } else {
        throw InputError(spec_path + ": need \"theta\" or \"theta_a\"/\"theta_b\"");
    }
    spec.seed = j.value("seed", 0);

    SimulatedNetwork sim;
    try {
        sim = sample_network(spec);
    } catch (const std::invalid_argument& e) {
        throw InputError(spec_path + ": " + e.what());
    }
    const fs::path out_dir = prepare_output(output_dir);
    write_run_config(out_dir, "simulate", {{"spec", spec_path}, {"spec_echo", j}});
    {
        auto out = open_output(out_dir / "network.edges");
        write_edge_list(out, sim.network);
    }
    {
        auto out = open_output(out_dir / "tau_true.csv");
        write_latent_tau(out, sim);
    }
    {
        auto out = open_output(out_dir / "roles.csv");
        write_latent_roles(out, sim);
    }
    {
        auto out = open_output(out_dir / "theta_true.csv");
        write_matrix_csv(out, sim.theta);
    }
    std::cout << "links " << sim.network.n_links() << " of "
              << sim.network.n_observed() << " dyads\n";
    return 0;
}

int run_bootstrap(const std::string& fit_path, const NetworkArgs& net_args,
                  const CovariateArgs& cov_args, ConfigArgs& cfg, int replicates,
                  const std::string& output_dir) {
    if (replicates < 2) throw InputError("--replicates must be >= 2 (quantiles undefined)");
    auto fit_in = open_input(fit_path);
    LoadedFit loaded = read_fit_json(fit_in);
    const Network net = net_args.load();
    const CovariateMatrix covariates = cov_args.load(net.n_actors);

    ModelConfig config = loaded.config;
    config.n_jobs = cfg.config.n_jobs;
    const fs::path out_dir = prepare_output(output_dir);
    json echo = cfg.echo();
    echo["fit"] = fit_path;
    echo["replicates"] = replicates;
    write_run_config(out_dir, "bootstrap", echo);

    const BootstrapResult result =
        bootstrap_beta(loaded.fit, net, covariates, replicates, config, cfg.config.seed);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    {
        auto out = open_output(out_dir / "bootstrap_samples.csv");
        out << "replicate,group,covariate,beta_value,converged\n";
        for (const auto& s : result.samples)
            for (int g = 0; g < s.beta.rows(); ++g)
                for (int p = 0; p < s.beta.cols(); ++p)
                    out << s.replicate << "," << (g + 1) << ","
                        << loaded.covariate_names[p] << "," << fmt_double(s.beta(g, p)) << ","
                        << (s.converged ? 1 : 0) << "\n";
    }
    {
        auto out = open_output(out_dir / "bootstrap_summary.csv");
        out << "group,covariate,estimate,q2.5,q97.5,significant\n";
        for (const auto& c : result.summary)
            out << c.group << "," << c.covariate << "," << fmt_double(c.estimate) << ","
                << fmt_double(c.q_low) << "," << fmt_double(c.q_high) << ","
                << (c.significant ? 1 : 0) << "\n";
    }
    {
        // curvature-based standard errors; approximate by construction
        const Eigen::MatrixXd se =
            beta_curvature_se(loaded.fit.beta, covariates, loaded.fit.state.gamma);
        auto out = open_output(out_dir / "curvature_se.csv");
        std::vector<std::string> rows;
        for (int g = 0; g < se.rows(); ++g) rows.push_back("group_" + std::to_string(g + 1));
        write_matrix_csv(out, se, covariates.column_names, rows);
    }
    std::cout << "replicates " << replicates << " excluded " << result.n_excluded << "\n";
    return 0;
}

int run_gof(const std::string& fit_path, const NetworkArgs& net_args,
            const CovariateArgs& cov_args, ConfigArgs& cfg, int simulations,
            const std::string& output_dir) {
    auto fit_in = open_input(fit_path);
    LoadedFit loaded = read_fit_json(fit_in);
    const Network net = net_args.load();
    const CovariateMatrix covariates = cov_args.load(net.n_actors);
    const fs::path out_dir = prepare_output(output_dir);
    json echo = cfg.echo();
    echo["fit"] = fit_path;
    echo["simulations"] = simulations;
    write_run_config(out_dir, "gof", echo);

    const GofReport report =
        gof_compare(loaded.fit, net, covariates, simulations, cfg.config.seed);
    {
        auto out = open_output(out_dir / "gof.csv");
        out << "statistic,support_point,observed,sim_min,sim_q25,sim_median,sim_q75,sim_max\n";
        for (const auto& st : report.stats)
            for (std::size_t s = 0; s < st.support.size(); ++s)
                out << st.statistic << "," << st.support[s] << "," << fmt_double(st.observed[s])
                    << "," << fmt_double(st.sim_min[s]) << "," << fmt_double(st.sim_q25[s]) << ","
                    << fmt_double(st.sim_median[s]) << "," << fmt_double(st.sim_q75[s]) << ","
                    << fmt_double(st.sim_max[s]) << "\n";
    }
    {
        const Eigen::VectorXd eom = eom_scores(loaded.fit.tau_hat);
        auto out = open_output(out_dir / "eom.csv");
        out << "actor,score\n";
        for (int i = 0; i < eom.size(); ++i)
            out << (i + 1) << "," << fmt_double(eom(i)) << "\n";
    }
    {
        const LinkSeparation sep = link_probability_separation(loaded.fit, net);
        auto out = open_output(out_dir / "separation.csv");
        out << "i,j,y_observed,p_hat\n";
        for (const auto& d : sep.dyads)
            out << d.i << "," << d.j << "," << d.y << "," << fmt_double(d.prob) << "\n";
    }
    return 0;
}

int run_predict(const std::string& fit_path, const NetworkArgs& net_args,
                const std::string& output_dir) {
    auto fit_in = open_input(fit_path);
    LoadedFit loaded = read_fit_json(fit_in);
    const Network net = net_args.load();
    const fs::path out_dir = prepare_output(output_dir);
    write_run_config(out_dir, "predict", {{"fit", fit_path}});
    const LinkSeparation sep = link_probability_separation(loaded.fit, net);
    auto out = open_output(out_dir / "predictions.csv");
    out << "i,j,y_observed,p_hat\n";
    for (const auto& d : sep.dyads)
        out << d.i << "," << d.j << "," << d.y << "," << fmt_double(d.prob) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-membership of experts stochastic blockmodel"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags take precedence");

    std::string output_dir = ".";
    app.add_option("--output", output_dir, "output directory")->capture_default_str();

    NetworkArgs net_args;
    CovariateArgs cov_args;
    ConfigArgs cfg;

    auto* cmd_fit = app.add_subcommand("fit", "fit the model for a fixed number of groups");
    net_args.attach(cmd_fit);
    cov_args.attach(cmd_fit);
    cfg.attach(cmd_fit, true);

    auto* cmd_cv = app.add_subcommand("cv", "select the number of groups by k-fold hold-out likelihood");
    std::string groups_range;
    int folds = 10;
    net_args.attach(cmd_cv);
    cov_args.attach(cmd_cv);
    cmd_cv->add_option("--groups", groups_range, "group range, e.g. 1..9 or 4")->required();
    cmd_cv->add_option("--folds", folds, "number of dyad folds")->capture_default_str();
    cfg.attach(cmd_cv, false);

    auto* cmd_sim = app.add_subcommand("simulate", "sample a network from the generative process");
    std::string spec_path;
    cmd_sim->add_option("--spec", spec_path, "generative spec JSON")->required();

    auto* cmd_boot = app.add_subcommand("bootstrap", "parametric bootstrap for coefficient uncertainty");
    std::string fit_path;
    int replicates = 100;
    cmd_boot->add_option("--fit", fit_path, "fit.json from a previous fit run")->required();
    net_args.attach(cmd_boot);
    cov_args.attach(cmd_boot);
    cmd_boot->add_option("--replicates", replicates, "bootstrap replications")->capture_default_str();
    cfg.attach(cmd_boot, false);

    auto* cmd_gof = app.add_subcommand("gof", "simulation-based goodness-of-fit diagnostics");
    int simulations = 100;
    cmd_gof->add_option("--fit", fit_path, "fit.json from a previous fit run")->required();
    net_args.attach(cmd_gof);
    cov_args.attach(cmd_gof);
    cmd_gof->add_option("--simulations", simulations, "number of simulated networks")
        ->capture_default_str();
    cfg.attach(cmd_gof, false);

    auto* cmd_pred = app.add_subcommand("predict", "fitted link probabilities for every observed dyad");
    cmd_pred->add_option("--fit", fit_path, "fit.json from a previous fit run")->required();
    net_args.attach(cmd_pred);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_fit->parsed()) return run_fit(net_args, cov_args, cfg, output_dir);
        if (cmd_cv->parsed()) return run_cv(net_args, cov_args, cfg, groups_range, folds, output_dir);
        if (cmd_sim->parsed()) return run_simulate(spec_path, output_dir);
        if (cmd_boot->parsed())
            return run_bootstrap(fit_path, net_args, cov_args, cfg, replicates, output_dir);
        if (cmd_gof->parsed())
            return run_gof(fit_path, net_args, cov_args, cfg, simulations, output_dir);
        if (cmd_pred->parsed()) return run_predict(fit_path, net_args, output_dir);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
