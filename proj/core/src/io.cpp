#include "mmesbm/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mmesbm {

using nlohmann::json;

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::string>& row_names) {
    const bool have_rows = !row_names.empty();
    if (!col_names.empty()) {
        if (have_rows) out << "row";
        for (std::size_t c = 0; c < col_names.size(); ++c)
            out << (c == 0 && !have_rows ? "" : ",") << col_names[c];
        out << "\n";
    }
    for (int r = 0; r < m.rows(); ++r) {
        if (have_rows) out << row_names[r];
        for (int c = 0; c < m.cols(); ++c)
            out << (c == 0 && !have_rows ? "" : ",") << fmt_double(m(r, c));
        out << "\n";
    }
}

namespace {

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
    if (!j.is_array()) throw std::runtime_error("fit json: expected a matrix");
    const int rows = static_cast<int>(j.size());
    if (rows == 0) return {};
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw std::runtime_error("fit json: ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json config_to_json(const ModelConfig& c) {
    json j;
    j["n_groups"] = c.n_groups;
    j["max_iterations"] = c.max_iterations;
    j["elbo_rel_tolerance"] = c.elbo_rel_tolerance;
    j["phi_inner_iterations"] = c.phi_inner_iterations;
    j["n_restarts"] = c.n_restarts;
    j["estimate_covariates"] = c.estimate_covariates;
    j["beta_update_interval"] = c.beta_update_interval;
    j["beta_clip_bound"] = c.beta_clip_bound;
    j["mom_average_components"] = c.mom_average_components;
    j["seed"] = c.seed;
    if (c.alpha1.size() > 0) j["alpha1"] = mat_to_json(c.alpha1);
    if (c.alpha2.size() > 0) j["alpha2"] = mat_to_json(c.alpha2);
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.n_groups = j.at("n_groups").get<int>();
    c.max_iterations = j.at("max_iterations").get<int>();
    c.elbo_rel_tolerance = j.at("elbo_rel_tolerance").get<double>();
    c.phi_inner_iterations = j.at("phi_inner_iterations").get<int>();
    c.n_restarts = j.at("n_restarts").get<int>();
    c.estimate_covariates = j.at("estimate_covariates").get<bool>();
    c.beta_update_interval = j.at("beta_update_interval").get<int>();
    c.beta_clip_bound = j.at("beta_clip_bound").get<double>();
    c.mom_average_components = j.at("mom_average_components").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("alpha1")) c.alpha1 = mat_from_json(j["alpha1"]);
    if (j.contains("alpha2")) c.alpha2 = mat_from_json(j["alpha2"]);
    return c;
}

}  // namespace

void write_fit_json(std::ostream& out, const FitResult& fit, const ModelConfig& config,
                    const std::vector<std::string>& covariate_names) {
    json j;
    j["n_actors"] = fit.tau_hat.rows();
    j["n_groups"] = fit.theta_hat.rows();
    j["beta"] = mat_to_json(fit.beta);
    j["tau_hat"] = mat_to_json(fit.tau_hat);
    j["theta_hat"] = mat_to_json(fit.theta_hat);
    j["gamma"] = mat_to_json(fit.state.gamma);
    j["zeta1"] = mat_to_json(fit.state.zeta1);
    j["zeta2"] = mat_to_json(fit.state.zeta2);
    j["elbo_trace"] = fit.elbo_trace;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["restart_seed"] = fit.restart_seed;
    j["beta_diagnostics"] = {
        {"iterations", fit.beta_diag.iterations},
        {"final_grad_norm", fit.beta_diag.final_grad_norm},
        {"damping_used", fit.beta_diag.damping_used},
        {"separability_warnings", fit.beta_diag.separability_warnings},
    };
    j["covariate_names"] = covariate_names;
    j["config"] = config_to_json(config);
    out << j.dump(2) << "\n";
}

LoadedFit read_fit_json(std::istream& in) {
    json j = json::parse(in);
    LoadedFit loaded;
    FitResult& fit = loaded.fit;
    fit.beta = mat_from_json(j.at("beta"));
    fit.tau_hat = mat_from_json(j.at("tau_hat"));
    fit.theta_hat = mat_from_json(j.at("theta_hat"));
    const int n = j.at("n_actors").get<int>();
    const int G = j.at("n_groups").get<int>();
    fit.state = VariationalState(n, G);
    fit.state.gamma = mat_from_json(j.at("gamma"));
    fit.state.zeta1 = mat_from_json(j.at("zeta1"));
    fit.state.zeta2 = mat_from_json(j.at("zeta2"));
    fit.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.restart_seed = j.at("restart_seed").get<std::uint64_t>();
    const json& bd = j.at("beta_diagnostics");
    fit.beta_diag.iterations = bd.at("iterations").get<int>();
    fit.beta_diag.final_grad_norm = bd.at("final_grad_norm").get<double>();
    fit.beta_diag.damping_used = bd.at("damping_used").get<double>();
    fit.beta_diag.separability_warnings =
        bd.at("separability_warnings").get<std::vector<std::string>>();
    loaded.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
    loaded.config = config_from_json(j.at("config"));
    return loaded;
}

std::vector<ColumnSpec> parse_schema_json(std::istream& in) {
    json j = json::parse(in);
    if (!j.is_array()) throw std::runtime_error("schema json: expected a list of columns");
    std::vector<ColumnSpec> schema;
    for (const auto& col : j) {
        ColumnSpec spec;
        spec.name = col.at("name").get<std::string>();
        const std::string kind = col.at("kind").get<std::string>();
        if (kind == "continuous") {
            spec.kind = ColumnKind::continuous;
        } else if (kind == "binary") {
            spec.kind = ColumnKind::binary;
        } else if (kind == "categorical") {
            spec.categorical = true;
            spec.baseline = col.at("baseline").get<std::string>();
            if (col.contains("levels"))
                spec.levels = col["levels"].get<std::vector<std::string>>();
        } else {
            throw std::runtime_error("schema json: unknown kind \"" + kind + "\"");
        }
        schema.push_back(std::move(spec));
    }
    return schema;
}

}  // namespace mmesbm
