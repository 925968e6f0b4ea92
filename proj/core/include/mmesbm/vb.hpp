#ifndef MMESBM_VB_HPP
#define MMESBM_VB_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mmesbm/network.hpp"

namespace mmesbm {

struct ModelConfig {
    int n_groups = 1;
    Eigen::MatrixXd alpha1;  // Beta prior first shapes, G x G; empty = all ones
    Eigen::MatrixXd alpha2;  // second shapes
    int max_iterations = 500;
    double elbo_rel_tolerance = 1e-6;
    int phi_inner_iterations = 3;
    int n_restarts = 5;
    bool estimate_covariates = true;
    int beta_update_interval = 1;  // coefficient step every this many sweeps
    double beta_clip_bound = 30.0;
    bool mom_average_components = false;
    int n_jobs = 1;  // worker threads for fold/replicate level parallelism
    std::uint64_t seed = 0;

    Eigen::MatrixXd prior_alpha1() const;  // resolved to G x G
    Eigen::MatrixXd prior_alpha2() const;
};

// Variational parameters. phi1/phi2 are N*N*G flat arrays indexed
// (i*N + j)*G + g; entries for unobserved or diagonal dyads stay at 1/G.
struct VariationalState {
    int n_actors = 0;
    int n_groups = 0;
    std::vector<double> phi1, phi2;
    Eigen::MatrixXd gamma;  // N x G
    Eigen::MatrixXd zeta1;  // G x G
    Eigen::MatrixXd zeta2;

    VariationalState() = default;
    VariationalState(int n, int g);

    double& p1(int i, int j, int g) {
        return phi1[(static_cast<std::size_t>(i) * n_actors + j) * n_groups + g];
    }
    double& p2(int i, int j, int g) {
        return phi2[(static_cast<std::size_t>(i) * n_actors + j) * n_groups + g];
    }
    double p1(int i, int j, int g) const {
        return phi1[(static_cast<std::size_t>(i) * n_actors + j) * n_groups + g];
    }
    double p2(int i, int j, int g) const {
        return phi2[(static_cast<std::size_t>(i) * n_actors + j) * n_groups + g];
    }
};

struct BetaDiagnostics {
    int iterations = 0;
    double final_grad_norm = 0.0;
    double damping_used = 0.0;
    std::vector<std::string> separability_warnings;
};

struct FitResult {
    VariationalState state;
    Eigen::MatrixXd beta;       // G x P
    Eigen::MatrixXd tau_hat;    // N x G, rows sum to 1
    Eigen::MatrixXd theta_hat;  // G x G
    std::vector<double> elbo_trace;
    bool converged = false;
    int iterations = 0;
    std::uint64_t restart_seed = 0;
    BetaDiagnostics beta_diag;

    double elbo() const { return elbo_trace.empty() ? 0.0 : elbo_trace.back(); }
};

// delta_ig = exp(sum_p W_ip beta_gp), the covariate-driven Dirichlet prior.
Eigen::MatrixXd compute_delta(const Eigen::MatrixXd& covariates, const Eigen::MatrixXd& beta);

// Digamma tables shared by the phi updates within one sweep.
struct PhiTables {
    Eigen::MatrixXd elog_tau;     // N x G: E[log tau_ig]
    Eigen::MatrixXd elog_theta1;  // G x G: E[log theta_gh]
    Eigen::MatrixXd elog_theta0;  // G x G: E[log(1-theta_gh)]
};
PhiTables make_phi_tables(const VariationalState& state);

void update_zeta(VariationalState& state, const Network& net, const ModelConfig& config);
void update_gamma(VariationalState& state, const Network& net, const Eigen::MatrixXd& delta);
void update_phi(VariationalState& state, const Network& net, int i, int j,
                const PhiTables& tables, int inner_iterations);
// convenience form: builds the tables itself
void update_phi(VariationalState& state, const Network& net, int i, int j,
                int inner_iterations = 3);

double compute_elbo(const VariationalState& state, const Network& net,
                    const Eigen::MatrixXd& delta, const ModelConfig& config);

VariationalState init_state(const Network& net, const ModelConfig& config, std::mt19937_64& rng);

// Single coordinate-ascent run from a given initial state.
FitResult fit_from_state(VariationalState state, const Network& net,
                         const CovariateMatrix& covariates,
                         std::optional<Eigen::MatrixXd> beta_init, const ModelConfig& config,
                         std::uint64_t restart_seed);

// Multi-restart fit keeping the highest-ELBO run.
FitResult fit(const Network& net, const CovariateMatrix& covariates,
              std::optional<Eigen::MatrixXd> beta_init, const ModelConfig& config);

}  // namespace mmesbm

#endif
