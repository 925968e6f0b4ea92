#ifndef MMESBM_BETA_ESTIMATOR_HPP
#define MMESBM_BETA_ESTIMATOR_HPP

#include <Eigen/Dense>

#include "mmesbm/network.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

struct NewtonOptions {
    double grad_tolerance = 1e-6;
    int max_iterations = 50;
    int max_halvings = 20;
    double initial_damping = 0.0;
    double max_damping = 1e6;
    double clip_bound = 30.0;
};

// The beta-dependent ELBO terms: sum_n E[log p(tau_n | delta(beta))].
double beta_objective(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                      const Eigen::MatrixXd& gamma);

// Analytic gradient, G x P.
Eigen::MatrixXd beta_gradient(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                              const Eigen::MatrixXd& gamma);

// Analytic Hessian, GP x GP, group-major ordering: index = g*P + p.
Eigen::MatrixXd beta_hessian(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                             const Eigen::MatrixXd& gamma);

// Method-of-moments start: non-intercept coefficients zero, intercepts
// log(mean_g * precision) with the two-moment precision estimator.
Eigen::MatrixXd init_beta_mom(const Eigen::MatrixXd& gamma, const CovariateMatrix& covariates,
                              bool average_components = false, double clip_bound = 30.0);

// Damped Newton-Raphson ascent with step halving; never decreases the
// objective across accepted steps.
Eigen::MatrixXd estimate_beta(const Eigen::MatrixXd& beta_in, const CovariateMatrix& covariates,
                              const Eigen::MatrixXd& gamma, const NewtonOptions& opts,
                              BetaDiagnostics* diag = nullptr);

// Approximate standard errors from the inverse damped Hessian diagonal.
// Curvature-based only; the bootstrap is the primary uncertainty route.
Eigen::MatrixXd beta_curvature_se(const Eigen::MatrixXd& beta, const CovariateMatrix& covariates,
                                  const Eigen::MatrixXd& gamma);

}  // namespace mmesbm

#endif
