#ifndef MMESBM_BOOTSTRAP_HPP
#define MMESBM_BOOTSTRAP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mmesbm/network.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

struct BootstrapSample {
    int replicate = 0;
    Eigen::MatrixXd beta;          // aligned to the reference fit's groups
    std::vector<int> permutation;  // reference group g -> candidate group permutation[g]
    bool converged = false;
};

struct BootstrapCoefficient {
    int group = 0;      // 1-based
    std::string covariate;
    double estimate = 0.0;
    double q_low = 0.0;   // 2.5%
    double q_high = 0.0;  // 97.5%
    bool significant = false;  // interval excludes zero
};

struct BootstrapResult {
    std::vector<BootstrapSample> samples;
    std::vector<BootstrapCoefficient> summary;
    int n_excluded = 0;
    std::vector<std::string> warnings;
};

// Group permutation minimizing sum_i ||tau_ref_i - P tau_cand_i||_1, solved
// exactly by assignment.
std::vector<int> align_groups(const Eigen::MatrixXd& reference_tau,
                              const Eigen::MatrixXd& candidate_tau);

// Order statistic with linear interpolation at position q(n-1)+1 (1-based).
double quantile(std::vector<double> samples, double q);

// R parametric replications: simulate from the fitted parameters, refit
// warm-started from the reference fit, align groups, record beta.
BootstrapResult bootstrap_beta(const FitResult& reference, const Network& net,
                               const CovariateMatrix& covariates, int n_replicates,
                               const ModelConfig& config, std::uint64_t base_seed);

// Minimum-cost assignment on a square cost matrix (Hungarian algorithm);
// returns row -> column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace mmesbm

#endif
