#ifndef MMESBM_SELECTION_HPP
#define MMESBM_SELECTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mmesbm/network.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

// log p(Y_ij | theta_hat, tau_i, tau_j): log of the double sum over group
// role pairs.
double holdout_loglik(const Eigen::MatrixXd& theta_hat, const Eigen::VectorXd& tau_i,
                      const Eigen::VectorXd& tau_j, int y);

struct CvFoldScore {
    int n_groups = 0;
    int fold = 0;
    double mean_loglik = 0.0;
    long fold_size = 0;
};

struct CvPrediction {
    int n_groups = 0;
    int fold = 0;
    int i = 0, j = 0;
    double prob_link = 0.0;  // fitted p(Y_ij = 1)
    int y = 0;
};

struct CvSummary {
    int n_groups = 0;
    double mean = 0.0;
    double std_error = 0.0;
    int folds_used = 0;
};

struct CvReport {
    std::vector<CvFoldScore> fold_scores;
    std::vector<CvSummary> summary;
    std::vector<CvPrediction> predictions;  // all (G, fold) hold-out dyads
    std::vector<std::string> warnings;
    FoldAssignment folds;
    int chosen_G = 0;
};

// k-fold CV over a range of group counts; chosen_G by the
// one-standard-error rule.
CvReport cross_validate(const Network& net, const CovariateMatrix& covariates,
                        const std::vector<int>& g_range, int k, const ModelConfig& base_config,
                        std::uint64_t fold_seed);

struct RocPoint {
    double fpr = 0.0, tpr = 0.0, threshold = 0.0;
};

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> points;
};

// Rank-statistic AUC (ties count 1/2) plus ROC points at every distinct
// threshold.
RocResult roc_auc(const std::vector<std::pair<double, int>>& scores);

}  // namespace mmesbm

#endif
