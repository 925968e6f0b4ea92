#ifndef MMESBM_DIAGNOSTICS_HPP
#define MMESBM_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mmesbm/network.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

// exp of the membership entropy; 1 for one-hot rows, G for uniform rows.
Eigen::VectorXd eom_scores(const Eigen::MatrixXd& tau_hat);

struct DegreeDistributions {
    std::vector<long> in_degree;   // counts of actors at each degree 0..N-1
    std::vector<long> out_degree;
};
DegreeDistributions degree_distributions(const Network& net);

struct GeodesicDistribution {
    std::vector<long> counts;  // counts[d] = ordered pairs at distance d, d = 1..N-1
    long unreachable = 0;
};
GeodesicDistribution geodesic_distribution(const Network& net);

struct DyadProbability {
    int i = 0, j = 0;  // 1-based
    int y = 0;
    double prob = 0.0;
};
struct LinkSeparation {
    std::vector<double> link_probs;
    std::vector<double> nonlink_probs;
    std::vector<DyadProbability> dyads;
};
LinkSeparation link_probability_separation(const FitResult& fit, const Network& net);

// five-number envelope of one summary statistic over R simulations
struct StatEnvelope {
    std::string statistic;
    std::vector<std::string> support;  // degree value or geodesic distance ("inf" bin)
    std::vector<double> observed;
    std::vector<double> sim_min, sim_q25, sim_median, sim_q75, sim_max;
};

struct GofReport {
    std::vector<StatEnvelope> stats;
    int n_simulations = 0;
};

GofReport gof_compare(const FitResult& fit, const Network& net,
                      const CovariateMatrix& covariates, int n_simulations,
                      std::uint64_t seed);

}  // namespace mmesbm

#endif
