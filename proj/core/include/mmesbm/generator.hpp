#ifndef MMESBM_GENERATOR_HPP
#define MMESBM_GENERATOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>

#include "mmesbm/network.hpp"

namespace mmesbm {

// Sampling spec: tau_i ~ Dirichlet(exp(W_i beta')), theta either fixed in
// (0,1) or drawn per cell from Beta(theta_a, theta_b).
struct GenerativeSpec {
    int n_actors = 0;
    CovariateMatrix covariates;
    Eigen::MatrixXd beta;     // G x P
    Eigen::MatrixXd theta;    // fixed G x G; empty when sampling from Beta shapes
    Eigen::MatrixXd theta_a;  // Beta shapes, used when theta is empty
    Eigen::MatrixXd theta_b;
    std::uint64_t seed = 0;

    int n_groups() const { return static_cast<int>(beta.rows()); }
    bool theta_fixed() const { return theta.size() > 0; }
};

struct SimulatedNetwork {
    Network network;
    Eigen::MatrixXd tau;            // N x G membership draws
    Eigen::MatrixXd theta;          // realized G x G
    Eigen::MatrixXi sender_role;    // N x N, -1 on diagonal
    Eigen::MatrixXi receiver_role;
};

SimulatedNetwork sample_network(const GenerativeSpec& spec);

// E[tau_bar]' Theta E[tau_bar] with the Dirichlet means averaged over actors.
double expected_density(const GenerativeSpec& spec);

void write_latent_tau(std::ostream& out, const SimulatedNetwork& sim);
void write_latent_roles(std::ostream& out, const SimulatedNetwork& sim);

}  // namespace mmesbm

#endif
