#include "mmesbm/generator.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "mmesbm/io.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

namespace {

void validate(const GenerativeSpec& spec) {
    const int G = spec.n_groups();
    if (spec.n_actors < 1 || G < 1)
        throw std::invalid_argument("sample_network: empty spec");
    if (spec.covariates.n_actors != spec.n_actors)
        throw std::invalid_argument("sample_network: covariate rows != n_actors");
    if (spec.covariates.n_covariates() != spec.beta.cols())
        throw std::invalid_argument("sample_network: beta columns != covariate count");
    if (spec.theta_fixed()) {
        if (spec.theta.rows() != G || spec.theta.cols() != G)
            throw std::invalid_argument("sample_network: theta must be G x G");
        if ((spec.theta.array() < 0.0).any() || (spec.theta.array() > 1.0).any())
            throw std::invalid_argument("sample_network: theta entries must lie in [0,1]");
    } else {
        if (spec.theta_a.rows() != G || spec.theta_a.cols() != G ||
            spec.theta_b.rows() != G || spec.theta_b.cols() != G)
            throw std::invalid_argument("sample_network: Beta shape matrices must be G x G");
        if ((spec.theta_a.array() <= 0.0).any() || (spec.theta_b.array() <= 0.0).any())
            throw std::invalid_argument("sample_network: Beta shapes must be positive");
    }
}

Eigen::VectorXd dirichlet_draw(const Eigen::VectorXd& conc, std::mt19937_64& rng) {
    const int G = static_cast<int>(conc.size());
    Eigen::VectorXd draw(G);
    for (int g = 0; g < G; ++g) {
        std::gamma_distribution<double> gd(conc(g), 1.0);
        draw(g) = gd(rng);
    }
    const double s = draw.sum();
    if (s > 0.0 && std::isfinite(s)) return draw / s;
    // extreme concentrations can underflow every component; collapse to the
    // dominant one
    Eigen::VectorXd fallback = Eigen::VectorXd::Zero(G);
    int argmax = 0;
    conc.maxCoeff(&argmax);
    fallback(argmax) = 1.0;
    return fallback;
}

}  // namespace

SimulatedNetwork sample_network(const GenerativeSpec& spec) {
    validate(spec);
    const int n = spec.n_actors;
    const int G = spec.n_groups();
    std::mt19937_64 rng(spec.seed);

    const Eigen::MatrixXd delta = compute_delta(spec.covariates.values, spec.beta);

    SimulatedNetwork sim;
    sim.tau.resize(n, G);
    for (int i = 0; i < n; ++i)
        sim.tau.row(i) = dirichlet_draw(delta.row(i).transpose(), rng);

    if (spec.theta_fixed()) {
        sim.theta = spec.theta;
    } else {
        sim.theta.resize(G, G);
        for (int g = 0; g < G; ++g) {
            for (int h = 0; h < G; ++h) {
                std::gamma_distribution<double> ga(spec.theta_a(g, h), 1.0);
                std::gamma_distribution<double> gb(spec.theta_b(g, h), 1.0);
                const double x = ga(rng), y = gb(rng);
                sim.theta(g, h) = (x + y > 0.0) ? x / (x + y) : 0.5;
            }
        }
    }

    sim.network = Network(n);
    sim.sender_role = Eigen::MatrixXi::Constant(n, n, -1);
    sim.receiver_role = Eigen::MatrixXi::Constant(n, n, -1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_role = [&](const Eigen::VectorXd& tau_row) {
        double u = unif(rng);
        for (int g = 0; g < G - 1; ++g) {
            u -= tau_row(g);
            if (u < 0.0) return g;
        }
        return G - 1;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int g = draw_role(sim.tau.row(i).transpose());
            const int h = draw_role(sim.tau.row(j).transpose());
            sim.sender_role(i, j) = g;
            sim.receiver_role(i, j) = h;
            sim.network.adjacency(i, j) = (unif(rng) < sim.theta(g, h)) ? 1 : 0;
        }
    }
    return sim;
}

double expected_density(const GenerativeSpec& spec) {
    validate(spec);
    if (!spec.theta_fixed())
        throw std::invalid_argument("expected_density: requires fixed theta");
    const Eigen::MatrixXd delta = compute_delta(spec.covariates.values, spec.beta);
    Eigen::VectorXd mean_tau = Eigen::VectorXd::Zero(spec.n_groups());
    for (int i = 0; i < spec.n_actors; ++i)
        mean_tau += (delta.row(i) / delta.row(i).sum()).transpose();
    mean_tau /= spec.n_actors;
    return mean_tau.dot(spec.theta * mean_tau);
}

void write_latent_tau(std::ostream& out, const SimulatedNetwork& sim) {
    out << "actor";
    for (int g = 0; g < sim.tau.cols(); ++g) out << ",tau_" << (g + 1);
    out << "\n";
    for (int i = 0; i < sim.tau.rows(); ++i) {
        out << (i + 1);
        for (int g = 0; g < sim.tau.cols(); ++g) out << "," << fmt_double(sim.tau(i, g));
        out << "\n";
    }
}

void write_latent_roles(std::ostream& out, const SimulatedNetwork& sim) {
    out << "i,j,sender_group,receiver_group\n";
    const int n = static_cast<int>(sim.sender_role.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                out << (i + 1) << "," << (j + 1) << "," << (sim.sender_role(i, j) + 1) << ","
                    << (sim.receiver_role(i, j) + 1) << "\n";
}

}  // namespace mmesbm
