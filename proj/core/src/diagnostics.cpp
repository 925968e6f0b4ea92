#include "mmesbm/diagnostics.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "mmesbm/bootstrap.hpp"
#include "mmesbm/generator.hpp"
#include "mmesbm/selection.hpp"

namespace mmesbm {

Eigen::VectorXd eom_scores(const Eigen::MatrixXd& tau_hat) {
    const int n = static_cast<int>(tau_hat.rows());
    Eigen::VectorXd scores(n);
    for (int i = 0; i < n; ++i) {
        double entropy = 0.0;
        for (int g = 0; g < tau_hat.cols(); ++g) {
            const double t = tau_hat(i, g);
            if (t > 0.0) entropy -= t * std::log(t);
        }
        scores(i) = std::exp(entropy);
    }
    return scores;
}

DegreeDistributions degree_distributions(const Network& net) {
    const int n = net.n_actors;
    DegreeDistributions d;
    d.in_degree.assign(n, 0);
    d.out_degree.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        long out = 0, in = 0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (net.adjacency(i, j)) ++out;
            if (net.adjacency(j, i)) ++in;
        }
        ++d.out_degree[out];
        ++d.in_degree[in];
    }
    return d;
}

GeodesicDistribution geodesic_distribution(const Network& net) {
    const int n = net.n_actors;
    GeodesicDistribution g;
    g.counts.assign(n, 0);  // index 0 unused
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && net.adjacency(i, j)) adj[i].push_back(j);

    std::vector<int> dist(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (int t = 0; t < n; ++t) {
            if (t == s) continue;
            if (dist[t] < 0)
                ++g.unreachable;
            else
                ++g.counts[dist[t]];
        }
    }
    return g;
}

LinkSeparation link_probability_separation(const FitResult& fit, const Network& net) {
    if (fit.tau_hat.rows() != net.n_actors)
        throw std::invalid_argument("link_probability_separation: dimension mismatch");
    LinkSeparation sep;
    for (int i = 0; i < net.n_actors; ++i) {
        for (int j = 0; j < net.n_actors; ++j) {
            if (i == j || !net.mask(i, j)) continue;
            const double p = std::exp(holdout_loglik(fit.theta_hat, fit.tau_hat.row(i).transpose(),
                                                     fit.tau_hat.row(j).transpose(), 1));
            sep.dyads.push_back({i + 1, j + 1, net.adjacency(i, j), p});
            (net.adjacency(i, j) ? sep.link_probs : sep.nonlink_probs).push_back(p);
        }
    }
    return sep;
}

namespace {

StatEnvelope make_envelope(const std::string& name, const std::vector<std::string>& support,
                           const std::vector<double>& observed,
                           const std::vector<std::vector<double>>& sims) {
    StatEnvelope e;
    e.statistic = name;
    e.support = support;
    e.observed = observed;
    const std::size_t k = support.size();
    e.sim_min.resize(k);
    e.sim_q25.resize(k);
    e.sim_median.resize(k);
    e.sim_q75.resize(k);
    e.sim_max.resize(k);
    for (std::size_t s = 0; s < k; ++s) {
        std::vector<double> vals;
        vals.reserve(sims.size());
        for (const auto& rep : sims) vals.push_back(rep[s]);
        e.sim_min[s] = quantile(vals, 0.0);
        e.sim_q25[s] = quantile(vals, 0.25);
        e.sim_median[s] = quantile(vals, 0.5);
        e.sim_q75[s] = quantile(vals, 0.75);
        e.sim_max[s] = quantile(vals, 1.0);
    }
    return e;
}

std::vector<double> to_double(const std::vector<long>& v) {
    return {v.begin(), v.end()};
}

std::vector<double> geo_vector(const GeodesicDistribution& g, int n) {
    std::vector<double> out;
    out.reserve(n);
    for (int d = 1; d < n; ++d) out.push_back(static_cast<double>(g.counts[d]));
    out.push_back(static_cast<double>(g.unreachable));
    return out;
}

}  // namespace

GofReport gof_compare(const FitResult& fit, const Network& net,
                      const CovariateMatrix& covariates, int n_simulations,
                      std::uint64_t seed) {
    if (!fit.converged)
        throw std::invalid_argument("gof_compare: fit did not converge");
    if (n_simulations < 1) throw std::invalid_argument("gof_compare: need at least 1 simulation");
    const int n = net.n_actors;

    const DegreeDistributions obs_deg = degree_distributions(net);
    const GeodesicDistribution obs_geo = geodesic_distribution(net);

    std::vector<std::vector<double>> sim_in, sim_out, sim_geo;
    for (int r = 1; r <= n_simulations; ++r) {
        GenerativeSpec spec;
        spec.n_actors = n;
        spec.covariates = covariates;
        spec.beta = fit.beta;
        spec.theta = fit.theta_hat;
        spec.seed = seed + static_cast<std::uint64_t>(r);
        const SimulatedNetwork sim = sample_network(spec);
        const DegreeDistributions d = degree_distributions(sim.network);
        sim_in.push_back(to_double(d.in_degree));
        sim_out.push_back(to_double(d.out_degree));
        sim_geo.push_back(geo_vector(geodesic_distribution(sim.network), n));
    }

    std::vector<std::string> degree_support;
    for (int d = 0; d < n; ++d) degree_support.push_back(std::to_string(d));
    std::vector<std::string> geo_support;
    for (int d = 1; d < n; ++d) geo_support.push_back(std::to_string(d));
    geo_support.push_back("inf");

    GofReport report;
    report.n_simulations = n_simulations;
    report.stats.push_back(
        make_envelope("in_degree", degree_support, to_double(obs_deg.in_degree), sim_in));
    report.stats.push_back(
        make_envelope("out_degree", degree_support, to_double(obs_deg.out_degree), sim_out));
    report.stats.push_back(
        make_envelope("geodesic", geo_support, geo_vector(obs_geo, n), sim_geo));
    return report;
}

}  // namespace mmesbm
