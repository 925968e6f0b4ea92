#include "mmesbm/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmesbm/generator.hpp"
#include "mmesbm/parallel.hpp"

namespace mmesbm {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n || n == 0)
        throw std::invalid_argument("solve_assignment: cost matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> result(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) result[p[j] - 1] = j - 1;
    return result;
}

std::vector<int> align_groups(const Eigen::MatrixXd& reference_tau,
                              const Eigen::MatrixXd& candidate_tau) {
    if (reference_tau.rows() != candidate_tau.rows() ||
        reference_tau.cols() != candidate_tau.cols())
        throw std::invalid_argument("align_groups: dimension mismatch");
    const int G = static_cast<int>(reference_tau.cols());
    Eigen::MatrixXd cost(G, G);
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < G; ++h)
            cost(g, h) = (reference_tau.col(g) - candidate_tau.col(h)).cwiseAbs().sum();
    return solve_assignment(cost);
}

double quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile: empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must lie in [0,1]");
    std::sort(samples.begin(), samples.end());
    const double pos = q * (samples.size() - 1);  // 0-based position
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - lo;
    if (lo + 1 >= samples.size()) return samples.back();
    return samples[lo] * (1.0 - frac) + samples[lo + 1] * frac;
}

BootstrapResult bootstrap_beta(const FitResult& reference, const Network& net,
                               const CovariateMatrix& covariates, int n_replicates,
                               const ModelConfig& config, std::uint64_t base_seed) {
    if (!reference.converged)
        throw std::invalid_argument("bootstrap_beta: reference fit did not converge");
    if (n_replicates < 1) throw std::invalid_argument("bootstrap_beta: need R >= 1");
    const int G = static_cast<int>(reference.beta.rows());
    const int P = static_cast<int>(reference.beta.cols());

    ModelConfig rep_config = config;
    rep_config.n_groups = G;

    BootstrapResult result;
    result.samples.resize(n_replicates);
    std::vector<std::string> rep_warnings(n_replicates);
    parallel_for(n_replicates, config.n_jobs, [&](int idx) {
        const int r = idx + 1;
        GenerativeSpec spec;
        spec.n_actors = net.n_actors;
        spec.covariates = covariates;
        spec.beta = reference.beta;
        spec.theta = reference.theta_hat;
        spec.seed = base_seed + static_cast<std::uint64_t>(r);
        const SimulatedNetwork sim = sample_network(spec);

        // warm start from the reference posterior to limit label switching
        VariationalState state(net.n_actors, G);
        for (int i = 0; i < net.n_actors; ++i) {
            for (int j = 0; j < net.n_actors; ++j) {
                if (i == j) continue;
                for (int g = 0; g < G; ++g) {
                    state.p1(i, j, g) = reference.tau_hat(i, g);
                    state.p2(i, j, g) = reference.tau_hat(j, g);
                }
            }
        }

        BootstrapSample sample;
        sample.replicate = r;
        try {
            FitResult res = fit_from_state(std::move(state), sim.network, covariates,
                                           reference.beta, rep_config, spec.seed);
            sample.converged = res.converged;
            sample.permutation = align_groups(reference.tau_hat, res.tau_hat);
            sample.beta.resize(G, P);
            for (int g = 0; g < G; ++g) sample.beta.row(g) = res.beta.row(sample.permutation[g]);
        } catch (const std::exception& e) {
            sample.converged = false;
            sample.beta = Eigen::MatrixXd::Constant(G, P, std::numeric_limits<double>::quiet_NaN());
            rep_warnings[idx] = "replicate " + std::to_string(r) + " failed: " + e.what();
        }
        result.samples[idx] = std::move(sample);
    });
    for (const auto& w : rep_warnings)
        if (!w.empty()) result.warnings.push_back(w);
    for (const auto& s : result.samples)
        if (!s.converged) ++result.n_excluded;

    if (result.n_excluded > n_replicates / 5)
        throw std::runtime_error("bootstrap_beta: more than 20% of replicates failed to converge (" +
                                 std::to_string(result.n_excluded) + " of " +
                                 std::to_string(n_replicates) + ")");
    if (result.n_excluded > 0)
        result.warnings.push_back(std::to_string(result.n_excluded) +
                                  " non-converged replicate(s) excluded from quantiles");

    const long n_used = n_replicates - result.n_excluded;
    if (n_used < 2)
        throw std::invalid_argument("bootstrap_beta: quantiles need at least 2 converged replicates");

    for (int g = 0; g < G; ++g) {
        for (int p = 0; p < P; ++p) {
            std::vector<double> vals;
            vals.reserve(n_used);
            for (const auto& s : result.samples)
                if (s.converged) vals.push_back(s.beta(g, p));
            BootstrapCoefficient c;
            c.group = g + 1;
            c.covariate = (p < static_cast<int>(covariates.column_names.size()))
                              ? covariates.column_names[p]
                              : "col" + std::to_string(p + 1);
            c.estimate = reference.beta(g, p);
            c.q_low = quantile(vals, 0.025);
            c.q_high = quantile(vals, 0.975);
            c.significant = (c.q_low > 0.0) || (c.q_high < 0.0);
            result.summary.push_back(std::move(c));
        }
    }
    return result;
}

}  // namespace mmesbm
