#include "mmesbm/vb.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmesbm/beta_estimator.hpp"
#include "mmesbm/numerics.hpp"

namespace mmesbm {

Eigen::MatrixXd ModelConfig::prior_alpha1() const {
    if (alpha1.size() == 0) return Eigen::MatrixXd::Ones(n_groups, n_groups);
    if (alpha1.rows() != n_groups || alpha1.cols() != n_groups || (alpha1.array() <= 0).any())
        throw std::invalid_argument("ModelConfig: alpha1 must be G x G strictly positive");
    return alpha1;
}

Eigen::MatrixXd ModelConfig::prior_alpha2() const {
    if (alpha2.size() == 0) return Eigen::MatrixXd::Ones(n_groups, n_groups);
    if (alpha2.rows() != n_groups || alpha2.cols() != n_groups || (alpha2.array() <= 0).any())
        throw std::invalid_argument("ModelConfig: alpha2 must be G x G strictly positive");
    return alpha2;
}

VariationalState::VariationalState(int n, int g)
    : n_actors(n),
      n_groups(g),
      phi1(static_cast<std::size_t>(n) * n * g, 1.0 / g),
      phi2(static_cast<std::size_t>(n) * n * g, 1.0 / g),
      gamma(Eigen::MatrixXd::Ones(n, g)),
      zeta1(Eigen::MatrixXd::Ones(g, g)),
      zeta2(Eigen::MatrixXd::Ones(g, g)) {}

Eigen::MatrixXd compute_delta(const Eigen::MatrixXd& covariates, const Eigen::MatrixXd& beta) {
    Eigen::MatrixXd s = covariates * beta.transpose();
    Eigen::MatrixXd delta = s.array().exp();
    if (!delta.allFinite())
        throw std::overflow_error("compute_delta: exp(W beta) not finite");
    return delta;
}

PhiTables make_phi_tables(const VariationalState& state) {
    const int n = state.n_actors;
    const int G = state.n_groups;
    PhiTables t;
    t.elog_tau.resize(n, G);
    for (int i = 0; i < n; ++i) {
        const double psi_sum = digamma(state.gamma.row(i).sum());
        for (int g = 0; g < G; ++g) t.elog_tau(i, g) = digamma(state.gamma(i, g)) - psi_sum;
    }
    t.elog_theta1.resize(G, G);
    t.elog_theta0.resize(G, G);
    for (int g = 0; g < G; ++g) {
        for (int h = 0; h < G; ++h) {
            const double psi_sum = digamma(state.zeta1(g, h) + state.zeta2(g, h));
            t.elog_theta1(g, h) = digamma(state.zeta1(g, h)) - psi_sum;
            t.elog_theta0(g, h) = digamma(state.zeta2(g, h)) - psi_sum;
        }
    }
    return t;
}

void update_zeta(VariationalState& state, const Network& net, const ModelConfig& config) {
    const int n = state.n_actors;
    const int G = state.n_groups;
    state.zeta1 = config.prior_alpha1();
    state.zeta2 = config.prior_alpha2();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !net.mask(i, j)) continue;
            Eigen::MatrixXd& target = net.adjacency(i, j) ? state.zeta1 : state.zeta2;
            for (int g = 0; g < G; ++g) {
                const double p1 = state.p1(i, j, g);
                for (int h = 0; h < G; ++h) target(g, h) += p1 * state.p2(i, j, h);
            }
        }
    }
}

void update_gamma(VariationalState& state, const Network& net, const Eigen::MatrixXd& delta) {
    const int n = state.n_actors;
    const int G = state.n_groups;
    if ((delta.array() <= 0).any()) throw std::invalid_argument("update_gamma: delta must be positive");
    state.gamma = delta;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !net.mask(i, j)) continue;
            for (int g = 0; g < G; ++g) {
                state.gamma(i, g) += state.p1(i, j, g);
                state.gamma(j, g) += state.p2(i, j, g);
            }
        }
    }
}

void update_phi(VariationalState& state, const Network& net, int i, int j,
                const PhiTables& tables, int inner_iterations) {
    const int G = state.n_groups;
    if (!net.observed(i, j)) throw std::invalid_argument("update_phi: dyad not observed");
    const Eigen::MatrixXd& theta_term =
        net.adjacency(i, j) ? tables.elog_theta1 : tables.elog_theta0;
    Eigen::VectorXd logw(G);
    // softmax with max-shift; equivalent to exp(logw - log_sum_exp(logw))
    const auto normalize_into = [&](double* target) {
        const double mx = logw.maxCoeff();
        double total = 0.0;
        for (int g = 0; g < G; ++g) {
            target[g] = std::exp(logw(g) - mx);
            total += target[g];
        }
        for (int g = 0; g < G; ++g) target[g] /= total;
    };
    for (int t = 0; t < inner_iterations; ++t) {
        // sender roles given current receiver roles
        for (int g = 0; g < G; ++g) {
            double s = tables.elog_tau(i, g);
            for (int h = 0; h < G; ++h) s += state.p2(i, j, h) * theta_term(g, h);
            logw(g) = s;
        }
        normalize_into(&state.p1(i, j, 0));
        // receiver roles given fresh sender roles; note transposed theta indices
        for (int h = 0; h < G; ++h) {
            double s = tables.elog_tau(j, h);
            for (int g = 0; g < G; ++g) s += state.p1(i, j, g) * theta_term(g, h);
            logw(h) = s;
        }
        normalize_into(&state.p2(i, j, 0));
    }
}

void update_phi(VariationalState& state, const Network& net, int i, int j,
                int inner_iterations) {
    update_phi(state, net, i, j, make_phi_tables(state), inner_iterations);
}

double compute_elbo(const VariationalState& state, const Network& net,
                    const Eigen::MatrixXd& delta, const ModelConfig& config) {
    const int n = state.n_actors;
    const int G = state.n_groups;
    const PhiTables t = make_phi_tables(state);
    const Eigen::MatrixXd a1 = config.prior_alpha1();
    const Eigen::MatrixXd a2 = config.prior_alpha2();

    double elbo = 0.0;
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };

    // dyad terms: likelihood, role assignment, and phi entropy
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !net.mask(i, j)) continue;
            const Eigen::MatrixXd& theta_term =
                net.adjacency(i, j) ? t.elog_theta1 : t.elog_theta0;
            for (int g = 0; g < G; ++g) {
                const double p1 = state.p1(i, j, g);
                const double p2 = state.p2(i, j, g);
                for (int h = 0; h < G; ++h)
                    elbo += p1 * state.p2(i, j, h) * theta_term(g, h);
                elbo += p1 * t.elog_tau(i, g) + p2 * t.elog_tau(j, g);
                elbo -= xlogx(p1) + xlogx(p2);
            }
        }
    }

    // membership prior E[log p(tau|delta)] minus E[log q(tau|gamma)]
    for (int i = 0; i < n; ++i) {
        elbo += log_gamma(delta.row(i).sum()) - log_gamma(state.gamma.row(i).sum());
        for (int g = 0; g < G; ++g) {
            elbo += -log_gamma(delta(i, g)) + (delta(i, g) - 1.0) * t.elog_tau(i, g);
            elbo -= -log_gamma(state.gamma(i, g)) +
                    (state.gamma(i, g) - 1.0) * t.elog_tau(i, g);
        }
    }

    // blockmodel prior E[log p(theta)] minus E[log q(theta)]
    for (int g = 0; g < G; ++g) {
        for (int h = 0; h < G; ++h) {
            elbo += log_gamma(a1(g, h) + a2(g, h)) - log_gamma(a1(g, h)) - log_gamma(a2(g, h)) +
                    (a1(g, h) - 1.0) * t.elog_theta1(g, h) +
                    (a2(g, h) - 1.0) * t.elog_theta0(g, h);
            elbo -= log_gamma(state.zeta1(g, h) + state.zeta2(g, h)) -
                    log_gamma(state.zeta1(g, h)) - log_gamma(state.zeta2(g, h)) +
                    (state.zeta1(g, h) - 1.0) * t.elog_theta1(g, h) +
                    (state.zeta2(g, h) - 1.0) * t.elog_theta0(g, h);
        }
    }
    return elbo;
}

VariationalState init_state(const Network& net, const ModelConfig& config, std::mt19937_64& rng) {
    const int n = net.n_actors;
    const int G = config.n_groups;
    if (G < 1) throw std::invalid_argument("init_state: n_groups must be >= 1");
    VariationalState state(n, G);
    if (G == 1) return state;
    // Random noise around the uniform start decays: early phi sweeps contract
    // membership differences before the blockmodel feedback can amplify them,
    // leaving long plateaus near the symmetric saddle. Seed each actor from a
    // crude k-means on its adjacency row/column profile instead (random
    // centroids per restart keep the restarts diverse), then blend with
    // per-actor Dirichlet(1) noise so ties and empty clusters stay harmless.
    Eigen::MatrixXd profile(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            profile(i, j) = (i != j && net.mask(i, j)) ? net.adjacency(i, j) : 0.0;
            profile(i, n + j) = (i != j && net.mask(j, i)) ? net.adjacency(j, i) : 0.0;
        }
    }
    std::vector<int> assign(n, 0);
    Eigen::MatrixXd centroids(G, 2 * n);
    for (int g = 0; g < G; ++g)
        centroids.row(g) = profile.row(static_cast<int>(rng() % n));
    for (int round = 0; round < 10; ++round) {
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int g = 0; g < G; ++g) {
                const double d = (profile.row(i) - centroids.row(g)).squaredNorm();
                if (d < best) {
                    best = d;
                    assign[i] = g;
                }
            }
        }
        centroids.setZero();
        Eigen::VectorXd sizes = Eigen::VectorXd::Zero(G);
        for (int i = 0; i < n; ++i) {
            centroids.row(assign[i]) += profile.row(i);
            sizes(assign[i]) += 1.0;
        }
        for (int g = 0; g < G; ++g) {
            if (sizes(g) > 0.0)
                centroids.row(g) /= sizes(g);
            else
                centroids.row(g) = profile.row(static_cast<int>(rng() % n));
        }
    }
    std::exponential_distribution<double> expo(1.0);
    Eigen::MatrixXd init(n, G);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int g = 0; g < G; ++g) {
            init(i, g) = expo(rng);
            total += init(i, g);
        }
        for (int g = 0; g < G; ++g)
            init(i, g) = 0.5 / G + 0.4 * (assign[i] == g ? 1.0 : 0.0) +
                         0.1 * init(i, g) / total;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !net.mask(i, j)) continue;
            for (int g = 0; g < G; ++g) {
                state.p1(i, j, g) = init(i, g);
                state.p2(i, j, g) = init(j, g);
            }
        }
    }
    return state;
}

FitResult fit_from_state(VariationalState state, const Network& net,
                         const CovariateMatrix& covariates,
                         std::optional<Eigen::MatrixXd> beta_init, const ModelConfig& config,
                         std::uint64_t restart_seed) {
    const int G = config.n_groups;
    const int P = covariates.n_covariates();
    if (covariates.n_actors != net.n_actors)
        throw std::invalid_argument("fit: covariate rows do not match actor count");
    if (state.n_actors != net.n_actors || state.n_groups != G)
        throw std::invalid_argument("fit: state dimensions inconsistent with network/config");

    FitResult result;
    result.restart_seed = restart_seed;
    Eigen::MatrixXd beta =
        beta_init ? *beta_init : Eigen::MatrixXd::Zero(G, P);
    if (beta.rows() != G || beta.cols() != P)
        throw std::invalid_argument("fit: beta_init has wrong dimensions");
    const bool beta_given = beta_init.has_value();

    NewtonOptions newton;
    newton.clip_bound = config.beta_clip_bound;

    Eigen::MatrixXd delta = compute_delta(covariates.values, beta);
    update_gamma(state, net, delta);
    update_zeta(state, net, config);

    const auto dyads = net.observed_dyads();
    const bool do_beta = config.estimate_covariates && G > 1 && P > 0 &&
                         config.beta_update_interval > 0;
    // Estimating beta while gamma is still near-uniform is a trap: the optimal
    // prior for mixed memberships is a huge symmetric precision, which then
    // pins gamma at the prior and no structure can ever form. Phase 1 runs the
    // phi/gamma/zeta updates to convergence with beta fixed; phase 2 turns the
    // beta step on and iterates to convergence again.
    bool beta_active = false;
    int beta_start_sweep = 0;
    bool first_beta_step = true;
    double prev_elbo = std::numeric_limits<double>::quiet_NaN();

    for (int sweep = 1; sweep <= config.max_iterations; ++sweep) {
        const PhiTables tables = make_phi_tables(state);
        for (const auto& [i, j] : dyads)
            update_phi(state, net, i, j, tables, config.phi_inner_iterations);
        update_gamma(state, net, delta);
        update_zeta(state, net, config);

        if (do_beta && beta_active &&
            (sweep - beta_start_sweep) % config.beta_update_interval == 0) {
            if (first_beta_step && !beta_given) {
                // skeptical start: intercepts from the moments of gamma,
                // all covariate coefficients zero; keep it only if it helps
                Eigen::MatrixXd mom = init_beta_mom(state.gamma, covariates,
                                                    config.mom_average_components,
                                                    config.beta_clip_bound);
                if (beta_objective(mom, covariates.values, state.gamma) >
                    beta_objective(beta, covariates.values, state.gamma))
                    beta = mom;
            }
            first_beta_step = false;
            beta = estimate_beta(beta, covariates, state.gamma, newton, &result.beta_diag);
            delta = compute_delta(covariates.values, beta);
            update_gamma(state, net, delta);
        }

        const double elbo = compute_elbo(state, net, delta, config);
        if (!std::isfinite(elbo)) {
            std::ostringstream oss;
            oss << "fit: non-finite ELBO at sweep " << sweep
                << "; gamma range [" << state.gamma.minCoeff() << ", "
                << state.gamma.maxCoeff() << "], zeta1 min " << state.zeta1.minCoeff()
                << ", zeta2 min " << state.zeta2.minCoeff()
                << ", max |beta| " << beta.cwiseAbs().maxCoeff();
            throw std::runtime_error(oss.str());
        }
        result.elbo_trace.push_back(elbo);
        result.iterations = sweep;
        // multi-group runs need a grace period: near the symmetric start the
        // ELBO can move less than the tolerance while still escaping
        const int min_sweeps = (G == 1) ? 2 : 10;
        if (sweep >= min_sweeps) {
            const double rel =
                std::abs(elbo - prev_elbo) / std::max(std::abs(prev_elbo), 1.0);
            if (rel < config.elbo_rel_tolerance) {
                if (do_beta && !beta_active) {
                    beta_active = true;
                    beta_start_sweep = sweep + 1;
                } else {
                    result.converged = true;
                    break;
                }
            }
        }
        prev_elbo = elbo;
    }

    result.beta = beta;
    result.tau_hat.resize(net.n_actors, G);
    for (int i = 0; i < net.n_actors; ++i)
        result.tau_hat.row(i) = state.gamma.row(i) / state.gamma.row(i).sum();
    result.theta_hat = state.zeta1.array() / (state.zeta1.array() + state.zeta2.array());
    result.state = std::move(state);
    return result;
}

FitResult fit(const Network& net, const CovariateMatrix& covariates,
              std::optional<Eigen::MatrixXd> beta_init, const ModelConfig& config) {
    if (config.n_restarts < 1) throw std::invalid_argument("fit: n_restarts must be >= 1");
    FitResult best;
    bool have = false;
    for (int r = 0; r < config.n_restarts; ++r) {
        const std::uint64_t rs = config.seed + static_cast<std::uint64_t>(r);
        std::mt19937_64 rng(rs);
        VariationalState state = init_state(net, config, rng);
        FitResult res = fit_from_state(std::move(state), net, covariates, beta_init, config, rs);
        if (!have || res.elbo() > best.elbo()) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

}  // namespace mmesbm
