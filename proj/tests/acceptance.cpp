// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The dataset-conditional criterion is skipped when the Lazega
// files are not present under <source-dir>/data/lazega/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmesbm/beta_estimator.hpp"
#include "mmesbm/bootstrap.hpp"
#include "mmesbm/diagnostics.hpp"
#include "mmesbm/generator.hpp"
#include "mmesbm/io.hpp"
#include "mmesbm/network.hpp"
#include "mmesbm/numerics.hpp"
#include "mmesbm/selection.hpp"
#include "mmesbm/vb.hpp"

using namespace mmesbm;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kGradRelTol = 1e-5;
constexpr double kHessRelTol = 1e-4;
constexpr double kHessSymTol = 1e-10;
constexpr double kElboSlack = 1e-8;
constexpr double kG1ElboTol = 1e-8;
constexpr double kOracleGap = 0.5;
constexpr double kThetaRecoveryTol = 0.1;
constexpr double kTauMatchRate = 0.90;
constexpr int kSignRecoveryMin = 80;       // of 100 meta-repetitions
constexpr int kSelectionMin = 8;           // of 10 repetitions
constexpr double kNormalizationTol = 1e-12;
constexpr double kEomTol = 1e-12;
constexpr double kLazegaAucMin = 0.80;
constexpr double kLazegaDiagMin = 0.5;
constexpr double kLazegaIsolatedMax = 0.05;

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

Network random_network(int n, double density, std::mt19937_64& rng) {
    Network net(n);
    std::bernoulli_distribution link(density);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) net.adjacency(i, j) = link(rng) ? 1 : 0;
    return net;
}

GenerativeSpec planted_three_groups(int n, std::uint64_t seed) {
    GenerativeSpec spec;
    spec.n_actors = n;
    spec.covariates = CovariateMatrix::intercept_only(n);
    // sparse membership prior so actors sit near the corners and the planted
    // hard groups are meaningful
    spec.beta = Eigen::MatrixXd::Constant(3, 1, std::log(0.1));
    spec.theta = Eigen::MatrixXd::Constant(3, 3, 0.05);
    spec.theta.diagonal().setConstant(0.8);
    spec.seed = seed;
    return spec;
}

Outcome criterion_gradients() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> gdist(0.3, 5.0);
    std::normal_distribution<double> bdist(0.0, 0.6);
    std::normal_distribution<double> wdist(0.0, 1.0);
    double worst_grad = 0.0, worst_hess = 0.0, worst_sym = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + static_cast<int>(rng() % 8);   // <= 10
        const int G = 2 + static_cast<int>(rng() % 2);   // <= 3
        const int P = 1 + static_cast<int>(rng() % 3);   // <= 3
        Eigen::MatrixXd w(n, P);
        for (int i = 0; i < n; ++i) {
            w(i, 0) = 1.0;
            for (int p = 1; p < P; ++p) w(i, p) = wdist(rng);
        }
        Eigen::MatrixXd gamma(n, G);
        for (int i = 0; i < n; ++i)
            for (int g = 0; g < G; ++g) gamma(i, g) = gdist(rng);
        Eigen::MatrixXd beta(G, P);
        for (int g = 0; g < G; ++g)
            for (int p = 0; p < P; ++p) beta(g, p) = bdist(rng);

        const Eigen::MatrixXd grad = beta_gradient(beta, w, gamma);
        const Eigen::MatrixXd hess = beta_hessian(beta, w, gamma);
        worst_sym = std::max(worst_sym, (hess - hess.transpose()).cwiseAbs().maxCoeff());

        const double h = 1e-6;
        for (int g = 0; g < G; ++g) {
            for (int p = 0; p < P; ++p) {
                Eigen::MatrixXd bp = beta, bm = beta;
                bp(g, p) += h;
                bm(g, p) -= h;
                const double fd =
                    (beta_objective(bp, w, gamma) - beta_objective(bm, w, gamma)) / (2 * h);
                worst_grad = std::max(
                    worst_grad, std::abs(grad(g, p) - fd) / std::max(1.0, std::abs(fd)));
                const Eigen::MatrixXd gfd =
                    (beta_gradient(bp, w, gamma) - beta_gradient(bm, w, gamma)) / (2 * h);
                for (int a = 0; a < G; ++a)
                    for (int q = 0; q < P; ++q)
                        worst_hess = std::max(
                            worst_hess, std::abs(hess(a * P + q, g * P + p) - gfd(a, q)) /
                                            std::max(1.0, std::abs(gfd(a, q))));
            }
        }
    }
    Outcome o;
    o.pass = worst_grad < kGradRelTol && worst_hess < kHessRelTol && worst_sym < kHessSymTol;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max rel err: grad %.2e, hess %.2e, asym %.2e", worst_grad,
                  worst_hess, worst_sym);
    o.detail = buf;
    return o;
}

Outcome criterion_monotonicity() {
    std::mt19937_64 rng(7);
    double worst_drop = 0.0;
    for (int t = 0; t < 20; ++t) {
        Network net = random_network(30, 0.15 + 0.02 * (t % 5), rng);
        ModelConfig config;
        config.n_groups = 2 + t % 3;
        config.n_restarts = 1;
        config.max_iterations = 60;
        config.seed = 1000 + t;
        const FitResult res =
            fit(net, CovariateMatrix::intercept_only(30), std::nullopt, config);
        for (std::size_t s = 1; s < res.elbo_trace.size(); ++s)
            worst_drop = std::max(worst_drop, res.elbo_trace[s - 1] - res.elbo_trace[s]);
    }
    Outcome o;
    o.pass = worst_drop <= kElboSlack;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "largest ELBO drop %.2e (slack %.0e)", worst_drop, kElboSlack);
    o.detail = buf;
    return o;
}

Outcome criterion_g1_exact() {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    bool theta_ok = true;
    for (int t = 0; t < 10; ++t) {
        const int n = 5 + static_cast<int>(rng() % 16);
        Network net = random_network(n, 0.1 + 0.06 * (t % 6), rng);
        ModelConfig config;
        config.n_groups = 1;
        config.n_restarts = 1;
        const FitResult res =
            fit(net, CovariateMatrix::intercept_only(n), std::nullopt, config);
        const double M = static_cast<double>(net.n_observed());
        const double m = static_cast<double>(net.n_links());
        const double exact =
            log_gamma(m + 1.0) + log_gamma(M - m + 1.0) - log_gamma(M + 2.0);
        worst = std::max(worst, std::abs(res.elbo() - exact));
        if (res.theta_hat(0, 0) != (m + 1.0) / (M + 2.0)) theta_ok = false;
    }
    Outcome o;
    o.pass = worst < kG1ElboTol && theta_ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |ELBO - log marginal| %.2e, theta exact: %s", worst,
                  theta_ok ? "yes" : "no");
    o.detail = buf;
    return o;
}

Outcome criterion_small_oracle() {
    std::mt19937_64 rng(13);
    double worst_gap = 0.0;
    bool bounded = true;
    for (int t = 0; t < 5; ++t) {
        const int n = 3, G = 2;
        Network net = random_network(n, 0.5, rng);
        const auto dyads = net.observed_dyads();
        const int D = static_cast<int>(dyads.size());

        // exact evidence: enumerate all sender/receiver assignments; the
        // Dirichlet(1,1) and Beta(1,1) integrals are factorial ratios
        double evidence = 0.0;
        for (long code = 0; code < (1L << (2 * D)); ++code) {
            Eigen::MatrixXi rc = Eigen::MatrixXi::Zero(n, G);
            Eigen::MatrixXi links = Eigen::MatrixXi::Zero(G, G);
            Eigen::MatrixXi nonlinks = Eigen::MatrixXi::Zero(G, G);
            for (int d = 0; d < D; ++d) {
                const int zs = (code >> (2 * d)) & 1;
                const int zr = (code >> (2 * d + 1)) & 1;
                const auto [i, j] = dyads[d];
                rc(i, zs)++;
                rc(j, zr)++;
                (net.adjacency(i, j) ? links : nonlinks)(zs, zr)++;
            }
            double logp = 0.0;
            for (int i = 0; i < n; ++i)
                logp += log_gamma(rc(i, 0) + 1.0) + log_gamma(rc(i, 1) + 1.0) -
                        log_gamma(rc(i, 0) + rc(i, 1) + 2.0);
            for (int g = 0; g < G; ++g)
                for (int h = 0; h < G; ++h)
                    logp += log_gamma(links(g, h) + 1.0) + log_gamma(nonlinks(g, h) + 1.0) -
                            log_gamma(links(g, h) + nonlinks(g, h) + 2.0);
            evidence += std::exp(logp);
        }
        const double log_evidence = std::log(evidence);

        ModelConfig config;
        config.n_groups = G;
        config.n_restarts = 5;
        config.estimate_covariates = false;
        config.seed = 40 + t;
        const FitResult res =
            fit(net, CovariateMatrix::intercept_only(n), std::nullopt, config);
        if (res.elbo() > log_evidence + 1e-9) bounded = false;
        worst_gap = std::max(worst_gap, log_evidence - res.elbo());
    }
    Outcome o;
    o.pass = bounded && worst_gap < kOracleGap;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max gap %.3f nats, lower bound held: %s", worst_gap,
                  bounded ? "yes" : "no");
    o.detail = buf;
    return o;
}

Outcome criterion_recovery() {
    const GenerativeSpec spec = planted_three_groups(100, 2718);
    const SimulatedNetwork sim = sample_network(spec);

    ModelConfig config;
    config.n_groups = 3;
    config.n_restarts = 5;
    config.max_iterations = 400;
    config.elbo_rel_tolerance = 1e-5;
    config.seed = 314;
    const FitResult res = fit(sim.network, spec.covariates, std::nullopt, config);

    const std::vector<int> perm = align_groups(sim.tau, res.tau_hat);
    double theta_err = 0.0;
    for (int g = 0; g < 3; ++g)
        for (int h = 0; h < 3; ++h)
            theta_err = std::max(
                theta_err, std::abs(res.theta_hat(perm[g], perm[h]) - spec.theta(g, h)));

    int matched = 0;
    for (int i = 0; i < 100; ++i) {
        int truth, est;
        sim.tau.row(i).maxCoeff(&truth);
        res.tau_hat.row(i).maxCoeff(&est);
        if (est == perm[truth]) ++matched;
    }
    Outcome o;
    o.pass = theta_err < kThetaRecoveryTol && matched >= 100 * kTauMatchRate;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max theta error %.3f, matched actors %d/100", theta_err,
                  matched);
    o.detail = buf;
    return o;
}

Outcome criterion_sign_recovery() {
    const int n = 100;
    int successes = 0;
    for (int rep = 0; rep < 100; ++rep) {
        GenerativeSpec spec;
        spec.n_actors = n;
        spec.covariates = CovariateMatrix::intercept_only(n);
        spec.covariates.values.conservativeResize(n, 2);
        for (int i = 0; i < n; ++i) spec.covariates.values(i, 1) = (i % 2 == 0) ? 1.0 : 0.0;
        spec.covariates.column_names.push_back("flag");
        spec.covariates.column_kinds.push_back(ColumnKind::binary);
        const double effect = (rep % 2 == 0) ? 2.0 : -2.0;  // true effect on group 0 only
        spec.beta.resize(2, 2);
        spec.beta << 0.0, effect, 0.0, 0.0;
        spec.theta.resize(2, 2);
        spec.theta << 0.6, 0.08, 0.08, 0.6;
        spec.seed = 5000 + rep;
        const SimulatedNetwork sim = sample_network(spec);

        ModelConfig config;
        config.n_groups = 2;
        config.n_restarts = 6;
        config.max_iterations = 600;
        config.elbo_rel_tolerance = 1e-5;
        config.seed = 60000 + rep;
        FitResult res;
        try {
            res = fit(sim.network, spec.covariates, std::nullopt, config);
            if (!res.converged) continue;
        } catch (const std::exception&) {
            continue;
        }

        const std::vector<int> perm = align_groups(sim.tau, res.tau_hat);
        const int eff_group = perm[0];  // fitted label of the affected group
        const double est = res.beta(eff_group, 1);
        if (est * effect <= 0.0) continue;

        ModelConfig boot_config = config;
        boot_config.n_restarts = 1;
        boot_config.max_iterations = 300;
        boot_config.elbo_rel_tolerance = 1e-4;
        try {
            const BootstrapResult boot = bootstrap_beta(res, sim.network, spec.covariates, 50,
                                                        boot_config, 700000 + rep);
            // summary rows are (group-major, covariate minor) in fit labels
            const BootstrapCoefficient& c = boot.summary[eff_group * 2 + 1];
            if ((effect > 0.0 && c.q_low > 0.0) || (effect < 0.0 && c.q_high < 0.0)) ++successes;
        } catch (const std::exception&) {
        }
    }
    Outcome o;
    o.pass = successes >= kSignRecoveryMin;
    o.detail = "sign + significant interval in " + std::to_string(successes) + "/100";
    return o;
}

Outcome criterion_selection() {
    int correct = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const GenerativeSpec spec = planted_three_groups(100, 9000 + rep);
        const SimulatedNetwork sim = sample_network(spec);
        ModelConfig config;
        config.n_restarts = 2;
        config.max_iterations = 200;
        config.elbo_rel_tolerance = 1e-5;
        config.seed = 100 + rep;
        const CvReport report =
            cross_validate(sim.network, spec.covariates, {1, 2, 3, 4, 5}, 5, config, 777 + rep);
        if (report.chosen_G == 3) ++correct;
    }
    Outcome o;
    o.pass = correct >= kSelectionMin;
    o.detail = "chose G=3 in " + std::to_string(correct) + "/10 repetitions";
    return o;
}

Outcome criterion_normalization() {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int G = 1 + t % 5;
        Eigen::MatrixXd theta(G, G);
        for (int g = 0; g < G; ++g)
            for (int h = 0; h < G; ++h) theta(g, h) = u(rng);
        Eigen::VectorXd ti(G), tj(G);
        for (int g = 0; g < G; ++g) {
            ti(g) = u(rng);
            tj(g) = u(rng);
        }
        ti /= ti.sum();
        tj /= tj.sum();
        const double total = std::exp(holdout_loglik(theta, ti, tj, 0)) +
                             std::exp(holdout_loglik(theta, ti, tj, 1));
        worst = std::max(worst, std::abs(total - 1.0));
    }
    Outcome o;
    o.pass = worst < kNormalizationTol;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max |sum - 1| = %.2e", worst);
    o.detail = buf;
    return o;
}

Outcome criterion_diag_oracles() {
    // closed-form membership-spread cases
    Eigen::MatrixXd tau(3, 4);
    tau << 1.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.0;
    const Eigen::VectorXd s = eom_scores(tau);
    bool eom_ok = std::abs(s(0) - 1.0) < kEomTol && std::abs(s(1) - 4.0) < kEomTol &&
                  std::abs(s(2) - std::pow(2.0, 1.5)) < kEomTol;

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dens(0.05, 0.4);
    bool geo_ok = true;
    for (int t = 0; t < 50 && geo_ok; ++t) {
        const int n = 4 + static_cast<int>(rng() % 17);  // <= 20
        Network net = random_network(n, dens(rng), rng);
        const int INF = 1 << 20;
        std::vector<std::vector<int>> d(n, std::vector<int>(n, INF));
        for (int i = 0; i < n; ++i) d[i][i] = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && net.adjacency(i, j)) d[i][j] = 1;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
        std::vector<long> counts(n, 0);
        long unreachable = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (d[i][j] >= INF)
                    ++unreachable;
                else
                    ++counts[d[i][j]];
            }
        const GeodesicDistribution g = geodesic_distribution(net);
        if (g.counts != counts || g.unreachable != unreachable) geo_ok = false;
    }
    Outcome o;
    o.pass = eom_ok && geo_ok;
    o.detail = std::string("EoM exact: ") + (eom_ok ? "yes" : "no") +
               ", geodesic brute-force match: " + (geo_ok ? "yes" : "no");
    return o;
}

Outcome criterion_lazega(const fs::path& source_dir) {
    const fs::path dir = source_dir / "data" / "lazega";
    const fs::path edges = dir / "friendship.edges";
    const fs::path cov = dir / "covariates.csv";
    const fs::path schema = dir / "schema.json";
    Outcome o;
    if (!fs::exists(edges) || !fs::exists(cov) || !fs::exists(schema)) {
        o.skipped = true;
        o.detail = "dataset not present under " + dir.string();
        return o;
    }
    std::ifstream ein(edges);
    const Network net = load_edge_list(ein, 71);
    std::ifstream sin(schema);
    const auto specs = parse_schema_json(sin);
    std::ifstream cin_(cov);
    const CovariateMatrix covariates = load_covariates(cin_, specs);

    ModelConfig config;
    config.n_groups = 4;
    config.n_restarts = 5;
    config.max_iterations = 300;
    config.seed = 1;
    const CvReport report = cross_validate(net, covariates, {4}, 10, config, 1);
    std::vector<std::pair<double, int>> pooled;
    for (const auto& p : report.predictions) pooled.emplace_back(p.prob_link, p.y);
    const double auc = roc_auc(pooled).auc;

    const FitResult res = fit(net, covariates, std::nullopt, config);
    int strong_diag = 0;
    for (int g = 0; g < 4; ++g)
        if (res.theta_hat(g, g) > kLazegaDiagMin) ++strong_diag;
    bool isolated = false;
    for (int g = 0; g < 4; ++g) {
        double mx = 0.0;
        for (int h = 0; h < 4; ++h)
            mx = std::max({mx, res.theta_hat(g, h), res.theta_hat(h, g)});
        if (mx < kLazegaIsolatedMax) isolated = true;
    }
    o.pass = auc >= kLazegaAucMin && strong_diag >= 3 && isolated;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "AUC %.3f, strong diagonals %d, isolated group: %s", auc,
                  strong_diag, isolated ? "yes" : "no");
    o.detail = buf;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path source_dir = argc > 1 ? fs::path(argv[1]) : fs::current_path();
    struct Criterion {
        std::string name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"gradient/Hessian vs finite differences", criterion_gradients},
        {"ELBO monotone across sweeps", criterion_monotonicity},
        {"G=1 beta-binomial exactness", criterion_g1_exact},
        {"small-instance evidence bound", criterion_small_oracle},
        {"planted-partition parameter recovery", criterion_recovery},
        {"covariate sign recovery with bootstrap", criterion_sign_recovery},
        {"model selection picks G=3", criterion_selection},
        {"predictive normalization", criterion_normalization},
        {"EoM and geodesic oracles", criterion_diag_oracles},
        {"Lazega friendship benchmark", [&] { return criterion_lazega(source_dir); }},
    };

    bool all_ok = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* verdict = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
        std::printf("[%2zu] %s  %s — %s (%.1fs)\n", i + 1, verdict, criteria[i].name.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.skipped && !o.pass) all_ok = false;
    }
    return all_ok ? 0 : 1;
}
