#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "mmesbm/diagnostics.hpp"
#include "mmesbm/generator.hpp"
#include "mmesbm/selection.hpp"

using namespace mmesbm;

TEST_CASE("membership spread scores, closed-form cases") {
    Eigen::MatrixXd tau(3, 4);
    tau << 1.0, 0.0, 0.0, 0.0,           // pure -> 1
        0.25, 0.25, 0.25, 0.25,          // uniform -> G
        0.5, 0.25, 0.25, 0.0;            // exp(1.5 log 2) = 2^1.5
    const Eigen::VectorXd s = eom_scores(tau);
    CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s(1) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(s(2) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-14));
}

TEST_CASE("degree distributions, hand case") {
    // 1->2, 1->3, 2->3: out-degrees (2,1,0), in-degrees (0,1,2)
    Network net(3);
    net.adjacency(0, 1) = 1;
    net.adjacency(0, 2) = 1;
    net.adjacency(1, 2) = 1;
    const DegreeDistributions d = degree_distributions(net);
    CHECK(d.out_degree == std::vector<long>{1, 1, 1});
    CHECK(d.in_degree == std::vector<long>{1, 1, 1});

    net.adjacency(1, 2) = 0;  // now out (2,0,0), in (0,1,1)
    const DegreeDistributions d2 = degree_distributions(net);
    CHECK(d2.out_degree == std::vector<long>{2, 0, 1});
    CHECK(d2.in_degree == std::vector<long>{1, 2, 0});
}

TEST_CASE("geodesic distances, hand case with an unreachable pair") {
    // path 1->2->3, and 4 isolated
    Network net(4);
    net.adjacency(0, 1) = 1;
    net.adjacency(1, 2) = 1;
    const GeodesicDistribution g = geodesic_distribution(net);
    CHECK(g.counts[1] == 2);  // 1->2, 2->3
    CHECK(g.counts[2] == 1);  // 1->3
    CHECK(g.counts[3] == 0);
    CHECK(g.unreachable == 4 * 3 - 3);
}

TEST_CASE("geodesic distribution matches Floyd-Warshall on random networks") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dens(0.05, 0.4);
    for (int t = 0; t < 50; ++t) {
        const int n = 5 + static_cast<int>(rng() % 16);  // up to 20
        Network net(n);
        std::bernoulli_distribution link(dens(rng));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) net.adjacency(i, j) = link(rng) ? 1 : 0;

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

        std::vector<long> expect_counts(n, 0);
        long expect_unreachable = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (d[i][j] >= INF)
                    ++expect_unreachable;
                else
                    ++expect_counts[d[i][j]];
            }

        const GeodesicDistribution g = geodesic_distribution(net);
        CHECK(g.counts == expect_counts);
        CHECK(g.unreachable == expect_unreachable);
    }
}

TEST_CASE("link probabilities reuse the predictive mixture") {
    FitResult fit;
    fit.tau_hat.resize(3, 2);
    fit.tau_hat << 0.7, 0.3, 0.4, 0.6, 0.9, 0.1;
    fit.theta_hat.resize(2, 2);
    fit.theta_hat << 0.8, 0.1, 0.2, 0.6;
    Network net(3);
    net.adjacency(0, 1) = 1;
    net.mask(2, 0) = 0;  // unobserved dyads must be skipped

    const LinkSeparation sep = link_probability_separation(fit, net);
    CHECK(sep.dyads.size() == 5);
    CHECK(sep.link_probs.size() == 1);
    CHECK(sep.nonlink_probs.size() == 4);
    for (const auto& d : sep.dyads) {
        const double expect =
            std::exp(holdout_loglik(fit.theta_hat, fit.tau_hat.row(d.i - 1).transpose(),
                                    fit.tau_hat.row(d.j - 1).transpose(), 1));
        CHECK(d.prob == doctest::Approx(expect).epsilon(1e-14));
        CHECK((d.i != 3 || d.j != 1));
    }
}

TEST_CASE("goodness-of-fit envelopes are ordered, deterministic, and sized right") {
    GenerativeSpec spec;
    spec.n_actors = 20;
    spec.covariates = CovariateMatrix::intercept_only(20);
    spec.beta = Eigen::MatrixXd::Zero(2, 1);
    spec.theta = Eigen::MatrixXd::Constant(2, 2, 0.1);
    spec.theta.diagonal().setConstant(0.6);
    spec.seed = 13;
    const SimulatedNetwork sim = sample_network(spec);

    ModelConfig config;
    config.n_groups = 2;
    config.n_restarts = 2;
    config.max_iterations = 600;
    const FitResult res = fit(sim.network, spec.covariates, std::nullopt, config);
    REQUIRE(res.converged);

    const GofReport report = gof_compare(res, sim.network, spec.covariates, 20, 99);
    REQUIRE(report.stats.size() == 3);
    CHECK(report.stats[0].statistic == "in_degree");
    CHECK(report.stats[1].statistic == "out_degree");
    CHECK(report.stats[2].statistic == "geodesic");
    CHECK(report.stats[0].support.size() == 20);   // degrees 0..N-1
    CHECK(report.stats[2].support.size() == 20);   // distances 1..N-1 plus inf
    CHECK(report.stats[2].support.back() == "inf");

    for (const auto& st : report.stats) {
        REQUIRE(st.observed.size() == st.support.size());
        double total_obs = 0.0;
        for (std::size_t s = 0; s < st.support.size(); ++s) {
            CHECK(st.sim_min[s] <= st.sim_q25[s]);
            CHECK(st.sim_q25[s] <= st.sim_median[s]);
            CHECK(st.sim_median[s] <= st.sim_q75[s]);
            CHECK(st.sim_q75[s] <= st.sim_max[s]);
            total_obs += st.observed[s];
        }
        // counts account for every actor (degrees) or ordered pair (geodesic)
        if (st.statistic == "geodesic")
            CHECK(total_obs == 20.0 * 19.0);
        else
            CHECK(total_obs == 20.0);
    }

    const GofReport again = gof_compare(res, sim.network, spec.covariates, 20, 99);
    CHECK(again.stats[0].sim_median == report.stats[0].sim_median);

    FitResult broken = res;
    broken.converged = false;
    CHECK_THROWS_AS(gof_compare(broken, sim.network, spec.covariates, 5, 1),
                    std::invalid_argument);
}
