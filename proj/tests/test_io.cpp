#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "mmesbm/generator.hpp"
#include "mmesbm/io.hpp"
#include "mmesbm/vb.hpp"

using namespace mmesbm;

TEST_CASE("double formatting round-trips exactly") {
    for (double x : {0.0, 1.0, -2.5, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.1}) {
        CHECK(std::stod(fmt_double(x)) == x);
    }
}

TEST_CASE("matrix csv layout") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    {
        std::ostringstream out;
        write_matrix_csv(out, m);
        CHECK(out.str() == "1,2\n3,4\n");
    }
    {
        std::ostringstream out;
        write_matrix_csv(out, m, {"a", "b"}, {"r1", "r2"});
        CHECK(out.str() == "row,a,b\nr1,1,2\nr2,3,4\n");
    }
    {
        std::ostringstream out;
        write_matrix_csv(out, m, {"a", "b"});
        CHECK(out.str() == "a,b\n1,2\n3,4\n");
    }
}

TEST_CASE("fit json round-trips a real fit") {
    GenerativeSpec spec;
    spec.n_actors = 12;
    spec.covariates = CovariateMatrix::intercept_only(12);
    spec.beta = Eigen::MatrixXd::Zero(2, 1);
    spec.theta = Eigen::MatrixXd::Constant(2, 2, 0.15);
    spec.theta.diagonal().setConstant(0.7);
    spec.seed = 21;
    const SimulatedNetwork sim = sample_network(spec);

    ModelConfig config;
    config.n_groups = 2;
    config.n_restarts = 2;
    config.max_iterations = 60;
    config.seed = 8;
    config.alpha1 = Eigen::MatrixXd::Constant(2, 2, 1.25);
    const FitResult res = fit(sim.network, spec.covariates, std::nullopt, config);

    std::ostringstream out;
    write_fit_json(out, res, config, spec.covariates.column_names);
    std::istringstream in(out.str());
    const LoadedFit loaded = read_fit_json(in);

    CHECK(loaded.fit.beta == res.beta);
    CHECK(loaded.fit.tau_hat == res.tau_hat);
    CHECK(loaded.fit.theta_hat == res.theta_hat);
    CHECK(loaded.fit.state.gamma == res.state.gamma);
    CHECK(loaded.fit.state.zeta1 == res.state.zeta1);
    CHECK(loaded.fit.state.zeta2 == res.state.zeta2);
    CHECK(loaded.fit.elbo_trace == res.elbo_trace);
    CHECK(loaded.fit.converged == res.converged);
    CHECK(loaded.fit.iterations == res.iterations);
    CHECK(loaded.fit.restart_seed == res.restart_seed);
    CHECK(loaded.covariate_names == spec.covariates.column_names);
    CHECK(loaded.config.n_groups == 2);
    CHECK(loaded.config.seed == 8);
    CHECK(loaded.config.alpha1 == config.alpha1);
    CHECK(loaded.config.alpha2.size() == 0);
}

TEST_CASE("schema json parsing") {
    std::istringstream in(R"([
        {"name": "age", "kind": "continuous"},
        {"name": "partner", "kind": "binary"},
        {"name": "office", "kind": "categorical", "baseline": "boston",
         "levels": ["boston", "hartford", "providence"]}
    ])");
    const auto schema = parse_schema_json(in);
    REQUIRE(schema.size() == 3);
    CHECK(schema[0].name == "age");
    CHECK(schema[0].kind == ColumnKind::continuous);
    CHECK_FALSE(schema[0].categorical);
    CHECK(schema[1].kind == ColumnKind::binary);
    CHECK(schema[2].categorical);
    CHECK(schema[2].baseline == "boston");
    CHECK(schema[2].levels.size() == 3);

    std::istringstream bad(R"([{"name": "x", "kind": "ordinal"}])");
    CHECK_THROWS_AS(parse_schema_json(bad), std::runtime_error);
    std::istringstream nobase(R"([{"name": "x", "kind": "categorical"}])");
    CHECK_THROWS_AS(parse_schema_json(nobase), std::exception);
    std::istringstream notlist(R"({"name": "x"})");
    CHECK_THROWS_AS(parse_schema_json(notlist), std::runtime_error);
}
