#include "mmesbm/beta_estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmesbm/numerics.hpp"

namespace mmesbm {

namespace {

constexpr double kExpOverflow = 690.0;  // exp() overflows double just above this

// E[log tau_ng] = Psi(gamma_ng) - Psi(sum_h gamma_nh)
Eigen::MatrixXd elog_tau_table(const Eigen::MatrixXd& gamma) {
    const int n = static_cast<int>(gamma.rows());
    const int G = static_cast<int>(gamma.cols());
    Eigen::MatrixXd out(n, G);
    for (int i = 0; i < n; ++i) {
        const double psi_sum = digamma(gamma.row(i).sum());
        for (int g = 0; g < G; ++g) out(i, g) = digamma(gamma(i, g)) - psi_sum;
    }
    return out;
}

Eigen::MatrixXd delta_checked(const Eigen::MatrixXd& covariates, const Eigen::MatrixXd& beta) {
    Eigen::MatrixXd s = covariates * beta.transpose();  // N x G
    if ((s.array() > kExpOverflow).any())
        throw std::overflow_error("exp(W beta) overflows; coefficients diverging (separability)");
    return s.array().exp();
}

}  // namespace

double beta_objective(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                      const Eigen::MatrixXd& gamma) {
    const int n = static_cast<int>(covariates.rows());
    const int G = static_cast<int>(beta.rows());
    const Eigen::MatrixXd delta = delta_checked(covariates, beta);
    const Eigen::MatrixXd elt = elog_tau_table(gamma);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += log_gamma(delta.row(i).sum());
        for (int g = 0; g < G; ++g)
            total += -log_gamma(delta(i, g)) + (delta(i, g) - 1.0) * elt(i, g);
    }
    return total;
}

Eigen::MatrixXd beta_gradient(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                              const Eigen::MatrixXd& gamma) {
    const int n = static_cast<int>(covariates.rows());
    const int G = static_cast<int>(beta.rows());
    const int P = static_cast<int>(beta.cols());
    const Eigen::MatrixXd delta = delta_checked(covariates, beta);
    const Eigen::MatrixXd elt = elog_tau_table(gamma);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(G, P);
    for (int i = 0; i < n; ++i) {
        const double psi_dsum = digamma(delta.row(i).sum());
        for (int g = 0; g < G; ++g) {
            const double core =
                delta(i, g) * (psi_dsum - digamma(delta(i, g)) + elt(i, g));
            for (int p = 0; p < P; ++p) grad(g, p) += covariates(i, p) * core;
        }
    }
    return grad;
}

Eigen::MatrixXd beta_hessian(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& covariates,
                             const Eigen::MatrixXd& gamma) {
    const int n = static_cast<int>(covariates.rows());
    const int G = static_cast<int>(beta.rows());
    const int P = static_cast<int>(beta.cols());
    const Eigen::MatrixXd delta = delta_checked(covariates, beta);
    const Eigen::MatrixXd elt = elog_tau_table(gamma);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(G * P, G * P);
    for (int i = 0; i < n; ++i) {
        const double dsum = delta.row(i).sum();
        const double psi_dsum = digamma(dsum);
        const double psi1_dsum = trigamma(dsum);
        for (int a = 0; a < G; ++a) {
            for (int b = 0; b < G; ++b) {
                double curv = delta(i, a) * delta(i, b) *
                              (psi1_dsum - (a == b ? trigamma(delta(i, a)) : 0.0));
                if (a == b)
                    curv += delta(i, a) *
                            (psi_dsum - digamma(delta(i, a)) + elt(i, a));
                for (int q = 0; q < P; ++q)
                    for (int r = 0; r < P; ++r)
                        hess(a * P + q, b * P + r) +=
                            covariates(i, q) * covariates(i, r) * curv;
            }
        }
    }
    return hess;
}

Eigen::MatrixXd init_beta_mom(const Eigen::MatrixXd& gamma, const CovariateMatrix& covariates,
                              bool average_components, double clip_bound) {
    const int n = static_cast<int>(gamma.rows());
    const int G = static_cast<int>(gamma.cols());
    const int P = covariates.n_covariates();

    Eigen::MatrixXd tau(n, G);
    for (int i = 0; i < n; ++i) tau.row(i) = gamma.row(i) / gamma.row(i).sum();
    const Eigen::VectorXd mean = tau.colwise().mean();
    const Eigen::VectorXd m2 = tau.array().square().colwise().mean();

    auto precision_of = [&](int c) -> double {
        const double denom = m2(c) - mean(c) * mean(c);
        if (denom <= 1e-12) return static_cast<double>(G);  // degenerate: no spread
        const double prec = (mean(c) - mean(c) * mean(c)) / denom;
        return (std::isfinite(prec) && prec > 0.0) ? prec : static_cast<double>(G);
    };
    double precision;
    if (average_components) {
        precision = 0.0;
        for (int c = 0; c < G; ++c) precision += precision_of(c);
        precision /= G;
    } else {
        precision = precision_of(0);
    }

    int icol = -1;
    for (int p = 0; p < P; ++p)
        if (covariates.column_kinds[p] == ColumnKind::intercept) icol = p;
    if (icol < 0) throw std::invalid_argument("init_beta_mom: no intercept column");

    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(G, P);
    for (int g = 0; g < G; ++g) {
        double v = std::log(mean(g) * precision);
        if (!std::isfinite(v)) v = -clip_bound;
        beta(g, icol) = std::clamp(v, -clip_bound, clip_bound);
    }
    return beta;
}

Eigen::MatrixXd estimate_beta(const Eigen::MatrixXd& beta_in, const CovariateMatrix& covariates,
                              const Eigen::MatrixXd& gamma, const NewtonOptions& opts,
                              BetaDiagnostics* diag) {
    const int G = static_cast<int>(beta_in.rows());
    const int P = static_cast<int>(beta_in.cols());
    BetaDiagnostics local;
    BetaDiagnostics& d = diag ? *diag : local;
    d = BetaDiagnostics{};

    auto clamp_mat = [&](Eigen::MatrixXd b) {
        for (int g = 0; g < G; ++g)
            for (int p = 0; p < P; ++p)
                b(g, p) = std::clamp(b(g, p), -opts.clip_bound, opts.clip_bound);
        return b;
    };

    // At G = 1 every Psi difference cancels and the gradient is identically zero.
    if (G == 1) return clamp_mat(beta_in);

    const Eigen::MatrixXd& w = covariates.values;
    Eigen::MatrixXd beta = clamp_mat(beta_in);
    if (!beta.allFinite())
        throw std::invalid_argument("estimate_beta: non-finite starting coefficients");

    auto objective_safe = [&](const Eigen::MatrixXd& b) -> double {
        try {
            const double f = beta_objective(b, w, gamma);
            return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
        } catch (const std::overflow_error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    double f = objective_safe(beta);
    double lambda = opts.initial_damping;
    double grad_norm = 0.0;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        Eigen::MatrixXd grad_mat, hess;
        try {
            grad_mat = beta_gradient(beta, w, gamma);
            hess = beta_hessian(beta, w, gamma);
        } catch (const std::overflow_error& e) {
            d.separability_warnings.push_back(e.what());
            break;
        }
        if (!grad_mat.allFinite() || !hess.allFinite())
            throw std::runtime_error("estimate_beta: non-finite gradient or Hessian");

        Eigen::VectorXd grad(G * P);
        for (int g = 0; g < G; ++g)
            for (int p = 0; p < P; ++p) grad(g * P + p) = grad_mat(g, p);
        grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (grad_norm < opts.grad_tolerance) break;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = hess;
            damped.diagonal().array() -= lambda;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            Eigen::VectorXd dir;
            bool solvable = (ldlt.info() == Eigen::Success);
            if (solvable) {
                dir = -ldlt.solve(grad);  // ascent step for the maximization
                solvable = dir.allFinite() && dir.dot(grad) > 0.0;
            }
            if (solvable) {
                Eigen::MatrixXd step(G, P);
                for (int g = 0; g < G; ++g)
                    for (int p = 0; p < P; ++p) step(g, p) = dir(g * P + p);
                double eta = 1.0;
                for (int h = 0; h <= opts.max_halvings; ++h, eta *= 0.5) {
                    Eigen::MatrixXd cand = clamp_mat(beta + eta * step);
                    if ((cand - beta).cwiseAbs().maxCoeff() == 0.0) continue;
                    const double fc = objective_safe(cand);
                    if (fc >= f) {
                        beta = cand;
                        f = fc;
                        accepted = true;
                        break;
                    }
                }
            }
            if (!accepted) {
                lambda = (lambda == 0.0) ? 1e-4 : lambda * 10.0;
                if (lambda > opts.max_damping) break;
            }
        }
        ++d.iterations;
        if (!accepted) break;  // damping exhausted; keep current beta
    }

    for (int p = 0; p < P; ++p) {
        for (int g = 0; g < G; ++g) {
            if (std::abs(beta(g, p)) >= opts.clip_bound) {
                d.separability_warnings.push_back(
                    "separability: coefficient for \"" + covariates.column_names[p] +
                    "\" (group " + std::to_string(g + 1) + ") clamped at |beta| = " +
                    std::to_string(opts.clip_bound));
            }
        }
    }
    try {
        d.final_grad_norm = beta_gradient(beta, w, gamma).lpNorm<Eigen::Infinity>();
    } catch (const std::overflow_error&) {
        d.final_grad_norm = std::numeric_limits<double>::quiet_NaN();
    }
    d.damping_used = lambda;
    return beta;
}

Eigen::MatrixXd beta_curvature_se(const Eigen::MatrixXd& beta, const CovariateMatrix& covariates,
                                  const Eigen::MatrixXd& gamma) {
    const int G = static_cast<int>(beta.rows());
    const int P = static_cast<int>(beta.cols());
    Eigen::MatrixXd se = Eigen::MatrixXd::Constant(G, P, std::numeric_limits<double>::quiet_NaN());
    if (G == 1) return se;
    Eigen::MatrixXd neg_h = -beta_hessian(beta, covariates.values, gamma);
    for (double lambda = 0.0;; lambda = (lambda == 0.0) ? 1e-8 : lambda * 10.0) {
        Eigen::MatrixXd damped = neg_h;
        damped.diagonal().array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
        if (ldlt.info() == Eigen::Success) {
            Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(G * P, G * P));
            if (inv.allFinite() && (inv.diagonal().array() > 0.0).all()) {
                for (int g = 0; g < G; ++g)
                    for (int p = 0; p < P; ++p)
                        se(g, p) = std::sqrt(inv(g * P + p, g * P + p));
                return se;
            }
        }
        if (lambda > 1e6) return se;  // curvature unusable; NaNs signal that
    }
}

}  // namespace mmesbm
