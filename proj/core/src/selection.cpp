#include "mmesbm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmesbm/parallel.hpp"

namespace mmesbm {

double holdout_loglik(const Eigen::MatrixXd& theta_hat, const Eigen::VectorXd& tau_i,
                      const Eigen::VectorXd& tau_j, int y) {
    const int G = static_cast<int>(theta_hat.rows());
    double p = 0.0;
    for (int g = 0; g < G; ++g)
        for (int h = 0; h < G; ++h)
            p += tau_i(g) * tau_j(h) * (y ? theta_hat(g, h) : 1.0 - theta_hat(g, h));
    return std::log(p);
}

CvReport cross_validate(const Network& net, const CovariateMatrix& covariates,
                        const std::vector<int>& g_range, int k, const ModelConfig& base_config,
                        std::uint64_t fold_seed) {
    if (g_range.empty()) throw std::invalid_argument("cross_validate: empty G range");
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");

    CvReport report;
    report.folds = make_folds(net, k, fold_seed);

    struct Task {
        int G = 0;
        int fold = 0;
        bool ok = false;
        double mean = 0.0;
        long count = 0;
        std::vector<CvPrediction> predictions;
        std::string warning;
    };
    std::vector<Task> tasks;
    for (int G : g_range)
        for (int f = 1; f <= k; ++f) tasks.push_back({G, f, false, 0.0, 0, {}, ""});

    parallel_for(static_cast<int>(tasks.size()), base_config.n_jobs, [&](int t) {
        Task& task = tasks[t];
        ModelConfig config = base_config;
        config.n_groups = task.G;
        const Network train = mask_fold(net, report.folds, task.fold);
        FitResult res;
        try {
            res = fit(train, covariates, std::nullopt, config);
        } catch (const std::exception& e) {
            task.warning = "G=" + std::to_string(task.G) + " fold " +
                           std::to_string(task.fold) + " excluded: " + e.what();
            return;
        }
        double total = 0.0;
        for (int i = 0; i < net.n_actors; ++i) {
            for (int j = 0; j < net.n_actors; ++j) {
                if (i == j || report.folds.fold_of(i, j) != task.fold || !net.mask(i, j))
                    continue;
                const int y = net.adjacency(i, j);
                total += holdout_loglik(res.theta_hat, res.tau_hat.row(i).transpose(),
                                        res.tau_hat.row(j).transpose(), y);
                ++task.count;
                task.predictions.push_back(
                    {task.G, task.fold, i + 1, j + 1,
                     std::exp(holdout_loglik(res.theta_hat, res.tau_hat.row(i).transpose(),
                                             res.tau_hat.row(j).transpose(), 1)),
                     y});
            }
        }
        if (task.count == 0) return;
        task.mean = total / task.count;
        task.ok = true;
    });

    for (int G : g_range) {
        std::vector<double> fold_means;
        for (const auto& task : tasks) {
            if (task.G != G) continue;
            if (!task.warning.empty()) report.warnings.push_back(task.warning);
            if (!task.ok) continue;
            report.fold_scores.push_back({G, task.fold, task.mean, task.count});
            report.predictions.insert(report.predictions.end(), task.predictions.begin(),
                                      task.predictions.end());
            fold_means.push_back(task.mean);
        }
        CvSummary s;
        s.n_groups = G;
        s.folds_used = static_cast<int>(fold_means.size());
        if (!fold_means.empty()) {
            double m = 0.0;
            for (double v : fold_means) m += v;
            m /= fold_means.size();
            double var = 0.0;
            for (double v : fold_means) var += (v - m) * (v - m);
            var = fold_means.size() > 1 ? var / (fold_means.size() - 1) : 0.0;
            s.mean = m;
            s.std_error = std::sqrt(var / fold_means.size());
        } else {
            s.mean = -std::numeric_limits<double>::infinity();
            report.warnings.push_back("G=" + std::to_string(G) + ": no usable folds");
        }
        report.summary.push_back(s);
    }

    // one-standard-error rule: smallest G within one SE of the best mean
    const auto best = std::max_element(
        report.summary.begin(), report.summary.end(),
        [](const CvSummary& a, const CvSummary& b) { return a.mean < b.mean; });
    const double cutoff = best->mean - best->std_error;
    int chosen = best->n_groups;
    for (const auto& s : report.summary) {
        if (s.mean >= cutoff && s.n_groups < chosen) chosen = s.n_groups;
    }
    report.chosen_G = chosen;
    return report;
}

RocResult roc_auc(const std::vector<std::pair<double, int>>& scores) {
    long n_pos = 0, n_neg = 0;
    for (const auto& [s, y] : scores) (y ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc: need both positive and negative labels");

    std::vector<std::pair<double, int>> sorted = scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocResult out;
    out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    long tp = 0, fp = 0;
    double mw = 0.0;  // Mann-Whitney count, ties at 1/2
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        long tp_tie = 0, fp_tie = 0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            (sorted[j].second ? tp_tie : fp_tie)++;
            ++j;
        }
        // positives tied with these negatives contribute 1/2; negatives
        // already passed (fp) count fully against each new positive
        mw += static_cast<double>(tp_tie) * (static_cast<double>(n_neg - fp) - fp_tie / 2.0);
        tp += tp_tie;
        fp += fp_tie;
        out.points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos,
                              sorted[i].first});
        i = j;
    }
    out.auc = mw / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return out;
}

}  // namespace mmesbm
