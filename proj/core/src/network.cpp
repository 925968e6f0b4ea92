#include "mmesbm/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mmesbm {

std::vector<std::pair<int, int>> Network::observed_dyads() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(n_actors) * (n_actors - 1));
    for (int i = 0; i < n_actors; ++i)
        for (int j = 0; j < n_actors; ++j)
            if (i != j && mask(i, j)) out.emplace_back(i, j);
    return out;
}

long Network::n_observed() const {
    long c = 0;
    for (int i = 0; i < n_actors; ++i)
        for (int j = 0; j < n_actors; ++j)
            if (i != j && mask(i, j)) ++c;
    return c;
}

long Network::n_links() const {
    long c = 0;
    for (int i = 0; i < n_actors; ++i)
        for (int j = 0; j < n_actors; ++j)
            if (i != j && mask(i, j) && adjacency(i, j)) ++c;
    return c;
}

CovariateMatrix CovariateMatrix::intercept_only(int n) {
    CovariateMatrix w;
    w.n_actors = n;
    w.values = Eigen::MatrixXd::Ones(n, 1);
    w.column_names = {"intercept"};
    w.column_kinds = {ColumnKind::intercept};
    return w;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

Network load_edge_list(std::istream& in, int n_actors) {
    if (n_actors < 1) throw std::invalid_argument("load_edge_list: n_actors must be positive");
    Network net(n_actors);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto fields = split_csv(s);
        if (fields.size() != 2)
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": expected \"source,target\"");
        int i, j;
        try {
            std::size_t pos;
            i = std::stoi(fields[0], &pos);
            if (pos != fields[0].size()) throw std::invalid_argument("");
            j = std::stoi(fields[1], &pos);
            if (pos != fields[1].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": ids must be integers");
        }
        if (i < 1 || i > n_actors || j < 1 || j > n_actors)
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": id out of range [1," + std::to_string(n_actors) + "]");
        if (i == j)
            throw std::runtime_error("edge list line " + std::to_string(lineno) +
                                     ": self-loop rejected (network is irreflexive)");
        net.adjacency(i - 1, j - 1) = 1;
    }
    return net;
}

Network load_adjacency_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        rows.push_back(split_csv(s));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw std::runtime_error("adjacency csv: empty input");
    Network net(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::runtime_error("adjacency csv row " + std::to_string(i + 1) + ": expected " +
                                     std::to_string(n) + " columns, got " +
                                     std::to_string(rows[i].size()));
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;  // diagonal ignored
            const std::string& f = rows[i][j];
            if (f != "0" && f != "1")
                throw std::runtime_error("adjacency csv row " + std::to_string(i + 1) +
                                         ": entries must be 0 or 1");
            net.adjacency(i, j) = (f == "1");
        }
    }
    return net;
}

void write_edge_list(std::ostream& out, const Network& net) {
    for (int i = 0; i < net.n_actors; ++i)
        for (int j = 0; j < net.n_actors; ++j)
            if (i != j && net.mask(i, j) && net.adjacency(i, j))
                out << (i + 1) << "," << (j + 1) << "\n";
}

CovariateMatrix load_covariates(std::istream& in, const std::vector<ColumnSpec>& schema) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("covariates csv: missing header");
    auto header = split_csv(trim(line));
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto fields = split_csv(s);
        if (fields.size() != header.size())
            throw std::runtime_error("covariates csv row " + std::to_string(rows.size() + 1) +
                                     ": field count does not match header");
        rows.push_back(std::move(fields));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw std::runtime_error("covariates csv: no data rows");

    CovariateMatrix w;
    w.n_actors = n;
    std::vector<Eigen::VectorXd> cols;
    cols.push_back(Eigen::VectorXd::Ones(n));
    w.column_names.push_back("intercept");
    w.column_kinds.push_back(ColumnKind::intercept);

    for (const auto& spec : schema) {
        auto it = std::find(header.begin(), header.end(), spec.name);
        if (it == header.end())
            throw std::runtime_error("covariates csv: column \"" + spec.name + "\" not found");
        const int c = static_cast<int>(it - header.begin());

        std::vector<std::string> raw(n);
        for (int r = 0; r < n; ++r) {
            raw[r] = rows[r][c];
            if (raw[r].empty())
                throw std::runtime_error("covariates csv: missing value in column \"" + spec.name +
                                         "\", row " + std::to_string(r + 1));
        }

        if (spec.categorical) {
            std::vector<std::string> levels = spec.levels;
            if (levels.empty()) {
                for (const auto& v : raw)
                    if (std::find(levels.begin(), levels.end(), v) == levels.end())
                        levels.push_back(v);
                std::sort(levels.begin(), levels.end());
            } else {
                for (const auto& v : raw)
                    if (std::find(levels.begin(), levels.end(), v) == levels.end())
                        throw std::runtime_error("covariates csv: unknown level \"" + v +
                                                 "\" in column \"" + spec.name + "\"");
            }
            if (std::find(levels.begin(), levels.end(), spec.baseline) == levels.end())
                throw std::runtime_error("covariates csv: baseline \"" + spec.baseline +
                                         "\" not a level of column \"" + spec.name + "\"");
            for (const auto& lvl : levels) {
                if (lvl == spec.baseline) continue;
                Eigen::VectorXd col(n);
                for (int r = 0; r < n; ++r) col(r) = (raw[r] == lvl) ? 1.0 : 0.0;
                cols.push_back(col);
                w.column_names.push_back(spec.name + "=" + lvl);
                w.column_kinds.push_back(ColumnKind::dummy);
            }
            continue;
        }

        Eigen::VectorXd col(n);
        for (int r = 0; r < n; ++r) {
            try {
                std::size_t pos;
                col(r) = std::stod(raw[r], &pos);
                if (pos != raw[r].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::runtime_error("covariates csv: non-numeric value \"" + raw[r] +
                                         "\" in column \"" + spec.name + "\"");
            }
        }
        if (spec.kind == ColumnKind::binary) {
            for (int r = 0; r < n; ++r)
                if (col(r) != 0.0 && col(r) != 1.0)
                    throw std::runtime_error("covariates csv: binary column \"" + spec.name +
                                             "\" has value outside {0,1}");
            w.column_kinds.push_back(ColumnKind::binary);
        } else {
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
            if (sd <= 0.0 || !std::isfinite(sd))
                throw std::runtime_error("covariates csv: column \"" + spec.name +
                                         "\" has zero variance, cannot standardize");
            col = (col.array() - mean) / sd;
            w.column_kinds.push_back(ColumnKind::continuous);
        }
        cols.push_back(col);
        w.column_names.push_back(spec.name);
    }

    w.values.resize(n, static_cast<int>(cols.size()));
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) w.values.col(c) = cols[c];
    return w;
}

std::vector<long> FoldAssignment::fold_sizes() const {
    std::vector<long> sizes(n_folds, 0);
    for (int i = 0; i < fold_of.rows(); ++i)
        for (int j = 0; j < fold_of.cols(); ++j)
            if (i != j) ++sizes[fold_of(i, j) - 1];
    return sizes;
}

void FoldAssignment::write_csv(std::ostream& out) const {
    out << "i,j,fold\n";
    for (int i = 0; i < fold_of.rows(); ++i)
        for (int j = 0; j < fold_of.cols(); ++j)
            if (i != j) out << (i + 1) << "," << (j + 1) << "," << fold_of(i, j) << "\n";
}

FoldAssignment make_folds(const Network& net, int k, std::uint64_t seed) {
    const int n = net.n_actors;
    const long n_dyads = static_cast<long>(n) * (n - 1);
    if (k < 2 || k > n_dyads)
        throw std::invalid_argument("make_folds: k must be in [2, N(N-1)]");
    std::vector<std::pair<int, int>> dyads;
    dyads.reserve(n_dyads);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) dyads.emplace_back(i, j);
    std::mt19937_64 rng(seed);
    std::shuffle(dyads.begin(), dyads.end(), rng);

    FoldAssignment fa;
    fa.n_folds = k;
    fa.seed = seed;
    fa.fold_of = Eigen::MatrixXi::Constant(n, n, -1);
    for (long d = 0; d < n_dyads; ++d)
        fa.fold_of(dyads[d].first, dyads[d].second) = static_cast<int>(d % k) + 1;
    return fa;
}

Network mask_fold(const Network& net, const FoldAssignment& folds, int drop) {
    if (drop < 1 || drop > folds.n_folds)
        throw std::invalid_argument("mask_fold: fold index out of range");
    Network out = net;
    for (int i = 0; i < net.n_actors; ++i)
        for (int j = 0; j < net.n_actors; ++j)
            if (i != j && folds.fold_of(i, j) == drop) out.mask(i, j) = 0;
    return out;
}

}  // namespace mmesbm
