#ifndef MMESBM_NETWORK_HPP
#define MMESBM_NETWORK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmesbm {

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Directed irreflexive binary network with an observation mask.
// Diagonal entries are undefined: mask(i,i) == 0 always.
struct Network {
    int n_actors = 0;
    Eigen::MatrixXi adjacency;  // entries in {0,1} wherever mask is set
    Mask mask;                  // 1 = observed

    Network() = default;
    explicit Network(int n)
        : n_actors(n),
          adjacency(Eigen::MatrixXi::Zero(n, n)),
          mask(Mask::Ones(n, n)) {
        mask.diagonal().setZero();
    }

    bool observed(int i, int j) const { return mask(i, j) != 0; }
    int y(int i, int j) const { return adjacency(i, j); }

    // ordered (i,j) pairs with mask set
    std::vector<std::pair<int, int>> observed_dyads() const;
    long n_observed() const;
    long n_links() const;  // observed links only
};

enum class ColumnKind { intercept, continuous, binary, dummy };

// Declares how one raw covariate column is treated.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;  // continuous | binary | categorical
    bool categorical = false;
    std::string baseline;                       // required when categorical
    std::vector<std::string> levels;            // optional; validates input when given
};

// N x P design matrix: intercept column first, continuous columns
// standardized to mean 0 / sd 1, categoricals expanded against baseline.
struct CovariateMatrix {
    int n_actors = 0;
    Eigen::MatrixXd values;  // N x P
    std::vector<std::string> column_names;
    std::vector<ColumnKind> column_kinds;

    int n_covariates() const { return static_cast<int>(values.cols()); }

    // intercept-only design, P = 1
    static CovariateMatrix intercept_only(int n);
};

// Random partition of the N(N-1) off-diagonal dyads into k folds.
struct FoldAssignment {
    int n_folds = 0;
    std::uint64_t seed = 0;
    Eigen::MatrixXi fold_of;  // 1-based fold index; -1 on the diagonal

    std::vector<long> fold_sizes() const;
    void write_csv(std::ostream& out) const;
};

Network load_edge_list(std::istream& in, int n_actors);
Network load_adjacency_csv(std::istream& in);
void write_edge_list(std::ostream& out, const Network& net);

CovariateMatrix load_covariates(std::istream& in, const std::vector<ColumnSpec>& schema);

FoldAssignment make_folds(const Network& net, int k, std::uint64_t seed);
Network mask_fold(const Network& net, const FoldAssignment& folds, int drop);

}  // namespace mmesbm

#endif
