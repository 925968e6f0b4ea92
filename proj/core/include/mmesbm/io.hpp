#ifndef MMESBM_IO_HPP
#define MMESBM_IO_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmesbm/network.hpp"
#include "mmesbm/vb.hpp"

namespace mmesbm {

// round-trip float formatting for all numeric CSV/JSON output
std::string fmt_double(double x);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names = {},
                      const std::vector<std::string>& row_names = {});

// fit.json: everything needed to reproduce and post-process a fit
void write_fit_json(std::ostream& out, const FitResult& fit, const ModelConfig& config,
                    const std::vector<std::string>& covariate_names);

struct LoadedFit {
    FitResult fit;
    ModelConfig config;
    std::vector<std::string> covariate_names;
};
LoadedFit read_fit_json(std::istream& in);

// covariate schema: JSON list of {name, kind, baseline?, levels?}
std::vector<ColumnSpec> parse_schema_json(std::istream& in);

}  // namespace mmesbm

#endif
