#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/linalg.hpp"

#include <Eigen/Dense>

#include <numeric>
#include <utility>
#include <vector>

namespace ivproc {

/// Multivariate time series sample. Row t of `values` is the observation
/// X_t; columns are the coordinate processes in index order 1..n.
struct SeriesData {
    Eigen::MatrixXd values;

    [[nodiscard]] long len() const { return values.rows(); }
    [[nodiscard]] int dim() const { return static_cast<int>(values.cols()); }
};

inline SeriesData make_series(Eigen::MatrixXd values) {
    if (values.rows() < 1 || values.cols() < 1)
        throw argument_error("series must have at least one time point and one coordinate");
    if (!values.allFinite()) throw argument_error("series contains non-finite entries");
    return SeriesData{std::move(values)};
}

enum class CovProvenance { theoretical, estimated };

/// Integrated covariance matrix of a set of coordinate processes: the sum
/// over all lags of the autocovariances (time series), or the integral of
/// the covariance density over all offsets (point process). `labels` maps
/// matrix positions to 1-based process indices.
struct IntCov {
    Eigen::MatrixXd c;
    CovProvenance provenance = CovProvenance::estimated;
    std::vector<int> labels;

    [[nodiscard]] int dim() const { return static_cast<int>(c.rows()); }

    [[nodiscard]] Eigen::Index position_of(int label) const {
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] == label) return static_cast<Eigen::Index>(k);
        throw domain_error("process index " + std::to_string(label) +
                           " not present in covariance labels");
    }

    [[nodiscard]] double entry(int row_label, int col_label) const {
        return c(position_of(row_label), position_of(col_label));
    }

    /// Block C[rows, cols] addressed by process labels.
    [[nodiscard]] Eigen::MatrixXd block(const NodeSet& rows, const NodeSet& cols) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(cols.size()));
        Eigen::Index r = 0;
        for (int i : rows) {
            Eigen::Index cidx = 0;
            for (int j : cols) out(r, cidx++) = entry(i, j);
            ++r;
        }
        return out;
    }
};

inline std::vector<int> default_labels(int n) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::iota(labels.begin(), labels.end(), 1);
    return labels;
}

inline IntCov make_intcov(Eigen::MatrixXd c, CovProvenance provenance) {
    if (c.rows() != c.cols()) throw argument_error("integrated covariance must be square");
    if (!is_symmetric(c, 1e-8))
        throw argument_error("integrated covariance must be symmetric within 1e-8");
    const int n = static_cast<int>(c.rows());
    return IntCov{std::move(c), provenance, default_labels(n)};
}

} // namespace ivproc
