#pragma once

#include "matsketch/matrix.hpp"

#include <string>
#include <vector>

namespace matsketch {

struct CategoricalColumn {
    std::string name;
    std::vector<std::string> values;
    std::vector<std::string> levels; // distinct labels, first-appearance order
};

/// Builds the column and derives its levels in first-appearance order.
CategoricalColumn make_categorical(std::string name, std::vector<std::string> values);

/// Correspondence-analysis encoding of one categorical variable: the
/// eigendecomposition of the covariance of its column-centered dummy codes.
struct CAEncoding {
    std::vector<std::string> levels;
    std::vector<double> level_means;   // dummy-column means, used for centering
    Matrix eigenvectors;               // levels x retained, orthonormal
    std::vector<double> eigenvalues;   // descending, >= 0 (tiny negatives clamped)
    std::size_t retained = 0;          // components with eigenvalue > 1e-10
};

/// n x L indicator matrix of the column; each row sums to 1.
Matrix dummy_code(const CategoricalColumn& col);

/// Fit the per-variable CA decomposition from an indicator matrix.
CAEncoding fit_ca(const Matrix& indicators);

/// Convenience: dummy-code the column, fit, and stamp its levels.
CAEncoding fit_ca(const CategoricalColumn& col);

/// n x retained numeric scores: centered dummy codes times the eigenvectors.
/// Score columns have zero means; the shift leaves all row distances intact.
Matrix ca_scores(const CategoricalColumn& col, const CAEncoding& enc);

} // namespace matsketch
