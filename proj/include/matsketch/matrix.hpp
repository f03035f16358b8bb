#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace matsketch {

/// Dense row-major matrix of doubles. Rows are points, columns are dimensions.
/// Labels are optional; when present their lengths match n_rows / n_cols.
struct Matrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values; // row-major, n_rows * n_cols
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), values(rows * cols, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }

    std::vector<double> column(std::size_t j) const;

    /// True when every entry is finite (no NaN or infinity).
    bool all_finite() const;
};

/// Per-column (min, max) recorded by normalize_columns. A constant column is
/// stored as (min, min + 1) so the inverse map stays well-defined.
struct NormalizationParams {
    std::vector<double> col_min;
    std::vector<double> col_max;

    std::size_t n_cols() const { return col_min.size(); }
    double to_unit(std::size_t j, double x) const {
        return (x - col_min[j]) / (col_max[j] - col_min[j]);
    }
    double from_unit(std::size_t j, double u) const {
        return col_min[j] + u * (col_max[j] - col_min[j]);
    }
};

/// Pairwise squared Euclidean distances stored as the flat upper triangle:
/// pairs (i,j), i < j, in i-major order (0,1),(0,2),...,(0,m-1),(1,2),...
struct CondensedDistances {
    std::size_t m = 0;          // number of points
    std::vector<double> d2;     // length m*(m-1)/2

    static std::size_t length(std::size_t m) { return m * (m - 1) / 2; }

    /// Flat offset of pair (i,j), requires i < j < m.
    std::size_t offset(std::size_t i, std::size_t j) const {
        return i * (2 * m - i - 1) / 2 + (j - i - 1);
    }

    /// Inverse of offset(): the (i,j) pair stored at flat position t.
    std::pair<std::size_t, std::size_t> pair_at(std::size_t t) const;
};

/// Min-max normalize each column to [0,1]; x -> (x - min) / (max - min).
/// A constant column maps to all zeros and records range (min, min + 1).
std::pair<Matrix, NormalizationParams> normalize_columns(const Matrix& m);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Condensed array of squared distances between all row pairs of m.
/// Per-entry accumulation runs over columns in ascending order, so the result
/// is bit-identical to summing the per-column arrays in that same order.
CondensedDistances condensed_sq_dist(const Matrix& m);

/// Condensed array for a single column: entry (i,j) = (col[i] - col[j])^2.
CondensedDistances condensed_sq_dist_column(std::span<const double> col);

/// Element-wise sum of two condensed arrays over the same m.
CondensedDistances accumulate(const CondensedDistances& a, const CondensedDistances& b);
void accumulate_in_place(CondensedDistances& a, const CondensedDistances& b);

/// Cosine between two condensed arrays under the element-wise inner product,
/// clamped to [0,1]. Zero-norm input yields 0 by convention.
double frobenius_correlation(const CondensedDistances& a, const CondensedDistances& b);

} // namespace matsketch
