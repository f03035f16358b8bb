#include "matsketch/matrix.hpp"

#include "matsketch/errors.hpp"

#include <cmath>
#include <limits>

namespace matsketch {

std::vector<double> Matrix::column(std::size_t j) const {
    if (j >= n_cols) throw UsageError("Matrix::column: index out of range");
    std::vector<double> out(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) out[i] = at(i, j);
    return out;
}

bool Matrix::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

std::pair<std::size_t, std::size_t> CondensedDistances::pair_at(std::size_t t) const {
    if (t >= d2.size()) throw UsageError("CondensedDistances::pair_at: offset out of range");
    // Walk the i-major blocks; block i holds m-1-i entries.
    std::size_t i = 0;
    std::size_t block = m - 1;
    while (t >= block) {
        t -= block;
        ++i;
        --block;
    }
    return {i, i + 1 + t};
}

std::pair<Matrix, NormalizationParams> normalize_columns(const Matrix& m) {
    if (m.n_rows == 0 || m.n_cols == 0)
        throw UsageError("normalize_columns: matrix must have at least one row and one column");
    if (!m.all_finite())
        throw UsageError("normalize_columns: matrix contains non-finite values");

    NormalizationParams params;
    params.col_min.resize(m.n_cols);
    params.col_max.resize(m.n_cols);

    for (std::size_t j = 0; j < m.n_cols; ++j) {
        double lo = m.at(0, j), hi = m.at(0, j);
        for (std::size_t i = 1; i < m.n_rows; ++i) {
            lo = std::min(lo, m.at(i, j));
            hi = std::max(hi, m.at(i, j));
        }
        params.col_min[j] = lo;
        // Constant column: record a unit range so the affine map is invertible;
        // the normalized column becomes all zeros either way.
        params.col_max[j] = (hi == lo) ? lo + 1.0 : hi;
    }

    Matrix out(m.n_rows, m.n_cols);
    out.row_labels = m.row_labels;
    out.col_labels = m.col_labels;
    for (std::size_t i = 0; i < m.n_rows; ++i)
        for (std::size_t j = 0; j < m.n_cols; ++j)
            out.at(i, j) = params.to_unit(j, m.at(i, j));
    return {std::move(out), std::move(params)};
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw UsageError("euclidean_distance: vectors differ in length");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

CondensedDistances condensed_sq_dist(const Matrix& m) {
    if (m.n_rows < 2)
        throw UsageError("condensed_sq_dist: need at least two rows");
    CondensedDistances out;
    out.m = m.n_rows;
    out.d2.resize(CondensedDistances::length(m.n_rows));
    const std::size_t p = m.n_cols;
    std::size_t t = 0;
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        const double* ri = m.values.data() + i * p;
        for (std::size_t j = i + 1; j < m.n_rows; ++j) {
            const double* rj = m.values.data() + j * p;
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double d = ri[k] - rj[k];
                s += d * d;
            }
            out.d2[t++] = s;
        }
    }
    return out;
}

CondensedDistances condensed_sq_dist_column(std::span<const double> col) {
    if (col.size() < 2)
        throw UsageError("condensed_sq_dist_column: need at least two values");
    CondensedDistances out;
    out.m = col.size();
    out.d2.resize(CondensedDistances::length(col.size()));
    std::size_t t = 0;
    for (std::size_t i = 0; i < col.size(); ++i)
        for (std::size_t j = i + 1; j < col.size(); ++j) {
            const double d = col[i] - col[j];
            out.d2[t++] = d * d;
        }
    return out;
}

void accumulate_in_place(CondensedDistances& a, const CondensedDistances& b) {
    if (a.m != b.m)
        throw UsageError("accumulate: condensed arrays differ in size");
    for (std::size_t t = 0; t < a.d2.size(); ++t) a.d2[t] += b.d2[t];
}

CondensedDistances accumulate(const CondensedDistances& a, const CondensedDistances& b) {
    CondensedDistances out = a;
    accumulate_in_place(out, b);
    return out;
}

double frobenius_correlation(const CondensedDistances& a, const CondensedDistances& b) {
    if (a.m != b.m)
        throw UsageError("frobenius_correlation: condensed arrays differ in size");
    long double dot = 0.0L, na2 = 0.0L, nb2 = 0.0L;
    for (std::size_t t = 0; t < a.d2.size(); ++t) {
        dot += static_cast<long double>(a.d2[t]) * b.d2[t];
        na2 += static_cast<long double>(a.d2[t]) * a.d2[t];
        nb2 += static_cast<long double>(b.d2[t]) * b.d2[t];
    }
    if (na2 == 0.0L || nb2 == 0.0L) return 0.0;
    long double c = dot / (sqrtl(na2) * sqrtl(nb2));
    if (c < 0.0L) c = 0.0L;
    if (c > 1.0L) c = 1.0L;
    return static_cast<double>(c);
}

} // namespace matsketch
