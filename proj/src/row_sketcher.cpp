#include "matsketch/row_sketcher.hpp"

#include "matsketch/errors.hpp"
#include "matsketch/rng.hpp"

#include <cmath>
#include <numeric>

namespace matsketch {

double default_radius(std::size_t n, std::size_t p) {
    if (n < 2) throw UsageError("default_radius: need n >= 2");
    if (p < 1) throw UsageError("default_radius: need p >= 1");
    return 0.25 / std::pow(std::log(static_cast<double>(n)), 1.0 / static_cast<double>(p));
}

namespace {

// Squared distance with early abandonment: once the partial sum reaches the
// threshold the row cannot be a member, so the exact value is irrelevant.
inline bool within_radius_sq(const double* a, const double* b, std::size_t p, double r2) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
        if (s >= r2) return false;
    }
    return s < r2;
}

} // namespace

RowSketch sketch_rows(const Matrix& x, const RowSketchConfig& cfg) {
    if (x.n_rows == 0 || x.n_cols == 0)
        throw UsageError("sketch_rows: empty matrix");

    const std::size_t n = x.n_rows;
    const std::size_t p = x.n_cols;
    const double sqrt_p = std::sqrt(static_cast<double>(p));

    double r;
    if (cfg.radius) {
        r = *cfg.radius;
        if (!(r > 0.0) || r > sqrt_p)
            throw UsageError("sketch_rows: radius must lie in (0, sqrt(p)]");
    } else {
        r = (n >= 2) ? default_radius(n, p) : 0.25;
    }
    const double r2 = r * r;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle_seed) {
        Rng rng(*cfg.shuffle_seed);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
    }

    RowSketch sketch;
    sketch.radius_used = r;
    std::vector<double> exemplar_rows; // row-major m x p, grown as found
    exemplar_rows.reserve(64 * p);

    for (std::size_t idx : order) {
        const double* row = x.values.data() + idx * p;
        bool assigned = false;
        for (std::size_t j = 0; j < sketch.m; ++j) {
            if (within_radius_sq(row, exemplar_rows.data() + j * p, p, r2)) {
                sketch.members[j].push_back(idx);
                assigned = true;
                break;
            }
        }
        if (!assigned) {
            sketch.exemplar_indices.push_back(idx);
            sketch.members.push_back({idx});
            exemplar_rows.insert(exemplar_rows.end(), row, row + p);
            ++sketch.m;
        }
    }

    sketch.weights.resize(sketch.m);
    for (std::size_t j = 0; j < sketch.m; ++j)
        sketch.weights[j] = sketch.members[j].size();
    return sketch;
}

Matrix exemplar_matrix(const RowSketch& s, const Matrix& x) {
    Matrix out(s.m, x.n_cols);
    out.col_labels = x.col_labels;
    if (!x.row_labels.empty()) out.row_labels.resize(s.m);
    for (std::size_t j = 0; j < s.m; ++j) {
        const std::size_t idx = s.exemplar_indices[j];
        if (idx >= x.n_rows)
            throw UsageError("exemplar_matrix: exemplar index out of range for this matrix");
        const double* row = x.values.data() + idx * x.n_cols;
        std::copy(row, row + x.n_cols, out.values.begin() + j * x.n_cols);
        if (!x.row_labels.empty()) out.row_labels[j] = x.row_labels[idx];
    }
    return out;
}

} // namespace matsketch
