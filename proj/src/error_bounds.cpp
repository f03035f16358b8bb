#include "matsketch/error_bounds.hpp"

#include "matsketch/errors.hpp"

#include <cmath>

namespace matsketch {

double row_pairwise_bound(std::size_t p, double r) {
    if (p < 1) throw UsageError("row_pairwise_bound: need p >= 1");
    if (!(r > 0.0)) throw UsageError("row_pairwise_bound: need r > 0");
    return 4.0 * std::sqrt(static_cast<double>(p)) * r;
}

double row_total_bound(std::size_t n, std::size_t K, std::size_t p, double r) {
    if (K < 1 || K > n) throw UsageError("row_total_bound: need 1 <= K <= n");
    return row_pairwise_bound(p, r) * static_cast<double>(n - K) *
           static_cast<double>(n - 1);
}

double column_bound(std::size_t m, std::size_t p, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw UsageError("column_bound: epsilon must lie in (0, 1]");
    const double s = 1.0 - epsilon * epsilon;
    return static_cast<double>(m) * static_cast<double>(p) * std::sqrt(s < 0.0 ? 0.0 : s);
}

std::pair<double, std::pair<std::size_t, std::size_t>>
empirical_max_sq_discrepancy(const CondensedDistances& full, const CondensedDistances& reduced) {
    if (full.m != reduced.m)
        throw UsageError("empirical_max_sq_discrepancy: condensed arrays differ in size");
    double best = std::abs(full.d2[0] - reduced.d2[0]);
    std::size_t best_t = 0;
    for (std::size_t t = 1; t < full.d2.size(); ++t) {
        const double d = std::abs(full.d2[t] - reduced.d2[t]);
        if (d > best) {
            best = d;
            best_t = t;
        }
    }
    return {best, full.pair_at(best_t)};
}

BoundReport row_bound_report(const Matrix& x, const RowSketch& rs) {
    BoundReport rep;
    rep.n = x.n_rows;
    rep.p = x.n_cols;
    rep.m = rs.m;
    rep.radius = rs.radius_used;
    rep.has_row_stage = true;
    rep.row_pairwise_bound = row_pairwise_bound(x.n_cols, rs.radius_used);
    rep.row_total_bound = row_total_bound(x.n_rows, rs.m, x.n_cols, rs.radius_used);

    if (x.n_rows < 2) return rep; // no pairs to measure

    // Replace each member row by its exemplar's row, keeping n x p shape.
    Matrix reduced(x.n_rows, x.n_cols);
    for (std::size_t j = 0; j < rs.m; ++j) {
        const std::size_t ex = rs.exemplar_indices[j];
        if (ex >= x.n_rows)
            throw UsageError("verify_bounds: sketch indices are stale for this matrix");
        for (std::size_t idx : rs.members[j]) {
            if (idx >= x.n_rows)
                throw UsageError("verify_bounds: sketch indices are stale for this matrix");
            for (std::size_t c = 0; c < x.n_cols; ++c)
                reduced.at(idx, c) = x.at(ex, c);
        }
    }

    const CondensedDistances full_d = condensed_sq_dist(x);
    const CondensedDistances red_d = condensed_sq_dist(reduced);
    auto [mx, pair] = empirical_max_sq_discrepancy(full_d, red_d);
    rep.row_empirical_max = mx;
    rep.row_argmax_pair = pair;
    long double total = 0.0L;
    for (std::size_t t = 0; t < full_d.d2.size(); ++t)
        total += std::abs(full_d.d2[t] - red_d.d2[t]);
    rep.row_total_abs_error = static_cast<double>(total);
    // 1e-12 slack absorbs summation-order rounding at the zero-error boundary.
    rep.row_theorem_holds = rep.row_empirical_max <= rep.row_pairwise_bound + 1e-12 &&
                            rep.row_total_abs_error <= rep.row_total_bound + 1e-12;
    return rep;
}

BoundReport col_bound_report(const Matrix& x, const ColSketch& cs, BoundReport rep) {
    rep.has_col_stage = true;
    rep.epsilon = cs.achieved_correlation;
    rep.column_bound = column_bound(x.n_rows, x.n_cols, cs.achieved_correlation);
    if (!rep.has_row_stage) {
        rep.n = x.n_rows;
        rep.p = x.n_cols;
        rep.m = x.n_rows; // no aggregation happened; every point kept
    }

    if (x.n_rows < 2) return rep;

    const CondensedDistances full_d = condensed_sq_dist(x);
    const CondensedDistances red_d = condensed_sq_dist(project_columns(x, cs));
    auto [mx, pair] = empirical_max_sq_discrepancy(full_d, red_d);
    rep.col_empirical_max = mx;
    rep.col_argmax_pair = pair;
    // Slack as above: a full selection has correlation 1, bound exactly 0,
    // and a discrepancy of pure rounding dust.
    rep.col_theorem_holds = rep.col_empirical_max <= rep.column_bound + 1e-12;
    return rep;
}

BoundReport verify_bounds(const Matrix& x, const RowSketch& rs,
                          const std::optional<ColSketch>& cs) {
    BoundReport rep = row_bound_report(x, rs);
    if (cs) rep = col_bound_report(exemplar_matrix(rs, x), *cs, rep);
    return rep;
}

} // namespace matsketch
