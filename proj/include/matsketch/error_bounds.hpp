#pragma once

#include "matsketch/col_sketcher.hpp"
#include "matsketch/matrix.hpp"
#include "matsketch/row_sketcher.hpp"

#include <optional>
#include <utility>

namespace matsketch {

/// Theoretical error bounds plus the empirically measured maximum
/// squared-distance discrepancies for a sketch, in the units of the matrix
/// the sketches were computed on.
struct BoundReport {
    std::size_t n = 0;  // rows of the matrix the row stage ran on
    std::size_t p = 0;  // columns of that matrix
    std::size_t m = 0;  // exemplar count K(r)
    double radius = 0.0;
    double epsilon = 0.0; // achieved column correlation

    bool has_row_stage = false;
    double row_pairwise_bound = 0.0;
    double row_total_bound = 0.0;
    double row_empirical_max = 0.0;
    std::pair<std::size_t, std::size_t> row_argmax_pair{0, 0};
    double row_total_abs_error = 0.0;
    bool row_theorem_holds = true;

    bool has_col_stage = false;
    double column_bound = 0.0;
    double col_empirical_max = 0.0;
    std::pair<std::size_t, std::size_t> col_argmax_pair{0, 0};
    bool col_theorem_holds = true;

    /// False when the pair count exceeded the verification budget and the
    /// empirical fields were left unset (bounds are still filled in).
    bool empirical_evaluated = true;

    /// The bound constants assume entries in [0,1]. False when the caller
    /// skipped normalization on data outside that range, in which case a
    /// broken inequality carries no information.
    bool unit_range = true;
};

/// Worst-case change of one squared pairwise distance after row reduction:
/// 4 * sqrt(p) * r.
double row_pairwise_bound(std::size_t p, double r);

/// Bound on the summed absolute discrepancy over all pairs:
/// 4 * sqrt(p) * r * (n - K) * (n - 1).
double row_total_bound(std::size_t n, std::size_t K, std::size_t p, double r);

/// Column-selection bound m * p * sqrt(1 - epsilon^2), epsilon in (0, 1].
double column_bound(std::size_t m, std::size_t p, double epsilon);

/// Maximum |full - reduced| over condensed entries, with the (i,j) pair where
/// it is attained (first such pair in condensed order).
std::pair<double, std::pair<std::size_t, std::size_t>>
empirical_max_sq_discrepancy(const CondensedDistances& full, const CondensedDistances& reduced);

/// Assembles the full report for sketches computed on x (the row sketch on x
/// itself, the column sketch on x's exemplar rows). The row-reduced matrix is
/// materialized with member rows replaced by their exemplar's row.
BoundReport verify_bounds(const Matrix& x, const RowSketch& rs,
                          const std::optional<ColSketch>& cs = std::nullopt);

/// Row-stage report only, for a sketch computed on x.
BoundReport row_bound_report(const Matrix& x, const RowSketch& rs);

/// Column-stage report only, for a selection computed on x. Fills the column
/// fields of `into` when given, so the two stages can share one report.
BoundReport col_bound_report(const Matrix& x, const ColSketch& cs,
                             BoundReport into = {});

} // namespace matsketch
