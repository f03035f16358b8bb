#pragma once

#include "matsketch/matrix.hpp"

#include <optional>

namespace matsketch {

struct ColSketchConfig {
    /// Stop once the best accumulated correlation reaches this value. In (0,1].
    double max_correlation = 0.95;
    /// Optional hard cap on the number of selected columns, 1..p.
    std::optional<std::size_t> max_columns;
};

struct ColSketchStep {
    std::size_t column = 0;      // column chosen at this step
    double correlation = 0.0;    // best correlation after adding it
};

struct ColSketch {
    std::vector<std::size_t> selected;    // distinct indices, selection order
    double achieved_correlation = 0.0;    // last trace entry
    std::vector<ColSketchStep> trace;
};

/// Greedy forward selection of original columns: each step adds the unselected
/// column whose per-column squared-distance array, summed onto the running
/// accumulation, maximizes the Frobenius correlation against the full-matrix
/// array. Stops when the threshold is met, all columns are selected, the cap
/// is hit, or a step leaves the correlation unchanged within 1e-12 (adding
/// only constant columns). Ties go to the lowest column index. Expects
/// pre-normalized input when the caller wants normalized-scale selection.
/// The trace is usually non-decreasing but single steps can dip; the final
/// correlation always reaches 1 when every column is selected.
ColSketch sketch_columns(const Matrix& x, const ColSketchConfig& cfg = {});

/// Same greedy selection driven by explicit distance arrays: `all` is the
/// target array and per_column[j] the candidate array for column j. This is
/// the array-level core that sketch_columns evaluates against the matrix.
ColSketch sketch_columns_from_distances(const CondensedDistances& all,
                                        const std::vector<CondensedDistances>& per_column,
                                        const ColSketchConfig& cfg = {});

/// m x k matrix of the selected columns of x, in selection order.
Matrix project_columns(const Matrix& x, const ColSketch& s);

} // namespace matsketch
