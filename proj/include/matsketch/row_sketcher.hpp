#pragma once

#include "matsketch/matrix.hpp"

#include <cstdint>
#include <optional>

namespace matsketch {

struct RowSketchConfig {
    /// Covering radius in normalized units, in (0, sqrt(p)]. Unset means the
    /// default 0.25 / (ln n)^(1/p).
    std::optional<double> radius;
    /// Unset: rows are visited in input order. Set: a seeded shuffle of the
    /// visit order (memberships still refer to original row indices).
    std::optional<std::uint64_t> shuffle_seed;
};

/// Result of the single-pass leader covering. Exemplars are original data
/// rows; every row belongs to exactly one exemplar's ball (its own, for
/// exemplars), so the weights sum to n.
struct RowSketch {
    std::size_t m = 0;
    std::vector<std::size_t> exemplar_indices;       // creation order
    std::vector<std::vector<std::size_t>> members;   // one list per exemplar
    std::vector<std::size_t> weights;                // member counts
    double radius_used = 0.0;
};

/// Default covering radius 0.25 / (ln n)^(1/p), natural logarithm.
double default_radius(std::size_t n, std::size_t p);

/// One pass over the rows of x (expected normalized to [0,1]). Each row joins
/// the first exemplar, in creation order, at distance < r; otherwise it
/// becomes a new exemplar. Deterministic given the visit order and radius.
RowSketch sketch_rows(const Matrix& x, const RowSketchConfig& cfg = {});

/// The m x p matrix whose row j is x's row exemplar_indices[j], verbatim.
Matrix exemplar_matrix(const RowSketch& s, const Matrix& x);

} // namespace matsketch
