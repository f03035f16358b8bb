#pragma once

#include "matsketch/matrix.hpp"
#include "matsketch/row_sketcher.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace matsketch {

/// One row of the evaluation harness output.
struct EvalReport {
    std::string method;
    std::size_t size = 0;          // m rows kept or k columns kept
    double correlation = 0.0;      // Frobenius correlation to full distances
    double empirical_max = 0.0;    // max squared-distance discrepancy
    double runtime_seconds = 0.0;
    std::uint64_t seed = 0;
};

/// Uniform sample of m distinct row indices out of n, ascending, seeded.
std::vector<std::size_t> random_row_sample(std::size_t n, std::size_t m, std::uint64_t seed);

/// Uniform subset of k distinct column indices out of p, ascending, seeded.
std::vector<std::size_t> random_column_subset(std::size_t p, std::size_t k, std::uint64_t seed);

/// Plot-ready (original, reduced) distance pairs: square roots of the
/// condensed entries, in condensed order.
std::vector<std::pair<double, double>> distance_pairs(const CondensedDistances& full,
                                                      const CondensedDistances& reduced);

/// Exhaustive search over all k-subsets of columns for the one whose
/// accumulated distance array best correlates with the full array.
/// Refuses when choose(p, k) exceeds 100000.
std::pair<std::vector<std::size_t>, double> exhaustive_best_columns(const Matrix& x,
                                                                    std::size_t k);

/// n x p matrix of independent standard Gaussians.
Matrix gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed);

/// Independent Gaussians with two planted cluster columns: column 2 is a
/// two-component mixture and column 3 a three-component mixture. Needs p >= 4.
Matrix clustered_gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed);

/// How often the sketch's per-column maxima dominate an equal-size random
/// sample's, over n_seeds samples. `x` is the matrix the sketch indexes into.
struct CoverageContrast {
    std::size_t wins = 0;
    std::size_t cases = 0; // n_seeds * columns
    double fraction = 0.0;
};
CoverageContrast sketch_vs_sample_max_coverage(const Matrix& x, const RowSketch& rs,
                                               std::size_t n_seeds, std::uint64_t seed0);

/// Mean Frobenius correlation of random k-column subsets against the full
/// distance array, over n_seeds draws.
double mean_random_subset_correlation(const Matrix& x, std::size_t k, std::size_t n_seeds,
                                      std::uint64_t seed0);

/// Delimited table of report rows: header plus one line per entry. An
/// empirical_max below zero renders as an empty cell.
std::string eval_reports_csv(const std::vector<EvalReport>& reports);

/// The two-column distance-pair file: header "original,reduced".
std::string distance_pairs_csv(const std::vector<std::pair<double, double>>& pairs);

} // namespace matsketch
