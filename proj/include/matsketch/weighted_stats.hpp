#pragma once

#include <cstdint>
#include <span>

namespace matsketch {

/// Frequency-weighted summary of one variable. m counts distinct points,
/// n is the total weight they stand for.
struct WeightedSummary {
    std::size_t m = 0;
    std::uint64_t n = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
};

/// Weighted mean sum(w*x)/sum(w), population variance sum(w*(x-mean)^2)/sum(w),
/// and the lower weighted median: the smallest value whose cumulative weight
/// reaches half the total.
WeightedSummary weighted_summary(std::span<const double> values,
                                 std::span<const std::uint64_t> weights);

} // namespace matsketch
