#include "matsketch/weighted_stats.hpp"

#include "matsketch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace matsketch {

WeightedSummary weighted_summary(std::span<const double> values,
                                 std::span<const std::uint64_t> weights) {
    if (values.empty())
        throw UsageError("weighted_summary: empty input");
    if (values.size() != weights.size())
        throw UsageError("weighted_summary: values and weights differ in length");

    WeightedSummary s;
    s.m = values.size();

    long double wsum = 0.0L, wx = 0.0L;
    double lo = values[0], hi = values[0];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (weights[i] == 0)
            throw UsageError("weighted_summary: weights must be >= 1");
        wsum += static_cast<long double>(weights[i]);
        wx += static_cast<long double>(weights[i]) * values[i];
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    s.n = static_cast<std::uint64_t>(wsum);
    s.min = lo;
    s.max = hi;
    s.mean = static_cast<double>(wx / wsum);

    long double wvar = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long double d = static_cast<long double>(values[i]) - s.mean;
        wvar += static_cast<long double>(weights[i]) * d * d;
    }
    s.sd = static_cast<double>(sqrtl(wvar / wsum));

    // Lower weighted median: sort by value, take the first value whose
    // cumulative weight w satisfies 2*w >= total (exact in integers).
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::uint64_t total = s.n;
    std::uint64_t cum = 0;
    for (std::size_t k : idx) {
        cum += weights[k];
        if (2 * cum >= total) {
            s.median = values[k];
            break;
        }
    }
    return s;
}

} // namespace matsketch
