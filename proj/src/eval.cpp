#include "matsketch/eval.hpp"

#include "matsketch/col_sketcher.hpp"
#include "matsketch/errors.hpp"
#include "matsketch/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace matsketch {

namespace {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                    std::uint64_t seed) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: the first m slots end up a uniform subset.
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace

std::vector<std::size_t> random_row_sample(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m > n) throw UsageError("random_row_sample: m must not exceed n");
    if (m == 0) throw UsageError("random_row_sample: m must be >= 1");
    return sample_without_replacement(n, m, seed);
}

std::vector<std::size_t> random_column_subset(std::size_t p, std::size_t k, std::uint64_t seed) {
    if (k > p) throw UsageError("random_column_subset: k must not exceed p");
    if (k == 0) throw UsageError("random_column_subset: k must be >= 1");
    return sample_without_replacement(p, k, seed);
}

std::vector<std::pair<double, double>> distance_pairs(const CondensedDistances& full,
                                                      const CondensedDistances& reduced) {
    if (full.m != reduced.m)
        throw UsageError("distance_pairs: condensed arrays differ in size");
    std::vector<std::pair<double, double>> out;
    out.reserve(full.d2.size());
    for (std::size_t t = 0; t < full.d2.size(); ++t)
        out.emplace_back(std::sqrt(full.d2[t]), std::sqrt(reduced.d2[t]));
    return out;
}

std::pair<std::vector<std::size_t>, double> exhaustive_best_columns(const Matrix& x,
                                                                    std::size_t k) {
    const std::size_t p = x.n_cols;
    if (k == 0 || k > p) throw UsageError("exhaustive_best_columns: need 1 <= k <= p");

    double combos = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        combos = combos * static_cast<double>(p - i) / static_cast<double>(i + 1);
    if (combos > 1e5)
        throw UsageError("exhaustive_best_columns: choose(p, k) exceeds the 1e5 budget");

    const CondensedDistances all = condensed_sq_dist(x);
    std::vector<CondensedDistances> per_col;
    per_col.reserve(p);
    for (std::size_t j = 0; j < p; ++j)
        per_col.push_back(condensed_sq_dist_column(x.column(j)));

    std::vector<std::size_t> subset(k);
    std::vector<std::size_t> best;
    double best_corr = -1.0;

    // Lexicographic enumeration; strict > keeps the first (lowest) subset on ties.
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    while (true) {
        CondensedDistances acc;
        acc.m = all.m;
        acc.d2.assign(all.d2.size(), 0.0);
        for (std::size_t j : subset) accumulate_in_place(acc, per_col[j]);
        const double corr = frobenius_correlation(acc, all);
        if (corr > best_corr) {
            best_corr = corr;
            best = subset;
        }
        // Advance to the next k-combination.
        std::size_t i = k;
        while (i > 0 && subset[i - 1] == p - k + (i - 1)) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t q = i; q < k; ++q) subset[q] = subset[q - 1] + 1;
    }
    return {best, best_corr};
}

Matrix gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    Matrix out(n, p);
    Rng rng(seed);
    for (double& v : out.values) v = rng.normal();
    return out;
}

Matrix clustered_gaussian_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (p < 4)
        throw UsageError("clustered_gaussian_matrix: need p >= 4 for the cluster columns");
    Matrix out = gaussian_matrix(n, p, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t two = rng.below(2);
        const std::uint64_t three = rng.below(3);
        out.at(i, 2) += (two == 0 ? -3.0 : 3.0);
        out.at(i, 3) += (static_cast<double>(three) - 1.0) * 4.0;
    }
    return out;
}

CoverageContrast sketch_vs_sample_max_coverage(const Matrix& x, const RowSketch& rs,
                                               std::size_t n_seeds, std::uint64_t seed0) {
    CoverageContrast out;
    const std::size_t p = x.n_cols;
    std::vector<double> sketch_max(p, -std::numeric_limits<double>::infinity());
    for (std::size_t ex : rs.exemplar_indices)
        for (std::size_t c = 0; c < p; ++c)
            sketch_max[c] = std::max(sketch_max[c], x.at(ex, c));

    for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto sample = random_row_sample(x.n_rows, rs.m, seed0 + s);
        for (std::size_t c = 0; c < p; ++c) {
            double sample_max = -std::numeric_limits<double>::infinity();
            for (std::size_t idx : sample) sample_max = std::max(sample_max, x.at(idx, c));
            ++out.cases;
            if (sketch_max[c] >= sample_max) ++out.wins;
        }
    }
    out.fraction = out.cases ? static_cast<double>(out.wins) / out.cases : 0.0;
    return out;
}

std::string eval_reports_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "method,size,correlation,empirical_max,runtime_seconds,seed\n";
    char buf[64];
    auto num = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
    };
    for (const EvalReport& r : reports) {
        out << r.method << ',' << r.size << ',';
        num(r.correlation);
        out << ',';
        if (r.empirical_max >= 0.0) num(r.empirical_max);
        out << ',';
        num(r.runtime_seconds);
        out << ',' << r.seed << '\n';
    }
    return out.str();
}

std::string distance_pairs_csv(const std::vector<std::pair<double, double>>& pairs) {
    std::ostringstream out;
    out << "original,reduced\n";
    char buf[64];
    auto num = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
    };
    for (auto [o, r] : pairs) {
        num(o);
        out << ',';
        num(r);
        out << '\n';
    }
    return out.str();
}

double mean_random_subset_correlation(const Matrix& x, std::size_t k, std::size_t n_seeds,
                                      std::uint64_t seed0) {
    if (n_seeds == 0) throw UsageError("mean_random_subset_correlation: need n_seeds >= 1");
    const CondensedDistances all = condensed_sq_dist(x);
    long double sum = 0.0L;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto cols = random_column_subset(x.n_cols, k, seed0 + s);
        CondensedDistances acc;
        acc.m = all.m;
        acc.d2.assign(all.d2.size(), 0.0);
        for (std::size_t j : cols)
            accumulate_in_place(acc, condensed_sq_dist_column(x.column(j)));
        sum += frobenius_correlation(acc, all);
    }
    return static_cast<double>(sum / n_seeds);
}

} // namespace matsketch
