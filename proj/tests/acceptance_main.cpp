// Acceptance suite: runs every gate end to end and prints one line per
// criterion. Exit code is the number of failed (non-advisory) criteria.

#include "matsketch/csv.hpp"
#include "matsketch/error_bounds.hpp"
#include "matsketch/errors.hpp"
#include "matsketch/eval.hpp"
#include "matsketch/pipeline.hpp"
#include "matsketch/rng.hpp"
#include "matsketch/weighted_stats.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace matsketch;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Criterion {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += "; ";
        detail += text;
    }
};

void run_criterion(int idx, const std::string& desc, double time_limit_s,
                   const std::function<void(Criterion&)>& body, bool advisory = false) {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(t0);
    if (time_limit_s > 0 && elapsed > time_limit_s)
        c.require(false, "runtime " + std::to_string(elapsed) + "s exceeds " +
                             std::to_string(time_limit_s) + "s");
    const bool pass = c.ok || advisory;
    if (!pass) ++g_failures;
    std::printf("%s [%2d] %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", idx, desc.c_str(),
                elapsed, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
}

Matrix from_rows(std::vector<std::vector<double>> rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
    return m;
}

Matrix random_unit_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    Matrix m(n, p);
    Rng rng(seed);
    for (double& v : m.values) v = rng.uniform01();
    return m;
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "matsketch_acceptance";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_cells(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

// --- criteria ---------------------------------------------------------------

void criterion_raw_golden(Criterion& c) {
    // Distance arrays of the raw co-planar worked example.
    CondensedDistances all;
    all.m = 3;
    all.d2 = {18, 50, 8};
    std::vector<CondensedDistances> cols(3);
    for (auto& d : cols) d.m = 3;
    cols[0].d2 = {0, 0, 0};
    cols[1].d2 = {9, 25, 4};
    cols[2].d2 = {9, 49, 16};

    const double cos1 = frobenius_correlation(cols[0], all);
    const double cos2 = frobenius_correlation(cols[1], all);
    const double cos3 = frobenius_correlation(cols[2], all);
    c.require(std::abs(cos1 - 0.0) <= 1e-9, "cosine of the zero column is not 0");
    c.require(std::abs(cos2 - 1.0) <= 1e-9, "cosine of the proportional column is not 1");
    const double expected3 = 5480.0 / std::sqrt(5776.0 * 5476.0);
    c.require(std::abs(cos3 - expected3) <= 1e-9, "third candidate cosine is off");

    ColSketch s = sketch_columns_from_distances(all, cols, {.max_correlation = 0.95});
    c.require(s.selected == std::vector<std::size_t>{1}, "did not select exactly column 2");
    c.require(s.trace.size() == 1, "took more than one step");
    c.require(std::abs(s.achieved_correlation - 1.0) <= 1e-9, "achieved correlation not 1");

    CondensedDistances reduced;
    reduced.m = 3;
    reduced.d2.assign(3, 0.0);
    for (std::size_t j : s.selected) accumulate_in_place(reduced, cols[j]);
    c.require(reduced.d2 == std::vector<double>({9, 25, 4}), "reduced array is not (9,25,4)");
}

void criterion_normalized_golden(Criterion& c) {
    const Matrix xn = from_rows({{0.0, 1.0 / 11, 2.0 / 16},
                                 {0.0, 4.0 / 11, 5.0 / 16},
                                 {0.0, 6.0 / 11, 9.0 / 16}});
    const CondensedDistances all = condensed_sq_dist(xn);
    const double cos1 = frobenius_correlation(condensed_sq_dist_column(xn.column(0)), all);
    const double cos2 = frobenius_correlation(condensed_sq_dist_column(xn.column(1)), all);
    const double cos3 = frobenius_correlation(condensed_sq_dist_column(xn.column(2)), all);
    c.require(std::abs(cos1 - 0.0) <= 1e-6, "step-1 cosine 1 is off");
    c.require(std::abs(cos2 - 0.994101) <= 1e-6, "step-1 cosine 2 is off");
    c.require(std::abs(cos3 - 0.9930334) <= 1e-6, "step-1 cosine 3 is off");

    ColSketch s95 = sketch_columns(xn, {.max_correlation = 0.95});
    c.require(s95.selected == std::vector<std::size_t>{1}, "eps=0.95 selection wrong");

    CondensedDistances red = condensed_sq_dist(project_columns(xn, s95));
    auto [mx, pair] = empirical_max_sq_discrepancy(all, red);
    c.require(std::abs(mx - 49.0 / 256.0) <= 1e-15,
              "max discrepancy is not 49/256 (got " + fmt_double(mx) + ")");
    c.require(pair == std::pair<std::size_t, std::size_t>{0, 2},
              "discrepancy pair is not rows (1,3)");
    const double bound = column_bound(3, 3, 0.95);
    c.require(std::abs(bound - 2.810249) <= 1e-6, "bound is not 2.810249");
    c.require(mx <= bound, "discrepancy exceeds the bound");

    ColSketch s999 = sketch_columns(xn, {.max_correlation = 0.999});
    c.require(s999.selected == std::vector<std::size_t>({1, 2}),
              "eps=0.999 did not select two columns");
    c.require(std::abs(s999.achieved_correlation - 1.0) <= 1e-12,
              "eps=0.999 final correlation is not 1");
}

void criterion_row_theorem_fuzz(Criterion& c) {
    Rng rng(20250810);
    std::size_t violations = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 10 + rng.below(191); // up to 200
        const std::size_t p = 1 + rng.below(8);    // up to 8
        const double r = 0.05 + 0.45 * rng.uniform01();
        Matrix x = random_unit_matrix(n, p, 7000 + rep);
        RowSketch rs = sketch_rows(x, {.radius = r});

        const double r2 = r * r;
        std::size_t total_weight = 0;
        for (std::size_t j = 0; j < rs.m; ++j) {
            total_weight += rs.weights[j];
            for (std::size_t idx : rs.members[j]) {
                double d2 = 0;
                for (std::size_t k = 0; k < p; ++k) {
                    const double d = x.at(idx, k) - x.at(rs.exemplar_indices[j], k);
                    d2 += d * d;
                }
                if (!(d2 < r2)) ++violations; // covering
            }
        }
        if (total_weight != n) ++violations; // partition
        for (std::size_t a = 0; a < rs.m; ++a)
            for (std::size_t b = a + 1; b < rs.m; ++b) {
                double d2 = 0;
                for (std::size_t k = 0; k < p; ++k) {
                    const double d =
                        x.at(rs.exemplar_indices[a], k) - x.at(rs.exemplar_indices[b], k);
                    d2 += d * d;
                }
                if (d2 < r2) ++violations; // packing
            }

        BoundReport rep_b = row_bound_report(x, rs);
        if (!(rep_b.row_empirical_max <= rep_b.row_pairwise_bound)) ++violations;
        if (!(rep_b.row_total_abs_error <= rep_b.row_total_bound)) ++violations;
    }
    c.require(violations == 0, std::to_string(violations) + " violations in 100 instances");
}

void criterion_col_theorem_fuzz(Criterion& c) {
    // m starts at 4: with three points the achieved-correlation form of the
    // bound is genuinely breakable (a unit test pins one such instance), so
    // the property is exercised over the regime where it has content. The
    // trace gate is end-over-start: single greedy steps can dip.
    Rng rng(4040);
    const double thresholds[4] = {0.8, 0.9, 0.95, 0.99};
    std::size_t violations = 0;
    std::size_t exhaustion_checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = 4 + rng.below(37); // 4..40
        const std::size_t p = 1 + rng.below(12); // up to 12
        Matrix x = random_unit_matrix(m, p, 9000 + rep);
        const double eps = thresholds[rep % 4];

        ColSketch cs = sketch_columns(x, {.max_correlation = eps});
        BoundReport rep_b = col_bound_report(x, cs);
        if (!rep_b.col_theorem_holds) ++violations;
        if (cs.trace.back().correlation < cs.trace.front().correlation - 1e-12)
            ++violations;

        // Exhaustion recovery: the sum of every per-column array points
        // exactly at the full array.
        CondensedDistances acc;
        acc.m = m;
        acc.d2.assign(CondensedDistances::length(m), 0.0);
        for (std::size_t j = 0; j < p; ++j)
            accumulate_in_place(acc, condensed_sq_dist_column(x.column(j)));
        if (std::abs(frobenius_correlation(acc, condensed_sq_dist(x)) - 1.0) > 1e-12)
            ++violations;

        ColSketch full = sketch_columns(x, {.max_correlation = 1.0});
        if (full.selected.size() == p) {
            ++exhaustion_checked;
            if (std::abs(full.achieved_correlation - 1.0) > 1e-12) ++violations;
        }
    }
    c.require(violations == 0, std::to_string(violations) + " violations in 100 instances");
    c.require(exhaustion_checked >= 50, "exhaustion path exercised only " +
                                            std::to_string(exhaustion_checked) + " times");
}

// Shared by criteria 5 and 6.
struct GaussianFixture {
    Matrix data;        // original units
    Matrix normalized;
    RowSketch sketch;
    RadiusSearchResult search;
};

GaussianFixture& gaussian_fixture() {
    static GaussianFixture fx = [] {
        GaussianFixture f;
        f.data = gaussian_matrix(100000, 3, 20240531);
        f.normalized = normalize_columns(f.data).first;
        f.search = radius_search(f.normalized, 200);
        f.sketch = sketch_rows(f.normalized, {.radius = f.search.radius});
        return f;
    }();
    return fx;
}

void criterion_weighted_stats_scale(Criterion& c) {
    GaussianFixture& fx = gaussian_fixture();
    c.require(fx.search.converged, "radius search did not converge");
    c.require(20 * (fx.sketch.m > 200 ? fx.sketch.m - 200 : 200 - fx.sketch.m) <= 200,
              "exemplar count " + std::to_string(fx.sketch.m) + " not within 5% of 200");

    for (std::size_t col = 0; col < 3; ++col) {
        std::vector<double> vals(fx.sketch.m);
        for (std::size_t j = 0; j < fx.sketch.m; ++j)
            vals[j] = fx.data.at(fx.sketch.exemplar_indices[j], col);
        std::vector<std::uint64_t> weights(fx.sketch.weights.begin(),
                                           fx.sketch.weights.end());
        WeightedSummary s = weighted_summary(vals, weights);
        c.require(s.n == 100000, "weights do not sum to n");
        c.require(std::abs(s.mean) <= 0.05,
                  "column " + std::to_string(col) + " weighted mean " + fmt_double(s.mean));
        c.require(s.sd >= 0.95 && s.sd <= 1.25,
                  "column " + std::to_string(col) + " weighted sd " + fmt_double(s.sd));

        double omin = 1e300, omax = -1e300;
        for (std::size_t i = 0; i < fx.data.n_rows; ++i) {
            omin = std::min(omin, fx.data.at(i, col));
            omax = std::max(omax, fx.data.at(i, col));
        }
        const double range = omax - omin;
        c.require(s.min <= omin + fx.sketch.radius_used * range,
                  "column " + std::to_string(col) + " min not covered");
        c.require(s.max >= omax - fx.sketch.radius_used * range,
                  "column " + std::to_string(col) + " max not covered");
    }
    c.note("m=" + std::to_string(fx.sketch.m) +
           ", radius=" + fmt_double(fx.sketch.radius_used));
}

void criterion_sampling_contrast(Criterion& c) {
    GaussianFixture& fx = gaussian_fixture();
    CoverageContrast cov = sketch_vs_sample_max_coverage(fx.data, fx.sketch, 20, 777);
    c.require(cov.cases == 60, "expected 20 seeds x 3 columns");
    c.require(cov.fraction >= 0.70, "sketch max beat sample max in only " +
                                        fmt_double(cov.fraction * 100) + "% of cases");
    c.note(std::to_string(cov.wins) + "/" + std::to_string(cov.cases) + " wins");
}

void criterion_greedy_quality(Criterion& c) {
    std::size_t failures = 0;
    double worst = 1e300;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Matrix x = gaussian_matrix(6, 5, 60000 + seed);
        Matrix norm = normalize_columns(x).first;
        ColSketch greedy =
            sketch_columns(norm, {.max_correlation = 1.0, .max_columns = 2});
        auto [subset, oracle] = exhaustive_best_columns(norm, 2);
        const double ratio = greedy.achieved_correlation / oracle;
        worst = std::min(worst, ratio);
        if (greedy.achieved_correlation < 0.9 * oracle) ++failures;
    }
    c.require(failures == 0, std::to_string(failures) + " instances below 0.9x oracle");
    c.note("worst greedy/oracle ratio " + fmt_double(worst));
}

void criterion_pythagorean(Criterion& c) {
    Rng rng(31337);
    std::size_t violations = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rng.below(9); // up to 10
        const std::size_t p = 1 + rng.below(8); // up to 8
        Matrix x = random_unit_matrix(n, p, 80000 + rep);
        CondensedDistances acc;
        acc.m = n;
        acc.d2.assign(CondensedDistances::length(n), 0.0);
        for (std::size_t j = 0; j < p; ++j)
            accumulate_in_place(acc, condensed_sq_dist_column(x.column(j)));
        CondensedDistances full = condensed_sq_dist(x);
        for (std::size_t t = 0; t < full.d2.size(); ++t)
            if (std::abs(acc.d2[t] - full.d2[t]) > 1e-12) ++violations;
    }
    c.require(violations == 0, std::to_string(violations) + " entries off by more than 1e-12");
}

void criterion_pipeline_roundtrip(Criterion& c) {
    // 500 x 20 mixed file: 17 numeric and 3 categorical columns.
    Rng rng(5150);
    const char* fruits[] = {"apple", "pear", "plum", "fig"};
    const char* tags[] = {"hot", "cold", "mild"};
    const char* flags[] = {"yes", "no"};
    std::ostringstream csv;
    for (int col = 0; col < 20; ++col) csv << (col ? "," : "") << "c" << col;
    csv << "\n";
    for (int i = 0; i < 500; ++i) {
        for (int col = 0; col < 20; ++col) {
            if (col) csv << ',';
            if (col == 4)
                csv << fruits[rng.below(4)];
            else if (col == 11)
                csv << tags[rng.below(3)];
            else if (col == 17)
                csv << flags[rng.below(2)];
            else
                csv << fmt_double(rng.normal() * (1.0 + col % 3));
        }
        csv << "\n";
    }
    const std::string input = (work_dir() / "mixed500.csv").string();
    atomic_write_file(input, csv.str());

    PipelineConfig cfg;
    cfg.radius = 0.45;
    cfg.seed = 99;
    PipelineResult res = run_pipeline(input, cfg);
    const std::string out = (work_dir() / "mixed500_out.csv").string();
    write_outputs(input, res, out);

    auto in_cells = csv_cells(input);
    auto out_cells = csv_cells(out);
    c.require(out_cells.size() == res.a.size(), "output row count mismatch");
    std::uint64_t total = 0;
    std::size_t cell_mismatches = 0;
    for (std::size_t i = 0; i < res.a.size() && i < out_cells.size(); ++i) {
        total += res.weights[i];
        for (std::size_t j = 0; j < res.b.size(); ++j)
            if (out_cells[i][j] != in_cells[res.a[i]][res.b[j]]) ++cell_mismatches;
    }
    c.require(cell_mismatches == 0,
              std::to_string(cell_mismatches) + " cells differ from the original file");
    c.require(total == 500, "weights sum to " + std::to_string(total) + ", not 500");

    const std::string out2 = (work_dir() / "mixed500_out2.csv").string();
    PipelineResult res2 = run_pipeline(input, cfg);
    write_outputs(input, res2, out2);
    c.require(slurp(out) == slurp(out2), "rerun CSV differs");
    c.require(slurp(sidecar_path_for(out)) == slurp(sidecar_path_for(out2)),
              "rerun sidecar differs");
    c.note("m=" + std::to_string(res.a.size()) + ", k=" + std::to_string(res.b.size()));
}

void criterion_complexity_smoke(Criterion& c) {
    // O(nmp) expectation: doubling n at roughly fixed m and p should scale
    // wall time by about 2 (gate at ~2.3); advisory, logged only.
    Matrix big = gaussian_matrix(40000, 3, 424243);
    Matrix norm_big = normalize_columns(big).first;
    const double r = radius_search(norm_big, 200).radius;

    auto time_sketch = [&](std::size_t n) {
        Matrix part(n, 3);
        std::copy(norm_big.values.begin(), norm_big.values.begin() + n * 3,
                  part.values.begin());
        double best = 1e300;
        std::size_t m = 0;
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            RowSketch s = sketch_rows(part, {.radius = r});
            best = std::min(best, seconds_since(t0));
            m = s.m;
        }
        return std::pair<double, std::size_t>{best, m};
    };

    auto [t1, m1] = time_sketch(10000);
    auto [t2, m2] = time_sketch(20000);
    auto [t3, m3] = time_sketch(40000);
    const double r21 = t2 / t1;
    const double r32 = t3 / t2;
    c.note("t(1e4)=" + fmt_double(t1) + "s m=" + std::to_string(m1) +
           ", t(2e4)=" + fmt_double(t2) + "s m=" + std::to_string(m2) +
           ", t(4e4)=" + fmt_double(t3) + "s m=" + std::to_string(m3) +
           ", ratios " + fmt_double(r21) + " and " + fmt_double(r32) +
           (r21 <= 2.3 && r32 <= 2.3 ? " (within ~2.3x)" : " (above ~2.3x, advisory)"));
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    run_criterion(1, "co-planar golden example, raw distance arrays", 1.0,
                  criterion_raw_golden);
    run_criterion(2, "co-planar golden example, normalized matrix", 5.0,
                  criterion_normalized_golden);
    run_criterion(3, "row-theorem property suite (100 instances)", 30.0,
                  criterion_row_theorem_fuzz);
    run_criterion(4, "column-theorem property suite (100 instances)", 60.0,
                  criterion_col_theorem_fuzz);
    run_criterion(5, "frequency-weighted statistics at desk scale", 60.0,
                  criterion_weighted_stats_scale);
    run_criterion(6, "extreme-point coverage vs random sampling", 30.0,
                  criterion_sampling_contrast);
    run_criterion(7, "greedy within 0.9x of the exhaustive oracle", 30.0,
                  criterion_greedy_quality);
    run_criterion(8, "Pythagorean identity of per-column arrays", 10.0,
                  criterion_pythagorean);
    run_criterion(9, "pipeline round-trip on a mixed 500x20 file", 60.0,
                  criterion_pipeline_roundtrip);
    run_criterion(10, "complexity smoke check (advisory)", 0.0,
                  criterion_complexity_smoke, /*advisory=*/true);

    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
