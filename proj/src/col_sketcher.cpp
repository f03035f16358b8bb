#include "matsketch/col_sketcher.hpp"

#include "matsketch/errors.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

namespace matsketch {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
// Pairs per accumulation block. Candidate sums are gathered in doubles within
// a block and flushed to long double totals, keeping the rounding error of
// long scans bounded while the inner loop stays vectorizable.
constexpr std::size_t kBlock = 2048;

struct ScanTotals {
    std::vector<long double> dot_all;   // <D(c), all>
    std::vector<long double> cross;     // <D(c), prev>
    std::vector<long double> norm;      // <D(c), D(c)>

    explicit ScanTotals(std::size_t p) : dot_all(p, 0.0L), cross(p, 0.0L), norm(p, 0.0L) {}
};

class BlockAccum {
public:
    explicit BlockAccum(std::size_t p)
        : p_(p), dot_all_(p, 0.0), cross_(p, 0.0), norm_(p, 0.0) {}

    void flush(ScanTotals& tot) {
        for (std::size_t c = 0; c < p_; ++c) {
            tot.dot_all[c] += dot_all_[c];
            tot.cross[c] += cross_[c];
            tot.norm[c] += norm_[c];
        }
        std::memset(dot_all_.data(), 0, p_ * sizeof(double));
        std::memset(cross_.data(), 0, p_ * sizeof(double));
        std::memset(norm_.data(), 0, p_ * sizeof(double));
        count_ = 0;
    }

    bool full() const { return count_ == kBlock; }
    void tick() { ++count_; }

    double* dot_all() { return dot_all_.data(); }
    double* cross() { return cross_.data(); }
    double* norm() { return norm_.data(); }

private:
    std::size_t p_;
    std::vector<double> dot_all_, cross_, norm_;
    std::size_t count_ = 0;
};

// One pass over all pairs, producing the three per-candidate sums. The d2
// values come either from the matrix rows (on the fly) or from materialized
// per-column arrays; both produce identical doubles, so results agree bitwise.
ScanTotals scan_matrix(const Matrix& x, const std::vector<double>& all,
                       const std::vector<double>& prev) {
    const std::size_t m = x.n_rows, p = x.n_cols;
    ScanTotals tot(p);
    BlockAccum blk(p);
    std::size_t t = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* ri = x.values.data() + i * p;
        for (std::size_t j = i + 1; j < m; ++j, ++t) {
            const double* rj = x.values.data() + j * p;
            const double a = all[t];
            const double pr = prev[t];
            double* da = blk.dot_all();
            double* cr = blk.cross();
            double* nr = blk.norm();
            for (std::size_t c = 0; c < p; ++c) {
                const double diff = ri[c] - rj[c];
                const double d2 = diff * diff;
                da[c] += d2 * a;
                cr[c] += d2 * pr;
                nr[c] += d2 * d2;
            }
            blk.tick();
            if (blk.full()) blk.flush(tot);
        }
    }
    blk.flush(tot);
    return tot;
}

ScanTotals scan_arrays(const std::vector<CondensedDistances>& per_column,
                       const std::vector<double>& all, const std::vector<double>& prev) {
    const std::size_t p = per_column.size();
    const std::size_t len = all.size();
    ScanTotals tot(p);
    BlockAccum blk(p);
    for (std::size_t t = 0; t < len; ++t) {
        const double a = all[t];
        const double pr = prev[t];
        double* da = blk.dot_all();
        double* cr = blk.cross();
        double* nr = blk.norm();
        for (std::size_t c = 0; c < p; ++c) {
            const double d2 = per_column[c].d2[t];
            da[c] += d2 * a;
            cr[c] += d2 * pr;
            nr[c] += d2 * d2;
        }
        blk.tick();
        if (blk.full()) blk.flush(tot);
    }
    blk.flush(tot);
    return tot;
}

// Adds column c's squared differences onto prev, element-wise.
void add_column_matrix(const Matrix& x, std::size_t c, std::vector<double>& prev) {
    const std::size_t m = x.n_rows, p = x.n_cols;
    std::size_t t = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double vi = x.values[i * p + c];
        for (std::size_t j = i + 1; j < m; ++j, ++t) {
            const double diff = vi - x.values[j * p + c];
            prev[t] += diff * diff;
        }
    }
}

long double sq_norm(const std::vector<double>& v) {
    long double s = 0.0L;
    double blk = 0.0;
    std::size_t count = 0;
    for (double x : v) {
        blk += x * x;
        if (++count == kBlock) {
            s += blk;
            blk = 0.0;
            count = 0;
        }
    }
    return s + blk;
}

struct GreedyState {
    std::vector<double> prev;        // accumulated squared distances
    long double dot_prev_all = 0.0L; // <prev, all>
    long double norm_prev2 = 0.0L;   // <prev, prev>
    long double norm_all = 0.0L;     // ||all||
    std::vector<bool> selected_mask;
};

double candidate_correlation(const GreedyState& st, const ScanTotals& tot, std::size_t c) {
    const long double dot = st.dot_prev_all + tot.dot_all[c];
    const long double n2 = st.norm_prev2 + 2.0L * tot.cross[c] + tot.norm[c];
    if (n2 <= 0.0L) return 0.0;
    long double cos = dot / (sqrtl(n2) * st.norm_all);
    if (cos < 0.0L) cos = 0.0L;
    if (cos > 1.0L) cos = 1.0L;
    return static_cast<double>(cos);
}

ColSketch run_greedy(std::size_t p, const ColSketchConfig& cfg, GreedyState& st,
                     const std::function<ScanTotals()>& scan,
                     const std::function<void(std::size_t)>& add_column) {
    if (!(cfg.max_correlation > 0.0) || cfg.max_correlation > 1.0)
        throw UsageError("sketch_columns: max_correlation must lie in (0, 1]");
    if (cfg.max_columns && (*cfg.max_columns == 0 || *cfg.max_columns > p))
        throw UsageError("sketch_columns: max_columns must lie in 1..p");
    if (st.norm_all == 0.0L)
        throw DataError("sketch_columns: degenerate input, all pairwise distances are "
                        "zero (every column is constant)");

    ColSketch out;
    double prev_best = 0.0;
    while (true) {
        const ScanTotals tot = scan();
        std::size_t best_c = kNone;
        double best_corr = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
            if (st.selected_mask[c]) continue;
            const double corr = candidate_correlation(st, tot, c);
            if (corr > best_corr) { // strict: ties keep the lowest index
                best_corr = corr;
                best_c = c;
            }
        }
        if (best_c == kNone) break;

        st.selected_mask[best_c] = true;
        add_column(best_c);
        st.dot_prev_all += tot.dot_all[best_c];
        st.norm_prev2 += 2.0L * tot.cross[best_c] + tot.norm[best_c];
        out.selected.push_back(best_c);
        out.trace.push_back({best_c, best_corr});

        if (best_corr >= cfg.max_correlation) break;
        if (out.selected.size() == p) break;
        if (cfg.max_columns && out.selected.size() == *cfg.max_columns) break;
        // Plateau: the step changed nothing (typically only constant columns
        // remain), so no later step can either. A genuine dip is allowed to
        // continue; the loop is bounded by p steps regardless, and the
        // correlation recovers to 1 once every column is in.
        if (std::abs(best_corr - prev_best) <= 1e-12) break;
        prev_best = best_corr;
    }
    if (!out.trace.empty()) out.achieved_correlation = out.trace.back().correlation;
    return out;
}

} // namespace

ColSketch sketch_columns(const Matrix& x, const ColSketchConfig& cfg) {
    if (x.n_rows < 2)
        throw UsageError("sketch_columns: need at least two rows");
    if (x.n_cols == 0)
        throw UsageError("sketch_columns: need at least one column");

    const CondensedDistances all = condensed_sq_dist(x);
    GreedyState st;
    st.prev.assign(all.d2.size(), 0.0);
    st.norm_all = sqrtl(sq_norm(all.d2));
    st.selected_mask.assign(x.n_cols, false);

    return run_greedy(
        x.n_cols, cfg, st, [&] { return scan_matrix(x, all.d2, st.prev); },
        [&](std::size_t c) { add_column_matrix(x, c, st.prev); });
}

ColSketch sketch_columns_from_distances(const CondensedDistances& all,
                                        const std::vector<CondensedDistances>& per_column,
                                        const ColSketchConfig& cfg) {
    if (per_column.empty())
        throw UsageError("sketch_columns_from_distances: need at least one column array");
    for (const auto& d : per_column)
        if (d.m != all.m)
            throw UsageError("sketch_columns_from_distances: condensed arrays differ in size");

    GreedyState st;
    st.prev.assign(all.d2.size(), 0.0);
    st.norm_all = sqrtl(sq_norm(all.d2));
    st.selected_mask.assign(per_column.size(), false);

    return run_greedy(
        per_column.size(), cfg, st,
        [&] { return scan_arrays(per_column, all.d2, st.prev); },
        [&](std::size_t c) {
            for (std::size_t t = 0; t < st.prev.size(); ++t)
                st.prev[t] += per_column[c].d2[t];
        });
}

Matrix project_columns(const Matrix& x, const ColSketch& s) {
    Matrix out(x.n_rows, s.selected.size());
    out.row_labels = x.row_labels;
    if (!x.col_labels.empty()) out.col_labels.resize(s.selected.size());
    for (std::size_t k = 0; k < s.selected.size(); ++k) {
        const std::size_t c = s.selected[k];
        if (c >= x.n_cols)
            throw UsageError("project_columns: selected column index out of range");
        for (std::size_t i = 0; i < x.n_rows; ++i)
            out.at(i, k) = x.at(i, c);
        if (!x.col_labels.empty()) out.col_labels[k] = x.col_labels[c];
    }
    return out;
}

} // namespace matsketch
