#include "matsketch/pipeline.hpp"

#include "matsketch/errors.hpp"
#include "matsketch/eval.hpp"
#include "matsketch/version.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace matsketch {

using nlohmann::ordered_json;

WorkingMatrix build_working_matrix(const IngestResult& ingest) {
    WorkingMatrix wm;
    const std::size_t n = ingest.numeric.n_rows ? ingest.numeric.n_rows
                                                : (ingest.categoricals.empty()
                                                       ? 0
                                                       : ingest.categoricals[0].values.size());

    std::vector<Matrix> score_blocks;
    wm.encodings.reserve(ingest.categoricals.size());
    std::size_t total_cols = ingest.numeric.n_cols;
    for (const auto& cat : ingest.categoricals) {
        // Identifier-like columns cannot aggregate and would each add
        // levels-1 score columns; huge level counts also make the
        // decomposition intractable.
        if (cat.levels.size() > 1024)
            throw DataError("categorical column '" + cat.name + "' has " +
                            std::to_string(cat.levels.size()) +
                            " levels; remove or recode identifier-like columns");
        if (cat.levels.size() == cat.values.size() && cat.values.size() > 64)
            throw DataError("categorical column '" + cat.name +
                            "' has a distinct value in every row; remove or recode "
                            "identifier-like columns");
        CAEncoding enc = fit_ca(cat);
        score_blocks.push_back(ca_scores(cat, enc));
        total_cols += enc.retained;
        wm.encodings.push_back(std::move(enc));
    }

    if (total_cols == 0)
        throw DataError("input has no usable columns after encoding");

    wm.values = Matrix(n, total_cols);
    std::size_t out_c = 0;
    for (std::size_t k = 0; k < ingest.numeric.n_cols; ++k, ++out_c) {
        for (std::size_t i = 0; i < n; ++i) wm.values.at(i, out_c) = ingest.numeric.at(i, k);
        wm.columns.push_back({ingest.numeric.col_labels[k], ingest.numeric_source_cols[k],
                              false, 0});
    }
    for (std::size_t c = 0; c < ingest.categoricals.size(); ++c) {
        const Matrix& scores = score_blocks[c];
        for (std::size_t comp = 0; comp < scores.n_cols; ++comp, ++out_c) {
            for (std::size_t i = 0; i < n; ++i) wm.values.at(i, out_c) = scores.at(i, comp);
            wm.columns.push_back({ingest.categoricals[c].name + "#ca" + std::to_string(comp + 1),
                                  ingest.categorical_source_cols[c], true, comp});
        }
    }
    for (const auto& col : wm.columns) wm.values.col_labels.push_back(col.name);
    return wm;
}

namespace {

// Exemplar count at radius r, bailing out once the count exceeds `cap` (the
// caller then only learns "more than cap", which is all bisection needs).
std::size_t probe_exemplar_count(const Matrix& x, double r, std::size_t cap) {
    const std::size_t p = x.n_cols;
    const double r2 = r * r;
    std::vector<double> exemplars;
    std::size_t m = 0;
    for (std::size_t i = 0; i < x.n_rows; ++i) {
        const double* row = x.values.data() + i * p;
        bool assigned = false;
        for (std::size_t j = 0; j < m && !assigned; ++j) {
            const double* ex = exemplars.data() + j * p;
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double d = row[k] - ex[k];
                s += d * d;
                if (s >= r2) break;
            }
            assigned = s < r2;
        }
        if (!assigned) {
            exemplars.insert(exemplars.end(), row, row + p);
            if (++m > cap) return m;
        }
    }
    return m;
}

} // namespace

RadiusSearchResult radius_search(const Matrix& x, std::size_t target_m) {
    if (x.n_rows == 0 || x.n_cols == 0)
        throw UsageError("radius_search: empty matrix");
    if (target_m < 1 || target_m > x.n_rows)
        throw UsageError("radius_search: target must lie in 1..n");

    // Within +-5% of the target: 20 * |m - target| <= target, exact for
    // targets below 20.
    const std::size_t tol = target_m / 20;
    const std::size_t cap = target_m + tol;

    double lo = 0.0;
    double hi = std::sqrt(static_cast<double>(x.n_cols));
    RadiusSearchResult best;
    std::size_t best_gap = std::numeric_limits<std::size_t>::max();

    for (int iter = 0; iter < 30; ++iter) {
        const double r = (iter == 0) ? hi : 0.5 * (lo + hi);
        const std::size_t m = probe_exemplar_count(x, r, cap);
        if (m > cap) {
            lo = r; // too many exemplars: grow the balls
            continue;
        }
        const std::size_t gap = m > target_m ? m - target_m : target_m - m;
        if (gap < best_gap) {
            best_gap = gap;
            best.radius = r;
            best.m = m;
        }
        if (gap <= tol) {
            best.converged = true;
            return best;
        }
        if (m > target_m)
            lo = r;
        else
            hi = r;
    }
    if (best_gap == std::numeric_limits<std::size_t>::max()) {
        // Every probe overflowed the cap; fall back to the largest admissible
        // radius with its true count.
        best.radius = std::sqrt(static_cast<double>(x.n_cols));
        best.m = probe_exemplar_count(x, best.radius, x.n_rows);
    }
    return best; // not converged; closest radius seen
}

namespace {

constexpr std::size_t kMaxVerifyPairs = 20'000'000;

std::string order_name(SketchOrder o) {
    switch (o) {
        case SketchOrder::Auto: return "auto";
        case SketchOrder::RowsFirst: return "rows-first";
        case SketchOrder::ColsFirst: return "cols-first";
    }
    return "auto";
}

double resolve_radius(const Matrix& stage_input, const PipelineConfig& cfg,
                      std::optional<RadiusSearchResult>& search_out) {
    if (cfg.radius && cfg.target_rows)
        throw UsageError("give either an explicit radius or a target row count, not both");
    if (cfg.radius) return *cfg.radius;
    if (cfg.target_rows) {
        RadiusSearchResult rs = radius_search(stage_input, *cfg.target_rows);
        search_out = rs;
        return rs.radius;
    }
    if (stage_input.n_rows >= 2)
        return default_radius(stage_input.n_rows, stage_input.n_cols);
    return 0.25;
}

ordered_json pair_json(std::pair<std::size_t, std::size_t> p) {
    return ordered_json::array({p.first, p.second});
}

} // namespace

ordered_json bound_report_to_json(const BoundReport& rep) {
    ordered_json j;
    j["n"] = rep.n;
    j["p"] = rep.p;
    j["m"] = rep.m;
    j["radius"] = rep.radius;
    j["epsilon"] = rep.epsilon;
    j["has_row_stage"] = rep.has_row_stage;
    j["row_pairwise_bound"] = rep.row_pairwise_bound;
    j["row_total_bound"] = rep.row_total_bound;
    j["row_empirical_max"] = rep.row_empirical_max;
    j["row_argmax_pair"] = pair_json(rep.row_argmax_pair);
    j["row_total_abs_error"] = rep.row_total_abs_error;
    j["row_theorem_holds"] = rep.row_theorem_holds;
    j["has_col_stage"] = rep.has_col_stage;
    j["column_bound"] = rep.column_bound;
    j["col_empirical_max"] = rep.col_empirical_max;
    j["col_argmax_pair"] = pair_json(rep.col_argmax_pair);
    j["col_theorem_holds"] = rep.col_theorem_holds;
    j["empirical_evaluated"] = rep.empirical_evaluated;
    j["unit_range"] = rep.unit_range;
    // The theorem constant is m*p; the worked example's prose says m*sqrt(p)
    // but its own arithmetic uses m*p, so the theorem's constant is reported.
    j["column_bound_constant"] = "m*p";
    return j;
}

PipelineResult run_pipeline(const std::string& input_csv, const PipelineConfig& cfg) {
    if (cfg.rows_only && cfg.cols_only)
        throw UsageError("rows-only and cols-only are mutually exclusive");

    PipelineResult res;
    res.ingest = ingest_csv(input_csv, {cfg.categorical_columns, cfg.na_policy});
    res.working = build_working_matrix(res.ingest);

    Matrix normalized;
    if (cfg.normalize) {
        auto [norm, params] = normalize_columns(res.working.values);
        normalized = std::move(norm);
        res.norm = std::move(params);
        res.normalized = true;
    } else {
        normalized = res.working.values;
        res.norm.col_min.assign(normalized.n_cols, 0.0);
        res.norm.col_max.assign(normalized.n_cols, 1.0);
    }

    const std::size_t n = normalized.n_rows;
    const std::size_t p_working = normalized.n_cols;

    SketchOrder order = cfg.order;
    if (order == SketchOrder::Auto)
        order = (n >= p_working) ? SketchOrder::RowsFirst : SketchOrder::ColsFirst;
    if (cfg.rows_only)
        res.order_resolved = "rows-only";
    else if (cfg.cols_only)
        res.order_resolved = "cols-only";
    else
        res.order_resolved = order_name(order);

    const bool do_rows = !cfg.cols_only;
    const bool do_cols = !cfg.rows_only;

    Matrix row_stage_input;  // matrix the row sketch ran on
    Matrix col_stage_input;  // matrix the column sketch ran on

    if (do_rows && (!do_cols || order == SketchOrder::RowsFirst)) {
        row_stage_input = normalized;
        RowSketchConfig rc;
        rc.radius = resolve_radius(row_stage_input, cfg, res.radius_search_result);
        res.row_sketch = sketch_rows(row_stage_input, rc);
        if (do_cols) {
            col_stage_input = exemplar_matrix(*res.row_sketch, normalized);
            if (col_stage_input.n_rows >= 2) {
                res.col_sketch = sketch_columns(
                    col_stage_input, {cfg.max_correlation, cfg.max_columns});
            } else {
                res.col_stage_skipped = true;
            }
        }
    } else if (do_cols) {
        col_stage_input = normalized;
        if (col_stage_input.n_rows >= 2) {
            res.col_sketch =
                sketch_columns(col_stage_input, {cfg.max_correlation, cfg.max_columns});
        } else {
            res.col_stage_skipped = true;
        }
        if (do_rows) {
            row_stage_input = res.col_sketch
                                  ? project_columns(normalized, *res.col_sketch)
                                  : normalized;
            RowSketchConfig rc;
            rc.radius = resolve_radius(row_stage_input, cfg, res.radius_search_result);
            res.row_sketch = sketch_rows(row_stage_input, rc);
        }
    }

    // Pointer arrays back into the file.
    if (res.row_sketch) {
        for (std::size_t j = 0; j < res.row_sketch->m; ++j) {
            res.a.push_back(res.ingest.row_map[res.row_sketch->exemplar_indices[j]]);
            res.weights.push_back(res.row_sketch->weights[j]);
        }
    } else {
        res.a = res.ingest.row_map;
        res.weights.assign(n, 1);
    }

    if (res.col_sketch) {
        std::set<std::size_t> seen;
        for (std::size_t wc : res.col_sketch->selected) {
            const std::size_t src = res.working.columns[wc].source_col;
            if (seen.insert(src).second) {
                res.b.push_back(src);
                res.b_names.push_back(res.ingest.header[src]);
            }
        }
    } else {
        // Every file column, in file order.
        for (std::size_t c = 0; c < res.ingest.header.size(); ++c) {
            res.b.push_back(c);
            res.b_names.push_back(res.ingest.header[c]);
        }
    }

    // Bound verification, within the pair budget. The bound constants only
    // speak about unit-range data.
    bool unit_range = cfg.normalize;
    if (!unit_range) {
        unit_range = true;
        for (double v : normalized.values)
            if (v < 0.0 || v > 1.0) {
                unit_range = false;
                break;
            }
    }
    BoundReport rep;
    const std::size_t row_pairs =
        row_stage_input.n_rows ? CondensedDistances::length(row_stage_input.n_rows) : 0;
    if (res.row_sketch) {
        if (row_pairs <= kMaxVerifyPairs && row_stage_input.n_rows >= 2) {
            rep = row_bound_report(row_stage_input, *res.row_sketch);
        } else {
            rep.n = row_stage_input.n_rows;
            rep.p = row_stage_input.n_cols;
            rep.m = res.row_sketch->m;
            rep.radius = res.row_sketch->radius_used;
            rep.has_row_stage = true;
            rep.row_pairwise_bound =
                row_pairwise_bound(row_stage_input.n_cols, res.row_sketch->radius_used);
            rep.row_total_bound = row_total_bound(row_stage_input.n_rows, res.row_sketch->m,
                                                  row_stage_input.n_cols,
                                                  res.row_sketch->radius_used);
            rep.empirical_evaluated = false;
        }
    }
    if (res.col_sketch) {
        const std::size_t col_pairs = CondensedDistances::length(col_stage_input.n_rows);
        if (col_pairs <= kMaxVerifyPairs) {
            rep = col_bound_report(col_stage_input, *res.col_sketch, rep);
        } else {
            rep.has_col_stage = true;
            rep.epsilon = res.col_sketch->achieved_correlation;
            rep.column_bound = column_bound(col_stage_input.n_rows, col_stage_input.n_cols,
                                            res.col_sketch->achieved_correlation);
            rep.empirical_evaluated = false;
        }
    }
    rep.unit_range = unit_range;
    res.bounds = rep;

    // Sidecar document.
    ordered_json side;
    side["schema_version"] = kSidecarSchemaVersion;
    side["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    side["input"] = {{"path", input_csv},
                     {"data_rows", res.ingest.file_rows},
                     {"columns", res.ingest.header.size()},
                     {"dropped_rows", res.ingest.dropped_rows},
                     {"na_policy", cfg.na_policy == NaPolicy::Reject ? "reject" : "drop-rows"}};
    ordered_json jcfg;
    jcfg["normalize"] = cfg.normalize;
    jcfg["order_requested"] = cfg.rows_only ? "rows-only"
                              : cfg.cols_only ? "cols-only"
                                              : order_name(cfg.order);
    jcfg["order_resolved"] = res.order_resolved;
    jcfg["max_correlation"] = cfg.max_correlation;
    if (cfg.max_columns) jcfg["max_columns"] = *cfg.max_columns;
    if (cfg.radius) jcfg["radius_requested"] = *cfg.radius;
    if (cfg.target_rows) jcfg["target_rows"] = *cfg.target_rows;
    if (cfg.seed) jcfg["seed"] = *cfg.seed;
    if (cfg.categorical_columns) jcfg["categorical_declared"] = *cfg.categorical_columns;
    side["config"] = jcfg;

    ordered_json jcols = ordered_json::array();
    for (std::size_t c = 0; c < res.working.columns.size(); ++c) {
        const WorkingColumn& wc = res.working.columns[c];
        ordered_json jc;
        jc["name"] = wc.name;
        jc["source_col"] = wc.source_col;
        jc["source_name"] = res.ingest.header[wc.source_col];
        jc["kind"] = wc.from_categorical ? "ca" : "numeric";
        if (wc.from_categorical) jc["component"] = wc.component;
        jc["min"] = res.norm.col_min[c];
        jc["max"] = res.norm.col_max[c];
        jcols.push_back(jc);
    }
    side["working_columns"] = jcols;

    ordered_json jcats = ordered_json::array();
    for (std::size_t c = 0; c < res.ingest.categoricals.size(); ++c) {
        const auto& cat = res.ingest.categoricals[c];
        const auto& enc = res.working.encodings[c];
        jcats.push_back({{"name", cat.name},
                         {"source_col", res.ingest.categorical_source_cols[c]},
                         {"levels", cat.levels},
                         {"eigenvalues", enc.eigenvalues},
                         {"retained", enc.retained}});
    }
    side["categorical"] = jcats;

    ordered_json jrows;
    jrows["m"] = res.a.size();
    if (res.row_sketch) jrows["radius_used"] = res.row_sketch->radius_used;
    if (res.radius_search_result) {
        jrows["radius_search"] = {{"target", cfg.target_rows ? *cfg.target_rows : 0},
                                  {"achieved_m", res.radius_search_result->m},
                                  {"converged", res.radius_search_result->converged}};
    }
    jrows["a"] = res.a;
    jrows["weights"] = res.weights;
    if (cfg.emit_members && res.row_sketch) {
        ordered_json members = ordered_json::array();
        for (const auto& lst : res.row_sketch->members) {
            ordered_json jm = ordered_json::array();
            for (std::size_t idx : lst) jm.push_back(res.ingest.row_map[idx]);
            members.push_back(jm);
        }
        jrows["members"] = members;
    }
    side["rows"] = jrows;

    ordered_json jcolsec;
    jcolsec["k"] = res.b.size();
    jcolsec["b"] = res.b;
    jcolsec["b_names"] = res.b_names;
    if (res.col_sketch) {
        jcolsec["achieved_correlation"] = res.col_sketch->achieved_correlation;
        ordered_json jtrace = ordered_json::array();
        for (const auto& step : res.col_sketch->trace) {
            jtrace.push_back({{"working_col", step.column},
                              {"name", res.working.columns[step.column].name},
                              {"source_col", res.working.columns[step.column].source_col},
                              {"correlation", step.correlation}});
        }
        jcolsec["trace"] = jtrace;
    }
    if (res.col_stage_skipped) jcolsec["skipped"] = "fewer than two exemplars";
    side["columns"] = jcolsec;

    side["bounds"] = bound_report_to_json(res.bounds);
    res.sidecar = std::move(side);
    return res;
}

std::string sidecar_path_for(const std::string& out_csv_path) {
    const auto dot = out_csv_path.find_last_of('.');
    const auto slash = out_csv_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return out_csv_path + ".sketch.json";
    return out_csv_path.substr(0, dot) + ".sketch.json";
}

void write_outputs(const std::string& input_csv, const PipelineResult& result,
                   const std::string& out_csv_path) {
    write_sketched_csv(input_csv, out_csv_path, result.a, result.b, result.weights);
    atomic_write_file(sidecar_path_for(out_csv_path), result.sidecar.dump(2) + "\n");
}

namespace {

RowSketch reconstruct_row_sketch(const Matrix& x,
                                 const std::vector<std::size_t>& exemplar_rows, double radius) {
    RowSketch rs;
    rs.m = exemplar_rows.size();
    rs.radius_used = radius;
    rs.exemplar_indices = exemplar_rows;
    rs.members.resize(rs.m);
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < x.n_rows; ++i) {
        bool placed = false;
        for (std::size_t j = 0; j < rs.m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.n_cols; ++k) {
                const double d = x.at(i, k) - x.at(exemplar_rows[j], k);
                s += d * d;
                if (s >= r2) break;
            }
            if (s < r2) {
                rs.members[j].push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw UsageError("sidecar is inconsistent with the data: row " + std::to_string(i) +
                             " is not covered by any recorded exemplar");
    }
    rs.weights.resize(rs.m);
    for (std::size_t j = 0; j < rs.m; ++j) rs.weights[j] = rs.members[j].size();
    return rs;
}

} // namespace

BoundReport recompute_bounds(const std::string& input_csv, const ordered_json& sidecar) {
    IngestConfig icfg;
    const auto& jc = sidecar.at("config");
    if (jc.contains("categorical_declared"))
        icfg.categorical_columns = jc.at("categorical_declared").get<std::vector<std::string>>();
    icfg.na_policy =
        sidecar.at("input").at("na_policy").get<std::string>() == "reject" ? NaPolicy::Reject
                                                                           : NaPolicy::DropRows;
    IngestResult ingest = ingest_csv(input_csv, icfg);
    WorkingMatrix wm = build_working_matrix(ingest);

    Matrix normalized;
    bool unit_range = true;
    if (jc.at("normalize").get<bool>()) {
        normalized = normalize_columns(wm.values).first;
    } else {
        normalized = wm.values;
        for (double v : normalized.values)
            if (v < 0.0 || v > 1.0) {
                unit_range = false;
                break;
            }
    }

    // Matrix-row positions of the recorded file rows.
    std::vector<std::size_t> inverse(ingest.file_rows, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < ingest.row_map.size(); ++i) inverse[ingest.row_map[i]] = i;

    const std::string order = jc.at("order_resolved").get<std::string>();
    const auto& jrows = sidecar.at("rows");
    const auto& jcols = sidecar.at("columns");

    std::optional<ColSketch> cs;
    if (jcols.contains("trace")) {
        ColSketch sketch;
        for (const auto& step : jcols.at("trace"))
            sketch.selected.push_back(step.at("working_col").get<std::size_t>());
        sketch.achieved_correlation = jcols.at("achieved_correlation").get<double>();
        cs = std::move(sketch);
    }

    std::optional<RowSketch> rs;
    Matrix row_stage_input;
    Matrix col_stage_input;
    if (order == "cols-first") {
        col_stage_input = normalized;
        // No trace means the column stage was skipped on a degenerate input.
        row_stage_input = cs ? project_columns(normalized, *cs) : normalized;
    } else if (order == "cols-only") {
        col_stage_input = normalized;
    } else {
        row_stage_input = normalized;
    }

    if (jrows.contains("radius_used")) {
        std::vector<std::size_t> exemplar_rows;
        for (const auto& fr : jrows.at("a")) {
            const std::size_t file_row = fr.get<std::size_t>();
            if (file_row >= inverse.size() || inverse[file_row] == static_cast<std::size_t>(-1))
                throw UsageError("sidecar: exemplar row " + std::to_string(file_row) +
                                 " is not a data row of this file");
            exemplar_rows.push_back(inverse[file_row]);
        }
        rs = reconstruct_row_sketch(row_stage_input, exemplar_rows,
                                    jrows.at("radius_used").get<double>());
        if (order == "rows-first" && cs)
            col_stage_input = exemplar_matrix(*rs, normalized);
    }

    BoundReport rep;
    if (rs) {
        if (CondensedDistances::length(row_stage_input.n_rows) <= kMaxVerifyPairs) {
            rep = row_bound_report(row_stage_input, *rs);
        } else {
            rep.n = row_stage_input.n_rows;
            rep.p = row_stage_input.n_cols;
            rep.m = rs->m;
            rep.radius = rs->radius_used;
            rep.has_row_stage = true;
            rep.row_pairwise_bound = row_pairwise_bound(row_stage_input.n_cols, rs->radius_used);
            rep.row_total_bound = row_total_bound(row_stage_input.n_rows, rs->m,
                                                  row_stage_input.n_cols, rs->radius_used);
            rep.empirical_evaluated = false;
        }
    }
    if (cs) {
        if (CondensedDistances::length(col_stage_input.n_rows) <= kMaxVerifyPairs) {
            rep = col_bound_report(col_stage_input, *cs, rep);
        } else {
            rep.has_col_stage = true;
            rep.epsilon = cs->achieved_correlation;
            rep.column_bound = column_bound(col_stage_input.n_rows, col_stage_input.n_cols,
                                            cs->achieved_correlation);
            rep.empirical_evaluated = false;
        }
    }
    rep.unit_range = unit_range;
    return rep;
}

StatsPanels stats_panels(const Matrix& numeric, const std::vector<std::size_t>& exemplar_rows,
                         const std::vector<std::uint64_t>& weights, std::uint64_t sample_seed) {
    if (exemplar_rows.size() != weights.size())
        throw UsageError("stats_panels: exemplars and weights differ in length");
    StatsPanels out;
    out.n = numeric.n_rows;
    out.sample_seed = sample_seed;
    const std::size_t m = exemplar_rows.size();
    const auto sample = random_row_sample(numeric.n_rows, std::max<std::size_t>(m, 1), sample_seed);

    std::vector<std::uint64_t> unit_full(numeric.n_rows, 1);
    std::vector<std::uint64_t> unit_sample(sample.size(), 1);

    for (std::size_t c = 0; c < numeric.n_cols; ++c) {
        out.columns.push_back(numeric.col_labels.empty() ? "col" + std::to_string(c)
                                                         : numeric.col_labels[c]);
        const std::vector<double> full = numeric.column(c);
        out.original.push_back(weighted_summary(full, unit_full));

        std::vector<double> sketch_vals(m);
        for (std::size_t j = 0; j < m; ++j) sketch_vals[j] = numeric.at(exemplar_rows[j], c);
        out.sketch.push_back(weighted_summary(sketch_vals, weights));

        std::vector<double> sample_vals(sample.size());
        for (std::size_t j = 0; j < sample.size(); ++j)
            sample_vals[j] = numeric.at(sample[j], c);
        out.sample.push_back(weighted_summary(sample_vals, unit_sample));
    }
    return out;
}

} // namespace matsketch
