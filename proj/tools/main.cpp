#include "matsketch/csv.hpp"
#include "matsketch/errors.hpp"
#include "matsketch/eval.hpp"
#include "matsketch/pipeline.hpp"
#include "matsketch/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace matsketch;

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

struct CommonOpts {
    PipelineConfig cfg;
    std::string input;
    std::string out;
    std::vector<std::string> categorical;
    std::string order = "auto";
    std::string na = "reject";
    double radius = 0.0;
    std::size_t target_rows = 0;
    std::size_t max_columns = 0;
    std::uint64_t seed = 0;
    bool no_normalize = false;
    bool members = false;

    void attach(CLI::App* app, bool with_input = true) {
        if (with_input)
            app->add_option("input", input, "input CSV file (header row required)")
                ->required();
        app->add_option("--radius", radius, "covering radius in normalized units");
        app->add_option("--target-rows", target_rows,
                        "search for a radius that yields about this many exemplars");
        app->add_option("--max-correlation", cfg.max_correlation,
                        "column-selection stopping threshold in (0,1]")
            ->capture_default_str();
        app->add_option("--max-columns", max_columns, "hard cap on selected columns");
        app->add_option("--order", order, "auto | rows-first | cols-first")
            ->capture_default_str();
        app->add_flag("--no-normalize", no_normalize, "skip min-max column normalization");
        app->add_option("--categorical", categorical,
                        "column names to encode as categorical (repeatable)");
        app->add_option("--na", na, "missing-value policy: reject | drop-rows")
            ->capture_default_str();
        app->add_option("--seed", seed, "seed for sampling and shuffles (env SKETCH_SEED)");
        app->add_flag("--members", members, "store member index lists in the sidecar");
        app->add_option("--out", out, "output path for the sketched CSV");
    }

    PipelineConfig resolve(const CLI::App* app) {
        if (app->count("--radius")) cfg.radius = radius;
        if (app->count("--target-rows")) cfg.target_rows = target_rows;
        if (app->count("--max-columns")) cfg.max_columns = max_columns;
        if (app->count("--categorical")) cfg.categorical_columns = categorical;
        cfg.normalize = !no_normalize;
        cfg.emit_members = members;
        if (order == "auto")
            cfg.order = SketchOrder::Auto;
        else if (order == "rows-first")
            cfg.order = SketchOrder::RowsFirst;
        else if (order == "cols-first")
            cfg.order = SketchOrder::ColsFirst;
        else
            throw UsageError("--order must be auto, rows-first, or cols-first");
        if (na == "reject")
            cfg.na_policy = NaPolicy::Reject;
        else if (na == "drop-rows")
            cfg.na_policy = NaPolicy::DropRows;
        else
            throw UsageError("--na must be reject or drop-rows");
        if (app->count("--seed")) {
            cfg.seed = seed;
        } else if (const char* env = std::getenv("SKETCH_SEED")) {
            cfg.seed = std::strtoull(env, nullptr, 10);
        }
        return cfg;
    }

    std::string out_path() const {
        if (!out.empty()) return out;
        const auto dot = input.find_last_of('.');
        const auto slash = input.find_last_of('/');
        if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
            return input + ".sketch.csv";
        return input.substr(0, dot) + ".sketch.csv";
    }
};

int run_sketch(CommonOpts& opts, const CLI::App* app, bool rows_only, bool cols_only) {
    PipelineConfig cfg = opts.resolve(app);
    cfg.rows_only = rows_only;
    cfg.cols_only = cols_only;
    PipelineResult res = run_pipeline(opts.input, cfg);
    write_outputs(opts.input, res, opts.out_path());

    if (res.ingest.dropped_rows)
        std::cerr << "warning: dropped " << res.ingest.dropped_rows
                  << " rows with missing values\n";
    if (res.radius_search_result && !res.radius_search_result->converged)
        std::cerr << "warning: radius search did not reach the target within budget; "
                  << "using radius " << fmt(res.radius_search_result->radius) << " (m="
                  << res.radius_search_result->m << ")\n";

    std::cout << "rows: " << res.ingest.row_map.size() << " -> " << res.a.size()
              << ", columns: " << res.ingest.header.size() << " -> " << res.b.size() << "\n";
    if (res.row_sketch)
        std::cout << "radius_used: " << fmt(res.row_sketch->radius_used) << "\n";
    if (res.col_sketch)
        std::cout << "achieved_correlation: " << fmt(res.col_sketch->achieved_correlation)
                  << "\n";
    std::cout << "sketch: " << opts.out_path() << "\n"
              << "sidecar: " << sidecar_path_for(opts.out_path()) << "\n";

    const BoundReport& b = res.bounds;
    if (b.empirical_evaluated && b.unit_range &&
        ((b.has_row_stage && !b.row_theorem_holds) ||
         (b.has_col_stage && !b.col_theorem_holds)))
        throw NumericError("a bound inequality failed on this run; see the sidecar");
    if (b.empirical_evaluated && !b.unit_range &&
        ((b.has_row_stage && !b.row_theorem_holds) ||
         (b.has_col_stage && !b.col_theorem_holds)))
        std::cerr << "note: a bound inequality fails, but the data was not "
                     "normalized to [0,1] so the bound does not apply\n";
    return kExitOk;
}

void print_bound_report(const BoundReport& rep) {
    std::cout << "n=" << rep.n << " p=" << rep.p << " m=" << rep.m << "\n";
    if (rep.has_row_stage) {
        std::cout << "row: radius=" << fmt(rep.radius)
                  << " pairwise_bound=" << fmt(rep.row_pairwise_bound)
                  << " total_bound=" << fmt(rep.row_total_bound);
        if (rep.empirical_evaluated)
            std::cout << " empirical_max=" << fmt(rep.row_empirical_max) << " at ("
                      << rep.row_argmax_pair.first << "," << rep.row_argmax_pair.second
                      << ") total_abs=" << fmt(rep.row_total_abs_error)
                      << (rep.row_theorem_holds ? " [holds]" : " [VIOLATED]");
        std::cout << "\n";
    }
    if (rep.has_col_stage) {
        std::cout << "col: epsilon=" << fmt(rep.epsilon)
                  << " bound=" << fmt(rep.column_bound);
        if (rep.empirical_evaluated)
            std::cout << " empirical_max=" << fmt(rep.col_empirical_max) << " at ("
                      << rep.col_argmax_pair.first << "," << rep.col_argmax_pair.second << ")"
                      << (rep.col_theorem_holds ? " [holds]" : " [VIOLATED]");
        std::cout << "\n";
    }
    if (!rep.empirical_evaluated)
        std::cout << "(empirical discrepancies skipped: pair count above budget)\n";
}

int run_bounds(const std::string& input, const std::string& sidecar_file,
               const std::string& out) {
    std::ifstream in(sidecar_file);
    if (!in) throw DataError("cannot open sidecar '" + sidecar_file + "'");
    nlohmann::ordered_json side = nlohmann::ordered_json::parse(in);

    BoundReport rep = recompute_bounds(input, side);
    nlohmann::ordered_json jrep = bound_report_to_json(rep);
    print_bound_report(rep);

    if (side.contains("bounds")) {
        if (side.at("bounds") == jrep) {
            std::cout << "sidecar bounds: reproduced exactly\n";
        } else {
            std::cout << "sidecar bounds: MISMATCH\n";
            throw DataError("recomputed bound report differs from the sidecar");
        }
    }
    if (!out.empty()) atomic_write_file(out, jrep.dump(2) + "\n");
    if (rep.empirical_evaluated && rep.unit_range &&
        ((rep.has_row_stage && !rep.row_theorem_holds) ||
         (rep.has_col_stage && !rep.col_theorem_holds)))
        throw NumericError("a bound inequality fails for this sketch");
    return kExitOk;
}

int run_stats(CommonOpts& opts, const CLI::App* app, const std::string& json_out) {
    PipelineConfig cfg = opts.resolve(app);
    cfg.rows_only = true;
    PipelineResult res = run_pipeline(opts.input, cfg);

    std::vector<std::size_t> exemplar_rows = res.row_sketch->exemplar_indices;
    StatsPanels panels = stats_panels(res.ingest.numeric, exemplar_rows,
                                      res.weights, cfg.seed.value_or(0));

    auto print_panel = [&](const std::string& title, const std::vector<WeightedSummary>& s,
                           bool weighted) {
        std::cout << title << "\n";
        std::cout << "  stat";
        for (const auto& c : panels.columns) std::cout << "\t" << c;
        std::cout << "\n";
        auto line = [&](const std::string& name, auto get) {
            std::cout << "  " << name;
            for (const auto& col : s) std::cout << "\t" << get(col);
            std::cout << "\n";
        };
        line("m", [](const WeightedSummary& w) { return fmt(static_cast<double>(w.m)); });
        std::cout << "  n";
        for (std::size_t i = 0; i < s.size(); ++i)
            std::cout << "\t" << (weighted ? fmt(static_cast<double>(s[i].n))
                                            : fmt(static_cast<double>(panels.n)));
        std::cout << "\n";
        line("min", [](const WeightedSummary& w) { return fmt(w.min); });
        line("max", [](const WeightedSummary& w) { return fmt(w.max); });
        line("mean", [](const WeightedSummary& w) { return fmt(w.mean); });
        line("median", [](const WeightedSummary& w) { return fmt(w.median); });
        line("sd", [](const WeightedSummary& w) { return fmt(w.sd); });
    };
    print_panel("Original Dataset", panels.original, false);
    print_panel("Sketch Dataset (frequency weighted)", panels.sketch, true);
    print_panel("Random Sample", panels.sample, false);

    if (!opts.out.empty()) {
        std::ostringstream csv;
        csv << "panel,column,m,n,min,max,mean,median,sd\n";
        auto emit = [&](const std::string& panel, const std::vector<WeightedSummary>& s,
                        bool weighted) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                const WeightedSummary& w = s[i];
                csv << panel << ',' << panels.columns[i] << ',' << w.m << ','
                    << (weighted ? w.n : panels.n) << ',' << fmt(w.min) << ',' << fmt(w.max)
                    << ',' << fmt(w.mean) << ',' << fmt(w.median) << ',' << fmt(w.sd) << "\n";
            }
        };
        emit("original", panels.original, false);
        emit("sketch", panels.sketch, true);
        emit("sample", panels.sample, false);
        atomic_write_file(opts.out, csv.str());
    }
    if (!json_out.empty()) {
        nlohmann::ordered_json j;
        j["n"] = panels.n;
        j["m"] = res.a.size();
        j["radius_used"] = res.row_sketch->radius_used;
        j["sample_seed"] = panels.sample_seed;
        j["variance_denominator"] = "sum of weights (population form)";
        j["median"] = "lower weighted median";
        auto panel_json = [&](const std::vector<WeightedSummary>& s) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < s.size(); ++i) {
                arr.push_back({{"column", panels.columns[i]},
                               {"m", s[i].m},
                               {"n", s[i].n},
                               {"min", s[i].min},
                               {"max", s[i].max},
                               {"mean", s[i].mean},
                               {"median", s[i].median},
                               {"sd", s[i].sd}});
            }
            return arr;
        };
        j["original"] = panel_json(panels.original);
        j["sketch"] = panel_json(panels.sketch);
        j["sample"] = panel_json(panels.sample);
        atomic_write_file(json_out, j.dump(2) + "\n");
    }
    return kExitOk;
}

// Radius resolution shared by eval (mirrors the pipeline's rules).
double resolve_radius_for_eval(const Matrix& x, const PipelineConfig& cfg,
                               std::optional<RadiusSearchResult>& search) {
    if (cfg.radius) return *cfg.radius;
    if (cfg.target_rows) {
        RadiusSearchResult r = radius_search(x, *cfg.target_rows);
        search = r;
        return r.radius;
    }
    return x.n_rows >= 2 ? default_radius(x.n_rows, x.n_cols) : 0.25;
}

int run_eval(CommonOpts& opts, const CLI::App* app, std::size_t n_seeds,
             const std::string& pairs_out) {
    PipelineConfig cfg = opts.resolve(app);
    const std::uint64_t seed0 = cfg.seed.value_or(0);

    IngestResult ingest = ingest_csv(opts.input, {cfg.categorical_columns, cfg.na_policy});
    WorkingMatrix wm = build_working_matrix(ingest);
    Matrix normalized = cfg.normalize ? normalize_columns(wm.values).first : wm.values;

    std::vector<EvalReport> rows;

    // Row stage.
    double t0 = now_seconds();
    RowSketchConfig rc;
    std::optional<RadiusSearchResult> search;
    rc.radius = resolve_radius_for_eval(normalized, cfg, search);
    RowSketch rs = sketch_rows(normalized, rc);
    const double row_time = now_seconds() - t0;

    double row_corr = 0.0, row_max = -1.0;
    if (CondensedDistances::length(normalized.n_rows) <= 20'000'000) {
        Matrix replaced(normalized.n_rows, normalized.n_cols);
        for (std::size_t j = 0; j < rs.m; ++j)
            for (std::size_t idx : rs.members[j])
                for (std::size_t c = 0; c < normalized.n_cols; ++c)
                    replaced.at(idx, c) = normalized.at(rs.exemplar_indices[j], c);
        CondensedDistances full = condensed_sq_dist(normalized);
        CondensedDistances red = condensed_sq_dist(replaced);
        row_corr = frobenius_correlation(full, red);
        row_max = empirical_max_sq_discrepancy(full, red).first;
    }
    rows.push_back({"row-sketch", rs.m, row_corr, row_max, row_time, seed0});

    // Column stage on the exemplars.
    Matrix exemplars = exemplar_matrix(rs, normalized);
    if (exemplars.n_rows >= 2) {
        t0 = now_seconds();
        ColSketch cs = sketch_columns(exemplars, {cfg.max_correlation, cfg.max_columns});
        const double col_time = now_seconds() - t0;
        CondensedDistances full_m = condensed_sq_dist(exemplars);
        CondensedDistances red_m = condensed_sq_dist(project_columns(exemplars, cs));
        const double col_max = empirical_max_sq_discrepancy(full_m, red_m).first;
        rows.push_back({"col-sketch", cs.selected.size(), cs.achieved_correlation,
                        col_max, col_time, seed0});

        const std::size_t k = cs.selected.size();
        t0 = now_seconds();
        const double mean_rand =
            mean_random_subset_correlation(exemplars, k, n_seeds, seed0 + 1000);
        rows.push_back(
            {"col-random-mean", k, mean_rand, -1.0, now_seconds() - t0, seed0 + 1000});

        double combos = 1.0;
        for (std::size_t i = 0; i < k; ++i)
            combos = combos * static_cast<double>(exemplars.n_cols - i) /
                     static_cast<double>(i + 1);
        if (combos <= 1e5) {
            t0 = now_seconds();
            auto [subset, oracle] = exhaustive_best_columns(exemplars, k);
            rows.push_back(
                {"col-exhaustive", k, oracle, -1.0, now_seconds() - t0, seed0});
        }

        if (!pairs_out.empty())
            atomic_write_file(pairs_out, distance_pairs_csv(distance_pairs(full_m, red_m)));
    }

    std::ostringstream report;
    report << eval_reports_csv(rows);

    // Coverage contrast: sketch vs equal-size random samples.
    CoverageContrast cov =
        sketch_vs_sample_max_coverage(wm.values, rs, n_seeds, seed0 + 2000);
    report << "\n# sketch per-column max >= sample per-column max, " << n_seeds
           << " seeds\nwins,cases,fraction\n"
           << cov.wins << ',' << cov.cases << ',' << fmt(cov.fraction) << "\n";

    // Per-column extremes in original units (sample from the first seed).
    const auto sample = random_row_sample(wm.values.n_rows, rs.m, seed0 + 2000);
    report << "\n# per-column extremes (original units)\n"
              "column,orig_min,orig_max,sketch_min,sketch_max,sample_min,sample_max\n";
    for (std::size_t c = 0; c < wm.values.n_cols; ++c) {
        double omin = 1e300, omax = -1e300, smin = 1e300, smax = -1e300, qmin = 1e300,
               qmax = -1e300;
        for (std::size_t i = 0; i < wm.values.n_rows; ++i) {
            omin = std::min(omin, wm.values.at(i, c));
            omax = std::max(omax, wm.values.at(i, c));
        }
        for (std::size_t ex : rs.exemplar_indices) {
            smin = std::min(smin, wm.values.at(ex, c));
            smax = std::max(smax, wm.values.at(ex, c));
        }
        for (std::size_t idx : sample) {
            qmin = std::min(qmin, wm.values.at(idx, c));
            qmax = std::max(qmax, wm.values.at(idx, c));
        }
        report << wm.columns[c].name << ',' << fmt(omin) << ',' << fmt(omax) << ','
               << fmt(smin) << ',' << fmt(smax) << ',' << fmt(qmin) << ',' << fmt(qmax)
               << "\n";
    }

    std::cout << report.str();
    if (!opts.out.empty()) atomic_write_file(opts.out, report.str());
    if (search && !search->converged)
        std::cerr << "warning: radius search did not converge\n";
    return kExitOk;
}

int run_gen(const std::string& kind, std::size_t rows, std::size_t cols, std::uint64_t seed,
            const std::string& out) {
    Matrix m;
    if (kind == "gaussian")
        m = gaussian_matrix(rows, cols, seed);
    else if (kind == "clusters")
        m = clustered_gaussian_matrix(rows, cols, seed);
    else
        throw UsageError("--kind must be gaussian or clusters");

    std::ostringstream csv;
    for (std::size_t c = 0; c < cols; ++c) csv << (c ? "," : "") << "col" << c;
    csv << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < cols; ++c) csv << (c ? "," : "") << fmt(m.at(i, c));
        csv << "\n";
    }
    atomic_write_file(out, csv.str());
    std::cout << "wrote " << rows << "x" << cols << " " << kind << " matrix to " << out
              << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distance-preserving matrix sketching"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonOpts sketch_opts, rows_opts, cols_opts, stats_opts, eval_opts;

    CLI::App* cmd_sketch = app.add_subcommand("sketch", "row + column sketch pipeline");
    sketch_opts.attach(cmd_sketch);

    CLI::App* cmd_rows = app.add_subcommand("sketch-rows", "row sketch only");
    rows_opts.attach(cmd_rows);

    CLI::App* cmd_cols = app.add_subcommand("sketch-cols", "column sketch only");
    cols_opts.attach(cmd_cols);

    CLI::App* cmd_stats =
        app.add_subcommand("stats", "frequency-weighted three-panel summary");
    std::string stats_json;
    stats_opts.attach(cmd_stats);
    cmd_stats->add_option("--json", stats_json, "also write the panels as JSON");

    CLI::App* cmd_bounds = app.add_subcommand("bounds", "recompute bounds from a sidecar");
    std::string bounds_input, bounds_sidecar, bounds_out;
    cmd_bounds->add_option("input", bounds_input, "original CSV file")->required();
    cmd_bounds->add_option("--sidecar", bounds_sidecar, "sidecar written by sketch")
        ->required();
    cmd_bounds->add_option("--out", bounds_out, "write the recomputed report as JSON");

    CLI::App* cmd_eval = app.add_subcommand("eval", "baselines and distance preservation");
    std::size_t eval_seeds = 20;
    std::string pairs_out;
    eval_opts.attach(cmd_eval);
    cmd_eval->add_option("--seeds", eval_seeds, "number of baseline seeds")
        ->capture_default_str();
    cmd_eval->add_option("--pairs-out", pairs_out, "write original,reduced distance pairs");

    CLI::App* cmd_gen = app.add_subcommand("gen", "generate synthetic datasets");
    std::string gen_kind = "gaussian", gen_out;
    std::size_t gen_rows = 1000, gen_cols = 3;
    std::uint64_t gen_seed = 0;
    cmd_gen->add_option("--kind", gen_kind, "gaussian | clusters")->capture_default_str();
    cmd_gen->add_option("--rows", gen_rows, "rows to generate")->capture_default_str();
    cmd_gen->add_option("--cols", gen_cols, "columns to generate")->capture_default_str();
    cmd_gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    cmd_gen->add_option("--out", gen_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cmd_sketch->parsed()) return run_sketch(sketch_opts, cmd_sketch, false, false);
        if (cmd_rows->parsed()) return run_sketch(rows_opts, cmd_rows, true, false);
        if (cmd_cols->parsed()) return run_sketch(cols_opts, cmd_cols, false, true);
        if (cmd_stats->parsed()) return run_stats(stats_opts, cmd_stats, stats_json);
        if (cmd_bounds->parsed()) return run_bounds(bounds_input, bounds_sidecar, bounds_out);
        if (cmd_eval->parsed()) return run_eval(eval_opts, cmd_eval, eval_seeds, pairs_out);
        if (cmd_gen->parsed())
            return run_gen(gen_kind, gen_rows, gen_cols, gen_seed, gen_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
