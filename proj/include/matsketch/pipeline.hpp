#pragma once

#include "matsketch/categorical.hpp"
#include "matsketch/col_sketcher.hpp"
#include "matsketch/csv.hpp"
#include "matsketch/error_bounds.hpp"
#include "matsketch/matrix.hpp"
#include "matsketch/row_sketcher.hpp"
#include "matsketch/weighted_stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace matsketch {

enum class SketchOrder { Auto, RowsFirst, ColsFirst };

struct PipelineConfig {
    std::optional<double> radius;              // unset: default formula
    std::optional<std::size_t> target_rows;    // unset: no radius search
    double max_correlation = 0.95;
    std::optional<std::size_t> max_columns;
    SketchOrder order = SketchOrder::Auto;
    bool normalize = true;
    std::optional<std::vector<std::string>> categorical_columns;
    NaPolicy na_policy = NaPolicy::Reject;
    std::optional<std::uint64_t> seed;
    bool emit_members = false;
    bool rows_only = false;
    bool cols_only = false;
};

/// One column of the matrix the sketchers actually run on: either a numeric
/// file column or one correspondence-analysis component of a categorical one.
struct WorkingColumn {
    std::string name;
    std::size_t source_col = 0;   // file column index
    bool from_categorical = false;
    std::size_t component = 0;    // CA component, 0 for numeric
};

struct WorkingMatrix {
    Matrix values; // original scale, numeric block then CA scores
    std::vector<WorkingColumn> columns;
    std::vector<CAEncoding> encodings; // aligned with IngestResult::categoricals
};

/// Assembles the numeric block plus CA scores for every categorical column.
WorkingMatrix build_working_matrix(const IngestResult& ingest);

struct RadiusSearchResult {
    double radius = 0.0;
    std::size_t m = 0;
    bool converged = false;
};

/// Bisection on r over (0, sqrt(p)] until the exemplar count lands within
/// +-5% of target_m (at least +-1) or 30 probes elapse; returns the best
/// radius found either way.
RadiusSearchResult radius_search(const Matrix& x, std::size_t target_m);

struct PipelineResult {
    IngestResult ingest;
    WorkingMatrix working;
    NormalizationParams norm;           // identity-like when normalize is off
    bool normalized = false;
    std::string order_resolved;         // rows-first|cols-first|rows-only|cols-only

    std::optional<RowSketch> row_sketch;
    std::optional<ColSketch> col_sketch;
    bool col_stage_skipped = false;     // fewer than 2 exemplars to select on
    std::optional<RadiusSearchResult> radius_search_result;

    std::vector<std::size_t> a;         // file data-row indices, creation order
    std::vector<std::size_t> b;         // file column indices, selection order
    std::vector<std::string> b_names;
    std::vector<std::uint64_t> weights; // aligned with a

    BoundReport bounds;
    nlohmann::ordered_json sidecar;
};

/// Runs ingestion, encoding, normalization, both sketch stages in the
/// resolved order, bound verification, and sidecar assembly.
PipelineResult run_pipeline(const std::string& input_csv, const PipelineConfig& cfg);

/// Writes the sketched CSV (original cells verbatim plus __weight) and the
/// sidecar document next to it.
void write_outputs(const std::string& input_csv, const PipelineResult& result,
                   const std::string& out_csv_path);

/// The sidecar lives adjacent to the sketched CSV: extension replaced by
/// ".sketch.json".
std::string sidecar_path_for(const std::string& out_csv_path);

/// Rebuilds the sketches recorded in a sidecar from the original file and
/// recomputes the bound report; the result must match the stored one.
BoundReport recompute_bounds(const std::string& input_csv,
                             const nlohmann::ordered_json& sidecar);

nlohmann::ordered_json bound_report_to_json(const BoundReport& rep);

/// Frequency-weighted three-panel summaries (original / sketch / sample) per
/// numeric column, in original units.
struct StatsPanels {
    std::vector<std::string> columns;
    std::vector<WeightedSummary> original;
    std::vector<WeightedSummary> sketch;
    std::vector<WeightedSummary> sample;
    std::size_t n = 0; // parent dataset rows, mirrored in every panel
    std::uint64_t sample_seed = 0;
};

StatsPanels stats_panels(const Matrix& numeric, const std::vector<std::size_t>& exemplar_rows,
                         const std::vector<std::uint64_t>& weights, std::uint64_t sample_seed);

} // namespace matsketch
