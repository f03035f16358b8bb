#include "matsketch/csv.hpp"
#include "matsketch/errors.hpp"
#include "matsketch/eval.hpp"
#include "matsketch/pipeline.hpp"
#include "matsketch/rng.hpp"

#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace matsketch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "matsketch_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string matrix_to_csv(const Matrix& m) {
    std::ostringstream csv;
    for (std::size_t c = 0; c < m.n_cols; ++c) csv << (c ? "," : "") << "col" << c;
    csv << "\n";
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t c = 0; c < m.n_cols; ++c)
            csv << (c ? "," : "") << fmt_double(m.at(i, c));
        csv << "\n";
    }
    return csv.str();
}

// Rows x cols cell grid of a CSV file, header excluded.
std::vector<std::vector<std::string>> csv_cells(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

} // namespace

TEST_SUITE("csv_and_pipeline") {

TEST_CASE("ingest a small numeric csv") {
    const std::string path =
        write_temp("basic.csv", "a,b,c\n1,2,3\n4,5,6\n7,8,9\n");
    IngestResult r = ingest_csv(path);
    CHECK(r.header == std::vector<std::string>{"a", "b", "c"});
    CHECK(r.numeric.n_rows == 3);
    CHECK(r.numeric.n_cols == 3);
    CHECK(r.numeric.at(1, 2) == 6.0);
    CHECK(r.categoricals.empty());
    CHECK(r.row_map == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("auto-detected categorical column is CA-encoded") {
    const std::string path = write_temp(
        "mixed.csv", "x,city,y\n1.5,london,2\n2.5,paris,3\n3.5,london,4\n0.5,paris,5\n");
    IngestResult r = ingest_csv(path);
    REQUIRE(r.categoricals.size() == 1);
    CHECK(r.categoricals[0].name == "city");
    CHECK(r.categoricals[0].levels == std::vector<std::string>{"london", "paris"});
    CHECK(r.numeric.n_cols == 2);

    WorkingMatrix wm = build_working_matrix(r);
    // Two numeric columns plus one retained CA component for two levels.
    CHECK(wm.values.n_cols == 3);
    CHECK(wm.columns[2].from_categorical);
    CHECK(wm.columns[2].source_col == 1);
    // Balanced two-level column scores are symmetric around zero.
    CHECK(wm.values.at(0, 2) == doctest::Approx(-wm.values.at(1, 2)));

    // Round trip against the encoder itself.
    Matrix oracle = ca_scores(r.categoricals[0], fit_ca(r.categoricals[0]));
    REQUIRE(oracle.n_cols == 1);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(wm.values.at(i, 2) == oracle.at(i, 0));
}

TEST_CASE("declared categorical list is exhaustive") {
    const std::string path =
        write_temp("declared.csv", "x,tag\n1,7\n2,9\n3,7\n");
    IngestConfig cfg;
    cfg.categorical_columns = std::vector<std::string>{"tag"};
    IngestResult r = ingest_csv(path, cfg);
    REQUIRE(r.categoricals.size() == 1);
    CHECK(r.categoricals[0].levels == std::vector<std::string>{"7", "9"});
    CHECK(r.numeric.n_cols == 1);

    IngestConfig missing;
    missing.categorical_columns = std::vector<std::string>{"nope"};
    CHECK_THROWS_AS((void)ingest_csv(path, missing), UsageError);

    // A text token in an undeclared column is a data error under a declared list.
    const std::string bad =
        write_temp("declared_bad.csv", "x,tag\n1,7\noops,9\n");
    CHECK_THROWS_AS((void)ingest_csv(bad, cfg), DataError);
}

TEST_CASE("na policies") {
    const std::string path =
        write_temp("na.csv", "a,b\n1,2\n,3\n4,5\n");
    CHECK_THROWS_AS((void)ingest_csv(path, {}), DataError);

    IngestConfig drop;
    drop.na_policy = NaPolicy::DropRows;
    IngestResult r = ingest_csv(path, drop);
    CHECK(r.dropped_rows == 1);
    CHECK(r.numeric.n_rows == 2);
    CHECK(r.row_map == std::vector<std::size_t>{0, 2});
    CHECK(r.file_rows == 3);
}

TEST_CASE("ragged rows and reserved names are rejected") {
    const std::string ragged = write_temp("ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS((void)ingest_csv(ragged), DataError);
    const std::string reserved = write_temp("reserved.csv", "a,__weight\n1,2\n");
    CHECK_THROWS_AS((void)ingest_csv(reserved), DataError);
    CHECK_THROWS_AS((void)ingest_csv(temp_dir().string() + "/does_not_exist.csv"),
                    DataError);
}

TEST_CASE("cols-only pipeline on the co-planar matrix keeps one column") {
    const std::string path =
        write_temp("coplanar.csv", "c0,c1,c2\n0,1,2\n0,4,5\n0,6,9\n");
    PipelineConfig cfg;
    cfg.cols_only = true;
    PipelineResult res = run_pipeline(path, cfg);
    REQUIRE(res.col_sketch.has_value());
    CHECK(res.b == std::vector<std::size_t>{1});
    CHECK(res.weights == std::vector<std::uint64_t>(3, 1));

    const std::string out = (temp_dir() / "coplanar_out.csv").string();
    write_outputs(path, res, out);
    auto cells = csv_cells(out);
    REQUIRE(cells.size() == 3);
    CHECK(cells[0][0] == "1");
    CHECK(cells[1][0] == "4");
    CHECK(cells[2][0] == "6");
    for (const auto& row : cells) CHECK(row[1] == "1"); // unit weights
}

TEST_CASE("identity pipeline returns the input up to column order") {
    Matrix data = gaussian_matrix(30, 4, 77);
    const std::string path = write_temp("identity.csv", matrix_to_csv(data));
    PipelineConfig cfg;
    cfg.radius = 1e-9;
    cfg.max_correlation = 1.0;
    PipelineResult res = run_pipeline(path, cfg);
    CHECK(res.a.size() == 30);
    CHECK(res.weights == std::vector<std::uint64_t>(30, 1));
    CHECK(res.b.size() == 4);

    const std::string out = (temp_dir() / "identity_out.csv").string();
    write_outputs(path, res, out);
    auto out_cells = csv_cells(out);
    auto in_cells = csv_cells(path);
    REQUIRE(out_cells.size() == 30);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < res.b.size(); ++j)
            CHECK(out_cells[i][j] == in_cells[res.a[i]][res.b[j]]);
}

TEST_CASE("round-trip: sketched cells match the original file at (a, b)") {
    Rng rng(12);
    std::ostringstream csv;
    csv << "n0,n1,cat,n2\n";
    const char* cats[] = {"red", "green", "blue"};
    for (int i = 0; i < 120; ++i)
        csv << fmt_double(rng.uniform01() * 10) << ',' << fmt_double(rng.normal()) << ','
            << cats[rng.below(3)] << ',' << fmt_double(rng.uniform01()) << "\n";
    const std::string path = write_temp("roundtrip.csv", csv.str());

    PipelineConfig cfg;
    cfg.radius = 0.35;
    cfg.max_correlation = 0.9;
    PipelineResult res = run_pipeline(path, cfg);
    const std::string out = (temp_dir() / "roundtrip_out.csv").string();
    write_outputs(path, res, out);

    auto in_cells = csv_cells(path);
    auto out_cells = csv_cells(out);
    REQUIRE(out_cells.size() == res.a.size());
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < res.a.size(); ++i) {
        for (std::size_t j = 0; j < res.b.size(); ++j)
            CHECK(out_cells[i][j] == in_cells[res.a[i]][res.b[j]]);
        total += res.weights[i];
    }
    CHECK(total == 120);

    // Rerunning is byte-identical (CSV and sidecar).
    const std::string out2 = (temp_dir() / "roundtrip_out2.csv").string();
    PipelineResult res2 = run_pipeline(path, cfg);
    write_outputs(path, res2, out2);
    CHECK(slurp(out) == slurp(out2));
    CHECK(slurp(sidecar_path_for(out)) == slurp(sidecar_path_for(out2)));
}

TEST_CASE("bounds recomputed from the sidecar match the stored report") {
    Matrix data = gaussian_matrix(80, 5, 3);
    const std::string path = write_temp("bounds_rt.csv", matrix_to_csv(data));
    PipelineConfig cfg;
    cfg.radius = 0.4;
    cfg.max_correlation = 0.92;
    PipelineResult res = run_pipeline(path, cfg);

    BoundReport rep = recompute_bounds(path, res.sidecar);
    CHECK(bound_report_to_json(rep) == res.sidecar.at("bounds"));
}

TEST_CASE("bounds recompute also covers cols-first and drop-rows") {
    Rng rng(5);
    std::ostringstream csv;
    csv << "a,b,c,d,e,f\n";
    for (int i = 0; i < 40; ++i) {
        if (i == 7) {
            csv << "1,,3,4,5,6\n"; // dropped under drop-rows
            continue;
        }
        for (int c = 0; c < 6; ++c) csv << (c ? "," : "") << fmt_double(rng.normal());
        csv << "\n";
    }
    const std::string path = write_temp("colsfirst.csv", csv.str());
    PipelineConfig cfg;
    cfg.order = SketchOrder::ColsFirst;
    cfg.na_policy = NaPolicy::DropRows;
    cfg.radius = 0.6;
    cfg.max_correlation = 0.9;
    PipelineResult res = run_pipeline(path, cfg);
    CHECK(res.ingest.dropped_rows == 1);
    BoundReport rep = recompute_bounds(path, res.sidecar);
    CHECK(bound_report_to_json(rep) == res.sidecar.at("bounds"));
}

TEST_CASE("radius_search hits targets") {
    // Small instance: targets below 20 demand an exact hit (5% rounds to 0).
    Matrix small = gaussian_matrix(15, 2, 10);
    Matrix snorm = normalize_columns(small).first;

    RadiusSearchResult all = radius_search(snorm, 15);
    CHECK(all.converged);
    CHECK(all.m == 15);
    double min_d = 1e300;
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = i + 1; j < 15; ++j)
            min_d = std::min(min_d, euclidean_distance(snorm.row(i), snorm.row(j)));
    CHECK(all.radius <= min_d); // keeping all points needs balls below the smallest gap

    RadiusSearchResult one = radius_search(snorm, 1);
    CHECK(one.converged);
    CHECK(one.m == 1);
    double max_d = 0;
    for (std::size_t i = 1; i < 15; ++i)
        max_d = std::max(max_d, euclidean_distance(snorm.row(0), snorm.row(i)));
    CHECK(one.radius > max_d); // one ball covers everything from the first row

    // Wider instance with a 5% band around the target.
    Matrix x = gaussian_matrix(400, 2, 11);
    Matrix norm = normalize_columns(x).first;
    RadiusSearchResult t40 = radius_search(norm, 40);
    CHECK(t40.converged);
    CHECK(20 * (t40.m > 40 ? t40.m - 40 : 40 - t40.m) <= 40);

    // Larger targets never get a larger radius on the same data.
    RadiusSearchResult t4 = radius_search(norm, 4);
    RadiusSearchResult t150 = radius_search(norm, 150);
    CHECK(t4.radius >= t40.radius);
    CHECK(t40.radius >= t150.radius);

    CHECK_THROWS_AS((void)radius_search(norm, 0), UsageError);
    CHECK_THROWS_AS((void)radius_search(norm, 401), UsageError);
}

TEST_CASE("pipeline smoke on generated gaussian data") {
    Matrix data = gaussian_matrix(2000, 30, 8);
    const std::string path = write_temp("smoke.csv", matrix_to_csv(data));
    PipelineConfig cfg; // defaults end to end
    PipelineResult res = run_pipeline(path, cfg);
    std::uint64_t total = 0;
    for (auto w : res.weights) total += w;
    CHECK(total == 2000);
    REQUIRE(res.col_sketch.has_value());
    const bool all_cols = res.col_sketch->selected.size() ==
                          res.working.columns.size();
    CHECK((res.col_sketch->achieved_correlation >= 0.95 || all_cols));
    CHECK(res.bounds.row_theorem_holds);
    CHECK(res.bounds.col_theorem_holds);
}

TEST_CASE("stats panels mirror the sketch") {
    Matrix data = gaussian_matrix(3000, 3, 15);
    const std::string path = write_temp("stats.csv", matrix_to_csv(data));
    PipelineConfig cfg;
    cfg.rows_only = true;
    cfg.radius = 0.12;
    PipelineResult res = run_pipeline(path, cfg);
    StatsPanels panels = stats_panels(res.ingest.numeric,
                                      res.row_sketch->exemplar_indices, res.weights, 7);
    REQUIRE(panels.columns.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(panels.original[c].n == 3000);
        CHECK(panels.sketch[c].n == 3000); // weights add back up to n
        CHECK(panels.sketch[c].m == res.a.size());
        CHECK(panels.sketch[c].min >= panels.original[c].min);
        CHECK(panels.sketch[c].max <= panels.original[c].max);
        CHECK(panels.sketch[c].mean ==
              doctest::Approx(panels.original[c].mean).epsilon(0.2));
    }
}

TEST_CASE("identifier-like categorical columns are rejected by name") {
    std::ostringstream csv;
    csv << "id,v\n";
    for (int i = 0; i < 100; ++i) csv << "row" << i << ',' << i % 7 << "\n";
    const std::string path = write_temp("idcol.csv", csv.str());
    try {
        (void)run_pipeline(path, {});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("id") != std::string::npos);
    }
}

TEST_CASE("sidecar path derivation") {
    CHECK(sidecar_path_for("out.csv") == "out.sketch.json");
    CHECK(sidecar_path_for("dir.v2/out.csv") == "dir.v2/out.sketch.json");
    CHECK(sidecar_path_for("noext") == "noext.sketch.json");
}

} // TEST_SUITE
