#pragma once

#include "matsketch/categorical.hpp"
#include "matsketch/matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace matsketch {

enum class NaPolicy { Reject, DropRows };

struct IngestConfig {
    /// Column names declared categorical. Unset: auto-detect (any column with
    /// a non-numeric, non-missing token). When set, the list is exhaustive and
    /// non-numeric tokens elsewhere are data errors.
    std::optional<std::vector<std::string>> categorical_columns;
    NaPolicy na_policy = NaPolicy::Reject;
};

/// Parsed CSV split into a numeric block and categorical columns, with maps
/// back to the file's data rows and columns (0-based, header excluded).
struct IngestResult {
    std::vector<std::string> header;
    Matrix numeric;                               // columns in file order
    std::vector<std::size_t> numeric_source_cols;
    std::vector<CategoricalColumn> categoricals;
    std::vector<std::size_t> categorical_source_cols;
    std::vector<std::size_t> row_map;             // matrix row -> file data row
    std::size_t file_rows = 0;                    // data rows in the file
    std::size_t dropped_rows = 0;
};

/// Reads a comma-separated file with a mandatory header row, '.' decimals,
/// no quoting. Missing cells are empty or NA/NaN/null tokens; the policy
/// decides whether they reject the file or drop the row.
IngestResult ingest_csv(const std::string& path, const IngestConfig& cfg = {});

/// Splits one CSV line, trimming surrounding whitespace and a trailing CR.
std::vector<std::string> split_csv_line(const std::string& line);

/// True when the token parses fully as a finite double.
bool parse_numeric(const std::string& token, double& out);

/// True for cells treated as missing (empty, NA, NaN, null; case-insensitive).
bool is_missing_token(const std::string& token);

/// Writes `text` to `path` atomically (temp file + rename).
void atomic_write_file(const std::string& path, const std::string& text);

/// Extracts rows (in the given order) and columns of the original file
/// verbatim, appending a __weight column. Used for the sketched CSV so every
/// retained cell matches the input byte for byte.
void write_sketched_csv(const std::string& input_path, const std::string& out_path,
                        const std::vector<std::size_t>& file_rows,
                        const std::vector<std::size_t>& file_cols,
                        const std::vector<std::uint64_t>& weights);

} // namespace matsketch
