#include "matsketch/csv.hpp"

#include "matsketch/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace matsketch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    // An empty line is one empty cell; a trailing comma ends in one too.
    if (out.empty() || (!line.empty() && line.back() == ',')) out.emplace_back();
    return out;
}

bool is_missing_token(const std::string& token) {
    const std::string t = lower(token);
    return t.empty() || t == "na" || t == "nan" || t == "null";
}

bool parse_numeric(const std::string& token, double& out) {
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first; // from_chars does not accept a leading plus
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

IngestResult ingest_csv(const std::string& path, const IngestConfig& cfg) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line))
        throw DataError("'" + path + "': empty file, header row required");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    IngestResult res;
    res.header = split_csv_line(line);
    for (const auto& name : res.header) {
        if (name.empty())
            throw DataError("'" + path + "': header row has an empty column name");
        if (name == "__weight")
            throw DataError("'" + path + "': column name '__weight' is reserved");
    }

    const std::size_t width = res.header.size();

    // Declared categorical columns, validated against the header.
    std::set<std::size_t> declared;
    if (cfg.categorical_columns) {
        for (const auto& name : *cfg.categorical_columns) {
            auto it = std::find(res.header.begin(), res.header.end(), name);
            if (it == res.header.end())
                throw UsageError("categorical column '" + name + "' not found in header");
            declared.insert(static_cast<std::size_t>(it - res.header.begin()));
        }
    }

    std::vector<std::vector<std::string>> cells; // kept rows
    std::size_t file_row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break; // trailing newline
        std::vector<std::string> row = split_csv_line(line);
        if (row.size() != width)
            throw DataError("'" + path + "': row " + std::to_string(file_row + 1) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(width));
        bool missing = false;
        std::size_t missing_col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (is_missing_token(row[c])) {
                missing = true;
                missing_col = c;
                break;
            }
        }
        if (missing) {
            if (cfg.na_policy == NaPolicy::Reject)
                throw DataError("'" + path + "': missing value at row " +
                                std::to_string(file_row + 1) + ", column '" +
                                res.header[missing_col] + "'");
            ++res.dropped_rows;
        } else {
            cells.push_back(std::move(row));
            res.row_map.push_back(file_row);
        }
        ++file_row;
    }
    res.file_rows = file_row;
    if (cells.empty())
        throw DataError("'" + path + "': no usable data rows");

    // Classify columns: declared list wins; otherwise any non-numeric token
    // makes the column categorical.
    std::vector<bool> is_categorical(width, false);
    for (std::size_t c = 0; c < width; ++c) {
        if (cfg.categorical_columns) {
            is_categorical[c] = declared.count(c) > 0;
        } else {
            double v;
            for (const auto& row : cells) {
                if (!parse_numeric(row[c], v)) {
                    is_categorical[c] = true;
                    break;
                }
            }
        }
    }

    const std::size_t n = cells.size();
    std::vector<std::size_t> numeric_cols;
    for (std::size_t c = 0; c < width; ++c)
        if (!is_categorical[c]) numeric_cols.push_back(c);

    res.numeric = Matrix(n, numeric_cols.size());
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
        const std::size_t c = numeric_cols[k];
        res.numeric.col_labels.push_back(res.header[c]);
        res.numeric_source_cols.push_back(c);
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (!parse_numeric(cells[i][c], v))
                throw DataError("'" + path + "': non-numeric value '" + cells[i][c] +
                                "' at row " + std::to_string(res.row_map[i] + 1) +
                                ", column '" + res.header[c] + "'");
            res.numeric.at(i, k) = v;
        }
    }

    for (std::size_t c = 0; c < width; ++c) {
        if (!is_categorical[c]) continue;
        std::vector<std::string> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = cells[i][c];
        res.categoricals.push_back(make_categorical(res.header[c], std::move(vals)));
        res.categorical_source_cols.push_back(c);
    }
    return res;
}

void atomic_write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot open '" + tmp + "' for writing");
        out << text;
        if (!out)
            throw DataError("failed while writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

void write_sketched_csv(const std::string& input_path, const std::string& out_path,
                        const std::vector<std::size_t>& file_rows,
                        const std::vector<std::size_t>& file_cols,
                        const std::vector<std::uint64_t>& weights) {
    if (file_rows.size() != weights.size())
        throw UsageError("write_sketched_csv: rows and weights differ in length");

    std::ifstream in(input_path);
    if (!in)
        throw DataError("cannot open '" + input_path + "' for reading");

    std::string line;
    if (!std::getline(in, line))
        throw DataError("'" + input_path + "': empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    // Output preserves the given row order, which may differ from file order.
    std::map<std::size_t, std::size_t> slot_of_row; // file row -> output slot
    for (std::size_t s = 0; s < file_rows.size(); ++s) slot_of_row.emplace(file_rows[s], s);
    std::vector<std::vector<std::string>> picked_cells(file_rows.size());

    std::size_t file_row = 0;
    std::size_t found = 0;
    while (std::getline(in, line) && found < file_rows.size()) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto it = slot_of_row.find(file_row);
        if (it != slot_of_row.end()) {
            std::vector<std::string> cells = split_csv_line(line);
            std::vector<std::string> out_cells;
            for (std::size_t c : file_cols) {
                if (c >= cells.size())
                    throw DataError("write_sketched_csv: column index out of range "
                                    "at file row " + std::to_string(file_row + 1));
                out_cells.push_back(cells[c]);
            }
            picked_cells[it->second] = std::move(out_cells);
            ++found;
        }
        ++file_row;
    }
    if (found != file_rows.size())
        throw DataError("write_sketched_csv: some requested rows were not found");

    std::ostringstream out;
    for (std::size_t c : file_cols) {
        if (c >= header.size())
            throw UsageError("write_sketched_csv: column index out of range");
        out << header[c] << ',';
    }
    out << "__weight\n";
    for (std::size_t s = 0; s < picked_cells.size(); ++s) {
        for (const auto& cell : picked_cells[s]) out << cell << ',';
        out << weights[s] << '\n';
    }
    atomic_write_file(out_path, out.str());
}

} // namespace matsketch
