#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qbm::cli {

std::string sha256_hex(std::string_view bytes);

/// Whole file as bytes; DataError if it cannot be read.
std::string read_file(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Resolved flag values of one command, keyed by long flag name. An empty
/// value means "not set".
class Config {
public:
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    /// Comma list `5,10,20` or range `start:stop:step` of positive integers.
    std::vector<std::int64_t> integer_list(const std::string& key) const;
    void set(const std::string& key, std::string value) { values[key] = std::move(value); }
};

/// Contents of a `--config` file: either `key = value` lines or a JSON
/// manifest written by a previous run.
struct ConfigFile {
    std::optional<std::string> command;
    std::map<std::string, std::string> entries;
};

ConfigFile load_config_file(const std::string& path);

/// Text assembled in memory and written only when every file of the run is ready.
class OutputSet {
public:
    void add(std::string path, std::string content);
    /// Writes each file to a temporary sibling, then renames all of them.
    /// On failure no target file is touched.
    void commit();
    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& comment);
    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& cells);
    void row(const std::vector<std::string>& cells);
    std::size_t rows() const { return rows_; }
    const std::string& str() const { return text_; }

private:
    std::string text_;
    std::size_t width_ = 0;
    std::size_t rows_ = 0;
};

/// Numeric CSV with a header line; `#` comments and blank lines are skipped.
struct NumericTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> find(const std::string& name) const;
    std::vector<double> column(std::size_t i) const;
};

NumericTable parse_numeric_table(const std::string& text);

}  // namespace qbm::cli
