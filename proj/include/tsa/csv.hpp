// Comma-delimited UTF-8 tables with a mandatory header row. Units live in
// the column names (e.g. length_mm).
#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tsa::csv {

struct Row {
    int line = 0;
    std::vector<std::string> fields;
};

class Table {
public:
    /// Throws InputError for an empty file, ragged rows, duplicate columns,
    /// or columns outside `allowed` (when non-empty).
    static Table parse(std::string_view text, std::string source,
                       const std::set<std::string, std::less<>>& required = {},
                       const std::set<std::string, std::less<>>& allowed = {});
    static Table load(const std::string& path,
                      const std::set<std::string, std::less<>>& required = {},
                      const std::set<std::string, std::less<>>& allowed = {});

    [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
    [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
    [[nodiscard]] bool has_column(std::string_view name) const;

    /// Empty cells yield nullopt; non-numeric cells throw InputError.
    [[nodiscard]] std::optional<double> number(const Row& row, std::string_view column) const;
    [[nodiscard]] double require_number(const Row& row, std::string_view column) const;
    [[nodiscard]] std::optional<std::string> text(const Row& row, std::string_view column) const;

    [[nodiscard]] const std::string& source() const { return source_; }

private:
    [[nodiscard]] std::optional<std::size_t> index(std::string_view column) const;

    std::string source_;
    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

/// Writes one comma-joined line terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Fixed-point formatting used by all numeric CSV output.
[[nodiscard]] std::string fixed(double value, int decimals = 6);

/// Shortest round-trip representation, for parameter files.
[[nodiscard]] std::string exact(double value);

}  // namespace tsa::csv
