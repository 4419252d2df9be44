#include "tsa/csv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tsa/config.hpp"
#include "tsa/errors.hpp"

namespace tsa::csv {

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(config::trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

Table Table::parse(std::string_view text, std::string source,
                   const std::set<std::string, std::less<>>& required,
                   const std::set<std::string, std::less<>>& allowed) {
    Table t;
    t.source_ = std::move(source);
    int line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (config::trim(line).empty()) continue;

        auto fields = split(line);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            for (std::size_t i = 0; i < t.header_.size(); ++i) {
                const auto& name = t.header_[i];
                if (name.empty()) {
                    throw InputError(fmt::format("{}:{}: empty column name", t.source_, line_no));
                }
                if (std::count(t.header_.begin(), t.header_.end(), name) > 1) {
                    throw InputError(
                        fmt::format("{}:{}: duplicate column '{}'", t.source_, line_no, name));
                }
                if (!allowed.empty() && !allowed.contains(name)) {
                    throw InputError(
                        fmt::format("{}:{}: unknown column '{}'", t.source_, line_no, name));
                }
            }
            for (const auto& name : required) {
                if (!t.has_column(name)) {
                    throw InputError(fmt::format("{}:{}: missing required column '{}'", t.source_,
                                                 line_no, name));
                }
            }
            continue;
        }
        if (fields.size() != t.header_.size()) {
            throw InputError(fmt::format("{}:{}: expected {} fields, found {}", t.source_, line_no,
                                         t.header_.size(), fields.size()));
        }
        t.rows_.push_back(Row{line_no, std::move(fields)});
    }
    if (!have_header) throw InputError(fmt::format("{}: empty file (no header row)", t.source_));
    return t;
}

Table Table::load(const std::string& path, const std::set<std::string, std::less<>>& required,
                  const std::set<std::string, std::less<>>& allowed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("{}: cannot open file", path));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path, required, allowed);
}

bool Table::has_column(std::string_view name) const { return index(name).has_value(); }

std::optional<std::size_t> Table::index(std::string_view column) const {
    const auto it = std::find(header_.begin(), header_.end(), column);
    if (it == header_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header_.begin());
}

std::optional<double> Table::number(const Row& row, std::string_view column) const {
    const auto i = index(column);
    if (!i || row.fields[*i].empty()) return std::nullopt;
    const auto v = config::parse_double(row.fields[*i]);
    if (!v) {
        throw InputError(fmt::format("{}:{}: column '{}' is not a number: '{}'", source_, row.line,
                                     column, row.fields[*i]));
    }
    return v;
}

double Table::require_number(const Row& row, std::string_view column) const {
    const auto v = number(row, column);
    if (!v) {
        throw InputError(
            fmt::format("{}:{}: missing value for column '{}'", source_, row.line, column));
    }
    return *v;
}

std::optional<std::string> Table::text(const Row& row, std::string_view column) const {
    const auto i = index(column);
    if (!i || row.fields[*i].empty()) return std::nullopt;
    return row.fields[*i];
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

std::string fixed(double value, int decimals) {
    // Avoids printing "-0.000000".
    std::string s = fmt::format("{:.{}f}", value, decimals);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

std::string exact(double value) { return fmt::format("{}", value); }

}  // namespace tsa::csv
