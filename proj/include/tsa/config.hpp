// Flat sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Parsing is strict: keys outside the declared schema are rejected.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tsa::config {

struct Entry {
    std::string value;
    int line = 0;
};

using Schema = std::map<std::string, std::set<std::string>, std::less<>>;

class Config {
public:
    /// Throws InputError with "<source>:<line>: ..." diagnostics.
    static Config parse(std::string_view text, std::string source, const Schema& schema);
    static Config load(const std::string& path, const Schema& schema);

    [[nodiscard]] bool has_section(std::string_view section) const;
    [[nodiscard]] bool has(std::string_view section, std::string_view key) const;

    [[nodiscard]] std::optional<std::string> text(std::string_view section, std::string_view key) const;
    [[nodiscard]] std::optional<double> number(std::string_view section, std::string_view key) const;
    [[nodiscard]] std::optional<long long> integer(std::string_view section, std::string_view key) const;
    [[nodiscard]] std::optional<std::vector<double>> numbers(std::string_view section,
                                                             std::string_view key) const;

    [[nodiscard]] double require_number(std::string_view section, std::string_view key) const;

    /// Path relative to the configuration file's directory.
    [[nodiscard]] std::optional<std::string> path(std::string_view section, std::string_view key) const;

    [[nodiscard]] const std::string& source() const { return source_; }

private:
    [[nodiscard]] const Entry* find(std::string_view section, std::string_view key) const;
    [[noreturn]] void fail(const Entry& entry, std::string_view message) const;

    std::string source_;
    std::map<std::string, std::map<std::string, Entry, std::less<>>, std::less<>> sections_;
};

/// Parses a decimal number; the whole token must be consumed. "inf" is accepted.
[[nodiscard]] std::optional<double> parse_double(std::string_view token);

[[nodiscard]] std::string_view trim(std::string_view s);

}  // namespace tsa::config
