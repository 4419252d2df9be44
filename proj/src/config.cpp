#include "tsa/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "tsa/errors.hpp"

namespace tsa::config {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const char* begin = token.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || std::isnan(value)) {
        return std::nullopt;
    }
    return value;
}

Config Config::parse(std::string_view text, std::string source, const Schema& schema) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        auto error = [&](std::string_view message) {
            return InputError(fmt::format("{}:{}: {}", cfg.source_, line_no, message));
        };

        if (line.front() == '[') {
            if (line.back() != ']') throw error("unterminated section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!schema.contains(current)) throw error(fmt::format("unknown section [{}]", current));
            if (cfg.sections_.contains(current)) {
                throw error(fmt::format("duplicate section [{}]", current));
            }
            cfg.sections_[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw error("expected 'key = value'");
        if (current.empty()) throw error("key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw error("empty key");
        if (!schema.find(current)->second.contains(key)) {
            throw error(fmt::format("unknown key '{}' in [{}]", key, current));
        }
        auto& section = cfg.sections_[current];
        if (section.contains(key)) throw error(fmt::format("duplicate key '{}'", key));
        section.emplace(key, Entry{value, line_no});
    }
    return cfg;
}

Config Config::load(const std::string& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("{}: cannot open configuration file", path));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path, schema);
}

const Entry* Config::find(std::string_view section, std::string_view key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void Config::fail(const Entry& entry, std::string_view message) const {
    throw InputError(fmt::format("{}:{}: {}", source_, entry.line, message));
}

bool Config::has_section(std::string_view section) const { return sections_.contains(section); }

bool Config::has(std::string_view section, std::string_view key) const {
    return find(section, key) != nullptr;
}

std::optional<std::string> Config::text(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
}

std::optional<double> Config::number(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const auto v = parse_double(e->value);
    if (!v) fail(*e, fmt::format("'{}' is not a number: '{}'", key, e->value));
    return v;
}

std::optional<long long> Config::integer(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), value);
    if (ec != std::errc{} || ptr != e->value.data() + e->value.size()) {
        fail(*e, fmt::format("'{}' is not an integer: '{}'", key, e->value));
    }
    return value;
}

std::optional<std::vector<double>> Config::numbers(std::string_view section,
                                                   std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
        const auto comma = rest.find(',');
        const auto token = rest.substr(0, comma);
        const auto v = parse_double(token);
        if (!v) fail(*e, fmt::format("'{}' must be a comma-separated list of numbers", key));
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

double Config::require_number(std::string_view section, std::string_view key) const {
    const auto v = number(section, key);
    if (!v) {
        throw InputError(fmt::format("{}: missing required key '{}' in [{}]", source_, key, section));
    }
    return *v;
}

std::optional<std::string> Config::path(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::filesystem::path p(e->value);
    if (p.is_relative()) p = std::filesystem::path(source_).parent_path() / p;
    if (!std::filesystem::exists(p)) fail(*e, fmt::format("referenced file does not exist: {}", p.string()));
    return p.string();
}

}  // namespace tsa::config
