#include "migflux/csv.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "migflux/common.hpp"

namespace migflux::csv {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::string(trim(field)));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::string(trim(field)));
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool next_record(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
            static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
            line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        return true;
    }
    return false;
}

Header::Header(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::optional<std::size_t> Header::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Header::require(std::string_view name, std::string_view what) const {
    if (auto i = find(name)) return *i;
    throw FormatError(std::string(what) + ": missing column '" + std::string(name) + "'");
}

Header read_header(std::istream& in, std::string_view what) {
    std::string line;
    if (!next_record(in, line)) throw FormatError(std::string(what) + ": missing header");
    return Header(split(line));
}

bool try_parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool try_parse_int(std::string_view s, long long& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0;
    if (!try_parse_double(s, v)) {
        throw FormatError(std::string(what) + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

long long parse_int(std::string_view s, std::string_view what) {
    long long v = 0;
    if (!try_parse_int(s, v)) {
        throw FormatError(std::string(what) + ": not an integer: '" + std::string(s) + "'");
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace migflux::csv
