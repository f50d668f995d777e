#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace migflux::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

std::string_view trim(std::string_view s);

// Reads the next data line, skipping blank lines and '#' metadata lines.
// Strips a trailing '\r' and a leading UTF-8 BOM.
bool next_record(std::istream& in, std::string& line);

// Column lookup for a parsed header. Throws FormatError naming `what` when absent.
class Header {
public:
    explicit Header(std::vector<std::string> columns);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t require(std::string_view name, std::string_view what) const;
    std::size_t size() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

private:
    std::vector<std::string> columns_;
};

// Reads the header line of `in`; throws FormatError if the stream is empty.
Header read_header(std::istream& in, std::string_view what);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
bool try_parse_double(std::string_view s, double& out);
bool try_parse_int(std::string_view s, long long& out);

// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace migflux::csv
