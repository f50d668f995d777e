#include "migflux/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "migflux/csv.hpp"
#include "migflux/parallel.hpp"

namespace migflux::ingest {

void CityRegistry::add(std::string raw_code, CityId city) {
    auto [it, inserted] = codes_.try_emplace(std::move(raw_code), city);
    if (!inserted && it->second != city) {
        throw FormatError("city registry: code '" + it->first + "' maps to both '" + it->second +
                          "' and '" + city + "'");
    }
}

const CityId* CityRegistry::resolve(const std::string& raw_code) const {
    auto it = codes_.find(raw_code);
    return it == codes_.end() ? nullptr : &it->second;
}

CityRegistry CityRegistry::load(std::istream& in) {
    const auto header = csv::read_header(in, "city registry");
    const auto code_col = header.require("code", "city registry");
    const auto city_col = header.require("city_id", "city registry");
    CityRegistry reg;
    std::string line;
    while (csv::next_record(in, line)) {
        auto fields = csv::split(line);
        if (fields.size() != header.size()) throw FormatError("city registry: bad row '" + line + "'");
        if (fields[code_col].empty() || fields[city_col].empty()) {
            throw FormatError("city registry: empty field in '" + line + "'");
        }
        reg.add(std::move(fields[code_col]), std::move(fields[city_col]));
    }
    return reg;
}

CityRegistry CityRegistry::identity(std::span<const CityId> ids) {
    CityRegistry reg;
    for (const auto& id : ids) reg.add(id, id);
    return reg;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
    if (pos + count > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = s[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    pos += count;
    out = v;
    return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

}  // namespace

bool parse_iso8601(std::string_view text, std::int64_t& out) {
    const auto s = csv::trim(text);
    std::size_t pos = 0;
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!read_digits(s, pos, 4, year) || !expect(s, pos, '-') || !read_digits(s, pos, 2, month) ||
        !expect(s, pos, '-') || !read_digits(s, pos, 2, day)) {
        return false;
    }
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return false;
        ++pos;
        if (!read_digits(s, pos, 2, hour) || !expect(s, pos, ':') || !read_digits(s, pos, 2, minute)) {
            return false;
        }
        if (expect(s, pos, ':')) {
            if (!read_digits(s, pos, 2, second)) return false;
            if (expect(s, pos, '.')) {
                const auto start = pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                if (pos == start) return false;
            }
        }
    }
    std::int64_t offset = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '-' ? -1 : 1;
            ++pos;
            int oh = 0, om = 0;
            if (!read_digits(s, pos, 2, oh)) return false;
            if (expect(s, pos, ':')) {
                if (!read_digits(s, pos, 2, om)) return false;
            } else if (pos < s.size()) {
                if (!read_digits(s, pos, 2, om)) return false;
            }
            if (oh > 23 || om > 59) return false;
            offset = sign * (oh * 3600 + om * 60);
        } else {
            return false;
        }
    }
    if (pos != s.size()) return false;
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        return false;
    }
    const auto days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    out = days * 86400 + hour * 3600 + minute * 60 + second - offset;
    return true;
}

std::int64_t parse_time_arg(std::string_view text) {
    long long epoch = 0;
    if (csv::try_parse_int(text, epoch)) return epoch;
    std::int64_t t = 0;
    if (parse_iso8601(text, t)) return t;
    throw FormatError("unrecognized time '" + std::string(text) + "'");
}

ParsedMessages parse_messages(std::istream& log, const CityRegistry& registry, TimeWindow window) {
    if (registry.empty()) throw ContractError("parse_messages: empty city registry");
    const auto header = csv::read_header(log, "message log");
    const auto mid = header.require("message_id", "message log");
    const auto uid = header.require("user_id", "message log");
    const auto tcol = header.require("timestamp", "message log");
    const auto ccol = header.require("city_id", "message log");

    ParsedMessages out;
    std::optional<TimestampFormat> format;
    std::string line;
    while (csv::next_record(log, line)) {
        auto fields = csv::split(line);
        if (fields.size() != header.size() || fields[mid].empty() || fields[uid].empty()) {
            ++out.rejects.malformed;
            continue;
        }
        std::int64_t ts = 0;
        long long epoch = 0;
        bool ok = false;
        if (!format) {
            if (csv::try_parse_int(fields[tcol], epoch)) {
                format = TimestampFormat::epoch_seconds;
            } else if (parse_iso8601(fields[tcol], ts)) {
                format = TimestampFormat::iso8601;
            }
        }
        if (format == TimestampFormat::epoch_seconds) {
            ok = csv::try_parse_int(fields[tcol], epoch);
            ts = epoch;
        } else if (format == TimestampFormat::iso8601) {
            ok = parse_iso8601(fields[tcol], ts);
        }
        if (!ok) {
            ++out.rejects.malformed;
            continue;
        }
        const CityId* city = registry.resolve(fields[ccol]);
        if (city == nullptr) {
            ++out.rejects.unknown_city;
            continue;
        }
        if (!window.contains(ts)) {
            ++out.rejects.out_of_window;
            continue;
        }
        out.messages.push_back(GeoMessage{std::move(fields[mid]), std::move(fields[uid]), ts, *city});
    }
    out.format = format.value_or(TimestampFormat::epoch_seconds);
    return out;
}

std::vector<LocationEvent> compress_runs(std::span<const LocationEvent> events) {
    std::vector<LocationEvent> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        if (!out.empty() && out.back().city_id == e.city_id) {
            out.back() = e;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

std::vector<Transition> cut_trajectory(std::span<const LocationEvent> events) {
    std::vector<Transition> out;
    if (events.size() < 2) return out;
    out.reserve(events.size() - 1);
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i - 1].city_id == events[i].city_id) {
            throw ContractError("cut_trajectory: adjacent events share city '" + events[i].city_id + "'");
        }
        out.push_back(Transition{events[i - 1].city_id, events[i].city_id});
    }
    return out;
}

std::size_t FluxMatrix::city_count() const {
    std::set<std::string_view> cities;
    for (const auto& [pair, count] : entries_) {
        cities.insert(pair.a);
        cities.insert(pair.b);
    }
    return cities.size();
}

std::uint64_t FluxMatrix::total() const {
    std::uint64_t sum = 0;
    for (const auto& [pair, count] : entries_) sum += count;
    return sum;
}

void FluxMatrix::add(const CityId& origin, const CityId& destination, std::uint64_t count) {
    if (origin == destination) throw ContractError("flux: origin equals destination '" + origin + "'");
    if (count == 0) return;
    CityPair key{origin, destination};
    if (!directed_) key = canonical(std::move(key));
    entries_[std::move(key)] += count;
}

std::uint64_t FluxMatrix::at(const CityId& origin, const CityId& destination) const {
    CityPair key{origin, destination};
    if (!directed_) key = canonical(std::move(key));
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second;
}

FluxMatrix FluxMatrix::symmetrized() const {
    FluxMatrix out(false);
    for (const auto& [pair, count] : entries_) out.add(pair.a, pair.b, count);
    return out;
}

void FluxMatrix::write_csv(std::ostream& out) const {
    out << (directed_ ? "origin,destination,count\n" : "city_a,city_b,count\n");
    for (const auto& [pair, count] : entries_) out << pair.a << ',' << pair.b << ',' << count << '\n';
}

FluxMatrix FluxMatrix::read_csv(std::istream& in) {
    const auto header = csv::read_header(in, "flux csv");
    std::size_t a = 0, b = 0;
    bool directed = false;
    if (header.find("origin")) {
        directed = true;
        a = header.require("origin", "flux csv");
        b = header.require("destination", "flux csv");
    } else {
        a = header.require("city_a", "flux csv");
        b = header.require("city_b", "flux csv");
    }
    const auto c = header.require("count", "flux csv");
    FluxMatrix out(directed);
    std::string line;
    while (csv::next_record(in, line)) {
        const auto fields = csv::split(line);
        if (fields.size() != header.size()) throw FormatError("flux csv: bad row '" + line + "'");
        const auto count = csv::parse_int(fields[c], "flux csv count");
        if (count < 1) throw DataError("flux csv: count must be >= 1 in '" + line + "'");
        out.add(fields[a], fields[b], static_cast<std::uint64_t>(count));
    }
    return out;
}

FluxMatrix build_flux(std::span<const Transition> transitions, bool directed) {
    FluxMatrix out(directed);
    for (const auto& t : transitions) out.add(t.origin, t.destination);
    return out;
}

Extraction extract(std::span<const GeoMessage> messages, unsigned workers) {
    std::vector<std::size_t> order(messages.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        const auto& x = messages[l];
        const auto& y = messages[r];
        if (x.user_id != y.user_id) return x.user_id < y.user_id;
        if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
        return x.message_id < y.message_id;
    });

    // [begin, end) ranges into `order`, one per user, in user-id order.
    std::vector<std::pair<std::size_t, std::size_t>> users;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && messages[order[j]].user_id == messages[order[i]].user_id) ++j;
        users.emplace_back(i, j);
        i = j;
    }

    std::vector<std::vector<Transition>> per_user(users.size());
    parallel_for(users.size(), workers, [&](std::size_t u) {
        const auto [begin, end] = users[u];
        std::vector<LocationEvent> trail;
        trail.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& m = messages[order[i]];
            trail.push_back(LocationEvent{m.timestamp, m.city_id});
        }
        per_user[u] = cut_trajectory(compress_runs(trail));
    });

    Extraction out;
    out.stats.messages = messages.size();
    out.stats.users = users.size();
    for (std::size_t u = 0; u < users.size(); ++u) {
        out.stats.adjacent_posts += users[u].second - users[u].first - 1;
        if (per_user[u].empty()) ++out.stats.stationary_users;
        out.stats.transitions += per_user[u].size();
        for (const auto& t : per_user[u]) {
            out.directed.add(t.origin, t.destination);
            out.undirected.add(t.origin, t.destination);
        }
    }
    return out;
}

}  // namespace migflux::ingest
