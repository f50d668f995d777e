#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "migflux/common.hpp"

namespace migflux::ingest {

/// One geotagged post: (message, user, time, city).
struct GeoMessage {
    std::string message_id;
    std::string user_id;
    std::int64_t timestamp = 0;  // seconds since epoch, UTC
    CityId city_id;
};

struct LocationEvent {
    std::int64_t timestamp = 0;
    CityId city_id;

    friend bool operator==(const LocationEvent&, const LocationEvent&) = default;
};

struct Transition {
    CityId origin;
    CityId destination;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Half-open interval [begin, end) in epoch seconds.
struct TimeWindow {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= begin && t < end; }
};

/// Exact-match mapping from raw location codes to canonical city ids.
class CityRegistry {
public:
    CityRegistry() = default;

    void add(std::string raw_code, CityId city);
    const CityId* resolve(const std::string& raw_code) const;
    bool empty() const { return codes_.empty(); }
    std::size_t size() const { return codes_.size(); }

    /// CSV with header `code,city_id`.
    static CityRegistry load(std::istream& in);
    /// Identity registry: each id maps to itself.
    static CityRegistry identity(std::span<const CityId> ids);

private:
    std::unordered_map<std::string, CityId> codes_;
};

enum class TimestampFormat { epoch_seconds, iso8601 };

// Parses "YYYY-MM-DD[T ]hh:mm[:ss[.fff]][Z|(+|-)hh[:mm]]" to epoch seconds (UTC).
// No zone suffix means UTC.
bool parse_iso8601(std::string_view text, std::int64_t& out);
std::int64_t parse_time_arg(std::string_view text);

struct RejectReport {
    std::uint64_t malformed = 0;
    std::uint64_t unknown_city = 0;
    std::uint64_t out_of_window = 0;

    std::uint64_t total() const { return malformed + unknown_city + out_of_window; }
};

struct ParsedMessages {
    std::vector<GeoMessage> messages;
    RejectReport rejects;
    TimestampFormat format = TimestampFormat::epoch_seconds;
};

/// Reads a message log (`message_id,user_id,timestamp,city_id`). The timestamp
/// flavour is detected from the first data row and applied to the whole file;
/// rows that disagree are counted as malformed. A bad header throws FormatError.
ParsedMessages parse_messages(std::istream& log, const CityRegistry& registry, TimeWindow window);

/// Collapses each run of equal consecutive cities to the run's last event.
std::vector<LocationEvent> compress_runs(std::span<const LocationEvent> events);

/// Adjacent pairs of a compressed sequence. Throws ContractError on a repeated city.
std::vector<Transition> cut_trajectory(std::span<const LocationEvent> events);

class FluxMatrix {
public:
    using Map = std::map<CityPair, std::uint64_t>;

    explicit FluxMatrix(bool directed = false) : directed_(directed) {}

    bool directed() const { return directed_; }
    const Map& entries() const { return entries_; }
    std::size_t pair_count() const { return entries_.size(); }
    /// Distinct cities appearing in any stored pair.
    std::size_t city_count() const;
    std::uint64_t total() const;

    /// Adds `count` to the pair; an undirected matrix canonicalizes the key.
    /// Zero counts are ignored, and origin == destination is a ContractError.
    void add(const CityId& origin, const CityId& destination, std::uint64_t count = 1);
    std::uint64_t at(const CityId& origin, const CityId& destination) const;

    /// F_ij = f_ij + f_ji.
    FluxMatrix symmetrized() const;

    /// `origin,destination,count` or `city_a,city_b,count`.
    void write_csv(std::ostream& out) const;
    static FluxMatrix read_csv(std::istream& in);

    friend bool operator==(const FluxMatrix&, const FluxMatrix&) = default;

private:
    bool directed_;
    Map entries_;
};

FluxMatrix build_flux(std::span<const Transition> transitions, bool directed);

struct ExtractionStats {
    std::uint64_t messages = 0;
    std::uint64_t users = 0;
    std::uint64_t stationary_users = 0;  // users whose compressed trail has one city
    std::uint64_t adjacent_posts = 0;    // sum over users of (posts - 1), before compression
    std::uint64_t transitions = 0;       // after compression and cutting
    RejectReport rejects;
};

struct Extraction {
    FluxMatrix directed{true};
    FluxMatrix undirected{false};
    ExtractionStats stats;
};

/// Groups messages per user, orders them by (timestamp, message_id), compresses,
/// cuts and counts. Users are processed independently on `workers` threads and
/// reduced in user-id order.
Extraction extract(std::span<const GeoMessage> messages, unsigned workers = 1);

}  // namespace migflux::ingest
