#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace migflux {

using CityId = std::string;

// Ordered pair of city ids. For undirected data the key is canonical (a < b).
struct CityPair {
    CityId a;
    CityId b;

    friend auto operator<=>(const CityPair&, const CityPair&) = default;
    friend bool operator==(const CityPair&, const CityPair&) = default;
};

inline CityPair canonical(CityPair p) {
    if (p.b < p.a) std::swap(p.a, p.b);
    return p;
}

inline CityPair canonical(const CityId& x, const CityId& y) { return canonical(CityPair{x, y}); }

/// Base for all library failures. Exit code 1 at the CLI boundary.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input does not follow the documented file layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Values are present but unusable (nonpositive mass, degenerate feature, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kToolVersion = "migflux 0.3.1";

}  // namespace migflux
