#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace migflux {

// Migration pattern labels, ordered by descending mean pair flux.
enum class Pattern { I = 0, II = 1, III = 2, IV = 3 };

inline constexpr std::array<Pattern, 4> kAllPatterns = {Pattern::I, Pattern::II, Pattern::III, Pattern::IV};

inline std::string_view pattern_name(Pattern p) {
    constexpr std::array<std::string_view, 4> names = {"I", "II", "III", "IV"};
    return names[static_cast<std::size_t>(p)];
}

inline std::optional<Pattern> parse_pattern(std::string_view s) {
    for (auto p : kAllPatterns) {
        if (pattern_name(p) == s) return p;
    }
    return std::nullopt;
}

inline std::size_t index_of(Pattern p) { return static_cast<std::size_t>(p); }

}  // namespace migflux
