#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loghint {

/// Ordered verbosity scale, most verbose first. A log level is an index into
/// the scale; all ordinal arithmetic (AOD, adjacent-confusion) reads it.
struct LevelScale {
    std::vector<std::string> names;

    /// trace, debug, info, warn, error, fatal.
    static LevelScale default_scale();

    std::size_t size() const { return names.size(); }

    /// Case-insensitive lookup; nullopt when the name is not on the scale.
    std::optional<int> index_of(std::string_view name) const;

    const std::string& name_of(int level) const { return names.at(static_cast<std::size_t>(level)); }

    /// Largest ordinal distance from `level` to any level on the scale.
    int max_ordinal_distance(int level) const;

    bool operator==(const LevelScale&) const = default;
};

std::string to_lower(std::string_view s);

}  // namespace loghint
