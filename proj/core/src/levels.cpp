#include "loghint/levels.hpp"

#include <algorithm>
#include <cctype>

namespace loghint {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

LevelScale LevelScale::default_scale() {
    return LevelScale{{"trace", "debug", "info", "warn", "error", "fatal"}};
}

std::optional<int> LevelScale::index_of(std::string_view name) const {
    std::string lowered = to_lower(name);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == lowered) return static_cast<int>(i);
    }
    return std::nullopt;
}

int LevelScale::max_ordinal_distance(int level) const {
    int last = static_cast<int>(names.size()) - 1;
    return std::max(level, last - level);
}

}  // namespace loghint
