#pragma once

#include <string>
#include <string_view>

namespace loghint {

/// SHA-256 hex digest of `data`. Used for file content hashes and the
/// corpus/artifact binding manifests.
std::string sha256_hex(std::string_view data);

}  // namespace loghint
