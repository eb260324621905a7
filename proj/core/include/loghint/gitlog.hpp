#pragma once

#include <filesystem>
#include <vector>

#include "loghint/corpus.hpp"

namespace loghint {

bool is_git_repo(const std::filesystem::path& dir);

/// Full history reachable from HEAD via `git log --name-only`, newest first.
/// Author identity is the lowercased committer email. Merge commits carry
/// whatever file list git reports for them (none, under the default diff).
std::vector<CommitRecord> read_git_history(const std::filesystem::path& repo);

}  // namespace loghint
