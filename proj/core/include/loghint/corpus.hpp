#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loghint/levels.hpp"

namespace loghint {

struct SourceFile {
    std::string path;          // repo-relative, '/'-separated
    std::string content_hash;  // sha256 hex of the file bytes
    std::string language;      // "java" or "other"
    std::string component = "unknown";
    int loc = 0;

    bool operator==(const SourceFile&) const = default;
};

struct LoggingStatement {
    std::string id;    // "<path>:<per-file ordinal>"
    std::string file;
    int line = 0;      // 1-based
    int level = 0;     // index into the corpus scale
    std::string level_name;
    std::string message_template;
    int method_start = 0;
    int method_end = 0;
    std::string context;  // masked surrounding source
    std::string component = "unknown";

    bool operator==(const LoggingStatement&) const = default;
};

struct CommitRecord {
    std::string commit_id;
    std::string author;  // lowercased committer email
    std::int64_t timestamp = 0;
    std::vector<std::string> touched_files;

    bool operator==(const CommitRecord&) const = default;
};

struct ScanReport {
    int unreadable_files = 0;
    std::vector<std::string> warnings;
};

struct CorpusConfig {
    std::vector<std::string> extensions{".java"};
    /// ECMAScript regex for the log-call receiver identifier; empty selects
    /// the builtin heuristic (identifiers named log/logger or ending in a
    /// Log/Logger word).
    std::string logger_pattern;
    int context_window = 10;
    LevelScale scale = LevelScale::default_scale();
    /// Longest-prefix mapping from path prefixes to component labels.
    std::map<std::string, std::string> component_prefixes;
};

struct Corpus {
    LevelScale scale = LevelScale::default_scale();
    std::vector<SourceFile> files;              // sorted by path
    std::vector<LoggingStatement> statements;   // file order, then line order
    std::vector<CommitRecord> commits;          // as git log reports (newest first)
    ScanReport report;                          // not part of identity

    std::optional<int> file_index(std::string_view path) const;
    const LoggingStatement* find_statement(std::string_view file, int line) const;

    bool operator==(const Corpus& other) const {
        return scale == other.scale && files == other.files &&
               statements == other.statements && commits == other.commits;
    }
};

/// Scan a git working tree into a corpus. Matching files are read in
/// parallel; history comes from `git log`. Deterministic for a fixed tree.
Corpus scan_repo(const std::filesystem::path& repo, const CorpusConfig& config);

/// files.jsonl + statements.jsonl + commits.jsonl + manifest.json.
void store_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

/// Hash over the canonical serialization; equal corpora hash equal.
std::string corpus_hash(const Corpus& corpus);

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace loghint
