#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "loghint/corpus.hpp"
#include "loghint/levels.hpp"

namespace loghint {

/// Marker substituted for the target call's level token in context windows.
inline constexpr std::string_view kLevelMask = "<MASK>";
/// Neutral replacement for other occurrences of the same level token inside
/// the window, so a masked context never leaks the answer.
inline constexpr std::string_view kLevelRedacted = "<LVL>";

enum class TokenKind { identifier, string_literal, number, punct };

struct LexToken {
    TokenKind kind;
    std::string text;      // identifier name / decoded string content / punct
    std::size_t begin = 0; // byte offsets into the source
    std::size_t end = 0;
    int line = 1;          // 1-based
};

/// Tokenize Java-like source, skipping comments. String and char literals
/// become single tokens carrying their content.
std::vector<LexToken> lex_source(std::string_view source);

struct MethodBlock {
    int start_line = 0;  // first line of the header (modifiers/annotations)
    int end_line = 0;    // line of the closing brace
    std::size_t body_begin = 0;
    std::size_t body_end = 0;
    int depth = 0;       // nesting depth among method blocks (0 = top level)
};

/// Brace-balanced scan for method-like blocks (header with a parameter list
/// that is not a control-flow statement, type declaration, or lambda).
std::vector<MethodBlock> find_method_blocks(std::string_view source);

struct ExtractionConfig {
    LevelScale scale = LevelScale::default_scale();
    std::string logger_pattern;  // empty -> builtin heuristic
    int context_window = 10;
};

/// Recognize `<receiver>.<level>(...)` calls and capture message, method
/// span, and the masked context window. Never throws on malformed input;
/// extraction degrades to whole-file spans.
std::vector<LoggingStatement> extract_logging_statements(std::string_view source,
                                                         std::string_view path,
                                                         const ExtractionConfig& config);

/// Builtin receiver heuristic, exposed for tests: log/logger (any case) or a
/// _log/_logger/Log/Logger-suffixed identifier.
bool looks_like_logger(std::string_view identifier);

}  // namespace loghint
