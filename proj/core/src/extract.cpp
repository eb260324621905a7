#include "loghint/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

namespace loghint {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

std::vector<LexToken> lex_source(std::string_view src) {
    std::vector<LexToken> tokens;
    std::size_t i = 0;
    int line = 1;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] == '\n') ++line;
                ++i;
            }
            i = std::min(n, i + 2);
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            std::size_t begin = i;
            int start_line = line;
            ++i;
            std::string content;
            while (i < n && src[i] != quote) {
                if (src[i] == '\\' && i + 1 < n) {
                    content.push_back(src[i]);
                    content.push_back(src[i + 1]);
                    if (src[i + 1] == '\n') ++line;
                    i += 2;
                    continue;
                }
                if (src[i] == '\n') ++line;  // unterminated literal; keep going
                content.push_back(src[i]);
                ++i;
            }
            if (i < n) ++i;  // closing quote
            tokens.push_back({TokenKind::string_literal, std::move(content), begin, i, start_line});
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t begin = i;
            while (i < n && is_ident_char(src[i])) ++i;
            tokens.push_back({TokenKind::identifier, std::string(src.substr(begin, i - begin)), begin, i, line});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t begin = i;
            while (i < n && (is_ident_char(src[i]) || src[i] == '.')) ++i;
            tokens.push_back({TokenKind::number, std::string(src.substr(begin, i - begin)), begin, i, line});
            continue;
        }
        tokens.push_back({TokenKind::punct, std::string(1, c), i, i + 1, line});
        ++i;
    }
    return tokens;
}

bool looks_like_logger(std::string_view identifier) {
    std::string lowered = to_lower(identifier);
    if (lowered == "log" || lowered == "logger" || lowered == "logging") return true;
    for (std::string_view suffix : {"log", "logger"}) {
        if (lowered.size() <= suffix.size() || !lowered.ends_with(suffix)) continue;
        std::size_t at = identifier.size() - suffix.size();
        char before = identifier[at - 1];
        // Accept wordy suffixes only at an underscore or camel-case boundary,
        // so `myLogger` and `s_log` match but `dialog` does not.
        if (before == '_' || before == '$') return true;
        if (std::isupper(static_cast<unsigned char>(identifier[at]))) return true;
    }
    return false;
}

namespace {

const std::vector<std::string> kControlKeywords = {
    "if", "for", "while", "switch", "try", "catch", "do", "else",
    "synchronized", "return", "new", "throw", "finally"};
const std::vector<std::string> kTypeKeywords = {"class", "interface", "enum", "record"};

bool contains_token(const std::vector<const LexToken*>& header, const std::string& word) {
    for (const auto* t : header) {
        if (t->kind == TokenKind::identifier && t->text == word) return true;
    }
    return false;
}

struct BlockScanner {
    const std::vector<LexToken>& tokens;
    std::vector<MethodBlock> methods;

    explicit BlockScanner(const std::vector<LexToken>& toks) : tokens(toks) {}

    bool header_is_method(std::size_t open_idx, int* header_line) const {
        // Header: tokens after the previous ';', '{', '}' up to the '{'.
        std::vector<const LexToken*> header;
        std::size_t b = open_idx;
        while (b > 0) {
            const LexToken& t = tokens[b - 1];
            if (t.kind == TokenKind::punct && (t.text == ";" || t.text == "{" || t.text == "}")) break;
            --b;
        }
        for (std::size_t j = b; j < open_idx; ++j) header.push_back(&tokens[j]);
        if (header.empty()) return false;  // bare initializer block
        *header_line = header.front()->line;

        bool has_parens = false;
        int paren_depth = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            const LexToken* t = header[j];
            if (t->kind != TokenKind::punct) continue;
            if (t->text == "(") {
                ++paren_depth;
                has_parens = true;
            } else if (t->text == ")") {
                --paren_depth;
            } else if (paren_depth == 0 && (t->text == "=" || t->text == ">")) {
                // assignment or the tail of a `->` lambda arrow
                if (t->text == ">" && j > 0 && header[j - 1]->kind == TokenKind::punct &&
                    header[j - 1]->text == "-")
                    return false;
                if (t->text == "=") return false;
            }
        }
        if (!has_parens || paren_depth != 0) return false;
        for (const auto& kw : kControlKeywords)
            if (contains_token(header, kw)) return false;
        for (const auto& kw : kTypeKeywords)
            if (contains_token(header, kw)) return false;
        // The parameter list must sit directly before the '{' (a throws
        // clause or identifiers may intervene, but not a ';').
        return true;
    }

    void run() {
        struct Open {
            bool is_method;
            int header_line;
            std::size_t body_begin;
            int method_depth;
        };
        std::vector<Open> stack;
        int method_depth = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const LexToken& t = tokens[i];
            if (t.kind != TokenKind::punct) continue;
            if (t.text == "{") {
                int header_line = t.line;
                bool is_method = header_is_method(i, &header_line);
                stack.push_back({is_method, header_line, t.end, method_depth});
                if (is_method) ++method_depth;
            } else if (t.text == "}") {
                if (stack.empty()) continue;  // malformed; ignore
                Open open = stack.back();
                stack.pop_back();
                if (open.is_method) {
                    --method_depth;
                    methods.push_back({open.header_line, t.line, open.body_begin, t.begin,
                                       open.method_depth});
                }
            }
        }
    }
};

struct LogCall {
    std::size_t level_token;     // index into the token stream
    int line;
    std::string level_name;
    int level;
    std::string message;
};

// Byte offset of the first character of each 1-based line.
std::vector<std::size_t> line_offsets(std::string_view src) {
    std::vector<std::size_t> offs{0};
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] == '\n') offs.push_back(i + 1);
    }
    return offs;
}

}  // namespace

std::vector<MethodBlock> find_method_blocks(std::string_view source) {
    auto tokens = lex_source(source);
    BlockScanner scanner(tokens);
    scanner.run();
    std::sort(scanner.methods.begin(), scanner.methods.end(),
              [](const MethodBlock& a, const MethodBlock& b) {
                  return a.body_begin < b.body_begin;
              });
    return scanner.methods;
}

std::vector<LoggingStatement> extract_logging_statements(std::string_view source,
                                                         std::string_view path,
                                                         const ExtractionConfig& config) {
    auto tokens = lex_source(source);
    BlockScanner scanner(tokens);
    scanner.run();

    std::optional<std::regex> receiver_re;
    if (!config.logger_pattern.empty())
        receiver_re.emplace(config.logger_pattern,
                            std::regex::ECMAScript | std::regex::icase);
    auto receiver_ok = [&](const std::string& name) {
        if (receiver_re) return std::regex_match(name, *receiver_re);
        return looks_like_logger(name);
    };

    // Recognize receiver '.' level '(' chains; the receiver may itself be a
    // call or field chain (getLogger().info(...)): we look one identifier back.
    std::vector<LogCall> calls;
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        const LexToken& dot = tokens[i + 1];
        const LexToken& name = tokens[i + 2];
        if (tokens[i].kind != TokenKind::identifier) continue;
        if (dot.kind != TokenKind::punct || dot.text != ".") continue;
        if (name.kind != TokenKind::identifier) continue;
        if (i + 3 >= tokens.size()) continue;
        const LexToken& paren = tokens[i + 3];
        if (paren.kind != TokenKind::punct || paren.text != "(") continue;
        auto level = config.scale.index_of(name.text);
        if (!level) continue;
        if (!receiver_ok(tokens[i].text)) continue;

        // Message template: string literals of the argument list, concatenated.
        std::string message;
        int depth = 0;
        for (std::size_t j = i + 3; j < tokens.size(); ++j) {
            const LexToken& t = tokens[j];
            if (t.kind == TokenKind::punct && t.text == "(") ++depth;
            if (t.kind == TokenKind::punct && t.text == ")") {
                --depth;
                if (depth == 0) break;
            }
            if (t.kind == TokenKind::string_literal) message += t.text;
        }
        calls.push_back({i + 2, name.line, to_lower(name.text), *level, std::move(message)});
    }

    auto offs = line_offsets(source);
    int total_lines = static_cast<int>(offs.size());
    auto line_begin = [&](int line1) -> std::size_t {
        if (line1 <= 1) return 0;
        if (line1 > total_lines) return source.size();
        return offs[static_cast<std::size_t>(line1 - 1)];
    };
    auto line_end = [&](int line1) -> std::size_t {  // exclusive, includes '\n'
        if (line1 >= total_lines) return source.size();
        return offs[static_cast<std::size_t>(line1)];
    };

    std::vector<LoggingStatement> out;
    int ordinal = 0;
    for (const LogCall& call : calls) {
        LoggingStatement st;
        st.id = std::string(path) + ":" + std::to_string(ordinal++);
        st.file = std::string(path);
        st.line = call.line;
        st.level = call.level;
        st.level_name = call.level_name;
        st.message_template = call.message;

        // Innermost enclosing method; whole file when none encloses the call.
        const LexToken& level_tok = tokens[call.level_token];
        const MethodBlock* method = nullptr;
        for (const auto& m : scanner.methods) {
            if (level_tok.begin >= m.body_begin && level_tok.begin < m.body_end) {
                if (!method || m.body_begin >= method->body_begin) method = &m;
            }
        }
        st.method_start = method ? method->start_line : 1;
        st.method_end = method ? method->end_line : total_lines;

        int lo = std::max(st.method_start, call.line - config.context_window);
        int hi = std::min(st.method_end, call.line + config.context_window);
        lo = std::max(1, std::min(lo, call.line));
        hi = std::min(total_lines, std::max(hi, call.line));
        std::size_t wb = line_begin(lo);
        std::size_t we = line_end(hi);

        // Splice the window, masking the target level token and redacting any
        // other identifier spelled like it.
        std::string masked;
        masked.reserve(we - wb + 8);
        std::size_t cursor = wb;
        for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
            const LexToken& t = tokens[ti];
            if (t.end <= wb || t.begin >= we) continue;
            if (t.kind != TokenKind::identifier) continue;
            bool is_target = (ti == call.level_token);
            if (!is_target && to_lower(t.text) != call.level_name) continue;
            masked.append(source.substr(cursor, t.begin - cursor));
            masked.append(is_target ? kLevelMask : kLevelRedacted);
            cursor = t.end;
        }
        masked.append(source.substr(cursor, we - cursor));
        st.context = std::move(masked);
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace loghint
