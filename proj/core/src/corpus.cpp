#include "loghint/corpus.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "loghint/extract.hpp"
#include "loghint/gitlog.hpp"
#include "loghint/parallel.hpp"
#include "loghint/sha256.hpp"

namespace loghint {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

int count_lines(std::string_view text) {
    if (text.empty()) return 0;
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    if (text.back() != '\n') ++lines;
    return lines;
}

std::string component_for(const std::string& path, const std::map<std::string, std::string>& prefixes) {
    std::string best_label = "unknown";
    std::size_t best_len = 0;
    for (const auto& [prefix, label] : prefixes) {
        if (path.starts_with(prefix) && prefix.size() >= best_len) {
            best_len = prefix.size();
            best_label = label.empty() ? "unknown" : label;
        }
    }
    return best_label;
}

ordered_json file_record(const SourceFile& f) {
    return ordered_json{{"path", f.path},
                        {"content_hash", f.content_hash},
                        {"language", f.language},
                        {"component", f.component},
                        {"loc", f.loc}};
}

ordered_json statement_record(const LoggingStatement& s) {
    return ordered_json{{"id", s.id},
                        {"file", s.file},
                        {"line", s.line},
                        {"level", s.level_name},
                        {"message", s.message_template},
                        {"method_start", s.method_start},
                        {"method_end", s.method_end},
                        {"context", s.context},
                        {"component", s.component}};
}

ordered_json commit_record(const CommitRecord& c) {
    return ordered_json{{"commit", c.commit_id},
                        {"author", c.author},
                        {"timestamp", c.timestamp},
                        {"files", c.touched_files}};
}

struct Serialized {
    std::string files_jsonl;
    std::string statements_jsonl;
    std::string commits_jsonl;
    std::string scale_json;
};

Serialized serialize(const Corpus& corpus) {
    Serialized s;
    {
        std::ostringstream out;
        for (const auto& f : corpus.files) out << file_record(f).dump() << '\n';
        s.files_jsonl = out.str();
    }
    {
        std::ostringstream out;
        for (const auto& st : corpus.statements) out << statement_record(st).dump() << '\n';
        s.statements_jsonl = out.str();
    }
    {
        std::ostringstream out;
        for (const auto& c : corpus.commits) out << commit_record(c).dump() << '\n';
        s.commits_jsonl = out.str();
    }
    s.scale_json = ordered_json(corpus.scale.names).dump();
    return s;
}

std::string read_file_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CorpusError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace

std::optional<int> Corpus::file_index(std::string_view path) const {
    for (std::size_t i = 0; i < files.size(); ++i)
        if (files[i].path == path) return static_cast<int>(i);
    return std::nullopt;
}

const LoggingStatement* Corpus::find_statement(std::string_view file, int line) const {
    for (const auto& s : statements)
        if (s.file == file && s.line == line) return &s;
    return nullptr;
}

Corpus scan_repo(const std::filesystem::path& repo, const CorpusConfig& config) {
    if (!is_git_repo(repo)) throw CorpusError("not a git repository: " + repo.string());

    std::vector<std::string> paths;
    for (auto it = std::filesystem::recursive_directory_iterator(repo);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        if (it->is_directory()) {
            if (it->path().filename() == ".git") it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        std::string ext = it->path().extension().string();
        bool match = false;
        for (const auto& want : config.extensions)
            if (ext == want) match = true;
        if (!match) continue;
        paths.push_back(std::filesystem::relative(it->path(), repo).generic_string());
    }
    std::sort(paths.begin(), paths.end());

    Corpus corpus;
    corpus.scale = config.scale;
    corpus.files.resize(paths.size());
    std::vector<std::vector<LoggingStatement>> per_file(paths.size());
    std::vector<std::string> read_errors(paths.size());

    ExtractionConfig ex;
    ex.scale = config.scale;
    ex.logger_pattern = config.logger_pattern;
    ex.context_window = config.context_window;

    parallel_for(paths.size(), [&](std::size_t i) {
        const std::string& rel = paths[i];
        SourceFile f;
        f.path = rel;
        f.language = rel.ends_with(".java") ? "java" : "other";
        f.component = component_for(rel, config.component_prefixes);
        std::ifstream in(repo / rel, std::ios::binary);
        if (!in) {
            read_errors[i] = "unreadable file skipped: " + rel;
            f.content_hash = sha256_hex("");
            corpus.files[i] = std::move(f);
            return;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string content = ss.str();
        f.content_hash = sha256_hex(content);
        f.loc = count_lines(content);
        per_file[i] = extract_logging_statements(content, rel, ex);
        for (auto& st : per_file[i]) st.component = f.component;
        corpus.files[i] = std::move(f);
    });

    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (!read_errors[i].empty()) {
            ++corpus.report.unreadable_files;
            corpus.report.warnings.push_back(read_errors[i]);
        }
        for (auto& st : per_file[i]) corpus.statements.push_back(std::move(st));
    }

    corpus.commits = read_git_history(repo);
    return corpus;
}

std::string corpus_hash(const Corpus& corpus) {
    Serialized s = serialize(corpus);
    return sha256_hex(s.files_jsonl + s.statements_jsonl + s.commits_jsonl + s.scale_json);
}

void store_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Serialized s = serialize(corpus);
    write_file(dir / "files.jsonl", s.files_jsonl);
    write_file(dir / "statements.jsonl", s.statements_jsonl);
    write_file(dir / "commits.jsonl", s.commits_jsonl);

    ordered_json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["scale"] = corpus.scale.names;
    manifest["checksums"] = ordered_json{{"files.jsonl", sha256_hex(s.files_jsonl)},
                                         {"statements.jsonl", sha256_hex(s.statements_jsonl)},
                                         {"commits.jsonl", sha256_hex(s.commits_jsonl)}};
    manifest["counts"] = ordered_json{{"files", corpus.files.size()},
                                      {"statements", corpus.statements.size()},
                                      {"commits", corpus.commits.size()}};
    manifest["corpus_hash"] =
        sha256_hex(s.files_jsonl + s.statements_jsonl + s.commits_jsonl + s.scale_json);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Corpus load_corpus(const std::filesystem::path& dir) {
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(read_file_or_throw(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw CorpusError("invalid manifest.json: " + std::string(e.what()));
    }
    if (!manifest.contains("schema_version") || manifest["schema_version"].get<int>() != kSchemaVersion)
        throw CorpusError("schema-version mismatch in " + (dir / "manifest.json").string());

    Corpus corpus;
    corpus.scale.names = manifest["scale"].get<std::vector<std::string>>();

    auto load_part = [&](const char* name) {
        std::string text = read_file_or_throw(dir / name);
        std::string expect = manifest["checksums"][name].get<std::string>();
        if (sha256_hex(text) != expect)
            throw CorpusError(std::string("checksum mismatch in ") + name);
        return text;
    };

    try {
        std::istringstream in(load_part("files.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = ordered_json::parse(line);
            SourceFile f;
            f.path = j.at("path").get<std::string>();
            f.content_hash = j.at("content_hash").get<std::string>();
            f.language = j.at("language").get<std::string>();
            f.component = j.at("component").get<std::string>();
            f.loc = j.at("loc").get<int>();
            corpus.files.push_back(std::move(f));
        }

        std::istringstream sin(load_part("statements.jsonl"));
        while (std::getline(sin, line)) {
            if (line.empty()) continue;
            auto j = ordered_json::parse(line);
            LoggingStatement s;
            s.id = j.at("id").get<std::string>();
            s.file = j.at("file").get<std::string>();
            s.line = j.at("line").get<int>();
            s.level_name = j.at("level").get<std::string>();
            auto idx = corpus.scale.index_of(s.level_name);
            if (!idx) throw CorpusError("statement level not on scale: " + s.level_name);
            s.level = *idx;
            s.message_template = j.at("message").get<std::string>();
            s.method_start = j.at("method_start").get<int>();
            s.method_end = j.at("method_end").get<int>();
            s.context = j.at("context").get<std::string>();
            s.component = j.at("component").get<std::string>();
            corpus.statements.push_back(std::move(s));
        }

        std::istringstream cin(load_part("commits.jsonl"));
        while (std::getline(cin, line)) {
            if (line.empty()) continue;
            auto j = ordered_json::parse(line);
            CommitRecord c;
            c.commit_id = j.at("commit").get<std::string>();
            c.author = j.at("author").get<std::string>();
            c.timestamp = j.at("timestamp").get<std::int64_t>();
            c.touched_files = j.at("files").get<std::vector<std::string>>();
            corpus.commits.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorpusError("corrupt corpus record: " + std::string(e.what()));
    }
    return corpus;
}

}  // namespace loghint
