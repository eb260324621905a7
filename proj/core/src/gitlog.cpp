#include "loghint/gitlog.hpp"

#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace loghint {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

std::string run_command(const std::string& cmd, int* exit_code) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw CorpusError("failed to spawn: " + cmd);
    std::array<char, 8192> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    int status = pclose(pipe);
    *exit_code = (status == -1) ? -1 : WEXITSTATUS(status);
    return out;
}

}  // namespace

bool is_git_repo(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) return false;
    int code = 0;
    run_command("git -C " + shell_quote(dir.string()) + " rev-parse --git-dir 2>/dev/null", &code);
    return code == 0;
}

std::vector<CommitRecord> read_git_history(const std::filesystem::path& repo) {
    // \x01/\x02 separators keep emails with odd characters parseable.
    std::string cmd = "git -C " + shell_quote(repo.string()) +
                      " log --no-color \"--pretty=format:%x02%H%x01%ce%x01%ct\" --name-only 2>/dev/null";
    int code = 0;
    std::string out = run_command(cmd, &code);
    if (code != 0) {
        // A repo with no commits has no log; anything else is a real failure.
        int head_code = 0;
        run_command("git -C " + shell_quote(repo.string()) +
                        " rev-parse --verify HEAD 2>/dev/null",
                    &head_code);
        if (head_code != 0) return {};
        throw CorpusError("git log failed in " + repo.string());
    }

    std::vector<CommitRecord> commits;
    std::istringstream in(out);
    std::string line;
    CommitRecord current;
    bool have = false;
    auto flush = [&] {
        if (have) commits.push_back(std::move(current));
        current = CommitRecord{};
        have = false;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '\x02') {
            flush();
            std::string rest = line.substr(1);
            auto p1 = rest.find('\x01');
            auto p2 = rest.find('\x01', p1 + 1);
            if (p1 == std::string::npos || p2 == std::string::npos) continue;
            current.commit_id = rest.substr(0, p1);
            current.author = to_lower(rest.substr(p1 + 1, p2 - p1 - 1));
            current.timestamp = std::strtoll(rest.substr(p2 + 1).c_str(), nullptr, 10);
            have = true;
        } else if (!line.empty() && have) {
            current.touched_files.push_back(line);
        }
    }
    flush();
    return commits;
}

}  // namespace loghint
