#include <doctest.h>

#include "loghint/extract.hpp"

using namespace loghint;

namespace {

// Hand-enumerated fixture: expectations in the table below were counted on
// the source before the scanner existed.
//
//   line  level  message            method span
//   7     info   "started"          6..10
//   9     warn   "retry {} of {}"   6..10
//   17    debug  "ready now"        15..20
//   27    error  "close failed: {}" 23..30
//   29    fatal  "giving up"        23..30
const char* kFixture = R"__(package demo;

public class Outer {
    private static final Logger LOG = LoggerFactory.getLogger(Outer.class);

    void start(int port) {
        LOG.info("started");
        int retries = 0;
        LOG.warn("retry {} of {}", retries, port);
    }

    static class Inner {
        private final Logger logger = LoggerFactory.getLogger(Inner.class);

        String describe() {
            if (ready) {
                logger.debug("ready now");
            }
            return "ok";
        }
    }

    void stop() {
        try {
            channel.close();
        } catch (IOException e) {
            LOG.error("close failed: {}", e.getMessage());
        }
        LOG.fatal("giving up");
    }
}
)__";

ExtractionConfig config() {
    ExtractionConfig c;
    return c;
}

}  // namespace

TEST_CASE("nested-class fixture: five calls at hand-checked lines") {
    auto statements = extract_logging_statements(kFixture, "demo/Outer.java", config());
    REQUIRE(statements.size() == 5);

    struct Expect {
        int line;
        const char* level;
        const char* message;
        int method_start;
        int method_end;
    };
    const Expect expected[] = {
        {7, "info", "started", 6, 10},
        {9, "warn", "retry {} of {}", 6, 10},
        {17, "debug", "ready now", 15, 20},
        {27, "error", "close failed: {}", 23, 30},
        {29, "fatal", "giving up", 23, 30},
    };
    for (std::size_t i = 0; i < 5; ++i) {
        CAPTURE(i);
        CHECK(statements[i].line == expected[i].line);
        CHECK(statements[i].level_name == expected[i].level);
        CHECK(statements[i].message_template == expected[i].message);
        CHECK(statements[i].method_start == expected[i].method_start);
        CHECK(statements[i].method_end == expected[i].method_end);
        CHECK(statements[i].line >= statements[i].method_start);
        CHECK(statements[i].line <= statements[i].method_end);
    }
}

TEST_CASE("minimal parses") {
    auto one = extract_logging_statements("class A { void f() { LOG.info(\"started\"); } }",
                                          "A.java", config());
    REQUIRE(one.size() == 1);
    CHECK(one[0].level_name == "info");
    CHECK(one[0].message_template == "started");

    auto warn = extract_logging_statements(
        "class A { void f() { logger.warn(\"retry {} of {}\", a, b); } }", "A.java", config());
    REQUIRE(warn.size() == 1);
    CHECK(warn[0].level_name == "warn");
    CHECK(warn[0].message_template == "retry {} of {}");

    auto dbg = extract_logging_statements("log.debug(\"x\")", "A.java", config());
    REQUIRE(dbg.size() == 1);
    CHECK(dbg[0].level_name == "debug");
    CHECK(dbg[0].message_template == "x");
    // no method to resolve: whole-file span
    CHECK(dbg[0].method_start == 1);
}

TEST_CASE("receiver heuristic") {
    CHECK(looks_like_logger("LOG"));
    CHECK(looks_like_logger("logger"));
    CHECK(looks_like_logger("myLogger"));
    CHECK(looks_like_logger("s_log"));
    CHECK(looks_like_logger("WifiLog"));
    CHECK_FALSE(looks_like_logger("dialog"));
    CHECK_FALSE(looks_like_logger("catalog"));
    CHECK_FALSE(looks_like_logger("backlog"));

    // dialog.info(...) must not extract
    auto none = extract_logging_statements("class A { void f() { dialog.info(\"x\"); } }",
                                           "A.java", config());
    CHECK(none.empty());

    // configurable pattern overrides the heuristic
    ExtractionConfig custom;
    custom.logger_pattern = "dialog";
    auto some = extract_logging_statements("class A { void f() { dialog.info(\"x\"); } }",
                                           "A.java", custom);
    CHECK(some.size() == 1);
}

TEST_CASE("comments and strings do not produce statements") {
    const char* src = R"__(class A {
    void f() {
        // LOG.error("commented out");
        /* LOG.warn("also out"); */
        String s = "LOG.fatal(\"inside literal\")";
        LOG.info("real");
    }
}
)__";
    auto statements = extract_logging_statements(src, "A.java", config());
    REQUIRE(statements.size() == 1);
    CHECK(statements[0].level_name == "info");
}

TEST_CASE("masking: marker once, level token gone, message kept") {
    auto statements = extract_logging_statements(kFixture, "demo/Outer.java", config());
    for (const auto& st : statements) {
        CAPTURE(st.id);
        // mask marker appears exactly once
        std::size_t first = st.context.find(kLevelMask);
        REQUIRE(first != std::string::npos);
        CHECK(st.context.find(kLevelMask, first + 1) == std::string::npos);
        // no identifier token in the masked window spells the level
        for (const auto& tok : lex_source(st.context)) {
            if (tok.kind == TokenKind::identifier)
                CHECK(to_lower(tok.text) != st.level_name);
        }
        if (!st.message_template.empty())
            CHECK(st.context.find(st.message_template) != std::string::npos);
    }
}

TEST_CASE("same-level neighbor call is redacted, different level kept") {
    const char* src = R"__(class A {
    void f() {
        LOG.info("first");
        LOG.info("second");
        LOG.warn("other");
    }
}
)__";
    auto statements = extract_logging_statements(src, "A.java", config());
    REQUIRE(statements.size() == 3);
    const auto& first = statements[0];
    CHECK(first.context.find(kLevelMask) != std::string::npos);
    CHECK(first.context.find(kLevelRedacted) != std::string::npos);  // the sibling info call
    CHECK(first.context.find("warn") != std::string::npos);          // other level untouched
    // both messages still visible
    CHECK(first.context.find("first") != std::string::npos);
    CHECK(first.context.find("second") != std::string::npos);
}

TEST_CASE("context window clipped to method span") {
    std::string src = "class A {\n";
    src += "    void before() { int x = 0; }\n";  // line 2
    src += "    void f() {\n";                    // line 3
    src += "        LOG.info(\"x\");\n";          // line 4
    src += "    }\n";                             // line 5
    src += "    void after() { int y = 1; }\n";   // line 6
    src += "}\n";
    auto statements = extract_logging_statements(src, "A.java", config());
    REQUIRE(statements.size() == 1);
    CHECK(statements[0].method_start == 3);
    CHECK(statements[0].method_end == 5);
    // window = lines 3..5 only; neighbors are out
    CHECK(statements[0].context.find("before") == std::string::npos);
    CHECK(statements[0].context.find("after") == std::string::npos);
}

TEST_CASE("ids are per-file ordinals") {
    auto statements = extract_logging_statements(kFixture, "demo/Outer.java", config());
    for (std::size_t i = 0; i < statements.size(); ++i)
        CHECK(statements[i].id == "demo/Outer.java:" + std::to_string(i));
}

TEST_CASE("method chunk detection skips control blocks and lambdas") {
    const char* src = R"__(class A {
    private Runnable r = () -> { run(); };
    void f(int x) throws Exception {
        if (x > 0) { g(); }
        for (int i = 0; i < x; i++) { h(i); }
    }
    void g() { }
}
)__";
    auto blocks = find_method_blocks(src);
    REQUIRE(blocks.size() == 2);  // f and g only
    CHECK(blocks[0].start_line == 3);
    CHECK(blocks[1].start_line == 7);
}

TEST_CASE("malformed source still extracts best-effort") {
    auto statements = extract_logging_statements("void f( { LOG.error(\"boom\"", "A.java", config());
    REQUIRE(statements.size() == 1);
    CHECK(statements[0].level_name == "error");
}
