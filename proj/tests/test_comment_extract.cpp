#include "citescan/comment_extract.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"

#include "citescan/corpus.hpp"

using namespace citescan;

TEST_CASE("extract_comments basic grammar") {
    SUBCASE("C block comment excludes delimiters") {
        auto comments = extract_comments("int x; /* hi */", Language::C);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " hi ");
        CHECK(comments[0].kind == CommentKind::Block);
        CHECK(comments[0].start_line == 1);
        CHECK(comments[0].end_line == 1);
    }

    SUBCASE("comment markers inside string literals are not comments") {
        CHECK(extract_comments("String s = \"// not a comment\";", Language::Java).empty());
        CHECK(extract_comments("char* s = \"/* nope */\";", Language::C).empty());
        CHECK(extract_comments("s = '# nope'\n", Language::Python).empty());
        CHECK(extract_comments("var s = `// tpl ${x}`;", Language::JavaScript).empty());
    }

    SUBCASE("Python line comment keeps leading space") {
        auto comments = extract_comments("x = 1  # year 1974", Language::Python);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " year 1974");
        CHECK(comments[0].kind == CommentKind::Line);
    }

    SUBCASE("consecutive line comments stay separate") {
        auto comments = extract_comments("// a\n// b\n", Language::Cpp);
        REQUIRE(comments.size() == 2);
        CHECK(comments[0].raw_text == " a");
        CHECK(comments[1].raw_text == " b");
        CHECK(comments[1].start_line == 2);
    }

    SUBCASE("unterminated block runs to end of file") {
        auto comments = extract_comments("int x;\n/* open\nmore", Language::C);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " open\nmore");
        CHECK(comments[0].start_line == 2);
        CHECK(comments[0].end_line == 3);
    }

    SUBCASE("escaped quote does not end the string") {
        CHECK(extract_comments("s = \"a\\\" // x\";", Language::C).empty());
        auto comments = extract_comments("s = \"ok\"; // real", Language::C);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " real");
    }

    SUBCASE("Ruby =begin/=end block") {
        auto comments =
            extract_comments("x = 1\n=begin\ndocs here\n=end\ny = 2\n", Language::Ruby);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == "\ndocs here\n");
        CHECK(comments[0].kind == CommentKind::Block);
        CHECK(comments[0].start_line == 2);
        CHECK(comments[0].end_line == 4);
    }

    SUBCASE("Ruby heredoc hides comment markers") {
        auto comments = extract_comments(
            "sql = <<~SQL\n  SELECT 1 # not a comment\nSQL\n# real\n", Language::Ruby);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " real");
    }

    SUBCASE("PHP mixed comment styles") {
        auto comments = extract_comments(
            "<?php\n# hash\n// slash\n/* block */\n$s = '# nope';\n", Language::Php);
        REQUIRE(comments.size() == 3);
        CHECK(comments[0].raw_text == " hash");
        CHECK(comments[1].raw_text == " slash");
        CHECK(comments[2].raw_text == " block ");
    }

    SUBCASE("Python docstrings are strings, not comments") {
        auto comments = extract_comments(
            "def f():\n    \"\"\"Docstring # still a string\"\"\"\n    return 1  # tail\n",
            Language::Python);
        REQUIRE(comments.size() == 1);
        CHECK(comments[0].raw_text == " tail");
    }
}

TEST_CASE("the bundled fixture suite passes for all seven languages") {
    namespace fs = std::filesystem;
    int fixtures = 0;
    std::set<Language> seen;
    for (const auto& dir : fs::directory_iterator(CITESCAN_DATA_DIR "/fixtures")) {
        for (const auto& entry : fs::directory_iterator(dir.path())) {
            const fs::path& path = entry.path();
            if (path.extension() == ".json") continue;
            const auto language = classify_language(path.filename().string());
            REQUIRE(language.has_value());
            seen.insert(*language);

            std::ifstream in(path, std::ios::binary);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            const auto comments = extract_comments(buffer.str(), *language);

            fs::path expected_path = path;
            expected_path += ".expected.json";
            std::ifstream expected_in(expected_path);
            REQUIRE_MESSAGE(expected_in.good(), "missing ", expected_path.string());
            nlohmann::json expected;
            expected_in >> expected;

            INFO("fixture ", path.string());
            REQUIRE(comments.size() == expected.size());
            for (std::size_t i = 0; i < comments.size(); ++i) {
                CHECK(comments[i].raw_text == expected[i]["text"].get<std::string>());
                CHECK(comments[i].start_line == expected[i]["start_line"].get<int>());
                CHECK(comments[i].end_line == expected[i]["end_line"].get<int>());
                const bool is_line = expected[i]["kind"] == "line";
                CHECK((comments[i].kind == CommentKind::Line) == is_line);
            }
            ++fixtures;
        }
    }
    CHECK(fixtures >= 9);
    CHECK(seen.size() == 7);  // every language is covered
}

TEST_CASE("raw_text is a contiguous substring of the content") {
    const std::string content = "a();\n// one\nb(); /* two\nlines */ c(); // three\n";
    for (const auto& comment : extract_comments(content, Language::C))
        CHECK(content.find(comment.raw_text) != std::string::npos);
}

TEST_CASE("normalize replaces specials and collapses whitespace") {
    CHECK(normalize("A/B\n*C") == "A B C");
    CHECK(normalize("plain text") == "plain text");
    CHECK(normalize("  lots\t of\n\n space ") == "lots of space");
    CHECK(normalize("a#b!c\\d") == "a b c d");
    CHECK(normalize("") == "");
    CHECK(normalize("///***") == "");

    SUBCASE("the CACM example body survives normalization intact") {
        const std::string raw =
            "\n     * This program is intended to be pedagogic.  Specifically, this "
            "program was\n     * the basis of the Literate Programming column which "
            "appeared in the\n     * Communications of the ACM (CACM), in the June 1989 "
            "issue (32, 6,\n     * 740-755).\n ";
        const std::string normalized = normalize(raw);
        CHECK(normalized.find("Communications of the ACM (CACM), in the June 1989 "
                              "issue (32, 6, 740-755).") != std::string::npos);
    }
}

TEST_CASE("normalize is idempotent") {
    std::mt19937_64 rng(3);
    const std::string alphabet = "ab /*\\#!\n\t.,(19)";
    for (int round = 0; round < 500; ++round) {
        std::string text;
        const std::size_t len = rng() % 60;
        for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
        const std::string once = normalize(text);
        CHECK(normalize(once) == once);
    }
}

TEST_CASE("dedup groups per language and accumulates provenance") {
    DedupAccumulator acc;
    acc.add(Language::C, "use the force", {"repo1", "a.c", 3});
    acc.add(Language::C, "use the force", {"repo2", "b.c", 9});
    acc.add(Language::Java, "use the force", {"repo3", "C.java", 1});

    auto result = acc.finish();
    REQUIRE(result.size() == 2);
    CHECK(result[0].language == Language::C);
    CHECK(result[0].occurrences == 2);
    REQUIRE(result[0].provenance.size() == 2);
    CHECK(result[1].language == Language::Java);
    CHECK(result[1].occurrences == 1);
}

TEST_CASE("dedup conserves occurrence counts and merges associatively") {
    std::mt19937_64 rng(17);
    std::vector<std::pair<Language, std::string>> inputs;
    for (int i = 0; i < 3000; ++i) {
        const Language lang = i % 2 == 0 ? Language::C : Language::Python;
        inputs.emplace_back(lang, "text " + std::to_string(rng() % 200));
    }

    DedupAccumulator whole;
    DedupAccumulator left, right;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Provenance p{"r", "f", static_cast<int>(i)};
        whole.add(inputs[i].first, inputs[i].second, p);
        (i < inputs.size() / 2 ? left : right).add(inputs[i].first, inputs[i].second, p);
    }
    left.merge(std::move(right));

    auto a = whole.finish();
    auto b = left.finish();
    REQUIRE(a.size() == b.size());
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].occurrences == b[i].occurrences);
        total += a[i].occurrences;
    }
    CHECK(total == inputs.size());
}

TEST_CASE("comments JSONL round-trips") {
    std::vector<NormalizedComment> comments;
    comments.push_back({"pi is 3.14159", 2, Language::C,
                        {{"r1", "math.c", 10}, {"r2", "math.c", 20}}});
    comments.push_back({"se cita a Knuth (1984)", 1, Language::Python, {{"r3", "x.py", 1}}});

    std::ostringstream out;
    write_comments_jsonl(out, comments);
    std::istringstream in(out.str());
    auto loaded = read_comments_jsonl(in);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].text == comments[0].text);
    CHECK(loaded[0].occurrences == 2);
    CHECK(loaded[0].provenance[1].repo == "r2");
    CHECK(loaded[1].language == Language::Python);
}

// ---------------------------------------------------------------------------
// Fuzz against a character-class oracle that tracks lexer state. The oracle
// covers the C-family subset (line + block comments, single-line strings with
// escapes) and is an independent reimplementation.

namespace {

struct OracleComment {
    std::string text;
    CommentKind kind;
};

std::vector<OracleComment> c_oracle(const std::string& content) {
    enum class State { Code, Str, Chr, Line, Block };
    State state = State::Code;
    std::vector<OracleComment> out;
    std::string current;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        switch (state) {
            case State::Code:
                if (c == '/' && i + 1 < content.size() && content[i + 1] == '/') {
                    state = State::Line;
                    current.clear();
                    ++i;
                } else if (c == '/' && i + 1 < content.size() && content[i + 1] == '*') {
                    state = State::Block;
                    current.clear();
                    ++i;
                } else if (c == '"') {
                    state = State::Str;
                } else if (c == '\'') {
                    state = State::Chr;
                }
                break;
            case State::Str:
            case State::Chr:
                if (c == '\\' && i + 1 < content.size()) ++i;
                else if (c == '\n') state = State::Code;
                else if (c == '"' && state == State::Str) state = State::Code;
                else if (c == '\'' && state == State::Chr) state = State::Code;
                break;
            case State::Line:
                if (c == '\n') {
                    if (!current.empty()) out.push_back({current, CommentKind::Line});
                    state = State::Code;
                } else {
                    current += c;
                }
                break;
            case State::Block:
                if (c == '*' && i + 1 < content.size() && content[i + 1] == '/') {
                    if (!current.empty()) out.push_back({current, CommentKind::Block});
                    state = State::Code;
                    ++i;
                } else {
                    current += c;
                }
                break;
        }
    }
    if (state == State::Line || state == State::Block) {
        if (!current.empty())
            out.push_back({current, state == State::Line ? CommentKind::Line
                                                         : CommentKind::Block});
    }
    return out;
}

}  // namespace

TEST_CASE("C lexer agrees with the state-machine oracle on random soup") {
    std::mt19937_64 rng(99);
    const std::string alphabet = "ab\"'/\\*\n ;x#!";
    for (int round = 0; round < 2000; ++round) {
        std::string content;
        const std::size_t len = rng() % 80;
        for (std::size_t i = 0; i < len; ++i) content += alphabet[rng() % alphabet.size()];

        const auto expected = c_oracle(content);
        const auto actual = extract_comments(content, Language::C);
        REQUIRE_MESSAGE(actual.size() == expected.size(), "content: " << content);
        for (std::size_t i = 0; i < actual.size(); ++i) {
            CHECK(actual[i].raw_text == expected[i].text);
            CHECK(actual[i].kind == expected[i].kind);
        }
    }
}

TEST_CASE("extracted comments never overlap string literals in structured fuzz") {
    // Build files from known-good segments; the generator itself is the
    // ground truth for which comments exist.
    std::mt19937_64 rng(1234);
    for (int round = 0; round < 300; ++round) {
        std::string content;
        std::vector<std::string> expected;
        const int segments = 1 + static_cast<int>(rng() % 8);
        for (int s = 0; s < segments; ++s) {
            switch (rng() % 4) {
                case 0:
                    content += "int v" + std::to_string(s) + " = 1;\n";
                    break;
                case 1:
                    content += "const char* s" + std::to_string(s) +
                               " = \"/* no" + std::to_string(s) + " */ // no\";\n";
                    break;
                case 2: {
                    std::string body = " line" + std::to_string(s);
                    content += "//" + body + "\n";
                    expected.push_back(body);
                    break;
                }
                default: {
                    std::string body = " block" + std::to_string(s) + " \"quoted\" ";
                    content += "/*" + body + "*/\n";
                    expected.push_back(body);
                    break;
                }
            }
        }
        const auto actual = extract_comments(content, Language::C);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t i = 0; i < actual.size(); ++i)
            CHECK(actual[i].raw_text == expected[i]);
    }
}
