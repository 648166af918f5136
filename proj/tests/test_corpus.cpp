#include "citescan/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "citescan/errors.hpp"

using namespace citescan;
namespace fs = std::filesystem;

namespace {

// Temp directory that cleans up after itself.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("citescan-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::vector<CommitDate> dates_in_year(int year, int count) {
    std::vector<CommitDate> dates;
    for (int i = 0; i < count; ++i) dates.push_back({year, 1 + i % 12, 1 + i % 28});
    return dates;
}

void append(std::vector<CommitDate>& into, std::vector<CommitDate> more) {
    into.insert(into.end(), more.begin(), more.end());
}

// Independent oracle: enumerate every pair of consecutive calendar years.
std::uint64_t brute_force_window(const std::vector<CommitDate>& dates) {
    std::uint64_t best = 0;
    for (int year = 1900; year <= 2100; ++year) {
        std::uint64_t count = 0;
        for (const auto& d : dates)
            if (d.year == year || d.year == year + 1) ++count;
        best = std::max(best, count);
    }
    return best;
}

}  // namespace

TEST_CASE("classify_language follows the extension table") {
    CHECK(classify_language("src/main.c") == Language::C);
    CHECK(classify_language("lib/util.JS") == Language::JavaScript);
    CHECK(classify_language("README.md") == std::nullopt);

    CHECK(classify_language("a.h") == Language::C);
    CHECK(classify_language("a.cpp") == Language::Cpp);
    CHECK(classify_language("a.cc") == Language::Cpp);
    CHECK(classify_language("a.cxx") == Language::Cpp);
    CHECK(classify_language("a.hpp") == Language::Cpp);
    CHECK(classify_language("a.hh") == Language::Cpp);
    CHECK(classify_language("a.HXX") == Language::Cpp);
    CHECK(classify_language("a.java") == Language::Java);
    CHECK(classify_language("a.py") == Language::Python);
    CHECK(classify_language("a.php") == Language::Php);
    CHECK(classify_language("a.rb") == Language::Ruby);
    CHECK(classify_language("noext") == std::nullopt);
    CHECK(classify_language("dir.d/noext") == std::nullopt);
    CHECK(classify_language("x.c.txt") == std::nullopt);
}

TEST_CASE("filter_active_repos applies both activity thresholds") {
    auto repo = [](std::string name, std::vector<CommitDate> dates) {
        RepoRef r;
        r.name = std::move(name);
        r.commit_dates = std::move(dates);
        return r;
    };

    SUBCASE("501 commits with an active two-year window is kept") {
        std::vector<CommitDate> dates = dates_in_year(2015, 60);
        append(dates, dates_in_year(2016, 60));
        append(dates, dates_in_year(2010, 381));
        REQUIRE(dates.size() == 501);
        auto kept = filter_active_repos({repo("a", dates)});
        CHECK(kept.size() == 1);
    }

    SUBCASE("exactly 500 commits is excluded") {
        std::vector<CommitDate> dates = dates_in_year(2015, 250);
        append(dates, dates_in_year(2016, 250));
        auto kept = filter_active_repos({repo("a", dates)});
        CHECK(kept.empty());
    }

    SUBCASE("600 commits spread 30 per year over 20 years is excluded") {
        std::vector<CommitDate> dates;
        for (int year = 2000; year < 2020; ++year) append(dates, dates_in_year(year, 30));
        REQUIRE(dates.size() == 600);
        CHECK(brute_force_window(dates) == 60);
        CHECK(best_two_year_window(dates) == 60);
        auto kept = filter_active_repos({repo("a", dates)});
        CHECK(kept.empty());
    }

    SUBCASE("missing metadata rejects with a warning, not an error") {
        RepoRef bare;
        bare.name = "nometa";
        auto kept = filter_active_repos({bare});
        CHECK(kept.empty());
    }

    SUBCASE("empty input throws") {
        CHECK_THROWS_AS(filter_active_repos({}), EmptyCorpus);
    }
}

TEST_CASE("best_two_year_window matches a brute-force enumeration") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        std::vector<CommitDate> dates;
        const int n = static_cast<int>(rng() % 300);
        for (int i = 0; i < n; ++i)
            dates.push_back({2000 + static_cast<int>(rng() % 25),
                             1 + static_cast<int>(rng() % 12),
                             1 + static_cast<int>(rng() % 28)});
        CHECK(best_two_year_window(dates) == brute_force_window(dates));
    }
}

TEST_CASE("filter_active_repos is idempotent") {
    std::mt19937_64 rng(11);
    std::vector<RepoRef> repos;
    for (int i = 0; i < 20; ++i) {
        RepoRef r;
        r.name = "repo" + std::to_string(i);
        std::vector<CommitDate> dates;
        const int n = static_cast<int>(rng() % 1200);
        for (int j = 0; j < n; ++j)
            dates.push_back({2010 + static_cast<int>(rng() % 6), 1, 1});
        r.commit_dates = dates;
        repos.push_back(r);
    }
    auto once = filter_active_repos(repos);
    if (!once.empty()) {
        auto twice = filter_active_repos(once);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].name == twice[i].name);
    }
}

TEST_CASE("walk_corpus yields classifiable files in deterministic order") {
    TempDir tmp;

    SUBCASE("files sorted by rel_path") {
        write_file(tmp.path / "repo" / "b.c", "int b;\n");
        write_file(tmp.path / "repo" / "a.c", "int a;\n");
        RepoRef repo{tmp.path / "repo", "repo", std::nullopt};
        auto files = walk_corpus({repo});
        REQUIRE(files.size() == 2);
        CHECK(files[0].rel_path == "a.c");
        CHECK(files[1].rel_path == "b.c");
        CHECK(files[0].language == Language::C);
    }

    SUBCASE("non-source files are skipped") {
        write_file(tmp.path / "repo" / "img.png", "PNG");
        RepoRef repo{tmp.path / "repo", "repo", std::nullopt};
        CHECK(walk_corpus({repo}).empty());
    }

    SUBCASE("repos ordered by name") {
        write_file(tmp.path / "beta" / "x.py", "pass\n");
        write_file(tmp.path / "alpha" / "y.py", "pass\n");
        RepoRef beta{tmp.path / "beta", "beta", std::nullopt};
        RepoRef alpha{tmp.path / "alpha", "alpha", std::nullopt};
        auto files = walk_corpus({beta, alpha});
        REQUIRE(files.size() == 2);
        CHECK(files[0].repo == "alpha");
        CHECK(files[1].repo == "beta");
    }

    SUBCASE("size cap and symlinks are honored") {
        write_file(tmp.path / "repo" / "big.c", std::string(2048, 'x'));
        write_file(tmp.path / "repo" / "ok.c", "int x;\n");
        std::error_code ec;
        fs::create_symlink(tmp.path / "repo" / "ok.c", tmp.path / "repo" / "link.c", ec);
        WalkOptions options;
        options.max_file_size = 1024;
        RepoRef repo{tmp.path / "repo", "repo", std::nullopt};
        auto files = walk_corpus({repo}, options);
        REQUIRE(files.size() == 1);
        CHECK(files[0].rel_path == "ok.c");
    }

    SUBCASE("re-running yields an identical sequence") {
        write_file(tmp.path / "r" / "src" / "a.cpp", "//\n");
        write_file(tmp.path / "r" / "src" / "z.rb", "#\n");
        write_file(tmp.path / "r" / "main.js", "//\n");
        RepoRef repo{tmp.path / "r", "r", std::nullopt};
        auto first = walk_corpus({repo});
        auto second = walk_corpus({repo});
        REQUIRE(first.size() == second.size());
        for (std::size_t i = 0; i < first.size(); ++i)
            CHECK(first[i].rel_path == second[i].rel_path);
    }

    SUBCASE("every yielded file matches classify_language") {
        write_file(tmp.path / "m" / "a.c", "x");
        write_file(tmp.path / "m" / "b.PY", "x");
        write_file(tmp.path / "m" / "c.txt", "x");
        RepoRef repo{tmp.path / "m", "m", std::nullopt};
        for (const auto& file : walk_corpus({repo}))
            CHECK(classify_language(file.rel_path) == file.language);
    }
}

TEST_CASE("commit sidecar parsing") {
    TempDir tmp;

    SUBCASE("valid sidecar") {
        write_file(tmp.path / "repo" / "commits.jsonl",
                   "{\"date\":\"2015-03-04\"}\n{\"date\":\"2016-11-30\"}\n");
        auto dates = load_commit_dates(tmp.path / "repo");
        REQUIRE(dates.has_value());
        REQUIRE(dates->size() == 2);
        CHECK((*dates)[0].year == 2015);
        CHECK((*dates)[1].month == 11);
    }

    SUBCASE("absent sidecar returns nothing") {
        fs::create_directories(tmp.path / "bare");
        CHECK_FALSE(load_commit_dates(tmp.path / "bare").has_value());
    }

    SUBCASE("malformed dates throw ParseError") {
        write_file(tmp.path / "bad" / "commits.jsonl", "{\"date\":\"20150304\"}\n");
        CHECK_THROWS_AS(load_commit_dates(tmp.path / "bad"), ParseError);
    }

    SUBCASE("discover_repos picks up sidecars") {
        write_file(tmp.path / "one" / "commits.jsonl", "{\"date\":\"2019-01-01\"}\n");
        write_file(tmp.path / "two" / "main.c", "int x;\n");
        auto repos = discover_repos(tmp.path);
        REQUIRE(repos.size() == 2);
        CHECK(repos[0].name == "one");
        CHECK(repos[0].commit_dates.has_value());
        CHECK_FALSE(repos[1].commit_dates.has_value());
    }
}
