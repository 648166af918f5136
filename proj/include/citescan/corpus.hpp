#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citescan/types.hpp"

namespace citescan {

struct CommitDate {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const CommitDate&) const = default;
};

// One cloned repository on disk. commit_dates comes from the optional
// commits.jsonl sidecar and is required only by the activity filter.
struct RepoRef {
    std::filesystem::path root;
    std::string name;
    std::optional<std::vector<CommitDate>> commit_dates;
};

struct SourceFile {
    std::string repo;
    std::string rel_path;  // forward slashes, relative to the repo root
    Language language;
    std::filesystem::path abs_path;
};

// Maps a path to a language by file extension (case-insensitive).
// Unknown extensions are not an error; they are simply not source files.
std::optional<Language> classify_language(std::string_view rel_path);

// Parses the commits.jsonl sidecar under `repo_root`, one {"date":"YYYY-MM-DD"}
// object per line. Returns nothing if the sidecar is absent.
std::optional<std::vector<CommitDate>> load_commit_dates(
    const std::filesystem::path& repo_root);

// Builds a RepoRef for every direct subdirectory of `corpus_root`, picking up
// commit sidecars where present.
std::vector<RepoRef> discover_repos(const std::filesystem::path& corpus_root);

// Keeps repos with > 500 total commits and >= 100 commits in the best window
// of two consecutive calendar years. Repos without commit metadata are
// rejected with a warning. Throws EmptyCorpus on empty input.
struct ActivityThresholds {
    std::uint64_t min_total_commits = 500;  // strictly more than this
    std::uint64_t min_window_commits = 100; // at least this many in two years
};

std::vector<RepoRef> filter_active_repos(std::vector<RepoRef> repos,
                                         const ActivityThresholds& thresholds = {});

// Commits in the best window of two consecutive calendar years.
std::uint64_t best_two_year_window(const std::vector<CommitDate>& dates);

struct WalkOptions {
    std::uintmax_t max_file_size = 4u << 20;  // bytes
    bool follow_symlinks = false;             // kept for clarity; always false
};

// Yields every classifiable file, repos ordered by name and files by rel_path
// (lexicographic byte order). Unreadable files are logged and skipped.
void walk_corpus(const std::vector<RepoRef>& repos,
                 const std::function<void(const SourceFile&)>& sink,
                 const WalkOptions& options = {});

std::vector<SourceFile> walk_corpus(const std::vector<RepoRef>& repos,
                                    const WalkOptions& options = {});

}  // namespace citescan
