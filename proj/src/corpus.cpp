#include "citescan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <system_error>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "citescan/errors.hpp"

namespace citescan {

namespace {

const std::unordered_map<std::string, Language>& extension_table() {
    static const std::unordered_map<std::string, Language> table = {
        {".c", Language::C},      {".h", Language::C},
        {".cpp", Language::Cpp},  {".cc", Language::Cpp},
        {".cxx", Language::Cpp},  {".hpp", Language::Cpp},
        {".hh", Language::Cpp},   {".hxx", Language::Cpp},
        {".java", Language::Java},
        {".js", Language::JavaScript},
        {".py", Language::Python},
        {".php", Language::Php},
        {".rb", Language::Ruby},
    };
    return table;
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<Language> classify_language(std::string_view rel_path) {
    const std::size_t dot = rel_path.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    const std::size_t slash = rel_path.find_last_of('/');
    if (slash != std::string_view::npos && dot < slash) return std::nullopt;
    const auto& table = extension_table();
    const auto it = table.find(lowercase(rel_path.substr(dot)));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::optional<std::vector<CommitDate>> load_commit_dates(
    const std::filesystem::path& repo_root) {
    const auto sidecar = repo_root / "commits.jsonl";
    std::ifstream in(sidecar);
    if (!in) return std::nullopt;

    std::vector<CommitDate> dates;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(sidecar.string() + ":" + std::to_string(line_no) +
                             ": " + e.what());
        }
        const std::string date = obj.value("date", "");
        CommitDate parsed;
        if (date.size() != 10 || date[4] != '-' || date[7] != '-' ||
            std::sscanf(date.c_str(), "%4d-%2d-%2d", &parsed.year, &parsed.month,
                        &parsed.day) != 3)
            throw ParseError(sidecar.string() + ":" + std::to_string(line_no) +
                             ": bad date \"" + date + "\"");
        dates.push_back(parsed);
    }
    return dates;
}

std::vector<RepoRef> discover_repos(const std::filesystem::path& corpus_root) {
    std::vector<RepoRef> repos;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(corpus_root, ec)) {
        if (!entry.is_directory()) continue;
        RepoRef repo;
        repo.root = entry.path();
        repo.name = entry.path().filename().string();
        repo.commit_dates = load_commit_dates(repo.root);
        repos.push_back(std::move(repo));
    }
    if (ec) throw IoError("cannot read corpus root " + corpus_root.string() + ": " + ec.message());
    std::sort(repos.begin(), repos.end(),
              [](const RepoRef& a, const RepoRef& b) { return a.name < b.name; });
    return repos;
}

std::uint64_t best_two_year_window(const std::vector<CommitDate>& dates) {
    std::map<int, std::uint64_t> per_year;
    for (const CommitDate& d : dates) ++per_year[d.year];
    std::uint64_t best = 0;
    for (const auto& [year, count] : per_year) {
        std::uint64_t window = count;
        const auto next = per_year.find(year + 1);
        if (next != per_year.end()) window += next->second;
        best = std::max(best, window);
    }
    return best;
}

std::vector<RepoRef> filter_active_repos(std::vector<RepoRef> repos,
                                         const ActivityThresholds& thresholds) {
    if (repos.empty()) throw EmptyCorpus("filter_active_repos: no repositories given");
    std::vector<RepoRef> kept;
    for (auto& repo : repos) {
        if (!repo.commit_dates) {
            log_warn("repo " + repo.name + " has no commit metadata; rejected");
            continue;
        }
        const auto& dates = *repo.commit_dates;
        if (dates.size() <= thresholds.min_total_commits) continue;
        if (best_two_year_window(dates) < thresholds.min_window_commits) continue;
        kept.push_back(std::move(repo));
    }
    return kept;
}

namespace {

void collect_files(const RepoRef& repo, const WalkOptions& options,
                   std::vector<SourceFile>& out) {
    namespace fs = std::filesystem;
    std::error_code ec;
    auto it = fs::recursive_directory_iterator(
        repo.root, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
        log_warn("cannot walk " + repo.root.string() + ": " + ec.message());
        return;
    }
    for (auto end = fs::recursive_directory_iterator(); it != end;
         it.increment(ec)) {
        if (ec) {
            log_warn("walk error under " + repo.root.string() + ": " + ec.message());
            ec.clear();
            continue;
        }
        const auto& entry = *it;
        if (entry.is_symlink(ec)) {
            if (entry.is_directory(ec)) it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(ec)) continue;

        const std::string rel =
            entry.path().lexically_relative(repo.root).generic_string();
        const auto language = classify_language(rel);
        if (!language) continue;

        const auto size = entry.file_size(ec);
        if (ec) {
            log_warn("cannot stat " + entry.path().string() + ": " + ec.message());
            ec.clear();
            continue;
        }
        if (size > options.max_file_size) continue;

        out.push_back(SourceFile{repo.name, rel, *language, entry.path()});
    }
}

}  // namespace

void walk_corpus(const std::vector<RepoRef>& repos,
                 const std::function<void(const SourceFile&)>& sink,
                 const WalkOptions& options) {
    if (repos.empty()) throw EmptyCorpus("walk_corpus: no repositories given");
    std::vector<const RepoRef*> ordered;
    ordered.reserve(repos.size());
    for (const auto& repo : repos) ordered.push_back(&repo);
    std::sort(ordered.begin(), ordered.end(),
              [](const RepoRef* a, const RepoRef* b) { return a->name < b->name; });

    for (const RepoRef* repo : ordered) {
        std::vector<SourceFile> files;
        collect_files(*repo, options, files);
        std::sort(files.begin(), files.end(),
                  [](const SourceFile& a, const SourceFile& b) {
                      return a.rel_path < b.rel_path;
                  });
        for (const auto& file : files) sink(file);
    }
}

std::vector<SourceFile> walk_corpus(const std::vector<RepoRef>& repos,
                                    const WalkOptions& options) {
    std::vector<SourceFile> out;
    walk_corpus(repos, [&out](const SourceFile& f) { out.push_back(f); }, options);
    return out;
}

}  // namespace citescan
