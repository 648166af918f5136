// citescan: detect and analyze academic publication citations in source
// code comments. One subcommand per pipeline stage; every stage reads and
// writes plain JSONL/CSV so runs can be inspected and restarted.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "citescan/comment_extract.hpp"
#include "citescan/corpus.hpp"
#include "citescan/dataset.hpp"
#include "citescan/detect.hpp"
#include "citescan/errors.hpp"
#include "citescan/eval.hpp"
#include "citescan/ner.hpp"
#include "citescan/report.hpp"

#include <nlohmann/json.hpp>

namespace {

using namespace citescan;

// Writes either to a file or to stdout.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<RepoRef> gather_repos(const std::vector<std::string>& roots,
                                  bool filter_active) {
    std::vector<RepoRef> repos;
    for (const auto& root : roots) {
        auto found = discover_repos(root);
        repos.insert(repos.end(), std::make_move_iterator(found.begin()),
                     std::make_move_iterator(found.end()));
    }
    if (repos.empty()) throw EmptyCorpus("no repositories under the given roots");
    if (filter_active) repos = filter_active_repos(std::move(repos));
    return repos;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_label_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) labels.push_back(line);
    }
    return labels;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
    std::vector<std::string> roots;
    bool filter_active = false;
    std::uint64_t max_file_size = 4u << 20;
    std::string out;
};

int run_scan(const ScanArgs& args) {
    const auto repos = gather_repos(args.roots, args.filter_active);
    WalkOptions options;
    options.max_file_size = args.max_file_size;
    OutputTarget out(args.out);
    std::uint64_t count = 0;
    walk_corpus(repos,
                [&](const SourceFile& file) {
                    nlohmann::json obj;
                    obj["repo"] = file.repo;
                    obj["path"] = file.rel_path;
                    obj["lang"] = std::string(to_string(file.language));
                    out.stream() << obj.dump() << '\n';
                    ++count;
                },
                options);
    log_info("scan: " + std::to_string(repos.size()) + " repos, " +
             std::to_string(count) + " source files");
    return 0;
}

struct ExtractArgs {
    std::vector<std::string> roots;
    bool filter_active = false;
    std::uint64_t max_file_size = 4u << 20;
    int jobs = 1;
    std::string out;
};

int run_extract(const ExtractArgs& args) {
    const auto repos = gather_repos(args.roots, args.filter_active);
    WalkOptions options;
    options.max_file_size = args.max_file_size;
    const auto files = walk_corpus(repos, options);

    const int jobs = std::max(1, args.jobs);
    std::vector<DedupAccumulator> partial(static_cast<std::size_t>(jobs));

    auto process = [&](std::size_t file_index, DedupAccumulator& acc) {
        const SourceFile& file = files[file_index];
        std::string content;
        try {
            content = read_file(file.abs_path);
        } catch (const IoError& e) {
            log_warn(e.what());
            return;
        }
        for (const Comment& comment : extract_comments(content, file.language)) {
            std::string normalized = normalize(comment.raw_text);
            if (normalized.empty()) continue;
            acc.add(file.language, std::move(normalized),
                    Provenance{file.repo, file.rel_path, comment.start_line});
        }
    };

    if (jobs == 1) {
        for (std::size_t i = 0; i < files.size(); ++i) process(i, partial[0]);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < files.size();
                     i += static_cast<std::size_t>(jobs))
                    process(i, partial[static_cast<std::size_t>(w)]);
            });
        }
        for (auto& t : pool) t.join();
    }

    DedupAccumulator all;
    std::uint64_t extracted = 0;
    for (auto& acc : partial) {
        extracted += acc.input_count();
        all.merge(std::move(acc));
    }
    const auto comments = all.finish();

    OutputTarget out(args.out);
    write_comments_jsonl(out.stream(), comments);
    log_info("extract: " + std::to_string(files.size()) + " files, " +
             std::to_string(extracted) + " comments, " +
             std::to_string(comments.size()) + " distinct");
    return 0;
}

struct TrainArgs {
    std::string gold;
    std::string lexicons;
    int epochs = 10;
    std::uint64_t seed = 42;
    std::string out;
};

int run_train(const TrainArgs& args) {
    const auto gold = load_annotations(args.gold);
    const auto lexicons = LexiconSet::load_dir(args.lexicons);
    const TaggerModel model = train(gold, args.epochs, args.seed, lexicons);
    model.save(args.out);
    log_info("train: " + std::to_string(gold.size()) + " comments, " +
             std::to_string(model.weights().size()) + " features -> " + args.out);
    return 0;
}

struct TagArgs {
    std::string model;
    std::string in;
    bool no_rules = false;
    std::string out;
};

int run_tag(const TagArgs& args) {
    const TaggerModel model = TaggerModel::load(args.model);
    const auto comments = load_comments_jsonl(args.in);
    OutputTarget out(args.out);
    for (const auto& comment : comments) {
        const auto spans = args.no_rules ? tag(model, comment.text)
                                         : tag_with_rules(model, comment.text);
        nlohmann::json obj;
        obj["lang"] = std::string(to_string(comment.language));
        obj["text"] = comment.text;
        auto entities = nlohmann::json::array();
        for (const auto& span : spans)
            entities.push_back(
                {{"start", span.begin},
                 {"end", span.end},
                 {"type", std::string(to_string(span.type))},
                 {"source", span.source == SpanSource::Model ? "model" : "rule"}});
        obj["entities"] = std::move(entities);
        out.stream() << obj.dump() << '\n';
    }
    return 0;
}

struct DetectArgs {
    std::string model;
    std::string in;
    int max_gap = 10;
    std::string require = "author,title,year,booktitle_or_journal";
    bool no_rules = false;
    int jobs = 1;
    std::string out;
    std::string bibtex;
};

int run_detect(const DetectArgs& args) {
    const TaggerModel model = TaggerModel::load(args.model);
    const auto comments = load_comments_jsonl(args.in);

    DetectionCriterion criterion;
    criterion.required_types = EntityTypeSet::parse(args.require);
    if (criterion.required_types.empty())
        throw DataError("--require lists no entity types");
    criterion.max_gap = args.max_gap;

    const auto detections =
        run_detection(comments, model, criterion, !args.no_rules, args.jobs);

    OutputTarget out(args.out);
    write_detections_jsonl(out.stream(), detections);

    if (!args.bibtex.empty()) {
        std::ofstream bib(args.bibtex, std::ios::binary);
        if (!bib) throw IoError("cannot write " + args.bibtex);
        BibtexExporter exporter;
        for (const auto& detection : detections)
            for (const auto& record : detection.records)
                bib << exporter.entry(record) << '\n';
    }
    log_info("detect: " + std::to_string(detections.size()) + " of " +
             std::to_string(comments.size()) + " comments matched");
    return 0;
}

struct EvaluateArgs {
    std::string gold;
    std::string lexicons;
    int k = 10;
    std::uint64_t seed = 42;
    int epochs = 10;
    int max_gap = 10;
    bool no_rules = false;
    int jobs = 1;
    bool baseline = false;
    std::string out;
    std::string entity_csv;
};

int run_evaluate(const EvaluateArgs& args) {
    const auto gold = load_annotations(args.gold);
    const auto lexicons = LexiconSet::load_dir(args.lexicons);

    CrossValidateOptions options;
    options.k = args.k;
    options.seed = args.seed;
    options.epochs = args.epochs;
    options.max_gap = args.max_gap;
    options.use_rules = !args.no_rules;
    options.jobs = args.jobs;

    const auto result = cross_validate(gold, default_combos(), lexicons, options);

    OutputTarget out(args.out);
    write_combo_metrics_csv(out.stream(), result.per_combo, args.max_gap);

    if (!args.entity_csv.empty()) {
        std::ofstream entity_out(args.entity_csv, std::ios::binary);
        if (!entity_out) throw IoError("cannot write " + args.entity_csv);
        write_entity_accuracy_csv(entity_out, entity_accuracy(gold, result.predictions));
    }

    if (args.baseline) {
        DetectionCriterion criterion;
        criterion.max_gap = args.max_gap;
        const auto cmp = compare_with_baseline(gold, result.predictions, criterion);
        std::cerr << "baseline_overlap " << cmp.overlap_fraction << " (" << cmp.both
                  << " of " << cmp.ner_detections
                  << " pipeline detections also found by the pattern baseline)\n";
    }
    return 0;
}

struct SweepArgs {
    std::string gold;
    std::string lexicons;
    int epochs = 10;
    std::uint64_t seed = 42;
    int gap_from = 3;
    int gap_to = 10;
    std::string combo = "author,title,year,booktitle_or_journal";
    bool no_rules = false;
    std::string out;
};

int run_sweep(const SweepArgs& args) {
    if (args.gap_from > args.gap_to) throw DataError("--from exceeds --to");
    const auto gold = load_annotations(args.gold);
    const auto lexicons = LexiconSet::load_dir(args.lexicons);
    const TaggerModel model = train(gold, args.epochs, args.seed, lexicons);

    std::vector<int> gaps;
    for (int gap = args.gap_from; gap <= args.gap_to; ++gap) gaps.push_back(gap);
    const EntityTypeSet combo = EntityTypeSet::parse(args.combo);
    const auto curve = sensitivity_sweep(gold, model, combo, gaps, !args.no_rules);

    OutputTarget out(args.out);
    write_sweep_csv(out.stream(), combo, curve);

    const auto best = std::max_element(
        curve.begin(), curve.end(), [](const SweepPoint& a, const SweepPoint& b) {
            return a.metrics.f1 < b.metrics.f1;
        });
    if (best != curve.end())
        std::cerr << "best_f1 " << best->metrics.f1 << " at max_gap " << best->max_gap
                  << '\n';
    return 0;
}

struct SampleArgs {
    std::uint64_t population = 0;
    double confidence = 0.95;
    double interval = 5.0;
    std::string in;
    std::string keyword;
    std::string groups;
    std::uint64_t seed = 42;
    std::string out_a;
    std::string out_b;
};

double z_for_confidence(double confidence) {
    if (confidence == 0.90) return 1.645;
    if (confidence == 0.95) return 1.96;
    if (confidence == 0.99) return 2.576;
    throw DataError("unsupported confidence level (use 0.90, 0.95 or 0.99)");
}

int run_sample(const SampleArgs& args) {
    SampleSpec spec;
    spec.confidence = args.confidence;
    spec.interval = args.interval;
    spec.z = z_for_confidence(args.confidence);

    if (args.in.empty()) {
        if (args.population == 0) throw DataError("--population or --in is required");
        std::cout << sample_size(args.population, spec) << '\n';
        return 0;
    }

    if (args.keyword.empty()) throw DataError("--keyword is required with --in");
    auto comments = load_comments_jsonl(args.in);
    const std::string needle = lowercase(args.keyword);
    std::erase_if(comments, [&](const NormalizedComment& c) {
        return lowercase(c.text).find(needle) == std::string::npos;
    });

    KeywordGroupConfig config;
    config.keyword = needle;
    if (!args.groups.empty()) {
        for (auto& candidate : load_group_configs(args.groups))
            if (candidate.keyword == needle) config = std::move(candidate);
    }
    const GroupSplit split = group_comments(comments, config);
    const std::uint64_t need_a = sample_size(split.group_a.size(), spec);
    const std::uint64_t need_b = sample_size(split.group_b.size(), spec);
    std::cout << "keyword " << needle << ": " << comments.size()
              << " comments, group_a " << split.group_a.size() << " (sample " << need_a
              << "), group_b " << split.group_b.size() << " (sample " << need_b << ")\n";

    if (!args.out_a.empty())
        save_comments_jsonl(args.out_a, draw_sample(split.group_a, need_a, args.seed));
    if (!args.out_b.empty())
        save_comments_jsonl(args.out_b, draw_sample(split.group_b, need_b, args.seed));
    return 0;
}

struct ReportArgs {
    std::string in;
    std::string format = "md";
    std::uint64_t title_min = 1;
    std::uint64_t venue_min = 1;
    std::string out;
};

int run_report(const ReportArgs& args) {
    const auto detections = load_detections_jsonl(args.in);
    ReportOptions options;
    options.title_min_count = args.title_min;
    options.venue_min_count = args.venue_min;
    const std::string format = lowercase(args.format);
    if (format == "csv") options.format = ReportFormat::Csv;
    else if (format == "md") options.format = ReportFormat::Markdown;
    else if (format == "json") options.format = ReportFormat::Json;
    else throw DataError("unknown --format " + args.format);

    OutputTarget out(args.out);
    write_report(out.stream(), detections, options);
    return 0;
}

struct SearchArgs {
    std::string in;
    std::string query;
    bool variants = false;
};

int run_search(const SearchArgs& args) {
    const auto comments = load_comments_jsonl(args.in);
    const auto result = search_title(comments, args.query);
    std::cout << "total " << result.total_matches << "\ndistinct "
              << result.distinct_matches << '\n';
    if (args.variants)
        for (const auto& text : result.variants) std::cout << "variant " << text << '\n';
    return 0;
}

struct KappaArgs {
    std::string a;
    std::string b;
    double threshold = 0.75;
};

int run_kappa(const KappaArgs& args) {
    const auto labels_a = read_label_lines(args.a);
    const auto labels_b = read_label_lines(args.b);
    const double kappa = cohen_kappa(labels_a, labels_b);
    std::cout << "kappa " << kappa << '\n';
    if (kappa <= args.threshold)
        std::cout << "FLAG agreement at or below the " << args.threshold
                  << " threshold; labels need reconciliation\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citescan: publication citations in source code comments"};
    app.require_subcommand(1);
    app.set_config("--config")->description("TOML config; flags override it");

    ScanArgs scan_args;
    auto* scan = app.add_subcommand("scan", "list classifiable source files");
    scan->add_option("--root", scan_args.roots, "corpus root (directory of repos)")
        ->required()
        ->check(CLI::ExistingDirectory);
    scan->add_flag("--filter-active", scan_args.filter_active,
                   "keep only repos passing the activity thresholds");
    scan->add_option("--max-file-size", scan_args.max_file_size, "per-file byte cap");
    scan->add_option("--out", scan_args.out, "output file (default stdout)");

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "extract, normalize and dedup comments");
    extract->add_option("--root", extract_args.roots, "corpus root (directory of repos)")
        ->required()
        ->check(CLI::ExistingDirectory);
    extract->add_flag("--filter-active", extract_args.filter_active,
                      "keep only repos passing the activity thresholds");
    extract->add_option("--max-file-size", extract_args.max_file_size,
                        "per-file byte cap");
    extract->add_option("--jobs", extract_args.jobs, "worker threads")
        ->check(CLI::Range(1, 256));
    extract->add_option("--out", extract_args.out, "comments JSONL (default stdout)");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the entity tagger");
    train_cmd->add_option("--gold", train_args.gold, "annotated comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--lexicons", train_args.lexicons, "lexicon directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    train_cmd->add_option("--epochs", train_args.epochs, "training passes")
        ->check(CLI::Range(1, 1000));
    train_cmd->add_option("--seed", train_args.seed, "shuffle seed");
    train_cmd->add_option("--out", train_args.out, "model file")->required();

    TagArgs tag_args;
    auto* tag_cmd = app.add_subcommand("tag", "tag comments with entity spans");
    tag_cmd->add_option("--model", tag_args.model, "model file")
        ->required()
        ->check(CLI::ExistingFile);
    tag_cmd->add_option("--in", tag_args.in, "comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    tag_cmd->add_flag("--no-rules", tag_args.no_rules, "disable the rule tagger merge");
    tag_cmd->add_option("--out", tag_args.out, "tagged JSONL (default stdout)");

    DetectArgs detect_args;
    auto* detect_cmd = app.add_subcommand("detect", "apply the detection criterion");
    detect_cmd->add_option("--model", detect_args.model, "model file")
        ->required()
        ->check(CLI::ExistingFile);
    detect_cmd->add_option("--in", detect_args.in, "comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    detect_cmd
        ->add_option("--max-gap", detect_args.max_gap,
                     "largest allowed gap between entities")
        ->check(CLI::Range(0, 1 << 20));
    detect_cmd->add_option("--require", detect_args.require,
                           "comma-separated required entity types");
    detect_cmd->add_flag("--no-rules", detect_args.no_rules,
                         "disable the rule tagger merge");
    detect_cmd->add_option("--jobs", detect_args.jobs, "worker threads")
        ->check(CLI::Range(1, 256));
    detect_cmd->add_option("--out", detect_args.out, "detections JSONL (default stdout)");
    detect_cmd->add_option("--bibtex", detect_args.bibtex, "also export BibTeX here");

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation of detection");
    evaluate->add_option("--gold", evaluate_args.gold, "annotated comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--lexicons", evaluate_args.lexicons, "lexicon directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    evaluate->add_option("--k", evaluate_args.k, "folds")->check(CLI::Range(2, 100));
    evaluate->add_option("--seed", evaluate_args.seed, "fold/shuffle seed");
    evaluate->add_option("--epochs", evaluate_args.epochs, "training passes")
        ->check(CLI::Range(1, 1000));
    evaluate->add_option("--max-gap", evaluate_args.max_gap, "gap threshold")
        ->check(CLI::Range(0, 1 << 20));
    evaluate->add_flag("--no-rules", evaluate_args.no_rules,
                       "disable the rule tagger merge");
    evaluate->add_option("--jobs", evaluate_args.jobs, "parallel folds")
        ->check(CLI::Range(1, 100));
    evaluate->add_flag("--baseline", evaluate_args.baseline,
                       "also report overlap with the pattern baseline");
    evaluate->add_option("--out", evaluate_args.out, "metrics CSV (default stdout)");
    evaluate->add_option("--entity-csv", evaluate_args.entity_csv,
                         "per-entity accuracy CSV");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "distance-threshold sensitivity analysis");
    sweep->add_option("--gold", sweep_args.gold, "annotated comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--lexicons", sweep_args.lexicons, "lexicon directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    sweep->add_option("--epochs", sweep_args.epochs, "training passes");
    sweep->add_option("--seed", sweep_args.seed, "shuffle seed");
    sweep->add_option("--from", sweep_args.gap_from, "first threshold")
        ->check(CLI::Range(0, 1 << 20));
    sweep->add_option("--to", sweep_args.gap_to, "last threshold")
        ->check(CLI::Range(0, 1 << 20));
    sweep->add_option("--combo", sweep_args.combo, "required entity types");
    sweep->add_flag("--no-rules", sweep_args.no_rules, "disable the rule tagger merge");
    sweep->add_option("--out", sweep_args.out, "curve CSV (default stdout)");

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "sample sizing and group splitting");
    sample->add_option("--population", sample_args.population, "population size");
    sample->add_option("--confidence", sample_args.confidence, "confidence level");
    sample->add_option("--interval", sample_args.interval,
                       "confidence interval (points)");
    sample->add_option("--in", sample_args.in, "comments JSONL to group and sample")
        ->check(CLI::ExistingFile);
    sample->add_option("--keyword", sample_args.keyword, "keyword filter, e.g. acm");
    sample->add_option("--groups", sample_args.groups, "group config JSON")
        ->check(CLI::ExistingFile);
    sample->add_option("--seed", sample_args.seed, "sampling seed");
    sample->add_option("--out-a", sample_args.out_a, "write the group A sample here");
    sample->add_option("--out-b", sample_args.out_b, "write the group B sample here");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "analytics over detection output");
    report->add_option("--in", report_args.in, "detections JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--format", report_args.format, "csv|md|json");
    report->add_option("--min-title-count", report_args.title_min, "title cutoff");
    report->add_option("--min-venue-count", report_args.venue_min, "venue cutoff");
    report->add_option("--out", report_args.out, "output file (default stdout)");

    SearchArgs search_args;
    auto* search = app.add_subcommand("search", "substring search over comments");
    search->add_option("--in", search_args.in, "comments JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    search->add_option("--query", search_args.query, "search text")->required();
    search->add_flag("--variants", search_args.variants, "print the distinct variants");

    KappaArgs kappa_args;
    auto* kappa = app.add_subcommand("kappa", "inter-rater agreement between label files");
    kappa->add_option("--a", kappa_args.a, "labels, one per line")
        ->required()
        ->check(CLI::ExistingFile);
    kappa->add_option("--b", kappa_args.b, "labels, one per line")
        ->required()
        ->check(CLI::ExistingFile);
    kappa->add_option("--threshold", kappa_args.threshold, "flagging threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (scan->parsed()) return run_scan(scan_args);
        if (extract->parsed()) return run_extract(extract_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (tag_cmd->parsed()) return run_tag(tag_args);
        if (detect_cmd->parsed()) return run_detect(detect_args);
        if (evaluate->parsed()) return run_evaluate(evaluate_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (sample->parsed()) return run_sample(sample_args);
        if (report->parsed()) return run_report(report_args);
        if (search->parsed()) return run_search(search_args);
        if (kappa->parsed()) return run_kappa(kappa_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
