#include "mathdef/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mathdef/baseline.hpp"
#include "mathdef/corpus.hpp"
#include "mathdef/dataset.hpp"
#include "mathdef/error.hpp"
#include "mathdef/evaluate.hpp"
#include "mathdef/jsonl.hpp"
#include "mathdef/kernels.hpp"
#include "mathdef/kv_config.hpp"
#include "mathdef/latex_clean.hpp"
#include "mathdef/sentencize.hpp"

namespace mathdef::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kEnvPrefix = "MATHDEF_";

std::string env_name(const std::string& option) {
    std::string out = kEnvPrefix;
    for (char c : option) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

/// Registers options on a subcommand and remembers how to read each one back,
/// so the resolved configuration can be logged and replayed.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& name, T& var, const std::string& help) {
        auto* opt = app_->add_option("--" + name, var, help)->envname(env_name(name));
        getters_.emplace_back(name, [&var] { return json(var); });
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
        auto* opt = app_->add_flag("--" + name, var, help)->envname(env_name(name));
        getters_.emplace_back(name, [&var] { return json(var); });
        return opt;
    }

    CLI::App* app() const { return app_; }

    json resolved() const {
        json j = json::object();
        for (const auto& [name, get] : getters_) j[name] = get();
        return j;
    }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<json()>>> getters_;
};

// ---- file formats owned by the CLI ---------------------------------------

json clean_doc_json(const CleanDocument& d) {
    json spans = json::array();
    for (const auto& s : d.math_spans) spans.push_back({s.begin, s.end});
    return {{"id", d.id},
            {"corpus", to_string(d.corpus_tag)},
            {"text", d.cleaned_text},
            {"math_spans", std::move(spans)},
            {"placeholders", d.placeholder_positions}};
}

CleanDocument clean_doc_from_json(const json& row, const std::string& where) {
    CleanDocument d;
    d.id = jsonl::require_string(row, "id", where);
    d.corpus_tag = parse_corpus_tag(jsonl::require_string(row, "corpus", where));
    d.cleaned_text = jsonl::require_string(row, "text", where);
    try {
        d.placeholder_positions = row.value("placeholders", std::vector<std::size_t>{});
    } catch (const json::exception&) {
        throw DataError(where + ": placeholders must be a list of offsets");
    }
    d.math_spans = find_math_spans(d.cleaned_text);
    return d;
}

std::vector<TextRecord> read_text_records(const fs::path& path) {
    std::vector<TextRecord> out;
    const auto rows = jsonl::read_file(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto where = path.string() + " record " + std::to_string(r + 1);
        out.push_back({jsonl::require_string(rows[r], "id", where), jsonl::require_string(rows[r], "text", where)});
    }
    return out;
}

void write_rows(const fs::path& path, const std::vector<json>& rows) {
    jsonl::write_file_atomic(path, jsonl::serialize(rows));
}

// ---- resolved parameters, one struct per subcommand -----------------------

struct Globals {
    std::string config;
    std::string log = "mathdef-repro.jsonl";
};

struct CleanArgs {
    std::string in, tag = "latex_abstracts", glob = "*", out, manifest;
};
struct SentencizeArgs {
    std::string in, out, abbrev, overrides;
};
struct BuildArgs {
    std::string sentences, labels, corpus = "plain", name = "dataset", out;
};
struct StatsArgs {
    std::string in;
    bool as_json = false;
};
struct SplitArgs {
    std::string in, out;
    double val = 0.2;
    std::uint64_t seed = 0;
    bool stratified = false;
};
struct CombineArgs {
    std::vector<std::string> in;
    std::string name = "combined", out;
};
struct OversampleArgs {
    std::string in, out, mode = "minority";
    double target = 0.3;
    std::uint64_t seed = 0;
};
struct AuditArgs {
    std::string in, out;
    std::size_t max_len = 512;
};
struct TrainArgs {
    std::string train, out, trace;
    BaselineConfig cfg;
};
struct PredictArgs {
    std::string model, in, out;
    double threshold = 0.5;
};
struct EvalArgs {
    std::string gold, pred, slices, format = "text", out;
    int decimals = 3;
};
struct ReportArgs {
    std::vector<std::string> in;
    std::string format = "text", out;
    int decimals = 3;
};
struct ReplayArgs {
    std::string log;
    long line = -1;
};

void emit(std::ostream& out, const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        jsonl::write_file_atomic(path, text);
    }
}

// ---- subcommand bodies ------------------------------------------------------

void do_clean(const CleanArgs& a, const KeyValueConfig& kv) {
    const auto tag = parse_corpus_tag(a.tag);
    const auto docs = ingest_dir(a.in, tag, a.glob, [](const std::string& w) { std::cerr << "warning: " << w << '\n'; });
    const auto cfg = CleanConfig::from(kv);
    const auto cleaned = kernels::clean_all(docs, cfg);
    std::vector<json> rows;
    for (const auto& d : cleaned) rows.push_back(clean_doc_json(d));
    write_rows(a.out, rows);
    if (!a.manifest.empty()) {
        std::vector<json> manifest;
        for (const auto& d : docs) manifest.push_back(manifest_entry(d));
        write_rows(a.manifest, manifest);
    }
}

void do_sentencize(const SentencizeArgs& a) {
    SentencizeOptions opts;
    if (!a.abbrev.empty()) opts.abbreviations = load_abbreviations(a.abbrev);
    if (!a.overrides.empty()) opts.overrides = load_overrides(a.overrides);
    std::vector<CleanDocument> docs;
    const auto rows = jsonl::read_file(a.in);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        docs.push_back(clean_doc_from_json(rows[r], a.in + " record " + std::to_string(r + 1)));
    }
    std::vector<json> out;
    for (const auto& sentences : kernels::sentencize_all(docs, opts)) {
        for (const auto& s : sentences) out.push_back(to_json(s));
    }
    write_rows(a.out, out);
}

void do_build(const BuildArgs& a) {
    const auto records = read_text_records(a.sentences);
    const auto labels = read_annotations(a.labels);
    const auto d = attach_labels(std::span<const TextRecord>(records), labels, a.corpus, a.name);
    jsonl::write_file_atomic(a.out, dataset_to_jsonl(d));
}

void do_stats(const StatsArgs& a, std::ostream& out) {
    const auto d = read_dataset(a.in);
    const auto dens = density(d);
    const auto text = format_ratio(Ratio{dens.positives, dens.total}, 4);
    if (a.as_json) {
        out << json{{"examples", dens.total}, {"positives", dens.positives}, {"density", dens.value()},
                    {"empty", dens.empty()}}
                   .dump()
            << '\n';
        return;
    }
    out << "examples " << dens.total << '\n'
        << "positives " << dens.positives << '\n'
        << "density " << text << (dens.empty() ? " (empty dataset)" : "") << '\n';
}

void do_split(const SplitArgs& a) {
    const auto d = read_dataset(a.in);
    const auto parts = split(d, a.val, a.seed, a.stratified);
    jsonl::write_file_atomic(a.out + ".train.jsonl", dataset_to_jsonl(parts.train));
    jsonl::write_file_atomic(a.out + ".val.jsonl", dataset_to_jsonl(parts.val));
}

void do_combine(const CombineArgs& a) {
    std::vector<Dataset> parts;
    for (const auto& p : a.in) parts.push_back(read_dataset(p));
    jsonl::write_file_atomic(a.out, dataset_to_jsonl(combine(parts, a.name)));
}

void do_oversample(const OversampleArgs& a) {
    OversampleMode mode;
    if (a.mode == "minority") {
        mode = OversampleMode::minority();
    } else if (a.mode == "target") {
        mode = OversampleMode::to_density(a.target);
    } else {
        throw UsageError("--mode must be minority or target");
    }
    jsonl::write_file_atomic(a.out, dataset_to_jsonl(oversample(read_dataset(a.in), mode, a.seed)));
}

void do_audit(const AuditArgs& a, std::ostream& out) {
    std::vector<json> rows;
    for (const auto& e : length_audit(read_dataset(a.in), a.max_len)) {
        rows.push_back({{"id", e.id}, {"length", e.length}});
    }
    emit(out, jsonl::serialize(rows), a.out);
}

void do_train(const TrainArgs& a, std::ostream& out) {
    const auto result = train(read_dataset(a.train), a.cfg);
    save_model(result.model, a.out);
    json trace = result.loss_trace;
    if (!a.trace.empty()) jsonl::write_file_atomic(a.trace, json{{"loss_trace", trace}}.dump() + "\n");
    out << "loss " << trace.dump() << '\n';
}

void do_predict(const PredictArgs& a) {
    if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
    const auto model = load_model(a.model);
    const auto items = read_text_records(a.in);
    std::vector<json> rows;
    for (const auto& p : predict(model, std::span<const TextRecord>(items), a.threshold)) rows.push_back(to_json(p));
    write_rows(a.out, rows);
}

void do_eval(const EvalArgs& a, std::ostream& out) {
    const auto format = parse_report_format(a.format);
    const auto gold = gold_labels(read_dataset(a.gold));
    const auto preds = read_predictions(a.pred);
    std::vector<EvalReport> reports;
    if (a.slices.empty()) {
        reports.push_back(metrics(confusion(gold, preds)));
    } else {
        reports = slice_report(gold, preds, read_slices(a.slices));
    }
    emit(out, render(reports, format, a.decimals), a.out);
}

void do_report(const ReportArgs& a, std::ostream& out) {
    std::vector<std::pair<std::string, EvalReport>> rows;
    std::vector<EvalReport> flat;
    for (const auto& path : a.in) {
        auto j = json::parse(jsonl::read_text(path), nullptr, false);
        if (j.is_discarded()) throw DataError(path + ": not valid JSON");
        if (!j.is_array()) j = json::array({j});
        const auto stem = fs::path(path).stem().string();
        for (const auto& item : j) {
            auto r = report_from_json(item);
            rows.emplace_back(r.slice ? stem + "/" + *r.slice : stem, r);
            flat.push_back(std::move(r));
        }
    }
    const auto format = parse_report_format(a.format);
    emit(out, format == ReportFormat::text_table ? render_summary(rows, a.decimals) : render(flat, format, a.decimals),
         a.out);
}

// ---- reproducibility log ---------------------------------------------------

void append_log(const std::string& path, const json& entry, std::ostream& err) {
    if (path == "-") {
        err << entry.dump() << '\n';
        return;
    }
    std::ofstream log(path, std::ios::app | std::ios::binary);
    if (!log) throw DataError("cannot open reproducibility log " + path);
    log << entry.dump() << '\n';
}

std::vector<std::string> replay_argv(const json& entry) {
    std::vector<std::string> argv{"mathdef"};
    for (const auto& part : entry.at("subcommand")) argv.push_back(part.get<std::string>());
    for (const auto& [name, value] : entry.at("options").items()) {
        if (value.is_array()) {
            for (const auto& v : value) argv.push_back("--" + name + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
        } else if (value.is_string()) {
            if (!value.get<std::string>().empty()) argv.push_back("--" + name + "=" + value.get<std::string>());
        } else {
            argv.push_back("--" + name + "=" + value.dump());
        }
    }
    return argv;
}

// Pre-scan for --config so its values can be installed before parsing.
std::string find_config_path(const std::vector<std::string>& argv) {
    for (std::size_t i = 1; i < argv.size(); ++i) {
        if (argv[i] == "--config" && i + 1 < argv.size()) return argv[i + 1];
        if (argv[i].rfind("--config=", 0) == 0) return argv[i].substr(9);
    }
    if (const char* env = std::getenv("MATHDEF_CONFIG")) return env;
    return {};
}

void apply_config_defaults(CLI::App& app, const KeyValueConfig& kv) {
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        apply_config_defaults(*sub, kv);
    }
    for (auto* opt : app.get_options()) {
        const auto& name = opt->get_single_name();
        auto value = kv.get(name);
        if (!value || name == "config" || name == "help") continue;
        if (opt->get_expected_max() > 1) {
            if (auto list = kv.get_list(name)) {
                for (const auto& item : *list) opt->add_result(item);
            }
        } else {
            opt->add_result(*value);
        }
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("config key '" + name + "': " + e.what());
        }
        // the value now lives in the bound variable; clearing the result lets
        // env vars and flags still override it
        opt->clear();
    }
}

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err,
             const KeyValueConfig* preset = nullptr) {
    CLI::App app{"Preprocess mathematical LaTeX/Markdown corpora into sentence datasets and evaluate "
                 "definition classifiers.",
                 "mathdef"};
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "key = value config file (flags > env > config > defaults)")
        ->envname("MATHDEF_CONFIG");
    app.add_option("--log", g.log, "reproducibility log (JSONL, appended; '-' for stderr)")->envname("MATHDEF_LOG");

    std::vector<std::unique_ptr<Options>> tables;
    std::vector<std::pair<CLI::App*, std::function<void()>>> actions;
    auto table = [&](CLI::App* sub) {
        tables.push_back(std::make_unique<Options>(sub));
        return tables.back().get();
    };

    KeyValueConfig kv;

    CleanArgs clean_a;
    {
        auto* o = table(app.add_subcommand("clean", "ingest a corpus directory and clean every document"));
        o->add("in", clean_a.in, "corpus root directory")->required();
        o->add("tag", clean_a.tag, "markdown_concepts | latex_abstracts | plain");
        o->add("glob", clean_a.glob, "file pattern");
        o->add("out", clean_a.out, "cleaned documents JSONL")->required();
        o->add("manifest", clean_a.manifest, "optional ingestion manifest JSONL");
        actions.emplace_back(o->app(), [&] { do_clean(clean_a, kv); });
    }
    SentencizeArgs sent_a;
    {
        auto* o = table(app.add_subcommand("sentencize", "split cleaned documents into sentences"));
        o->add("in", sent_a.in, "cleaned documents JSONL")->required();
        o->add("out", sent_a.out, "sentences JSONL")->required();
        o->add("abbrev", sent_a.abbrev, "abbreviation list, one per line");
        o->add("overrides", sent_a.overrides, "manual segmentation overrides JSONL");
        actions.emplace_back(o->app(), [&] { do_sentencize(sent_a); });
    }

    auto* dataset = app.add_subcommand("dataset", "build and transform labeled datasets");
    dataset->require_subcommand(1);
    BuildArgs build_a;
    {
        auto* o = table(dataset->add_subcommand("build", "attach labels to sentences"));
        o->add("sentences", build_a.sentences, "sentences JSONL")->required();
        o->add("labels", build_a.labels, "annotations JSONL {id,label}")->required();
        o->add("corpus", build_a.corpus, "corpus name stored on each example");
        o->add("name", build_a.name, "dataset name");
        o->add("out", build_a.out, "dataset JSONL")->required();
        actions.emplace_back(o->app(), [&] { do_build(build_a); });
    }
    StatsArgs stats_a;
    {
        auto* o = table(dataset->add_subcommand("stats", "print size and definition density"));
        o->add("in", stats_a.in, "dataset JSONL")->required();
        o->flag("json", stats_a.as_json, "print JSON instead of text");
        actions.emplace_back(o->app(), [&] { do_stats(stats_a, out); });
    }
    SplitArgs split_a;
    {
        auto* o = table(dataset->add_subcommand("split", "seeded train/validation split"));
        o->add("in", split_a.in, "dataset JSONL")->required();
        o->add("val", split_a.val, "validation fraction");
        o->add("seed", split_a.seed, "random seed");
        o->flag("stratified", split_a.stratified, "preserve density in both halves");
        o->add("out", split_a.out, "output prefix: <out>.train.jsonl and <out>.val.jsonl")->required();
        actions.emplace_back(o->app(), [&] { do_split(split_a); });
    }
    CombineArgs comb_a;
    {
        auto* o = table(dataset->add_subcommand("combine", "concatenate datasets"));
        o->add("in", comb_a.in, "dataset JSONL (repeat)")->required();
        o->add("name", comb_a.name, "combined dataset name");
        o->add("out", comb_a.out, "dataset JSONL")->required();
        actions.emplace_back(o->app(), [&] { do_combine(comb_a); });
    }
    OversampleArgs over_a;
    {
        auto* o = table(dataset->add_subcommand("oversample", "duplicate positives up to a target density"));
        o->add("in", over_a.in, "training dataset JSONL")->required();
        o->add("mode", over_a.mode, "minority (density 0.5) | target");
        o->add("target", over_a.target, "target density for --mode target");
        o->add("seed", over_a.seed, "random seed");
        o->add("out", over_a.out, "dataset JSONL")->required();
        actions.emplace_back(o->app(), [&] { do_oversample(over_a); });
    }
    AuditArgs audit_a;
    {
        auto* o = table(dataset->add_subcommand("audit", "list examples longer than --max-len characters"));
        o->add("in", audit_a.in, "dataset JSONL")->required();
        o->add("max-len", audit_a.max_len, "length limit in characters");
        o->add("out", audit_a.out, "report JSONL (default stdout)");
        actions.emplace_back(o->app(), [&] { do_audit(audit_a, out); });
    }
    TrainArgs train_a;
    {
        auto* o = table(app.add_subcommand("train-baseline", "train the hashed-feature logistic regression"));
        o->add("train", train_a.train, "training dataset JSONL")->required();
        o->add("out", train_a.out, "model JSON")->required();
        o->add("trace", train_a.trace, "optional loss-trace JSON");
        o->add("dim", train_a.cfg.dim, "hash buckets (power of two)");
        o->add("ngram-min", train_a.cfg.ngram_min, "smallest word n-gram");
        o->add("ngram-max", train_a.cfg.ngram_max, "largest word n-gram");
        o->add("lr", train_a.cfg.lr, "learning rate");
        o->add("l2", train_a.cfg.l2, "L2 strength");
        o->add("epochs", train_a.cfg.epochs, "passes over the data");
        o->add("batch-size", train_a.cfg.batch_size, "examples per gradient step");
        o->add("seed", train_a.cfg.seed, "shuffle seed");
        actions.emplace_back(o->app(), [&] { do_train(train_a, out); });
    }
    PredictArgs pred_a;
    {
        auto* o = table(app.add_subcommand("predict", "score sentences with a baseline model"));
        o->add("model", pred_a.model, "model JSON")->required();
        o->add("in", pred_a.in, "dataset or sentences JSONL")->required();
        o->add("out", pred_a.out, "predictions JSONL")->required();
        o->add("threshold", pred_a.threshold, "label 1 iff score >= threshold");
        actions.emplace_back(o->app(), [&] { do_predict(pred_a); });
    }
    EvalArgs eval_a;
    {
        auto* o = table(app.add_subcommand("eval", "score predictions against gold labels"));
        o->add("gold", eval_a.gold, "gold dataset JSONL")->required();
        o->add("pred", eval_a.pred, "predictions JSONL")->required();
        o->add("slices", eval_a.slices, "slice map JSONL {id,slice}");
        o->add("format", eval_a.format, "text | json | csv");
        o->add("decimals", eval_a.decimals, "rounding (half-even) for text and csv");
        o->add("out", eval_a.out, "output file (default stdout)");
        actions.emplace_back(o->app(), [&] { do_eval(eval_a, out); });
    }
    ReportArgs rep_a;
    {
        auto* o = table(app.add_subcommand("report", "summary table over saved eval JSON reports"));
        o->add("in", rep_a.in, "eval --format json output (repeat)")->required();
        o->add("format", rep_a.format, "text | json | csv");
        o->add("decimals", rep_a.decimals, "rounding (half-even)");
        o->add("out", rep_a.out, "output file (default stdout)");
        actions.emplace_back(o->app(), [&] { do_report(rep_a, out); });
    }
    ReplayArgs replay_a;
    auto* replay = app.add_subcommand("replay", "re-run an entry of a reproducibility log");
    replay->add_option("--from", replay_a.log, "reproducibility log")->required();
    replay->add_option("--line", replay_a.line, "1-based entry (default: last)");

    if (preset != nullptr) {
        kv = *preset;
        apply_config_defaults(app, kv);
    } else if (const auto path = find_config_path(argv); !path.empty()) {
        kv = KeyValueConfig::load(path);
        apply_config_defaults(app, kv);
    }

    std::vector<std::string> args(argv.rbegin(), argv.rend() - 1);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (replay->parsed()) {
        const auto entries = jsonl::read_file(replay_a.log);
        if (entries.empty()) throw DataError(replay_a.log + ": empty log");
        const long n = static_cast<long>(entries.size());
        const long line = replay_a.line < 0 ? n : replay_a.line;
        if (line < 1 || line > n) throw UsageError("--line out of range (1.." + std::to_string(n) + ")");
        const auto& entry = entries[static_cast<std::size_t>(line - 1)];
        std::vector<std::string> replay_args;
        std::string config_text;
        try {
            replay_args = replay_argv(entry);
            const auto logged_config = entry.value("config", json::object());
            for (const auto& [key, value] : logged_config.items()) {
                config_text += key + " = " + value.get<std::string>() + "\n";
            }
        } catch (const json::exception& e) {
            throw DataError(replay_a.log + " entry " + std::to_string(line) + ": malformed (" + e.what() + ")");
        }
        replay_args.insert(replay_args.begin() + 1, "--log=" + g.log);
        const auto logged = KeyValueConfig::parse(config_text);
        return dispatch(replay_args, out, err, &logged);
    }

    for (std::size_t i = 0; i < actions.size(); ++i) {
        auto* sub = actions[i].first;
        if (!sub->parsed()) continue;
        json path = json::array();
        for (auto* a = sub; a != nullptr && a->get_parent() != nullptr; a = a->get_parent()) {
            path.insert(path.begin(), a->get_name());
        }
        const auto& opts = *tables[i];
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        append_log(g.log,
                   {{"time_unix_ms", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                    {"argv", argv},
                    {"subcommand", path},
                    {"options", opts.resolved()},
                    {"config", kv.entries()}},
                   err);
        actions[i].second();
        return 0;
    }
    throw UsageError("no subcommand given");
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(argv, out, err);
    } catch (const UsageError& e) {
        err << "mathdef: usage: " << e.what() << '\n';
        return static_cast<int>(ExitCode::usage);
    } catch (const DataError& e) {
        err << "mathdef: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    } catch (const InvariantError& e) {
        err << "mathdef: internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::internal);
    } catch (const std::exception& e) {
        err << "mathdef: internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::internal);
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace mathdef::cli
