#include "ncdkit/cli.hpp"

#include "ncdkit/error.hpp"
#include "ncdkit/matrix_io.hpp"
#include "ncdkit/taxonomy.hpp"
#include "ncdkit/traffic.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace ncdkit {

namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestName = "families.tsv";

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string compressor = "deflate";
    double unknown_threshold = kDefaultUnknownThreshold;
    std::size_t min_payload = kDefaultMinPayload;
    SearchParams search;
};

nlohmann::ordered_json config_json(const RunConfig& c, CompressorKind kind)
{
    nlohmann::ordered_json j;
    j["compressor"] = to_string(kind);
    j["compressor_params"] = compressor_parameters(kind);
    j["unknown_threshold"] = c.unknown_threshold;
    j["min_payload"] = c.min_payload;
    j["restarts"] = c.search.restarts;
    j["mutation_cap"] = c.search.mutation_cap;
    j["seed"] = c.search.seed;
    return j;
}

std::string defaults_footer()
{
    std::ostringstream s;
    s << "Defaults: compressor deflate, unknown threshold " << std::setprecision(3) << kDefaultUnknownThreshold
      << ", ratio rule less_than " << std::fixed << std::setprecision(1) << kDefaultLessThan
      << ", min payload " << kDefaultMinPayload << " bytes, seed " << SearchParams{}.seed << ", restarts "
      << SearchParams{}.restarts << ", mutation cap " << SearchParams{}.mutation_cap << ".";
    return s.str();
}

void add_common_options(CLI::App* cmd, RunConfig& c)
{
    cmd->add_option("--compressor", c.compressor, "Complexity backend: deflate, bwt or rle")
        ->capture_default_str();
    cmd->add_option("--seed", c.search.seed, "Seed for randomized tree search")->capture_default_str();
    cmd->add_option("--min-payload", c.min_payload, "Sessions with fewer payload bytes are not evaluated")
        ->capture_default_str();
    cmd->add_option("--unknown-threshold", c.unknown_threshold,
                    "Nearest-neighbor NCD at or above this is reported as UNKNOWN")
        ->capture_default_str();
    cmd->add_option("--restarts", c.search.restarts, "Tree search restarts")->capture_default_str();
    cmd->add_option("--mutation-cap", c.search.mutation_cap,
                    "Consecutive non-improving steps before a restart stops")
        ->capture_default_str();
    cmd->add_option("--workers", c.search.workers, "Worker threads (0 = all available)")->capture_default_str();
    cmd->footer(defaults_footer());
}

Bytes read_nonempty(const fs::path& path)
{
    std::error_code ec;
    if (!fs::is_regular_file(path, ec))
        throw ConfigError("cannot read '" + path.string() + "': not a regular file");
    Bytes data = read_file(path.string());
    if (data.empty())
        throw InvalidSampleError("'" + path.string() + "' is empty");
    return data;
}

// Directory arguments expand to their regular files, sorted by name. The
// family manifest is never treated as a sample.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args)
{
    std::vector<fs::path> out;
    for (const auto& a : args) {
        fs::path p(a);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file() && entry.path().filename() != kManifestName)
                    files.push_back(entry.path());
            std::sort(files.begin(), files.end(),
                      [](const fs::path& x, const fs::path& y) { return x.filename() < y.filename(); });
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

// Manifest: one "<file name><TAB><family>" per line; '#' starts a comment.
std::map<std::string, std::string> load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open family manifest '" + path.string() + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected <file>\\t<family>");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

std::vector<Sample> load_labeled_corpus(const fs::path& dir, const std::string& manifest_arg)
{
    const fs::path manifest_path = manifest_arg.empty() ? dir / kManifestName : fs::path(manifest_arg);
    auto families = load_manifest(manifest_path);
    std::vector<Sample> corpus;
    for (const auto& p : expand_inputs({dir.string()})) {
        const std::string name = p.filename().string();
        auto it = families.find(name);
        if (it == families.end())
            throw CorpusError("no family for '" + p.string() + "' in " + manifest_path.string());
        corpus.push_back(make_sample(name, read_nonempty(p), it->second, p.string()));
    }
    if (corpus.empty())
        throw CorpusError("corpus directory '" + dir.string() + "' has no samples");
    return corpus;
}

std::string format_value(double v)
{
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

int cmd_matrix(const RunConfig& c, const std::vector<std::string>& inputs, const std::string& output,
               const std::string& format, std::ostream& out)
{
    const CompressorKind kind = parse_compressor(c.compressor);
    const auto paths = expand_inputs(inputs);
    if (paths.size() < 2)
        throw UsageError("matrix needs at least 2 input files, got " + std::to_string(paths.size()));
    std::vector<Sample> corpus;
    for (const auto& p : paths)
        corpus.push_back(make_sample(p.filename().string(), read_nonempty(p), std::nullopt, p.string()));
    DistanceMatrix m = distance_matrix(corpus, kind, c.search.workers);

    std::ofstream file;
    std::ostream* sink = &out;
    if (!output.empty()) {
        file.open(output);
        if (!file)
            throw ConfigError("cannot write '" + output + "'");
        sink = &file;
    }
    if (format == "json") {
        auto j = matrix_to_json(m);
        j["config"] = config_json(c, kind);
        *sink << j.dump(2) << '\n';
    } else {
        write_matrix_text(*sink, m);
    }
    return 0;
}

int cmd_tree(const RunConfig& c, const std::string& matrix_path, bool json, std::ostream& out)
{
    DistanceMatrix m = load_matrix(matrix_path);
    FitResult fit = fit_tree(m, c.search);
    if (json) {
        nlohmann::ordered_json j;
        j["newick"] = fit.tree.to_newick();
        j["normalized"] = fit.score.normalized;
        j["raw_cost"] = fit.score.raw_cost;
        j["min_cost"] = fit.score.min_cost;
        j["max_cost"] = fit.score.max_cost;
        j["restart"] = fit.restart;
        j["config"] = config_json(c, m.compressor);
        out << j.dump(2) << '\n';
    } else {
        out << fit.tree.to_newick() << '\n';
        out << "score " << std::setprecision(17) << fit.score.normalized << '\n';
    }
    return 0;
}

int cmd_classify(const RunConfig& c, const std::string& query_path, const std::string& corpus_dir,
                 const std::string& manifest, bool json, std::ostream& out)
{
    const CompressorKind kind = parse_compressor(c.compressor);
    auto corpus = load_labeled_corpus(corpus_dir, manifest);
    fs::path qp(query_path);
    Sample query = make_sample(qp.filename().string(), read_nonempty(qp), std::nullopt, qp.string());
    // The query is an outside object; only exclude a corpus entry if it is the same file.
    std::error_code ec;
    std::vector<Sample> references;
    for (auto& s : corpus)
        if (!fs::equivalent(s.source, qp, ec))
            references.push_back(s);
    query.id = "query:" + query.id;
    auto result = classify(query, references, kind, c.unknown_threshold);
    result.query_id = qp.filename().string();
    if (json) {
        nlohmann::ordered_json j = classification_to_json(result);
        j["config"] = config_json(c, kind);
        out << j.dump(2) << '\n';
    } else {
        out << "query " << result.query_id << '\n'
            << "best_match " << result.best_match_id << '\n'
            << "ncd " << format_value(result.ncd_value) << '\n'
            << "family " << result.assigned_family.value_or("UNKNOWN") << '\n';
    }
    return 0;
}

int cmd_evaluate(const RunConfig& c, const std::string& corpus_dir, const std::string& manifest, bool json,
                 std::ostream& out)
{
    const CompressorKind kind = parse_compressor(c.compressor);
    auto corpus = load_labeled_corpus(corpus_dir, manifest);
    auto report = evaluate_classifier(corpus, kind, c.unknown_threshold, c.search.workers);
    if (json) {
        nlohmann::ordered_json j = report_to_json(report);
        j["config"] = config_json(c, kind);
        out << j.dump(2) << '\n';
    } else {
        out << format_report_table(report);
    }
    return 0;
}

int cmd_profile(const RunConfig& c, const std::string& capture_path, bool json, std::ostream& out,
                std::ostream& err)
{
    const CompressorKind kind = parse_compressor(c.compressor);
    Bytes capture = read_file(capture_path);
    CaptureStats stats;
    auto sessions = reassemble(capture, &stats);
    auto result = profile(sessions, kind, c.min_payload);
    if (stats.truncated)
        err << "warning: " << capture_path << ": last record truncated\n";
    if (json) {
        nlohmann::ordered_json j = profile_to_json(result);
        j["config"] = config_json(c, kind);
        out << j.dump(2) << '\n';
    } else {
        out << format_profile_table(result);
    }
    return 0;
}

int cmd_detect(const RunConfig& c, const std::string& capture_path, const std::string& rules_path,
               std::ostream& out, std::ostream& err)
{
    // Rules are validated before any packet is read.
    auto rules = load_rules(rules_path);
    Bytes capture = read_file(capture_path);
    DetectionConfig dc;
    dc.min_payload = c.min_payload;
    dc.workers = c.search.workers;
    auto result = run_detection(ByteView(capture), rules, dc);
    write_alerts(out, result.alerts);
    auto summary = summary_to_json(result);
    summary["config"] = {{"rules", rules.size()}, {"min_payload", c.min_payload}};
    err << summary.dump() << '\n';
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Compression-based similarity analysis and traffic detection", "ncdkit"};
    app.require_subcommand(1);
    app.footer(defaults_footer());

    RunConfig config;
    std::function<int()> action;

    std::vector<std::string> inputs;
    std::string output, format = "text", matrix_path, query, corpus, manifest, capture, rules;
    bool json = false;

    auto* matrix = app.add_subcommand("matrix", "Pairwise NCD matrix of files or directories");
    matrix->add_option("inputs", inputs, "Files, or directories expanded to their files sorted by name")
        ->required();
    matrix->add_option("-o,--output", output, "Write the matrix here instead of standard output");
    matrix->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    add_common_options(matrix, config);
    matrix->callback([&] { action = [&] { return cmd_matrix(config, inputs, output, format, out); }; });

    auto* tree = app.add_subcommand("tree", "Fit a quartet tree to a distance matrix and print it as Newick");
    tree->add_option("matrix", matrix_path, "Matrix file (text or JSON)")->required();
    tree->add_flag("--json", json, "Machine-readable output");
    add_common_options(tree, config);
    tree->callback([&] { action = [&] { return cmd_tree(config, matrix_path, json, out); }; });

    auto* cls = app.add_subcommand("classify", "Assign a file to the family of its nearest corpus sample");
    cls->add_option("query", query, "File to classify")->required();
    cls->add_option("corpus", corpus, "Directory of labeled samples")->required();
    cls->add_option("--manifest", manifest, "Family manifest (default: <corpus>/families.tsv)");
    cls->add_flag("--json", json, "Machine-readable output");
    add_common_options(cls, config);
    cls->callback([&] { action = [&] { return cmd_classify(config, query, corpus, manifest, json, out); }; });

    auto* eval = app.add_subcommand("evaluate", "Leave-one-out classification report over a labeled corpus");
    eval->add_option("corpus", corpus, "Directory of labeled samples")->required();
    eval->add_option("--manifest", manifest, "Family manifest (default: <corpus>/families.tsv)");
    eval->add_flag("--json", json, "Machine-readable output");
    add_common_options(eval, config);
    eval->callback([&] { action = [&] { return cmd_evaluate(config, corpus, manifest, json, out); }; });

    auto* prof = app.add_subcommand("profile", "Per-port compression ratio statistics of a capture");
    prof->add_option("capture", capture, "pcap file")->required();
    prof->add_flag("--json", json, "Machine-readable output");
    add_common_options(prof, config);
    prof->callback([&] { action = [&] { return cmd_profile(config, capture, json, out, err); }; });

    auto* det = app.add_subcommand("detect", "Apply detection rules to a capture; alerts go to standard output");
    det->add_option("capture", capture, "pcap file")->required();
    det->add_option("rules", rules, "Rule file")->required();
    add_common_options(det, config);
    det->callback([&] { action = [&] { return cmd_detect(config, capture, rules, out, err); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands())
            target = sub;
        out << target->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace ncdkit
