#include "ncdkit/error.hpp"
#include "ncdkit/taxonomy.hpp"

#include <cstdio>
#include <sstream>

namespace ncdkit {

namespace {

bool better(double d, const std::string& id, double best_d, const std::string* best_id)
{
    return best_id == nullptr || d < best_d || (d == best_d && id < *best_id);
}

void add_to_bucket(BucketStats& b, double v)
{
    ++b.count;
    b.mean_ncd += v; // running sum until finalized
}

void finalize(BucketStats& b)
{
    if (b.count > 0)
        b.mean_ncd /= b.count;
}

} // namespace

ClassificationResult classify_with(const Sample& query, const std::vector<Sample>& corpus,
                                   const DistanceFn& distance, double unknown_threshold)
{
    const Sample* best = nullptr;
    double best_d = 0.0;
    for (const auto& candidate : corpus) {
        if (candidate.id == query.id)
            continue;
        if (!candidate.family)
            throw CorpusError("corpus sample '" + candidate.id + "' has no family label");
        const double d = distance(query, candidate);
        if (better(d, candidate.id, best_d, best ? &best->id : nullptr)) {
            best = &candidate;
            best_d = d;
        }
    }
    if (best == nullptr)
        throw CorpusError("classification corpus is empty");

    ClassificationResult r{query.id, best->id, best_d, std::nullopt};
    if (best_d < unknown_threshold)
        r.assigned_family = best->family;
    return r;
}

ClassificationResult classify(const Sample& query, const std::vector<Sample>& corpus,
                              CompressorKind kind, double unknown_threshold)
{
    if (query.data.empty())
        throw InvalidSampleError("query sample '" + query.id + "' is empty");
    const std::size_t cq = complexity(query.data, kind);
    return classify_with(
        query, corpus,
        [&](const Sample& q, const Sample& c) {
            if (c.data.empty())
                throw InvalidSampleError("sample '" + c.id + "' is empty");
            return ncd_from_lengths(cq, complexity(c.data, kind), joint_complexity(q.data, c.data, kind));
        },
        unknown_threshold);
}

EvaluationReport evaluate_from_matrix(const DistanceMatrix& matrix,
                                      const std::vector<std::string>& families,
                                      double unknown_threshold)
{
    const std::size_t n = matrix.size();
    if (n < 2)
        throw CorpusError("leave-one-out evaluation needs at least 2 samples");
    if (families.size() != n)
        throw CorpusError("family list does not match matrix size");

    EvaluationReport report;
    report.compressor = matrix.compressor;
    report.threshold = unknown_threshold;
    report.true_families = families;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            if (best == n ||
                better(matrix.at(i, j), matrix.labels[j], matrix.at(i, best), &matrix.labels[best]))
                best = j;
        }
        ClassificationResult r{matrix.labels[i], matrix.labels[best], matrix.at(i, best), std::nullopt};
        if (r.ncd_value < unknown_threshold) {
            r.assigned_family = families[best];
            add_to_bucket(*r.assigned_family == families[i] ? report.good_family : report.bad_family,
                          r.ncd_value);
        } else {
            add_to_bucket(report.no_family, r.ncd_value);
        }
        report.results.push_back(std::move(r));
    }
    finalize(report.good_family);
    finalize(report.bad_family);
    finalize(report.no_family);
    return report;
}

EvaluationReport evaluate_classifier(const std::vector<Sample>& corpus, CompressorKind kind,
                                     double unknown_threshold, int workers)
{
    validate_corpus(corpus, 2);
    std::vector<std::string> families;
    families.reserve(corpus.size());
    for (const auto& s : corpus) {
        if (!s.family)
            throw CorpusError("sample '" + s.id + "' has no family label");
        families.push_back(*s.family);
    }
    return evaluate_from_matrix(distance_matrix(corpus, kind, workers), families, unknown_threshold);
}

std::string format_report_table(const EvaluationReport& report)
{
    std::ostringstream out;
    char line[128];
    out << "leave-one-out classification (compressor=" << to_string(report.compressor)
        << ", unknown threshold=" << report.threshold << ")\n";
    std::snprintf(line, sizeof line, "%-14s %7s %10s\n", "bucket", "count", "avg NCD");
    out << line;
    auto row = [&](const char* name, const BucketStats& b) {
        if (b.count > 0)
            std::snprintf(line, sizeof line, "%-14s %7d %10.4f\n", name, b.count, b.mean_ncd);
        else
            std::snprintf(line, sizeof line, "%-14s %7d %10s\n", name, b.count, "-");
        out << line;
    };
    row("good family", report.good_family);
    row("bad family", report.bad_family);
    row("no family", report.no_family);
    std::snprintf(line, sizeof line, "%-14s %7d\n", "total", report.total());
    out << line;
    return out.str();
}

nlohmann::json classification_to_json(const ClassificationResult& r)
{
    return {{"query", r.query_id},
            {"best_match", r.best_match_id},
            {"ncd", r.ncd_value},
            {"family", r.assigned_family ? nlohmann::json(*r.assigned_family) : nlohmann::json("UNKNOWN")}};
}

nlohmann::json report_to_json(const EvaluationReport& report)
{
    auto bucket = [](const BucketStats& b) {
        return nlohmann::json{{"count", b.count},
                              {"avg_ncd", b.count > 0 ? nlohmann::json(b.mean_ncd) : nlohmann::json()}};
    };
    nlohmann::json results = nlohmann::json::array();
    for (std::size_t i = 0; i < report.results.size(); ++i) {
        auto j = classification_to_json(report.results[i]);
        if (i < report.true_families.size())
            j["true_family"] = report.true_families[i];
        results.push_back(std::move(j));
    }
    return {{"compressor", to_string(report.compressor)},
            {"unknown_threshold", report.threshold},
            {"good_family", bucket(report.good_family)},
            {"bad_family", bucket(report.bad_family)},
            {"no_family", bucket(report.no_family)},
            {"total", report.total()},
            {"results", std::move(results)}};
}

} // namespace ncdkit
