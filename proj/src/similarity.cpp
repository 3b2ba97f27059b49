#include "ncdkit/similarity.hpp"

#include "ncdkit/error.hpp"

#include <omp.h>

#include <algorithm>
#include <iostream>
#include <set>

namespace ncdkit {

namespace {

std::size_t concat_complexity(ByteView a, ByteView b, CompressorKind kind)
{
    Bytes joined;
    joined.reserve(a.size() + b.size());
    joined.insert(joined.end(), a.begin(), a.end());
    joined.insert(joined.end(), b.begin(), b.end());
    return complexity(joined, kind);
}

DistanceMatrix empty_matrix(const std::vector<Sample>& corpus, CompressorKind kind)
{
    DistanceMatrix m;
    m.compressor = kind;
    m.labels.reserve(corpus.size());
    m.truncated.reserve(corpus.size());
    for (const auto& s : corpus) {
        m.labels.push_back(s.id);
        m.truncated.push_back(s.truncated);
    }
    m.values.assign(corpus.size() * corpus.size(), 0.0);
    return m;
}

} // namespace

Sample make_sample(std::string id, Bytes data, std::optional<std::string> family, std::string source)
{
    if (data.empty())
        throw InvalidSampleError("sample '" + id + "' is empty");
    Sample s{std::move(id), std::move(family), std::move(data), std::move(source), false};
    if (cap_input(s.data)) {
        s.truncated = true;
        std::cerr << "warning: sample '" << s.id << "' truncated to " << kMaxInputBytes
                  << " bytes\n";
    }
    return s;
}

double ncd_from_lengths(std::size_t cx, std::size_t cy, std::size_t cxy)
{
    const auto lo = static_cast<double>(std::min(cx, cy));
    const auto hi = static_cast<double>(std::max(cx, cy));
    if (hi <= 0.0)
        throw InvalidSampleError("NCD undefined: both complexities are zero");
    // C(xy) below min{C(x),C(y)} can only come from compressor noise.
    return std::max(0.0, (static_cast<double>(cxy) - lo) / hi);
}

std::size_t joint_complexity(ByteView x, ByteView y, CompressorKind kind)
{
    return std::min(concat_complexity(x, y, kind), concat_complexity(y, x, kind));
}

double ncd(ByteView x, ByteView y, CompressorKind kind)
{
    if (x.empty() || y.empty())
        throw InvalidSampleError("NCD requires non-empty inputs");
    return ncd_from_lengths(complexity(x, kind), complexity(y, kind), joint_complexity(x, y, kind));
}

double ncd(const Sample& x, const Sample& y, CompressorKind kind)
{
    if (x.data.empty())
        throw InvalidSampleError("sample '" + x.id + "' is empty");
    if (y.data.empty())
        throw InvalidSampleError("sample '" + y.id + "' is empty");
    return ncd(ByteView(x.data), ByteView(y.data), kind);
}

double compression_ratio(ByteView payload, CompressorKind kind)
{
    if (payload.empty())
        throw UndefinedRatioError("compression ratio of an empty payload is undefined");
    return static_cast<double>(complexity(payload, kind)) / static_cast<double>(payload.size());
}

void validate_corpus(const std::vector<Sample>& corpus, std::size_t min_size)
{
    if (corpus.size() < min_size)
        throw CorpusError("corpus needs at least " + std::to_string(min_size) + " samples, got " +
                          std::to_string(corpus.size()));
    std::set<std::string_view> seen;
    for (const auto& s : corpus) {
        if (!seen.insert(s.id).second)
            throw CorpusError("duplicate sample id '" + s.id + "'");
        if (s.data.empty())
            throw InvalidSampleError("sample '" + s.id + "' is empty");
    }
}

DistanceMatrix distance_matrix_serial(const std::vector<Sample>& corpus, CompressorKind kind)
{
    validate_corpus(corpus, 2);
    DistanceMatrix m = empty_matrix(corpus, kind);
    const std::size_t n = corpus.size();
    std::vector<std::size_t> single(n);
    for (std::size_t i = 0; i < n; ++i)
        single[i] = complexity(corpus[i].data, kind);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double d = ncd_from_lengths(single[i], single[j],
                                        joint_complexity(corpus[i].data, corpus[j].data, kind));
            m.at(i, j) = d;
            m.at(j, i) = d;
        }
    }
    return m;
}

DistanceMatrix distance_matrix(const std::vector<Sample>& corpus, CompressorKind kind, int workers)
{
    validate_corpus(corpus, 2);
    DistanceMatrix m = empty_matrix(corpus, kind);
    const auto n = static_cast<std::int64_t>(corpus.size());
    const int threads = workers > 0 ? workers : omp_get_max_threads();

    std::vector<std::size_t> single(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i)
        single[i] = complexity(corpus[i].data, kind);

    // Flatten the upper triangle (diagonal included) so cells balance across threads.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
    cells.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i; j < n; ++j)
            cells.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));

    const auto cell_count = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t k = 0; k < cell_count; ++k) {
        auto [i, j] = cells[k];
        double d = ncd_from_lengths(single[i], single[j],
                                    joint_complexity(corpus[i].data, corpus[j].data, kind));
        m.at(i, j) = d;
        m.at(j, i) = d;
    }
    return m;
}

} // namespace ncdkit
