#pragma once

#include "ncdkit/compressor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ncdkit {

/// A labeled byte string taking part in similarity computations.
struct Sample {
    std::string id;
    std::optional<std::string> family;
    Bytes data;
    std::string source;
    bool truncated = false;
};

/// Builds a sample, capping data at kMaxInputBytes (warning on stderr).
/// Throws InvalidSampleError for empty data.
Sample make_sample(std::string id, Bytes data, std::optional<std::string> family = std::nullopt,
                   std::string source = {});

/// Symmetric pairwise NCD values over an ordered set of samples.
struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<double> values; // row-major, labels.size()^2
    CompressorKind compressor = CompressorKind::deflate;
    std::vector<bool> truncated; // per label; empty means none truncated

    std::size_t size() const { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * labels.size() + j]; }
};

/// NCD from precomputed single complexities and the joint complexity.
double ncd_from_lengths(std::size_t cx, std::size_t cy, std::size_t cxy);

/// Joint complexity C(xy), taken as the minimum over both concatenation orders.
std::size_t joint_complexity(ByteView x, ByteView y, CompressorKind kind);

/// Normalized compression distance. Throws InvalidSampleError on empty input.
double ncd(ByteView x, ByteView y, CompressorKind kind);
double ncd(const Sample& x, const Sample& y, CompressorKind kind);

/// complexity(payload) / length(payload). Throws UndefinedRatioError when empty.
double compression_ratio(ByteView payload, CompressorKind kind);

/// Validates a corpus: at least `min_size` samples, unique ids, non-empty data.
void validate_corpus(const std::vector<Sample>& corpus, std::size_t min_size);

/// Pairwise NCD matrix, cells evaluated in parallel with OpenMP.
/// `workers` = 0 uses the OpenMP default. Result is identical for any worker count.
DistanceMatrix distance_matrix(const std::vector<Sample>& corpus, CompressorKind kind,
                               int workers = 0);

/// Single-threaded reference for distance_matrix.
DistanceMatrix distance_matrix_serial(const std::vector<Sample>& corpus, CompressorKind kind);

} // namespace ncdkit
