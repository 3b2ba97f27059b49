#pragma once

#include "ncdkit/similarity.hpp"
#include "ncdkit/tree.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ncdkit {

// ---------------------------------------------------------------------------
// Quartet tree fitting

/// Quartet cost of a tree against a distance matrix.
///
/// Every 4-subset {u,v,w,x} of leaves is resolved by the tree into exactly
/// one pairing; its cost is d(a,b) + d(c,d) for the pairs (a,b),(c,d) of that
/// pairing. raw_cost sums those over all quartets, min_cost/max_cost sum the
/// cheapest/most expensive of the three pairings of each quartet, and
///     normalized = (max_cost - raw_cost) / (max_cost - min_cost)
/// with normalized = 1 when max_cost == min_cost.
struct QuartetScore {
    double raw_cost = 0.0;
    double min_cost = 0.0;
    double max_cost = 0.0;
    double normalized = 1.0;
};

/// Tree-independent part of the quartet score.
struct QuartetBounds {
    double min_cost = 0.0;
    double max_cost = 0.0;
};

QuartetBounds quartet_bounds(const DistanceMatrix& matrix);

/// Scores `tree` against `matrix`; leaves are matched to matrix rows by label.
/// Throws TopologyError when the label sets differ or n < 4.
QuartetScore quartet_score(const UnrootedTree& tree, const DistanceMatrix& matrix);

struct SearchParams {
    int restarts = 50;
    int mutation_cap = 10000; // consecutive non-improving mutations per restart
    std::uint64_t seed = 20050401;
    int workers = 0;          // 0 = OpenMP default
};

struct FitResult {
    UnrootedTree tree;
    QuartetScore score;
    int restart = 0; // index of the restart that produced the tree
};

/// Neighbor-joining tree over the matrix labels.
UnrootedTree neighbor_joining(const DistanceMatrix& matrix);

/// Randomized hill-climbing over quartet cost. Restart 0 starts from the
/// neighbor-joining tree, later restarts from random topologies. Restarts run
/// in parallel; the lowest-cost tree wins, ties going to the lowest restart.
/// Deterministic for a given seed regardless of worker count.
/// Throws TopologyError for fewer than 4 labels.
FitResult fit_tree(const DistanceMatrix& matrix, const SearchParams& params = {});

/// Single-threaded reference for fit_tree.
FitResult fit_tree_serial(const DistanceMatrix& matrix, const SearchParams& params = {});

// ---------------------------------------------------------------------------
// Nearest-neighbor family classification

inline constexpr double kDefaultUnknownThreshold = 0.65;

struct ClassificationResult {
    std::string query_id;
    std::string best_match_id;
    double ncd_value = 0.0;
    std::optional<std::string> assigned_family; // nullopt = UNKNOWN
};

using DistanceFn = std::function<double(const Sample&, const Sample&)>;

/// Nearest neighbor under `distance`. The query is excluded from the corpus
/// by id; ties resolve to the lexicographically smallest id.
/// Throws CorpusError when no candidate remains.
ClassificationResult classify_with(const Sample& query, const std::vector<Sample>& corpus,
                                   const DistanceFn& distance,
                                   double unknown_threshold = kDefaultUnknownThreshold);

ClassificationResult classify(const Sample& query, const std::vector<Sample>& corpus,
                              CompressorKind kind,
                              double unknown_threshold = kDefaultUnknownThreshold);

struct BucketStats {
    int count = 0;
    double mean_ncd = 0.0;
};

struct EvaluationReport {
    CompressorKind compressor = CompressorKind::deflate;
    double threshold = kDefaultUnknownThreshold;
    BucketStats good_family;
    BucketStats bad_family;
    BucketStats no_family;
    std::vector<ClassificationResult> results;
    std::vector<std::string> true_families;

    int total() const { return good_family.count + bad_family.count + no_family.count; }
};

/// Leave-one-out evaluation: every sample is classified against all others.
/// All samples must carry a family label.
EvaluationReport evaluate_classifier(const std::vector<Sample>& corpus, CompressorKind kind,
                                     double unknown_threshold = kDefaultUnknownThreshold,
                                     int workers = 0);

/// Same evaluation from a precomputed matrix whose labels are the sample ids.
EvaluationReport evaluate_from_matrix(const DistanceMatrix& matrix,
                                      const std::vector<std::string>& families,
                                      double unknown_threshold = kDefaultUnknownThreshold);

std::string format_report_table(const EvaluationReport& report);
nlohmann::json report_to_json(const EvaluationReport& report);
nlohmann::json classification_to_json(const ClassificationResult& result);

} // namespace ncdkit
