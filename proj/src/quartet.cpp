#include "ncdkit/error.hpp"
#include "ncdkit/taxonomy.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <limits>
#include <unordered_map>

namespace ncdkit {

namespace {

// Matrix distances reindexed so that row i belongs to tree leaf i.
struct LeafDistances {
    std::size_t n = 0;
    std::vector<double> d;

    double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

LeafDistances align_to_tree(const UnrootedTree& tree, const DistanceMatrix& matrix)
{
    const std::size_t n = tree.leaf_count();
    if (n < 4)
        throw TopologyError("quartet scoring needs at least 4 leaves, got " + std::to_string(n));
    if (matrix.size() != n)
        throw TopologyError("tree has " + std::to_string(n) + " leaves but matrix has " +
                            std::to_string(matrix.size()) + " labels");
    std::unordered_map<std::string_view, std::size_t> row;
    for (std::size_t i = 0; i < n; ++i)
        row.emplace(matrix.labels[i], i);
    std::vector<std::size_t> map(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = row.find(tree.labels()[i]);
        if (it == row.end())
            throw TopologyError("tree leaf '" + tree.labels()[i] + "' is not a matrix label");
        map[i] = it->second;
    }
    LeafDistances out{n, std::vector<double>(n * n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.d[i * n + j] = matrix.at(map[i], map[j]);
    return out;
}

LeafDistances identity_alignment(const DistanceMatrix& matrix)
{
    return {matrix.size(), matrix.values};
}

// Quartets are visited as i < j < k < l, always in the same order, so sums
// over the same terms are bit-identical.
template <typename Visit>
void for_each_quartet(std::size_t n, Visit&& visit)
{
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                for (std::size_t l = k + 1; l < n; ++l)
                    visit(i, j, k, l);
}

QuartetBounds bounds_of(const LeafDistances& d)
{
    QuartetBounds b;
    for_each_quartet(d.n, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        const double c1 = d(i, j) + d(k, l);
        const double c2 = d(i, k) + d(j, l);
        const double c3 = d(i, l) + d(j, k);
        b.min_cost += std::min({c1, c2, c3});
        b.max_cost += std::max({c1, c2, c3});
    });
    return b;
}

// The pairing a binary tree induces on {i,j,k,l} is the one whose two paths
// are disjoint, i.e. the pairing with the strictly smallest path-length sum.
double raw_cost_of(const UnrootedTree& tree, const LeafDistances& d, std::vector<int>& paths)
{
    tree.leaf_path_lengths(paths);
    const std::size_t n = d.n;
    auto p = [&](std::size_t a, std::size_t b) { return paths[a * n + b]; };
    double raw = 0.0;
    for_each_quartet(n, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        const int s1 = p(i, j) + p(k, l);
        const int s2 = p(i, k) + p(j, l);
        const int s3 = p(i, l) + p(j, k);
        if (s1 < s2 && s1 < s3)
            raw += d(i, j) + d(k, l);
        else if (s2 < s3)
            raw += d(i, k) + d(j, l);
        else
            raw += d(i, l) + d(j, k);
    });
    return raw;
}

QuartetScore make_score(double raw, const QuartetBounds& b)
{
    QuartetScore s{raw, b.min_cost, b.max_cost, 1.0};
    if (b.max_cost > b.min_cost)
        s.normalized = std::clamp((b.max_cost - raw) / (b.max_cost - b.min_cost), 0.0, 1.0);
    return s;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct SearchContext {
    LeafDistances distances;
    QuartetBounds bounds;
    UnrootedTree nj;
    SearchParams params;
};

struct RestartOutcome {
    bool finished = false;
    UnrootedTree tree;
    double raw = std::numeric_limits<double>::infinity();
};

// Hill climb for one restart. `perfect` holds the lowest restart index that
// reached the lower bound; restarts above it cannot win and stop early.
RestartOutcome run_restart(const SearchContext& ctx, int restart, std::atomic<int>& perfect)
{
    std::mt19937_64 rng(splitmix64(ctx.params.seed ^ splitmix64(static_cast<std::uint64_t>(restart))));
    UnrootedTree current = restart == 0 ? ctx.nj : UnrootedTree::random(ctx.nj.labels(), rng);
    std::vector<int> scratch;
    double cost = raw_cost_of(current, ctx.distances, scratch);

    UnrootedTree candidate = current;
    int non_improving = 0;
    while (non_improving < ctx.params.mutation_cap && cost > ctx.bounds.min_cost) {
        if (perfect.load(std::memory_order_relaxed) < restart)
            return {};
        candidate = current;
        // 1 mutation with probability 1/2, 2 with 1/4, ... capped at 4.
        int steps = 1;
        while (steps < 4 && (rng() & 1u))
            ++steps;
        for (int s = 0; s < steps; ++s)
            candidate.mutate(rng);
        const double c = raw_cost_of(candidate, ctx.distances, scratch);
        if (c < cost) {
            std::swap(current, candidate);
            cost = c;
            non_improving = 0;
        } else {
            ++non_improving;
            if (c == cost)
                std::swap(current, candidate);
        }
    }
    if (cost <= ctx.bounds.min_cost) {
        int seen = perfect.load();
        while (restart < seen && !perfect.compare_exchange_weak(seen, restart)) {
        }
    }
    return {true, std::move(current), cost};
}

SearchContext make_context(const DistanceMatrix& matrix, const SearchParams& params)
{
    if (matrix.size() < 4)
        throw TopologyError("tree fitting needs at least 4 samples, got " +
                            std::to_string(matrix.size()));
    if (params.restarts < 1)
        throw ConfigError("restarts must be at least 1");
    if (params.mutation_cap < 0)
        throw ConfigError("mutation cap must be non-negative");
    SearchContext ctx{identity_alignment(matrix), {}, neighbor_joining(matrix), params};
    ctx.bounds = bounds_of(ctx.distances);
    return ctx;
}

FitResult pick_best(std::vector<RestartOutcome>& outcomes, const SearchContext& ctx)
{
    int best = -1;
    for (int r = 0; r < static_cast<int>(outcomes.size()); ++r) {
        if (!outcomes[r].finished)
            continue;
        if (best < 0 || outcomes[r].raw < outcomes[best].raw)
            best = r;
    }
    return {std::move(outcomes[best].tree), make_score(outcomes[best].raw, ctx.bounds), best};
}

} // namespace

QuartetBounds quartet_bounds(const DistanceMatrix& matrix)
{
    if (matrix.size() < 4)
        throw TopologyError("quartet scoring needs at least 4 labels");
    return bounds_of(identity_alignment(matrix));
}

QuartetScore quartet_score(const UnrootedTree& tree, const DistanceMatrix& matrix)
{
    tree.validate();
    LeafDistances d = align_to_tree(tree, matrix);
    std::vector<int> scratch;
    return make_score(raw_cost_of(tree, d, scratch), bounds_of(d));
}

UnrootedTree neighbor_joining(const DistanceMatrix& matrix)
{
    const std::size_t n = matrix.size();
    if (n < 3)
        throw TopologyError("neighbor joining needs at least 3 labels");

    // Working distances between active clusters, indexed by tree node id.
    const std::size_t nodes = 2 * n - 2;
    std::vector<double> d(nodes * nodes, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            d[i * nodes + j] = i == j ? 0.0 : matrix.at(i, j);
    auto D = [&](std::size_t a, std::size_t b) -> double& { return d[a * nodes + b]; };

    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i)
        active[i] = i;
    std::vector<std::pair<int, int>> edges;
    std::size_t next = n;

    while (active.size() > 3) {
        const std::size_t m = active.size();
        std::vector<double> row_sum(m, 0.0);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                row_sum[a] += D(active[a], active[b]);
        std::size_t best_a = 0, best_b = 1;
        double best_q = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                double q = static_cast<double>(m - 2) * D(active[a], active[b]) - row_sum[a] - row_sum[b];
                if (q < best_q) {
                    best_q = q;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const std::size_t u = next++;
        const std::size_t x = active[best_a], y = active[best_b];
        edges.emplace_back(static_cast<int>(x), static_cast<int>(u));
        edges.emplace_back(static_cast<int>(y), static_cast<int>(u));
        for (std::size_t k : active) {
            if (k == x || k == y)
                continue;
            const double v = 0.5 * (D(x, k) + D(y, k) - D(x, y));
            D(u, k) = v;
            D(k, u) = v;
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        active[best_a] = u;
    }
    const std::size_t hub = next++;
    for (std::size_t k : active)
        edges.emplace_back(static_cast<int>(k), static_cast<int>(hub));
    return UnrootedTree::from_edges(matrix.labels, edges);
}

FitResult fit_tree_serial(const DistanceMatrix& matrix, const SearchParams& params)
{
    const SearchContext ctx = make_context(matrix, params);
    std::atomic<int> perfect{std::numeric_limits<int>::max()};
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(params.restarts));
    for (int r = 0; r < params.restarts; ++r) {
        outcomes[r] = run_restart(ctx, r, perfect);
        if (perfect.load() <= r)
            break;
    }
    return pick_best(outcomes, ctx);
}

FitResult fit_tree(const DistanceMatrix& matrix, const SearchParams& params)
{
    const SearchContext ctx = make_context(matrix, params);
    std::atomic<int> perfect{std::numeric_limits<int>::max()};
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(params.restarts));
    const int threads = params.workers > 0 ? params.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int r = 0; r < params.restarts; ++r)
        outcomes[r] = run_restart(ctx, r, perfect);
    return pick_best(outcomes, ctx);
}

} // namespace ncdkit
