#include "oracles.hpp"

#include <algorithm>
#include <set>

namespace ncdkit::oracles {

namespace {

std::vector<std::vector<int>> adjacency(const EdgeTree& t)
{
    std::vector<std::vector<int>> adj(2 * t.leaves - 2);
    for (auto [u, v] : t.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    return adj;
}

// Nodes on the path a..b, found by DFS with parent tracking.
std::set<int> path_nodes(const std::vector<std::vector<int>>& adj, int a, int b)
{
    std::vector<int> parent(adj.size(), -2);
    std::vector<int> stack{a};
    parent[a] = -1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (parent[v] == -2) {
                parent[v] = u;
                stack.push_back(v);
            }
    }
    std::set<int> nodes;
    for (int x = b; x != -1; x = parent[x])
        nodes.insert(x);
    return nodes;
}

bool disjoint(const std::set<int>& x, const std::set<int>& y)
{
    for (int v : x)
        if (y.count(v))
            return false;
    return true;
}

} // namespace

std::vector<EdgeTree> all_topologies(int n)
{
    std::vector<EdgeTree> current{{n, {{0, n}, {1, n}, {2, n}}}};
    for (int k = 3; k < n; ++k) {
        const int w = n + (k - 2);
        std::vector<EdgeTree> next;
        for (const auto& t : current) {
            for (std::size_t e = 0; e < t.edges.size(); ++e) {
                EdgeTree grown = t;
                auto [u, v] = grown.edges[e];
                grown.edges.erase(grown.edges.begin() + static_cast<std::ptrdiff_t>(e));
                grown.edges.emplace_back(u, w);
                grown.edges.emplace_back(w, v);
                grown.edges.emplace_back(w, k);
                next.push_back(std::move(grown));
            }
        }
        current = std::move(next);
    }
    return current;
}

double path_disjoint_raw_cost(const EdgeTree& t, const DistanceMatrix& m)
{
    const auto adj = adjacency(t);
    const int n = t.leaves;
    double raw = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    const int pairings[3][4] = {{i, j, k, l}, {i, k, j, l}, {i, l, j, k}};
                    int found = 0;
                    double cost = 0.0;
                    for (const auto& p : pairings) {
                        if (disjoint(path_nodes(adj, p[0], p[1]), path_nodes(adj, p[2], p[3]))) {
                            ++found;
                            cost = m.at(p[0], p[1]) + m.at(p[2], p[3]);
                        }
                    }
                    if (found != 1)
                        throw std::logic_error("quartet resolved by " + std::to_string(found) + " pairings");
                    raw += cost;
                }
    return raw;
}

double brute_normalized(const EdgeTree& t, const DistanceMatrix& m)
{
    const int n = t.leaves;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    double c[3] = {m.at(i, j) + m.at(k, l), m.at(i, k) + m.at(j, l), m.at(i, l) + m.at(j, k)};
                    lo += *std::min_element(c, c + 3);
                    hi += *std::max_element(c, c + 3);
                }
    if (hi == lo)
        return 1.0;
    return (hi - path_disjoint_raw_cost(t, m)) / (hi - lo);
}

double exhaustive_best(const DistanceMatrix& m)
{
    double best = -1.0;
    for (const auto& t : all_topologies(static_cast<int>(m.size())))
        best = std::max(best, brute_normalized(t, m));
    return best;
}

UnrootedTree to_unrooted(const EdgeTree& t, const std::vector<std::string>& labels)
{
    return UnrootedTree::from_edges(labels, t.edges);
}

DistanceMatrix additive_matrix(const EdgeTree& t, const std::vector<double>& weights,
                               const std::vector<std::string>& labels)
{
    const int n = t.leaves;
    const int nodes = 2 * n - 2;
    std::vector<std::vector<std::pair<int, double>>> adj(nodes);
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
        auto [u, v] = t.edges[e];
        adj[u].emplace_back(v, weights[e]);
        adj[v].emplace_back(u, weights[e]);
    }
    DistanceMatrix m;
    m.labels = labels;
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < n; ++s) {
        std::vector<double> dist(nodes, -1.0);
        std::vector<int> stack{s};
        dist[s] = 0.0;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (auto [v, w] : adj[u])
                if (dist[v] < 0.0) {
                    dist[v] = dist[u] + w;
                    stack.push_back(v);
                }
        }
        for (int x = 0; x < n; ++x)
            m.at(s, x) = dist[x];
    }
    // Symmetrize exactly (sums along a path can round differently by direction).
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            m.at(j, i) = m.at(i, j);
    return m;
}

DistanceMatrix random_matrix(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    DistanceMatrix m;
    for (int i = 0; i < n; ++i)
        m.labels.push_back("s" + std::to_string(i));
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = u(rng);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    return m;
}

std::size_t rle_run_count(ByteView data)
{
    std::size_t total = 0;
    std::size_t i = 0;
    while (i < data.size()) {
        std::size_t j = i;
        while (j < data.size() && data[j] == data[i])
            ++j;
        total += (j - i + 254) / 255;
        i = j;
    }
    return total;
}

} // namespace ncdkit::oracles
