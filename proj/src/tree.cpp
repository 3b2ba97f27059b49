#include "ncdkit/tree.hpp"

#include "ncdkit/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace ncdkit {

UnrootedTree::UnrootedTree(std::vector<std::string> labels) : labels_(std::move(labels))
{
    const std::size_t n = labels_.size();
    const std::size_t nodes = n >= 3 ? 2 * n - 2 : n;
    adj_.assign(nodes, {-1, -1, -1});
    deg_.assign(nodes, 0);
}

void UnrootedTree::add_edge(int u, int v)
{
    if (deg_[u] >= 3 || deg_[v] >= 3)
        throw TopologyError("node degree would exceed 3");
    adj_[u][deg_[u]++] = v;
    adj_[v][deg_[v]++] = u;
}

void UnrootedTree::remove_edge(int u, int v)
{
    auto drop = [this](int node, int other) {
        auto& a = adj_[node];
        for (int k = 0; k < deg_[node]; ++k) {
            if (a[k] == other) {
                a[k] = a[deg_[node] - 1];
                a[deg_[node] - 1] = -1;
                --deg_[node];
                return;
            }
        }
        throw TopologyError("edge not present");
    };
    drop(u, v);
    drop(v, u);
}

void UnrootedTree::replace_neighbor(int node, int from, int to)
{
    for (int k = 0; k < deg_[node]; ++k) {
        if (adj_[node][k] == from) {
            adj_[node][k] = to;
            return;
        }
    }
    throw TopologyError("neighbor not present");
}

UnrootedTree UnrootedTree::from_edges(std::vector<std::string> labels,
                                      const std::vector<std::pair<int, int>>& edges)
{
    UnrootedTree t(std::move(labels));
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= t.node_count() ||
            static_cast<std::size_t>(v) >= t.node_count() || u == v)
            throw TopologyError("edge references an invalid node");
        t.add_edge(u, v);
    }
    t.validate();
    return t;
}

UnrootedTree UnrootedTree::random(std::vector<std::string> labels, std::mt19937_64& rng)
{
    const int n = static_cast<int>(labels.size());
    if (n < 3)
        throw TopologyError("a tree needs at least 3 leaves");
    UnrootedTree t(std::move(labels));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    int next_internal = n;
    const int hub = next_internal++;
    for (int k = 0; k < 3; ++k)
        t.add_edge(order[k], hub);

    std::vector<std::pair<int, int>> edge_list = t.edges();
    for (int k = 3; k < n; ++k) {
        std::uniform_int_distribution<std::size_t> pick(0, edge_list.size() - 1);
        auto [u, v] = edge_list[pick(rng)];
        const int w = next_internal++;
        t.replace_neighbor(u, v, w);
        t.replace_neighbor(v, u, w);
        t.adj_[w] = {u, v, order[k]};
        t.deg_[w] = 3;
        t.adj_[order[k]][0] = w;
        t.deg_[order[k]] = 1;
        edge_list = t.edges();
    }
    return t;
}

std::vector<std::pair<int, int>> UnrootedTree::edges() const
{
    std::vector<std::pair<int, int>> out;
    out.reserve(node_count());
    for (int u = 0; u < static_cast<int>(node_count()); ++u)
        for (int k = 0; k < deg_[u]; ++k)
            if (u < adj_[u][k])
                out.emplace_back(u, adj_[u][k]);
    return out;
}

void UnrootedTree::validate() const
{
    const std::size_t n = leaf_count();
    if (n < 3)
        throw TopologyError("a tree needs at least 3 leaves");
    if (node_count() != 2 * n - 2)
        throw TopologyError("expected " + std::to_string(n - 2) + " internal nodes");
    for (std::size_t u = 0; u < node_count(); ++u) {
        const int want = u < n ? 1 : 3;
        if (deg_[u] != want)
            throw TopologyError("node " + std::to_string(u) + " has degree " +
                                std::to_string(deg_[u]) + ", expected " + std::to_string(want));
    }
    std::set<std::string_view> seen;
    for (const auto& l : labels_)
        if (!seen.insert(l).second)
            throw TopologyError("leaf label '" + l + "' appears twice");
    std::vector<bool> visited(node_count(), false);
    std::vector<int> stack{0};
    visited[0] = true;
    std::size_t count = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++count;
        for (int v : neighbors(u))
            if (!visited[v]) {
                visited[v] = true;
                stack.push_back(v);
            }
    }
    if (count != node_count())
        throw TopologyError("tree is not connected");
}

std::vector<int> UnrootedTree::leaf_path_lengths() const
{
    std::vector<int> out;
    leaf_path_lengths(out);
    return out;
}

void UnrootedTree::leaf_path_lengths(std::vector<int>& out) const
{
    const int n = static_cast<int>(leaf_count());
    const int nodes = static_cast<int>(node_count());
    out.assign(static_cast<std::size_t>(n) * n, 0);
    thread_local std::vector<int> dist, queue;
    dist.resize(nodes);
    queue.resize(nodes);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        int head = 0, tail = 0;
        queue[tail++] = s;
        while (head < tail) {
            int u = queue[head++];
            for (int k = 0; k < deg_[u]; ++k) {
                int v = adj_[u][k];
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue[tail++] = v;
                }
            }
        }
        for (int t = 0; t < n; ++t)
            out[static_cast<std::size_t>(s) * n + t] = dist[t];
    }
}

bool UnrootedTree::has_split(const std::vector<std::string>& side) const
{
    std::unordered_map<std::string_view, int> index;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        index.emplace(labels_[i], static_cast<int>(i));
    std::vector<bool> want(leaf_count(), false);
    for (const auto& l : side) {
        auto it = index.find(l);
        if (it == index.end())
            return false;
        want[it->second] = true;
    }

    for (auto [u, v] : edges()) {
        // Leaves reachable from v without crossing (u, v).
        std::vector<bool> on_side(leaf_count(), false);
        std::vector<std::pair<int, int>> stack{{v, u}};
        while (!stack.empty()) {
            auto [node, from] = stack.back();
            stack.pop_back();
            if (static_cast<std::size_t>(node) < leaf_count())
                on_side[node] = true;
            for (int w : neighbors(node))
                if (w != from)
                    stack.emplace_back(w, node);
        }
        bool same = on_side == want;
        bool complement = true;
        for (std::size_t i = 0; i < leaf_count(); ++i)
            complement = complement && (on_side[i] != want[i]);
        if (same || complement)
            return true;
    }
    return false;
}

std::string newick_label(const std::string& label)
{
    if (label.find_first_of(" \t\n()[]':;,") == std::string::npos && !label.empty())
        return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'')
            out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

std::string UnrootedTree::to_newick() const
{
    if (leaf_count() == 0)
        return ";";
    std::string out;
    auto emit = [&](auto&& self, int node, int parent) -> void {
        if (static_cast<std::size_t>(node) < leaf_count()) {
            out += newick_label(labels_[node]);
            return;
        }
        out += '(';
        bool first = true;
        for (int v : neighbors(node)) {
            if (v == parent)
                continue;
            if (!first)
                out += ',';
            first = false;
            self(self, v, node);
        }
        out += ')';
    };
    const int root = adj_[0][0];
    emit(emit, root, -1);
    out += ';';
    return out;
}

void UnrootedTree::swap_leaves(int a, int b)
{
    if (a == b)
        return;
    const int pa = adj_[a][0];
    const int pb = adj_[b][0];
    if (pa == pb)
        return;
    replace_neighbor(pa, a, b);
    replace_neighbor(pb, b, a);
    adj_[a][0] = pb;
    adj_[b][0] = pa;
}

bool UnrootedTree::regraft_random(std::mt19937_64& rng)
{
    const int n = static_cast<int>(leaf_count());
    const int nodes = static_cast<int>(node_count());
    if (n < 4)
        return false;

    // Choose a directed edge parent -> child with an internal parent.
    std::uniform_int_distribution<int> pick_internal(n, nodes - 1);
    std::uniform_int_distribution<int> pick_slot(0, 2);
    const int parent = pick_internal(rng);
    const int child = adj_[parent][pick_slot(rng)];

    int others[2];
    int k = 0;
    for (int v : neighbors(parent))
        if (v != child)
            others[k++] = v;
    const int c = others[0];
    const int d = others[1];

    // Suppress parent: c - d becomes a direct edge.
    replace_neighbor(c, parent, d);
    replace_neighbor(d, parent, c);

    // Candidate edges in the component of c, which excludes parent and child.
    std::vector<std::pair<int, int>> candidates;
    std::vector<std::pair<int, int>> stack{{c, -1}};
    while (!stack.empty()) {
        auto [node, from] = stack.back();
        stack.pop_back();
        for (int w : neighbors(node)) {
            if (w == from)
                continue;
            candidates.emplace_back(node, w);
            stack.emplace_back(w, node);
        }
    }
    std::uniform_int_distribution<std::size_t> pick_edge(0, candidates.size() - 1);
    auto [x, y] = candidates[pick_edge(rng)];

    replace_neighbor(x, y, parent);
    replace_neighbor(y, x, parent);
    adj_[parent] = {child, x, y};
    return !((x == c && y == d) || (x == d && y == c));
}

void UnrootedTree::mutate(std::mt19937_64& rng)
{
    const int n = static_cast<int>(leaf_count());
    if (rng() & 1u) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        int a = pick(rng);
        int b = pick(rng);
        swap_leaves(a, b);
    } else {
        regraft_random(rng);
    }
}

} // namespace ncdkit
