#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ncdkit {

/// Leaf-labeled unrooted binary tree.
///
/// Nodes 0..n-1 are leaves (leaf i carries labels()[i]); nodes n..2n-3 are
/// internal and have degree exactly 3.
class UnrootedTree {
public:
    UnrootedTree() = default;

    /// Builds a tree from an explicit edge list; validates the topology.
    static UnrootedTree from_edges(std::vector<std::string> labels,
                                   const std::vector<std::pair<int, int>>& edges);

    /// Random topology by stepwise insertion of leaves onto random edges.
    static UnrootedTree random(std::vector<std::string> labels, std::mt19937_64& rng);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t leaf_count() const { return labels_.size(); }
    std::size_t node_count() const { return adj_.size(); }
    int degree(int node) const { return deg_[node]; }
    std::span<const int> neighbors(int node) const { return {adj_[node].data(), deg_[node]}; }

    /// Every undirected edge once, as (smaller, larger) node pairs in node order.
    std::vector<std::pair<int, int>> edges() const;

    /// Throws TopologyError unless the tree is a connected full binary unrooted tree.
    void validate() const;

    /// Number of edges on the path between every pair of leaves.
    std::vector<int> leaf_path_lengths() const;
    /// Same, written into `out` (n*n, row-major) reusing its storage.
    void leaf_path_lengths(std::vector<int>& out) const;

    /// True if some edge separates exactly `side` (by label) from the other leaves.
    bool has_split(const std::vector<std::string>& side) const;

    /// Newick string without branch lengths, rooted at the neighbor of leaf 0.
    std::string to_newick() const;

    /// Exchanges the positions of two leaves.
    void swap_leaves(int a, int b);

    /// Prunes a random subtree and regrafts it onto a uniformly chosen edge of
    /// the remaining tree. Returns false when the topology did not change.
    bool regraft_random(std::mt19937_64& rng);

    /// One random mutation: leaf swap or subtree regraft.
    void mutate(std::mt19937_64& rng);

    bool operator==(const UnrootedTree&) const = default;

private:
    explicit UnrootedTree(std::vector<std::string> labels);

    void add_edge(int u, int v);
    void remove_edge(int u, int v);
    void replace_neighbor(int node, int from, int to);

    std::vector<std::string> labels_;
    std::vector<std::array<int, 3>> adj_;
    std::vector<std::uint8_t> deg_;
};

/// Newick-quotes a label when it contains reserved characters.
std::string newick_label(const std::string& label);

} // namespace ncdkit
