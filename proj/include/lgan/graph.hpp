#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lgan/matrix.hpp"

namespace lgan {

using Edge = std::pair<int, int>;  // canonical form: first < second

/// Immutable undirected graph. Edges are stored once per unordered pair,
/// canonicalized as (min,max) and sorted lexicographically. No self-loops.
class Graph {
public:
    Graph() = default;
    Graph(int node_count, std::vector<Edge> edges);
    Graph(int node_count, std::vector<Edge> edges, std::vector<int> node_labels);
    Graph(int node_count, std::vector<Edge> edges, std::optional<std::vector<int>> node_labels,
          std::optional<Matrix> node_features);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }
    int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
    bool has_edge(int u, int v) const;

    const std::optional<std::vector<int>>& node_labels() const { return node_labels_; }
    const std::optional<Matrix>& node_features() const { return node_features_; }

    Graph with_features(Matrix features) const;
    Graph with_uniform_features() const;  // single all-ones column

    /// Relabels nodes: node v becomes perm[v]. Labels/features move along.
    Graph permuted(const std::vector<int>& perm) const;

private:
    int node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::optional<std::vector<int>> node_labels_;
    std::optional<Matrix> node_features_;

    void validate_and_index();
};

/// Line graph: nodes are the base graph's edges (in base_edge_list order),
/// adjacent iff the base edges share an endpoint.
struct LineGraph {
    std::vector<Edge> base_edge_list;
    std::vector<Edge> lg_edges;  // index pairs into base_edge_list, canonical

    int node_count() const { return static_cast<int>(base_edge_list.size()); }
    Graph as_graph() const { return Graph(node_count(), lg_edges); }
};

LineGraph line_graph(const Graph& g);

/// Induced subgraph on {t} ∪ N(t) plus the map from subgraph indices back to g.
struct EgoSubgraph {
    Graph graph;
    std::vector<int> to_parent;  // subgraph index -> original index
};

EgoSubgraph ego_subgraph(const Graph& g, int t);

/// One-hot degree encoding, width max_degree+1. Throws if a degree exceeds max_degree.
Matrix degree_one_hot(const Graph& g, int max_degree);

// Fixture builders.
Graph cycle_graph(int n);
Graph path_graph(int n);
Graph complete_graph(int n);
Graph star_graph(int leaves);  // K_{1,leaves}, node 0 is the center
Graph disjoint_union(const Graph& a, const Graph& b);
Graph empty_graph(int n);  // n nodes, no edges

enum class PairKind { OneWlBlind, WhitneyException, TriangleFlag };

PairKind pair_kind_from_string(const std::string& name);
std::string to_string(PairKind kind);

/// Canonical synthetic pairs. All come with uniform (all-ones, 1-dim) features.
///   OneWlBlind       -> (C6, K3 + K3)
///   WhitneyException -> (K3, K1,3)
///   TriangleFlag     -> (C4, the diamond: C4 plus the chord {0,2})
std::pair<Graph, Graph> generate_pair(PairKind kind);

/// The chord whose presence separates the TriangleFlag pair.
Edge triangle_flag_closing_edge();

}  // namespace lgan
