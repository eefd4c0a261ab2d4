#include "lgan/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lgan {

Graph::Graph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    validate_and_index();
}

Graph::Graph(int node_count, std::vector<Edge> edges, std::vector<int> node_labels)
    : node_count_(node_count), edges_(std::move(edges)), node_labels_(std::move(node_labels)) {
    validate_and_index();
}

Graph::Graph(int node_count, std::vector<Edge> edges, std::optional<std::vector<int>> node_labels,
             std::optional<Matrix> node_features)
    : node_count_(node_count),
      edges_(std::move(edges)),
      node_labels_(std::move(node_labels)),
      node_features_(std::move(node_features)) {
    validate_and_index();
}

void Graph::validate_and_index() {
    if (node_count_ < 0) throw std::invalid_argument("Graph: negative node count");
    for (auto& e : edges_) {
        if (e.first == e.second)
            throw std::invalid_argument("Graph: self-loop at node " + std::to_string(e.first));
        if (e.first > e.second) std::swap(e.first, e.second);
        if (e.first < 0 || e.second >= node_count_)
            throw std::invalid_argument("Graph: edge (" + std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ") out of range for n=" +
                                        std::to_string(node_count_));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    adjacency_.assign(node_count_, {});
    for (const auto& [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

    if (node_labels_ && static_cast<int>(node_labels_->size()) != node_count_)
        throw std::invalid_argument("Graph: node_labels length != node_count");
    if (node_features_ && node_features_->rows != node_count_)
        throw std::invalid_argument("Graph: node_features rows != node_count");
}

bool Graph::has_edge(int u, int v) const {
    if (u == v) return false;
    const auto& nbrs = adjacency_[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

Graph Graph::with_features(Matrix features) const {
    return Graph(node_count_, edges_, node_labels_, std::move(features));
}

Graph Graph::with_uniform_features() const {
    return with_features(Matrix::ones(node_count_, 1));
}

Graph Graph::permuted(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != node_count_)
        throw std::invalid_argument("permuted: permutation length != node_count");
    std::vector<Edge> new_edges;
    new_edges.reserve(edges_.size());
    for (const auto& [u, v] : edges_) new_edges.emplace_back(perm[u], perm[v]);

    std::optional<std::vector<int>> new_labels;
    if (node_labels_) {
        new_labels.emplace(node_count_);
        for (int v = 0; v < node_count_; ++v) (*new_labels)[perm[v]] = (*node_labels_)[v];
    }
    std::optional<Matrix> new_features;
    if (node_features_) {
        new_features.emplace(node_features_->rows, node_features_->cols);
        for (int v = 0; v < node_count_; ++v)
            for (int c = 0; c < node_features_->cols; ++c)
                new_features->at(perm[v], c) = node_features_->at(v, c);
    }
    return Graph(node_count_, std::move(new_edges), std::move(new_labels), std::move(new_features));
}

LineGraph line_graph(const Graph& g) {
    LineGraph lg;
    lg.base_edge_list = g.edges();  // already canonical lexicographic order

    // Edge index incidence per vertex; two distinct edges share at most one
    // endpoint, so each adjacency is generated exactly once.
    std::vector<std::vector<int>> incident(g.node_count());
    for (int e = 0; e < static_cast<int>(lg.base_edge_list.size()); ++e) {
        incident[lg.base_edge_list[e].first].push_back(e);
        incident[lg.base_edge_list[e].second].push_back(e);
    }
    for (const auto& edge_ids : incident) {
        for (size_t i = 0; i < edge_ids.size(); ++i)
            for (size_t j = i + 1; j < edge_ids.size(); ++j)
                lg.lg_edges.emplace_back(edge_ids[i], edge_ids[j]);
    }
    for (auto& e : lg.lg_edges)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(lg.lg_edges.begin(), lg.lg_edges.end());
    return lg;
}

EgoSubgraph ego_subgraph(const Graph& g, int t) {
    if (t < 0 || t >= g.node_count())
        throw std::invalid_argument("ego_subgraph: node " + std::to_string(t) + " out of range");

    std::vector<int> members = g.neighbors(t);
    members.push_back(t);
    std::sort(members.begin(), members.end());

    std::vector<int> to_local(g.node_count(), -1);
    for (int i = 0; i < static_cast<int>(members.size()); ++i) to_local[members[i]] = i;

    std::vector<Edge> edges;
    for (int u : members)
        for (int v : g.neighbors(u))
            if (u < v && to_local[v] >= 0) edges.emplace_back(to_local[u], to_local[v]);

    std::optional<std::vector<int>> labels;
    if (g.node_labels()) {
        labels.emplace();
        for (int m : members) labels->push_back((*g.node_labels())[m]);
    }
    std::optional<Matrix> features;
    if (g.node_features()) {
        const Matrix& x = *g.node_features();
        features.emplace(static_cast<int>(members.size()), x.cols);
        for (int i = 0; i < static_cast<int>(members.size()); ++i)
            for (int c = 0; c < x.cols; ++c) features->at(i, c) = x.at(members[i], c);
    }
    return EgoSubgraph{Graph(static_cast<int>(members.size()), std::move(edges), std::move(labels),
                             std::move(features)),
                       std::move(members)};
}

Matrix degree_one_hot(const Graph& g, int max_degree) {
    Matrix out(g.node_count(), max_degree + 1);
    for (int v = 0; v < g.node_count(); ++v) {
        int d = g.degree(v);
        if (d > max_degree)
            throw std::invalid_argument("degree_one_hot: node " + std::to_string(v) + " has degree " +
                                        std::to_string(d) + " > max_degree " +
                                        std::to_string(max_degree));
        out.at(v, d) = 1.0;
    }
    return out;
}

Graph cycle_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return Graph(n, std::move(edges));
}

Graph path_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph(n, std::move(edges));
}

Graph complete_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

Graph star_graph(int leaves) {
    std::vector<Edge> edges;
    for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return Graph(leaves + 1, std::move(edges));
}

Graph disjoint_union(const Graph& a, const Graph& b) {
    std::vector<Edge> edges = a.edges();
    for (const auto& [u, v] : b.edges()) edges.emplace_back(u + a.node_count(), v + a.node_count());
    return Graph(a.node_count() + b.node_count(), std::move(edges));
}

Graph empty_graph(int n) { return Graph(n, {}); }

PairKind pair_kind_from_string(const std::string& name) {
    if (name == "onewl_blind") return PairKind::OneWlBlind;
    if (name == "whitney_exception") return PairKind::WhitneyException;
    if (name == "triangle_flag") return PairKind::TriangleFlag;
    throw std::invalid_argument("unknown pair kind: " + name +
                                " (expected onewl_blind|whitney_exception|triangle_flag)");
}

std::string to_string(PairKind kind) {
    switch (kind) {
        case PairKind::OneWlBlind: return "onewl_blind";
        case PairKind::WhitneyException: return "whitney_exception";
        case PairKind::TriangleFlag: return "triangle_flag";
    }
    return "?";
}

std::pair<Graph, Graph> generate_pair(PairKind kind) {
    switch (kind) {
        case PairKind::OneWlBlind: {
            Graph g = cycle_graph(6).with_uniform_features();
            Graph h = disjoint_union(complete_graph(3), complete_graph(3)).with_uniform_features();
            return {g, h};
        }
        case PairKind::WhitneyException: {
            return {complete_graph(3).with_uniform_features(), star_graph(3).with_uniform_features()};
        }
        case PairKind::TriangleFlag: {
            // C4 vs the diamond: the chord {0,2} closes two triangles at
            // once, so it is the single most triangle-critical edge.
            Graph g = cycle_graph(4).with_uniform_features();
            std::vector<Edge> edges = cycle_graph(4).edges();
            edges.push_back(triangle_flag_closing_edge());
            Graph h = Graph(4, std::move(edges)).with_uniform_features();
            return {g, h};
        }
    }
    throw std::invalid_argument("generate_pair: unknown kind");
}

Edge triangle_flag_closing_edge() { return {0, 2}; }

}  // namespace lgan
