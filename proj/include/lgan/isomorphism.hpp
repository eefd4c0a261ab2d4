#pragma once

#include <cstdint>
#include <vector>

#include "lgan/graph.hpp"

namespace lgan {

/// Exhaustive isomorphism oracle for graphs up to 9 nodes. The bijection must
/// preserve node labels and feature rows exactly. Throws on larger inputs.
bool brute_force_isomorphic(const Graph& g, const Graph& h);

inline constexpr int kBruteForceNodeLimit = 9;

/// Canonical labeling of a (optionally vertex-colored) graph via equitable
/// refinement plus individualization. Two graphs get equal certificates iff
/// they are isomorphic (respecting the given colors).
struct CanonicalForm {
    std::vector<int> labeling;        // old index -> canonical index
    std::vector<uint64_t> certificate;  // color classes then adjacency bits
};

CanonicalForm canonical_form(const Graph& g, const std::vector<int>& init_colors = {});

/// Initial color classes derived from node labels/features by content, so the
/// classes are invariant under relabeling. Uniform when neither is present.
std::vector<int> content_color_classes(const Graph& g);

/// All unlabeled graphs on exactly n nodes, one canonical representative per
/// isomorphism class, in certificate order. Built level by level.
std::vector<Graph> enumerate_graphs(int n);

/// Connected representatives on exactly n nodes.
std::vector<Graph> enumerate_connected(int n);

/// Representatives with minimum degree >= 1 (every ego line graph non-empty),
/// for n = 2..max_nodes, smaller n first.
std::vector<Graph> enumerate_min_degree1(int max_nodes);

bool is_connected(const Graph& g);

}  // namespace lgan
