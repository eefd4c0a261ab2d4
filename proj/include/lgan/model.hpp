#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lgan/autodiff.hpp"
#include "lgan/graph.hpp"

namespace lgan {

enum class LganVariant { Plain, Residual };
enum class Readout { Sum, Mean };

struct LganConfig {
    int layers = 2;
    int hidden_dim = 32;
    LganVariant variant = LganVariant::Plain;
    double dropout = 0.0;
    Readout readout = Readout::Sum;
    int classifier_hidden = 32;

    void validate() const;
};

LganVariant variant_from_string(const std::string& s);
std::string to_string(LganVariant v);
Readout readout_from_string(const std::string& s);
std::string to_string(Readout r);

/// Precomputed aggregation indices for one graph. Nodes and edges are in a
/// canonical order (colored canonical labeling), which pins the summation
/// order inside every segment and makes the forward pass exactly invariant
/// under input relabeling.
struct GraphPlan {
    int num_nodes = 0;
    std::vector<int> canon_of_orig;       // original node id -> canonical id
    std::vector<Edge> canon_edges;        // lexicographic in canonical ids
    std::vector<Edge> orig_edges;         // orig_edges[e] is canon_edges[e] in input ids
    std::vector<int> pair_u, pair_v;      // canonical endpoints per pair row
    std::vector<int> tn_pair_index;       // target-neighbor gather, one per (t, incident e)
    std::vector<int> tn_segment;
    std::vector<int> nn_pair_index;       // neighbor-neighbor gather, one per (t, e in N(t))
    std::vector<int> nn_segment;
    std::vector<double> has_edges;        // per node, 1.0 if its ego edge set is non-empty
    Matrix features;                      // canonical node order
};

GraphPlan build_plan(const Graph& g);

/// Disjoint union of several graph plans plus readout segments.
struct BatchPlan {
    int num_nodes = 0;
    int num_graphs = 0;
    int num_pairs = 0;
    std::vector<int> pair_u, pair_v;
    std::vector<int> tn_pair_index, tn_segment;
    std::vector<int> nn_pair_index, nn_segment;
    std::vector<double> has_edges;
    std::vector<int> node_to_graph;
    Matrix features;
};

BatchPlan merge_plans(const std::vector<const GraphPlan*>& plans);

/// Exact message counts per Eq-10-style accounting: (sum of degrees,
/// sum over nodes of edges among their neighbors).
struct MessageCounts {
    long target_msgs = 0;
    long neighbor_msgs = 0;
};

MessageCounts message_counts(const Graph& g);

ParamSet init_lgan_params(const LganConfig& cfg, int in_dim, int num_classes, unsigned seed);

struct ForwardOptions {
    bool training = false;
    std::mt19937* rng = nullptr;                 // required when training with dropout
    std::optional<Tensor> edge_mask;             // num_pairs x 1, scales pair rows
};

/// Builds the network on the tape and returns logits (num_graphs x classes).
/// `param_tensors` receives the tape inputs in ParamSet order so callers can
/// read gradients after backward().
Tensor lgan_forward(Tape& tape, const BatchPlan& plan, const LganConfig& cfg,
                    const ParamSet& params, const ForwardOptions& opts,
                    std::vector<Tensor>* param_tensors = nullptr);

/// Single-graph convenience: plan + tape under the hood, eval mode.
std::vector<double> forward_graph(const Graph& g, const LganConfig& cfg, const ParamSet& params);

// Checkpoint: JSON with a config header and named row-major parameter blobs.
void save_checkpoint(const std::string& path, const LganConfig& cfg, int in_dim, int num_classes,
                     const ParamSet& params);

struct Checkpoint {
    LganConfig config;
    int in_dim = 0;
    int num_classes = 0;
    ParamSet params;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace lgan
