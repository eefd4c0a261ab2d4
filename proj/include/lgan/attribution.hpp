#pragma once

#include <string>
#include <vector>

#include "lgan/graph.hpp"
#include "lgan/model.hpp"

namespace lgan {

struct AttributionResult {
    int graph_id = 0;
    std::vector<Edge> edges;          // in the input graph's edge order
    std::vector<double> scores;       // one per edge
    int predicted_class = 0;
    int target_class = 0;
    std::string baseline = "zero-mask";
    int steps = 0;
};

/// Integrated Gradients over multiplicative edge masks: every pair-embedding
/// row belonging to edge e is scaled by alpha_e wherever it is used, and the
/// target-class logit gradient is integrated along the straight path from the
/// all-zero to the all-one mask (left Riemann sum with `steps` points).
/// target_class < 0 means "use the predicted class".
AttributionResult ig_edge_attribution(const LganConfig& cfg, const ParamSet& params,
                                      const Graph& g, int target_class, int steps,
                                      int graph_id = 0);

/// Target-class logit under a uniform mask value; completeness compares
/// sum(scores) against masked_logit(1) - masked_logit(0).
double masked_logit(const LganConfig& cfg, const ParamSet& params, const Graph& g,
                    double mask_value, int target_class);

/// DOT file with weight/color per edge scaled to [0,1] by max-abs
/// normalization, plus a JSON sidecar holding raw scores.
void export_annotated(const Graph& g, const AttributionResult& attr, const std::string& path);

}  // namespace lgan
