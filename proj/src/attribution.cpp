#include "lgan/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lgan {

namespace {

// Logits for a single graph with a per-edge mask; optionally reports the
// gradient of logit `target` with respect to the mask.
std::vector<double> masked_forward(const LganConfig& cfg, const ParamSet& params,
                                   const GraphPlan& plan, const std::vector<double>& mask,
                                   int target, std::vector<double>* mask_grad) {
    BatchPlan batch = merge_plans({&plan});
    Tape tape;
    Matrix m(static_cast<int>(mask.size()), 1, std::vector<double>(mask));
    Tensor mask_t = tape.input(std::move(m));
    ForwardOptions opts;
    opts.edge_mask = mask_t;
    Tensor logits = lgan_forward(tape, batch, cfg, params, opts);
    if (mask_grad) {
        Matrix onehot(logits.value().cols, 1);
        onehot.at(target, 0) = 1.0;
        Tensor scalar = tape.matmul(logits, tape.constant(std::move(onehot)));
        tape.backward(scalar);
        *mask_grad = mask_t.grad().data;
    }
    return logits.value().data;
}

}  // namespace

AttributionResult ig_edge_attribution(const LganConfig& cfg, const ParamSet& params,
                                      const Graph& g, int target_class, int steps, int graph_id) {
    if (params.params.empty())
        throw std::invalid_argument("ig_edge_attribution: model has no parameters");
    if (steps < 8) throw std::invalid_argument("ig_edge_attribution: steps must be >= 8");

    GraphPlan plan = build_plan(g);
    const int m = static_cast<int>(plan.canon_edges.size());

    std::vector<double> ones(m, 1.0);
    std::vector<double> full_logits = masked_forward(cfg, params, plan, ones, 0, nullptr);
    int predicted = 0;
    for (size_t c = 1; c < full_logits.size(); ++c)
        if (full_logits[c] > full_logits[predicted]) predicted = static_cast<int>(c);
    int target = target_class >= 0 ? target_class : predicted;
    if (target >= static_cast<int>(full_logits.size()))
        throw std::invalid_argument("ig_edge_attribution: target class out of range");

    std::vector<double> accumulated(m, 0.0);
    for (int step = 0; step < steps; ++step) {
        const double alpha = static_cast<double>(step) / steps;
        std::vector<double> mask(m, alpha);
        std::vector<double> grad;
        masked_forward(cfg, params, plan, mask, target, &grad);
        for (int e = 0; e < m; ++e) accumulated[e] += grad[e];
    }

    AttributionResult result;
    result.graph_id = graph_id;
    result.predicted_class = predicted;
    result.target_class = target;
    result.steps = steps;
    // Map pair rows back to the input graph's edge order.
    result.edges = g.edges();
    result.scores.assign(result.edges.size(), 0.0);
    for (int e = 0; e < m; ++e) {
        auto it = std::lower_bound(result.edges.begin(), result.edges.end(), plan.orig_edges[e]);
        result.scores[it - result.edges.begin()] = accumulated[e] / steps;
    }
    for (double s : result.scores)
        if (!std::isfinite(s)) throw std::runtime_error("ig_edge_attribution: non-finite score");
    return result;
}

double masked_logit(const LganConfig& cfg, const ParamSet& params, const Graph& g,
                    double mask_value, int target_class) {
    GraphPlan plan = build_plan(g);
    std::vector<double> mask(plan.canon_edges.size(), mask_value);
    std::vector<double> logits = masked_forward(cfg, params, plan, mask, 0, nullptr);
    return logits.at(target_class);
}

void export_annotated(const Graph& g, const AttributionResult& attr, const std::string& path) {
    if (attr.edges != g.edges())
        throw std::invalid_argument("export_annotated: attribution does not match the graph");

    double max_abs = 0.0;
    for (double s : attr.scores) max_abs = std::max(max_abs, std::fabs(s));
    const bool all_zero = max_abs == 0.0;

    std::ofstream dot(path);
    if (!dot) throw std::runtime_error("cannot write " + path);
    dot << "graph attribution {\n";
    dot << "  node [shape=circle];\n";
    for (size_t e = 0; e < attr.edges.size(); ++e) {
        double w = all_zero ? 0.5 : std::fabs(attr.scores[e]) / max_abs;
        // Red saturation tracks importance.
        dot << "  " << attr.edges[e].first << " -- " << attr.edges[e].second << " [weight=\"" << w
            << "\", penwidth=" << (1.0 + 4.0 * w) << ", color=\"0.000 " << w << " 0.800\"];\n";
    }
    for (int v = 0; v < g.node_count(); ++v) dot << "  " << v << ";\n";
    dot << "}\n";

    nlohmann::json j;
    j["graph_id"] = attr.graph_id;
    j["target_class"] = attr.target_class;
    j["steps"] = attr.steps;
    j["baseline"] = attr.baseline;
    j["all_zero_scores"] = all_zero;
    nlohmann::json edges = nlohmann::json::array();
    for (size_t e = 0; e < attr.edges.size(); ++e)
        edges.push_back({{"u", attr.edges[e].first},
                         {"v", attr.edges[e].second},
                         {"score", attr.scores[e]}});
    j["edges"] = std::move(edges);
    std::ofstream sidecar(path + ".json");
    sidecar << j.dump(2) << '\n';
}

}  // namespace lgan
