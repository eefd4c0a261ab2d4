#include "lgan/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lgan/isomorphism.hpp"

#include "json.hpp"

namespace lgan {

void LganConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("LganConfig: layers must be >= 1");
    if (hidden_dim < 1) throw std::invalid_argument("LganConfig: hidden_dim must be >= 1");
    if (classifier_hidden < 1) throw std::invalid_argument("LganConfig: classifier_hidden must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("LganConfig: dropout must be in [0,1)");
}

LganVariant variant_from_string(const std::string& s) {
    if (s == "plain") return LganVariant::Plain;
    if (s == "residual") return LganVariant::Residual;
    throw std::invalid_argument("unknown variant: " + s + " (expected plain|residual)");
}

std::string to_string(LganVariant v) {
    return v == LganVariant::Plain ? "plain" : "residual";
}

Readout readout_from_string(const std::string& s) {
    if (s == "sum") return Readout::Sum;
    if (s == "mean") return Readout::Mean;
    throw std::invalid_argument("unknown readout: " + s + " (expected sum|mean)");
}

std::string to_string(Readout r) { return r == Readout::Sum ? "sum" : "mean"; }

GraphPlan build_plan(const Graph& g) {
    if (g.node_count() == 0)
        throw std::invalid_argument("build_plan: empty graph has no readout");
    if (!g.node_features())
        throw std::invalid_argument("build_plan: graph has no node features");

    // Canonical relabeling (respecting label/feature classes) fixes the
    // iteration order of every sum below independently of input indexing.
    CanonicalForm canon = canonical_form(g, content_color_classes(g));
    Graph cg = g.permuted(canon.labeling);

    GraphPlan plan;
    plan.num_nodes = g.node_count();
    plan.canon_of_orig = canon.labeling;
    plan.canon_edges = cg.edges();
    plan.features = *cg.node_features();

    std::vector<int> inverse(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) inverse[canon.labeling[v]] = v;
    for (const auto& [u, v] : plan.canon_edges) {
        int ou = inverse[u], ov = inverse[v];
        plan.orig_edges.emplace_back(std::min(ou, ov), std::max(ou, ov));
        plan.pair_u.push_back(u);
        plan.pair_v.push_back(v);
    }

    std::vector<std::vector<int>> incident(cg.node_count());
    for (int e = 0; e < static_cast<int>(plan.canon_edges.size()); ++e) {
        incident[plan.canon_edges[e].first].push_back(e);
        incident[plan.canon_edges[e].second].push_back(e);
    }
    plan.has_edges.assign(cg.node_count(), 0.0);
    for (int t = 0; t < cg.node_count(); ++t) {
        for (int e : incident[t]) {
            plan.tn_pair_index.push_back(e);
            plan.tn_segment.push_back(t);
        }
        if (!incident[t].empty()) plan.has_edges[t] = 1.0;

        auto edge_id = [&](int u, int v) {
            Edge key{std::min(u, v), std::max(u, v)};
            auto it = std::lower_bound(plan.canon_edges.begin(), plan.canon_edges.end(), key);
            return static_cast<int>(it - plan.canon_edges.begin());
        };
        const auto& nbrs = cg.neighbors(t);
        std::vector<int> nn;
        for (size_t i = 0; i < nbrs.size(); ++i) {
            for (size_t j = i + 1; j < nbrs.size(); ++j) {
                if (cg.has_edge(nbrs[i], nbrs[j]))
                    nn.push_back(edge_id(nbrs[i], nbrs[j]));
            }
        }
        std::sort(nn.begin(), nn.end());
        for (int e : nn) {
            plan.nn_pair_index.push_back(e);
            plan.nn_segment.push_back(t);
        }
    }
    return plan;
}

BatchPlan merge_plans(const std::vector<const GraphPlan*>& plans) {
    if (plans.empty()) throw std::invalid_argument("merge_plans: empty batch");
    BatchPlan b;
    b.num_graphs = static_cast<int>(plans.size());
    int feat_cols = plans[0]->features.cols;
    for (const GraphPlan* p : plans) {
        if (p->features.cols != feat_cols)
            throw std::invalid_argument("merge_plans: feature widths differ");
        b.num_nodes += p->num_nodes;
        b.num_pairs += static_cast<int>(p->canon_edges.size());
    }
    b.features = Matrix(b.num_nodes, feat_cols);
    int node_off = 0, pair_off = 0, gi = 0;
    for (const GraphPlan* p : plans) {
        for (size_t e = 0; e < p->canon_edges.size(); ++e) {
            b.pair_u.push_back(p->pair_u[e] + node_off);
            b.pair_v.push_back(p->pair_v[e] + node_off);
        }
        for (size_t i = 0; i < p->tn_pair_index.size(); ++i) {
            b.tn_pair_index.push_back(p->tn_pair_index[i] + pair_off);
            b.tn_segment.push_back(p->tn_segment[i] + node_off);
        }
        for (size_t i = 0; i < p->nn_pair_index.size(); ++i) {
            b.nn_pair_index.push_back(p->nn_pair_index[i] + pair_off);
            b.nn_segment.push_back(p->nn_segment[i] + node_off);
        }
        for (int v = 0; v < p->num_nodes; ++v) {
            b.has_edges.push_back(p->has_edges[v]);
            b.node_to_graph.push_back(gi);
            for (int c = 0; c < feat_cols; ++c)
                b.features.at(node_off + v, c) = p->features.at(v, c);
        }
        node_off += p->num_nodes;
        pair_off += static_cast<int>(p->canon_edges.size());
        ++gi;
    }
    return b;
}

MessageCounts message_counts(const Graph& g) {
    MessageCounts mc;
    for (int v = 0; v < g.node_count(); ++v) {
        mc.target_msgs += g.degree(v);
        const auto& nbrs = g.neighbors(v);
        for (size_t i = 0; i < nbrs.size(); ++i)
            for (size_t j = i + 1; j < nbrs.size(); ++j)
                if (g.has_edge(nbrs[i], nbrs[j])) ++mc.neighbor_msgs;
    }
    return mc;
}

namespace {

void add_linear(ParamSet& ps, const std::string& prefix, int in, int out, std::mt19937_64& rng,
                bool bias = true) {
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(in, out);
    for (double& x : w.data) x = dist(rng);
    ps.params.push_back({prefix + ".w", std::move(w)});
    if (bias) {
        std::uniform_real_distribution<double> bdist(-1.0 / std::sqrt(in), 1.0 / std::sqrt(in));
        Matrix b(1, out);
        for (double& x : b.data) x = bdist(rng);
        ps.params.push_back({prefix + ".b", std::move(b)});
    }
}

struct ParamTensors {
    const ParamSet* set;
    std::vector<Tensor> tensors;
    Tensor w(const std::string& name) const {
        int i = set->index_of(name);
        if (i < 0) throw std::out_of_range("missing parameter " + name);
        return tensors[i];
    }
};

Tensor linear(Tape& tape, const ParamTensors& pt, const std::string& prefix, Tensor x) {
    return tape.add_rowvec(tape.matmul(x, pt.w(prefix + ".w")), pt.w(prefix + ".b"));
}

Tensor dropout(Tape& tape, Tensor x, double rate, const ForwardOptions& opts) {
    if (!opts.training || rate <= 0.0) return x;
    if (!opts.rng) throw std::invalid_argument("lgan_forward: dropout needs an RNG in training mode");
    std::bernoulli_distribution keep(1.0 - rate);
    Matrix mask(x.rows(), x.cols());
    const double scale = 1.0 / (1.0 - rate);
    for (double& m : mask.data) m = keep(*opts.rng) ? scale : 0.0;
    return tape.hadamard_const(x, std::move(mask));
}

// Two-layer MLP: Linear -> ReLU -> Dropout -> Linear, optional final ReLU.
Tensor mlp2(Tape& tape, const ParamTensors& pt, const std::string& prefix, Tensor x,
            double drop_rate, const ForwardOptions& opts, bool final_relu) {
    Tensor h = tape.relu(linear(tape, pt, prefix + ".lin1", x));
    h = dropout(tape, h, drop_rate, opts);
    h = linear(tape, pt, prefix + ".lin2", h);
    return final_relu ? tape.relu(h) : h;
}

}  // namespace

ParamSet init_lgan_params(const LganConfig& cfg, int in_dim, int num_classes, unsigned seed) {
    cfg.validate();
    if (in_dim < 1) throw std::invalid_argument("init_lgan_params: in_dim must be >= 1");
    if (num_classes < 2) throw std::invalid_argument("init_lgan_params: need at least 2 classes");
    std::mt19937_64 rng(seed);
    ParamSet ps;
    const int h = cfg.hidden_dim;
    for (int l = 0; l < cfg.layers; ++l) {
        const int in = l == 0 ? in_dim : h;
        const std::string lp = "layer" + std::to_string(l);
        add_linear(ps, lp + ".branch_t.lin1", in, h, rng);
        add_linear(ps, lp + ".branch_t.lin2", h, h, rng);
        add_linear(ps, lp + ".branch_n.lin1", in, h, rng);
        add_linear(ps, lp + ".branch_n.lin2", h, h, rng);
        add_linear(ps, lp + ".fuse.lin1", 2 * h, h, rng);
        add_linear(ps, lp + ".fuse.lin2", h, h, rng);
        if (cfg.variant == LganVariant::Residual) {
            add_linear(ps, lp + ".res", in, h, rng, /*bias=*/false);
            add_linear(ps, lp + ".post", h, h, rng);
        }
    }
    add_linear(ps, "classifier.lin1", cfg.layers * h, cfg.classifier_hidden, rng);
    add_linear(ps, "classifier.lin2", cfg.classifier_hidden, num_classes, rng);
    return ps;
}

Tensor lgan_forward(Tape& tape, const BatchPlan& plan, const LganConfig& cfg,
                    const ParamSet& params, const ForwardOptions& opts,
                    std::vector<Tensor>* param_tensors) {
    cfg.validate();
    if (plan.num_graphs == 0 || plan.num_nodes == 0)
        throw std::invalid_argument("lgan_forward: empty batch has no readout");

    ParamTensors pt;
    pt.set = &params;
    for (const auto& p : params.params) pt.tensors.push_back(tape.input(p.value));
    if (param_tensors) *param_tensors = pt.tensors;

    Matrix node_mask(plan.num_nodes, 1);
    for (int v = 0; v < plan.num_nodes; ++v) node_mask.at(v, 0) = plan.has_edges[v];

    Tensor h = tape.constant(plan.features);
    std::vector<Tensor> skips;
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string lp = "layer" + std::to_string(l);

        // Line-graph node rows: one per edge, symmetric sum of the endpoints.
        Tensor pairs = tape.add(tape.row_select(h, plan.pair_u), tape.row_select(h, plan.pair_v));
        if (opts.edge_mask) pairs = tape.row_scale(pairs, *opts.edge_mask);

        Tensor at_in = tape.segment_sum(tape.row_select(pairs, plan.tn_pair_index),
                                        plan.tn_segment, plan.num_nodes);
        Tensor an_in = tape.segment_sum(tape.row_select(pairs, plan.nn_pair_index),
                                        plan.nn_segment, plan.num_nodes);
        Tensor a = mlp2(tape, pt, lp + ".branch_t", at_in, cfg.dropout, opts, true);
        Tensor b = mlp2(tape, pt, lp + ".branch_n", an_in, cfg.dropout, opts, true);
        Tensor cat = tape.concat_cols({a, b});

        if (cfg.variant == LganVariant::Plain) {
            h = mlp2(tape, pt, lp + ".fuse", cat, cfg.dropout, opts, true);
        } else {
            // z is forced to zero on nodes with an empty ego line graph, so the
            // update degenerates to phi'(W h) there.
            Tensor z = mlp2(tape, pt, lp + ".fuse", cat, cfg.dropout, opts, false);
            Tensor z_masked = tape.row_scale(z, tape.constant(node_mask));
            Tensor res = tape.matmul(h, pt.w(lp + ".res.w"));
            h = tape.relu(linear(tape, pt, lp + ".post", tape.add(res, z_masked)));
        }
        skips.push_back(h);
    }

    Tensor hskip = skips.size() == 1 ? skips[0] : tape.concat_cols(skips);
    Tensor graph_vec = tape.segment_sum(hskip, plan.node_to_graph, plan.num_graphs);
    if (cfg.readout == Readout::Mean) {
        std::vector<int> sizes(plan.num_graphs, 0);
        for (int g : plan.node_to_graph) ++sizes[g];
        Matrix inv(plan.num_graphs, 1);
        for (int g = 0; g < plan.num_graphs; ++g) inv.at(g, 0) = 1.0 / sizes[g];
        graph_vec = tape.row_scale(graph_vec, tape.constant(std::move(inv)));
    }

    Tensor c1 = tape.relu(linear(tape, pt, "classifier.lin1", graph_vec));
    c1 = dropout(tape, c1, cfg.dropout, opts);
    return linear(tape, pt, "classifier.lin2", c1);
}

std::vector<double> forward_graph(const Graph& g, const LganConfig& cfg, const ParamSet& params) {
    GraphPlan plan = build_plan(g);
    BatchPlan batch = merge_plans({&plan});
    Tape tape;
    Tensor logits = lgan_forward(tape, batch, cfg, params, ForwardOptions{});
    return logits.value().data;
}

namespace {
using nlohmann::json;

json config_to_json(const LganConfig& cfg) {
    return json{{"layers", cfg.layers},
                {"hidden_dim", cfg.hidden_dim},
                {"variant", to_string(cfg.variant)},
                {"dropout", cfg.dropout},
                {"readout", to_string(cfg.readout)},
                {"classifier_hidden", cfg.classifier_hidden}};
}

LganConfig config_from_json(const json& j) {
    LganConfig cfg;
    cfg.layers = j.at("layers").get<int>();
    cfg.hidden_dim = j.at("hidden_dim").get<int>();
    cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    cfg.dropout = j.at("dropout").get<double>();
    cfg.readout = readout_from_string(j.at("readout").get<std::string>());
    cfg.classifier_hidden = j.at("classifier_hidden").get<int>();
    return cfg;
}
}  // namespace

void save_checkpoint(const std::string& path, const LganConfig& cfg, int in_dim, int num_classes,
                     const ParamSet& params) {
    json j;
    j["format_version"] = 1;
    j["config"] = config_to_json(cfg);
    j["in_dim"] = in_dim;
    j["num_classes"] = num_classes;
    json p = json::object();
    for (const auto& np : params.params)
        p[np.name] = json{{"shape", {np.value.rows, np.value.cols}}, {"data", np.value.data}};
    j["params"] = std::move(p);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint to " + path);
    out << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint from " + path);
    json j = json::parse(in);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint format version");
    Checkpoint ck;
    ck.config = config_from_json(j.at("config"));
    ck.in_dim = j.at("in_dim").get<int>();
    ck.num_classes = j.at("num_classes").get<int>();
    for (auto& [name, pj] : j.at("params").items()) {
        auto shape = pj.at("shape").get<std::vector<int>>();
        auto data = pj.at("data").get<std::vector<double>>();
        ck.params.params.push_back({name, Matrix(shape.at(0), shape.at(1), std::move(data))});
    }
    // nlohmann::json iterates objects in key order already; sort to pin it.
    std::sort(ck.params.params.begin(), ck.params.params.end(),
              [](const NamedParam& a, const NamedParam& b) { return a.name < b.name; });
    return ck;
}

}  // namespace lgan
