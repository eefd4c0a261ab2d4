#include "doctest.h"

#include <cmath>
#include <random>

#include "lgan/graph.hpp"
#include "lgan/model.hpp"

using namespace lgan;

namespace {

Graph random_featured_graph(int n, double p, std::mt19937& rng) {
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
    Graph g(n, std::move(edges));
    int dmax = 0;
    for (int v = 0; v < n; ++v) dmax = std::max(dmax, g.degree(v));
    return g.with_features(degree_one_hot(g, dmax));
}

std::vector<int> random_permutation(int n, std::mt19937& rng) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

LganConfig small_config(LganVariant variant) {
    LganConfig cfg;
    cfg.layers = 2;
    cfg.hidden_dim = 8;
    cfg.classifier_hidden = 8;
    cfg.variant = variant;
    return cfg;
}

}  // namespace

TEST_CASE("plan construction") {
    SUBCASE("pair rows are symmetric sums") {
        Matrix x(2, 2, {1, 0, 0, 1});
        Graph g = Graph(2, {{0, 1}}).with_features(x);
        GraphPlan plan = build_plan(g);
        BatchPlan batch = merge_plans({&plan});
        Tape tape;
        Tensor h = tape.input(batch.features);
        Tensor pairs = tape.add(tape.row_select(h, batch.pair_u), tape.row_select(h, batch.pair_v));
        CHECK(pairs.value().data == std::vector<double>{1, 1});
    }
    SUBCASE("tn and nn list lengths follow degrees and triangles") {
        GraphPlan c6 = build_plan(cycle_graph(6).with_uniform_features());
        CHECK(c6.tn_pair_index.size() == 12);
        CHECK(c6.nn_pair_index.size() == 0);
        GraphPlan k4 = build_plan(complete_graph(4).with_uniform_features());
        CHECK(k4.tn_pair_index.size() == 12);
        CHECK(k4.nn_pair_index.size() == 12);  // 4 triangles x 3
    }
    SUBCASE("empty graph refused, featureless refused") {
        CHECK_THROWS(build_plan(Graph(0, {})));
        CHECK_THROWS(build_plan(cycle_graph(3)));
    }
    SUBCASE("edgeless graphs plan fine") {
        GraphPlan plan = build_plan(empty_graph(3).with_uniform_features());
        CHECK(plan.tn_pair_index.empty());
        CHECK(plan.has_edges == std::vector<double>{0.0, 0.0, 0.0});
    }
}

TEST_CASE("message counts") {
    SUBCASE("C6") {
        MessageCounts mc = message_counts(cycle_graph(6));
        CHECK(mc.target_msgs == 12);
        CHECK(mc.neighbor_msgs == 0);
    }
    SUBCASE("two triangles") {
        MessageCounts mc = message_counts(disjoint_union(complete_graph(3), complete_graph(3)));
        CHECK(mc.target_msgs == 12);
        CHECK(mc.neighbor_msgs == 6);
    }
    SUBCASE("complete graphs match the closed form") {
        for (int n : {4, 5, 6}) {
            MessageCounts mc = message_counts(complete_graph(n));
            CHECK(mc.target_msgs == n * (n - 1));
            CHECK(mc.neighbor_msgs == n * (n - 1) * (n - 2) / 2);
        }
    }
    SUBCASE("plan sizes agree with the counts") {
        std::mt19937 rng(9);
        for (int trial = 0; trial < 10; ++trial) {
            Graph g = random_featured_graph(8, 0.4, rng);
            MessageCounts mc = message_counts(g);
            GraphPlan plan = build_plan(g);
            CHECK(static_cast<long>(plan.tn_pair_index.size()) == mc.target_msgs);
            CHECK(static_cast<long>(plan.nn_pair_index.size()) == mc.neighbor_msgs);
        }
    }
    SUBCASE("neighbor messages bounded by sum of C(d,2)") {
        std::mt19937 rng(10);
        for (int trial = 0; trial < 20; ++trial) {
            Graph g = random_featured_graph(7, 0.5, rng);
            MessageCounts mc = message_counts(g);
            long bound = 0;
            for (int v = 0; v < g.node_count(); ++v)
                bound += static_cast<long>(g.degree(v)) * (g.degree(v) - 1) / 2;
            CHECK(mc.neighbor_msgs <= bound);
        }
        // Equality when every open neighborhood is a clique.
        MessageCounts k5 = message_counts(complete_graph(5));
        CHECK(k5.neighbor_msgs == 5 * (4 * 3 / 2));
    }
}

TEST_CASE("forward pass shapes and contracts") {
    LganConfig cfg = small_config(LganVariant::Plain);
    auto [g, h] = generate_pair(PairKind::OneWlBlind);
    ParamSet params = init_lgan_params(cfg, 1, 3, 17);

    SUBCASE("logit width equals the class count") {
        std::vector<double> logits = forward_graph(g, cfg, params);
        CHECK(logits.size() == 3);
    }
    SUBCASE("single-node graph runs through the fallback chain") {
        ParamSet p2 = init_lgan_params(small_config(LganVariant::Residual), 1, 2, 3);
        std::vector<double> logits =
            forward_graph(Graph(1, {}).with_uniform_features(), small_config(LganVariant::Residual), p2);
        CHECK(logits.size() == 2);
        for (double v : logits) CHECK(std::isfinite(v));
    }
    SUBCASE("batching matches single-graph forwards") {
        GraphPlan pg = build_plan(g), ph = build_plan(h);
        BatchPlan batch = merge_plans({&pg, &ph});
        Tape tape;
        Tensor logits = lgan_forward(tape, batch, cfg, params, ForwardOptions{});
        std::vector<double> lg = forward_graph(g, cfg, params);
        std::vector<double> lh = forward_graph(h, cfg, params);
        for (int c = 0; c < 3; ++c) {
            CHECK(logits.value().at(0, c) == doctest::Approx(lg[c]).epsilon(1e-12));
            CHECK(logits.value().at(1, c) == doctest::Approx(lh[c]).epsilon(1e-12));
        }
    }
}

TEST_CASE("C6 neighbor branch receives a zero row") {
    // No neighbor-neighbor pairs in a cycle: the AGGR_n input is all zeros.
    GraphPlan plan = build_plan(cycle_graph(6).with_uniform_features());
    BatchPlan batch = merge_plans({&plan});
    Tape tape;
    Tensor hmat = tape.input(batch.features);
    Tensor pairs = tape.add(tape.row_select(hmat, batch.pair_u), tape.row_select(hmat, batch.pair_v));
    Tensor an_in = tape.segment_sum(tape.row_select(pairs, batch.nn_pair_index), batch.nn_segment,
                                    batch.num_nodes);
    for (double v : an_in.value().data) CHECK(v == 0.0);
}

TEST_CASE("permutation invariance of forward_graph is exact") {
    std::mt19937 rng(23);
    for (LganVariant variant : {LganVariant::Plain, LganVariant::Residual}) {
        LganConfig cfg = small_config(variant);
        for (int trial = 0; trial < 6; ++trial) {
            int n = 4 + static_cast<int>(rng() % 5);
            Graph g = random_featured_graph(n, 0.5, rng);
            ParamSet params = init_lgan_params(cfg, g.node_features()->cols, 2,
                                               static_cast<unsigned>(trial) + 100);
            std::vector<double> base = forward_graph(g, cfg, params);
            for (int rep = 0; rep < 3; ++rep) {
                Graph p = g.permuted(random_permutation(n, rng));
                std::vector<double> relabeled = forward_graph(p, cfg, params);
                CHECK(relabeled == base);  // bitwise, thanks to canonical ordering
            }
        }
    }
}

TEST_CASE("isolated-node fallback is exactly phi'(W h)") {
    LganConfig cfg = small_config(LganVariant::Residual);
    cfg.layers = 1;
    Graph g = empty_graph(3).with_uniform_features();
    ParamSet params = init_lgan_params(cfg, 1, 2, 55);

    GraphPlan plan = build_plan(g);
    BatchPlan batch = merge_plans({&plan});
    Tape tape;
    Tensor logits = lgan_forward(tape, batch, cfg, params, ForwardOptions{});

    // Reference: h1 = relu(W_post (X W_res) + b_post), then the classifier.
    Tape ref;
    Tensor x = ref.input(batch.features);
    Tensor wres = ref.input(params.at("layer0.res.w"));
    Tensor h1 = ref.relu(ref.add_rowvec(ref.matmul(ref.matmul(x, wres), ref.input(params.at("layer0.post.w"))),
                                        ref.input(params.at("layer0.post.b"))));
    Tensor pooled = ref.segment_sum(h1, batch.node_to_graph, 1);
    Tensor c1 = ref.relu(ref.add_rowvec(ref.matmul(pooled, ref.input(params.at("classifier.lin1.w"))),
                                        ref.input(params.at("classifier.lin1.b"))));
    Tensor expect = ref.add_rowvec(ref.matmul(c1, ref.input(params.at("classifier.lin2.w"))),
                                   ref.input(params.at("classifier.lin2.b")));
    CHECK(logits.value().data == expect.value().data);
}

TEST_CASE("gradients flow through a full 2-layer model") {
    std::mt19937 rng(31);
    Graph g = random_featured_graph(5, 0.6, rng);
    const double tol = 1e-4, step = 1e-5;
    for (LganVariant variant : {LganVariant::Plain, LganVariant::Residual}) {
        LganConfig cfg = small_config(variant);
        ParamSet params = init_lgan_params(cfg, g.node_features()->cols, 2, 77);
        GraphPlan plan = build_plan(g);
        BatchPlan batch = merge_plans({&plan});

        auto loss_value = [&](const ParamSet& ps) {
            Tape tape;
            Tensor logits = lgan_forward(tape, batch, cfg, ps, ForwardOptions{});
            return tape.softmax_cross_entropy(logits, {1}).value().data[0];
        };

        Tape tape;
        std::vector<Tensor> tensors;
        Tensor logits = lgan_forward(tape, batch, cfg, params, ForwardOptions{}, &tensors);
        tape.backward(tape.softmax_cross_entropy(logits, {1}));

        for (size_t pi = 0; pi < params.params.size(); ++pi) {
            const Matrix& analytic = tensors[pi].grad();
            for (size_t k = 0; k < analytic.data.size(); ++k) {
                ParamSet plus = params, minus = params;
                plus.params[pi].value.data[k] += step;
                minus.params[pi].value.data[k] -= step;
                double numeric = (loss_value(plus) - loss_value(minus)) / (2 * step);
                double denom = std::max({std::fabs(numeric), std::fabs(analytic.data[k]), 1e-6});
                CHECK(std::fabs(numeric - analytic.data[k]) / denom < tol);
            }
        }
    }
}

TEST_CASE("mean readout") {
    LganConfig sum_cfg = small_config(LganVariant::Plain);
    LganConfig mean_cfg = sum_cfg;
    mean_cfg.readout = Readout::Mean;
    ParamSet params = init_lgan_params(sum_cfg, 1, 2, 7);

    SUBCASE("equals sum readout on a single-node graph") {
        Graph g = Graph(1, {}).with_uniform_features();
        CHECK(forward_graph(g, sum_cfg, params) == forward_graph(g, mean_cfg, params));
    }
    SUBCASE("differs from sum readout on larger graphs") {
        Graph g = cycle_graph(4).with_uniform_features();
        CHECK(forward_graph(g, sum_cfg, params) != forward_graph(g, mean_cfg, params));
    }
}

TEST_CASE("dropout is seeded and active only in training mode") {
    LganConfig cfg = small_config(LganVariant::Plain);
    cfg.dropout = 0.5;
    Graph g = cycle_graph(5).with_uniform_features();
    ParamSet params = init_lgan_params(cfg, 1, 2, 11);
    GraphPlan plan = build_plan(g);
    BatchPlan batch = merge_plans({&plan});

    auto train_logits = [&](unsigned seed) {
        std::mt19937 rng(seed);
        Tape tape;
        ForwardOptions opts;
        opts.training = true;
        opts.rng = &rng;
        return lgan_forward(tape, batch, cfg, params, opts).value().data;
    };
    CHECK(train_logits(3) == train_logits(3));
    CHECK(train_logits(3) != train_logits(4));

    // Eval mode ignores dropout entirely.
    Tape tape;
    std::vector<double> eval1 = lgan_forward(tape, batch, cfg, params, ForwardOptions{}).value().data;
    LganConfig no_drop = cfg;
    no_drop.dropout = 0.0;
    Tape tape2;
    std::vector<double> eval2 =
        lgan_forward(tape2, batch, no_drop, params, ForwardOptions{}).value().data;
    CHECK(eval1 == eval2);

    SUBCASE("training mode without an RNG is an error") {
        Tape t3;
        ForwardOptions opts;
        opts.training = true;
        CHECK_THROWS(lgan_forward(t3, batch, cfg, params, opts));
    }
}

TEST_CASE("checkpoint round trip") {
    LganConfig cfg = small_config(LganVariant::Residual);
    cfg.dropout = 0.25;
    ParamSet params = init_lgan_params(cfg, 3, 2, 99);
    std::string path = "/tmp/lgan_test_checkpoint.json";
    save_checkpoint(path, cfg, 3, 2, params);
    Checkpoint ck = load_checkpoint(path);
    CHECK(ck.in_dim == 3);
    CHECK(ck.num_classes == 2);
    CHECK(ck.config.layers == cfg.layers);
    CHECK(ck.config.variant == cfg.variant);
    CHECK(ck.config.dropout == cfg.dropout);
    REQUIRE(ck.params.params.size() == params.params.size());
    for (const auto& p : params.params) CHECK(ck.params.at(p.name) == p.value);

    Graph g = cycle_graph(5).with_features(Matrix::ones(5, 3));
    CHECK(forward_graph(g, cfg, params) == forward_graph(g, ck.config, ck.params));
}
