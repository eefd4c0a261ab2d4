#include "doctest.h"

#include <random>

#include "lgan/graph.hpp"
#include "lgan/isomorphism.hpp"

using namespace lgan;

namespace {

Graph random_graph(int n, double p, std::mt19937& rng) {
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

std::vector<int> random_permutation(int n, std::mt19937& rng) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

}  // namespace

TEST_CASE("brute force isomorphism oracle") {
    SUBCASE("K3 vs relabeled K3") {
        Graph k3 = complete_graph(3);
        CHECK(brute_force_isomorphic(k3, k3.permuted({2, 0, 1})));
    }
    SUBCASE("C6 vs two triangles: same degrees, different graphs") {
        Graph c6 = cycle_graph(6);
        Graph kk = disjoint_union(complete_graph(3), complete_graph(3));
        CHECK(c6.edge_count() == kk.edge_count());
        CHECK(!brute_force_isomorphic(c6, kk));
    }
    SUBCASE("K3 vs K1,3") {
        CHECK(!brute_force_isomorphic(complete_graph(3), star_graph(3)));
    }
    SUBCASE("their line graphs collide (Whitney exception)") {
        CHECK(brute_force_isomorphic(line_graph(complete_graph(3)).as_graph(),
                                     line_graph(star_graph(3)).as_graph()));
    }
    SUBCASE("node limit enforced") {
        CHECK_THROWS_WITH_AS(brute_force_isomorphic(complete_graph(10), complete_graph(10)),
                             doctest::Contains("9"), std::invalid_argument);
    }
    SUBCASE("labels must be preserved") {
        Graph a(2, {{0, 1}}, std::vector<int>{0, 1});
        Graph b(2, {{0, 1}}, std::vector<int>{0, 0});
        CHECK(!brute_force_isomorphic(a, b));
        Graph c(2, {{0, 1}}, std::vector<int>{1, 0});
        CHECK(brute_force_isomorphic(a, c));
    }
    SUBCASE("empty graphs are isomorphic") {
        CHECK(brute_force_isomorphic(Graph(0, {}), Graph(0, {})));
    }
}

TEST_CASE("canonical form agrees with the brute-force oracle") {
    std::mt19937 rng(42);
    SUBCASE("relabeling preserves the certificate") {
        for (int trial = 0; trial < 60; ++trial) {
            int n = 2 + static_cast<int>(rng() % 7);
            Graph g = random_graph(n, 0.4, rng);
            Graph h = g.permuted(random_permutation(n, rng));
            CHECK(canonical_form(g).certificate == canonical_form(h).certificate);
        }
    }
    SUBCASE("certificate equality matches brute-force verdicts") {
        for (int trial = 0; trial < 60; ++trial) {
            int n = 2 + static_cast<int>(rng() % 5);
            Graph g = random_graph(n, 0.5, rng);
            Graph h = random_graph(n, 0.5, rng);
            bool by_cert = canonical_form(g).certificate == canonical_form(h).certificate;
            CHECK(by_cert == brute_force_isomorphic(g, h));
        }
    }
    SUBCASE("the labeling actually canonicalizes") {
        Graph g = random_graph(7, 0.4, rng);
        CanonicalForm cf = canonical_form(g);
        Graph canon = g.permuted(cf.labeling);
        Graph canon2 = g.permuted(random_permutation(7, rng));
        CanonicalForm cf2 = canonical_form(canon2);
        CHECK(canon.edges() == canon2.permuted(cf2.labeling).edges());
    }
    SUBCASE("vertex colors constrain the mapping") {
        std::vector<int> colors_a{0, 1, 0};
        std::vector<int> colors_b{1, 0, 0};
        Graph p3 = path_graph(3);
        CHECK(canonical_form(p3, colors_a).certificate !=
              canonical_form(p3, colors_b).certificate);
        // Swapping the two end nodes is an automorphism that respects {0,1,0}.
        CHECK(canonical_form(p3, colors_a).certificate ==
              canonical_form(p3.permuted({2, 1, 0}), colors_a).certificate);
    }
}

TEST_CASE("graph enumeration counts match the literature") {
    // Unlabeled graphs on n nodes: 1, 2, 4, 11, 34, 156, 1044.
    CHECK(enumerate_graphs(1).size() == 1);
    CHECK(enumerate_graphs(2).size() == 2);
    CHECK(enumerate_graphs(3).size() == 4);
    CHECK(enumerate_graphs(4).size() == 11);
    CHECK(enumerate_graphs(5).size() == 34);
    CHECK(enumerate_graphs(6).size() == 156);
    CHECK(enumerate_graphs(7).size() == 1044);

    // Connected: 1, 1, 2, 6, 21, 112, 853.
    CHECK(enumerate_connected(2).size() == 1);
    CHECK(enumerate_connected(3).size() == 2);
    CHECK(enumerate_connected(4).size() == 6);
    CHECK(enumerate_connected(5).size() == 21);
    CHECK(enumerate_connected(6).size() == 112);
    CHECK(enumerate_connected(7).size() == 853);

    // Minimum degree >= 1 on exactly n nodes: 1, 2, 7, 23, 122, 888.
    CHECK(enumerate_min_degree1(4).size() == 1 + 2 + 7);
    CHECK(enumerate_min_degree1(6).size() == 1 + 2 + 7 + 23 + 122);
}

TEST_CASE("connectivity") {
    CHECK(is_connected(cycle_graph(5)));
    CHECK(!is_connected(disjoint_union(complete_graph(3), complete_graph(3))));
    CHECK(!is_connected(empty_graph(2)));
    CHECK(is_connected(Graph(1, {})));
}
