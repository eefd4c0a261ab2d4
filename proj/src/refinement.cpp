#include "lgan/refinement.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

namespace lgan {

namespace {

// Signature tags keep the hash domains of the different update rules disjoint.
enum SigTag : int64_t {
    kTagInit = 1,
    kTag1Wl = 2,
    kTagPairInit = 3,
    kTagSet2Wl = 4,
    kTagSet2Fwl = 5,
    kTagPairHash = 6,
    kTagLgan = 7,
    kTagLganIsolated = 8,
    kTagSep = -9,
};

int64_t double_bits(double x) {
    int64_t out;
    static_assert(sizeof(out) == sizeof(x));
    std::memcpy(&out, &x, sizeof(out));
    return out;
}

int initial_node_color(ColorDictionary& dict, const Graph& g, int v) {
    std::vector<int64_t> sig{kTagInit};
    if (g.node_labels()) sig.push_back((*g.node_labels())[v]);
    sig.push_back(kTagSep);
    if (g.node_features())
        for (int c = 0; c < g.node_features()->cols; ++c)
            sig.push_back(double_bits(g.node_features()->at(v, c)));
    return dict.intern(sig);
}

// Partition fingerprint over the concatenated unit stream: color ids replaced
// by first-occurrence ranks. Two rounds induce the same partition iff equal.
std::vector<int> normalized_partition(const std::vector<std::vector<int>>& colors) {
    std::unordered_map<int, int> rank;
    std::vector<int> out;
    for (const auto& graph_colors : colors)
        for (int c : graph_colors) {
            auto [it, inserted] = rank.try_emplace(c, static_cast<int>(rank.size()));
            out.push_back(it->second);
        }
    return out;
}

size_t total_units(const std::vector<std::vector<int>>& colors) {
    size_t n = 0;
    for (const auto& c : colors) n += c.size();
    return n;
}

struct RoundstepResult {
    std::vector<std::vector<int>> colors;
    int rounds = 0;
    bool stable = false;
};

// Runs `step` (which maps current colors to next-round colors) until the joint
// partition stabilizes or max_rounds is hit.
template <typename Step>
RoundstepResult run_rounds(std::vector<std::vector<int>> colors, int max_rounds, Step step) {
    RoundstepResult res;
    std::vector<int> prev_norm = normalized_partition(colors);
    for (int round = 1; round <= max_rounds; ++round) {
        std::vector<std::vector<int>> next = step(colors);
        std::vector<int> norm = normalized_partition(next);
        res.rounds = round;
        colors = std::move(next);
        if (norm == prev_norm) {
            res.stable = true;
            break;
        }
        prev_norm = std::move(norm);
    }
    res.colors = std::move(colors);
    return res;
}

int pair_index(int a, int b, int n) {
    // a < b, lexicographic rank of (a,b) among all pairs of 0..n-1
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

std::vector<Edge> all_pairs(int n) {
    std::vector<Edge> units;
    units.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) units.emplace_back(a, b);
    return units;
}

}  // namespace

int ColorDictionary::intern(const std::vector<int64_t>& signature) {
    auto [it, inserted] = table_.try_emplace(signature, next_id_);
    if (inserted) ++next_id_;
    return it->second;
}

std::map<int, int> Coloring::histogram() const {
    std::map<int, int> h;
    for (int c : colors) ++h[c];
    return h;
}

std::vector<Coloring> refine_1wl(std::span<const Graph> graphs) {
    auto dict = std::make_shared<ColorDictionary>();
    std::vector<std::vector<int>> colors;
    for (const Graph& g : graphs) {
        std::vector<int> c(g.node_count());
        for (int v = 0; v < g.node_count(); ++v) c[v] = initial_node_color(*dict, g, v);
        colors.push_back(std::move(c));
    }

    const int max_rounds = static_cast<int>(total_units(colors)) + 1;
    RoundstepResult res = run_rounds(std::move(colors), max_rounds, [&](const auto& cur) {
        std::vector<std::vector<int>> next(cur.size());
        for (size_t gi = 0; gi < graphs.size(); ++gi) {
            const Graph& g = graphs[gi];
            next[gi].resize(g.node_count());
            for (int v = 0; v < g.node_count(); ++v) {
                std::vector<int64_t> sig{kTag1Wl, cur[gi][v]};
                std::vector<int> nbrs;
                nbrs.reserve(g.neighbors(v).size());
                for (int u : g.neighbors(v)) nbrs.push_back(cur[gi][u]);
                std::sort(nbrs.begin(), nbrs.end());
                for (int c : nbrs) sig.push_back(c);
                next[gi][v] = dict->intern(sig);
            }
        }
        return next;
    });

    std::vector<Coloring> out(graphs.size());
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        out[gi].unit_kind = UnitKind::Node;
        out[gi].colors = std::move(res.colors[gi]);
        out[gi].rounds = res.rounds;
        out[gi].stable = res.stable;
        out[gi].dictionary = dict;
    }
    return out;
}

namespace {

std::vector<std::vector<int>> initial_pair_colors(ColorDictionary& dict,
                                                  std::span<const Graph> graphs) {
    std::vector<std::vector<int>> colors;
    for (const Graph& g : graphs) {
        if (g.node_count() < 2)
            throw std::invalid_argument("pair refinement requires at least 2 nodes");
        std::vector<int> node_colors(g.node_count());
        for (int v = 0; v < g.node_count(); ++v) node_colors[v] = initial_node_color(dict, g, v);
        const int n = g.node_count();
        std::vector<int> c;
        c.reserve(static_cast<size_t>(n) * (n - 1) / 2);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                int lo = std::min(node_colors[a], node_colors[b]);
                int hi = std::max(node_colors[a], node_colors[b]);
                c.push_back(dict.intern({kTagPairInit, lo, hi, g.has_edge(a, b) ? 1 : 0}));
            }
        }
        colors.push_back(std::move(c));
    }
    return colors;
}

std::vector<Coloring> package_pair_result(std::span<const Graph> graphs, RoundstepResult res,
                                          std::shared_ptr<const ColorDictionary> dict) {
    std::vector<Coloring> out(graphs.size());
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        out[gi].unit_kind = UnitKind::UnorderedPair;
        out[gi].colors = std::move(res.colors[gi]);
        out[gi].pair_units = all_pairs(graphs[gi].node_count());
        out[gi].rounds = res.rounds;
        out[gi].stable = res.stable;
        out[gi].dictionary = dict;
    }
    return out;
}

}  // namespace

std::vector<Coloring> refine_set2wl(std::span<const Graph> graphs) {
    auto dict = std::make_shared<ColorDictionary>();
    std::vector<std::vector<int>> colors = initial_pair_colors(*dict, graphs);

    const int max_rounds = static_cast<int>(total_units(colors)) + 1;
    RoundstepResult res = run_rounds(std::move(colors), max_rounds, [&](const auto& cur) {
        std::vector<std::vector<int>> next(cur.size());
        for (size_t gi = 0; gi < graphs.size(); ++gi) {
            const int n = graphs[gi].node_count();
            const auto& pc = cur[gi];
            next[gi].resize(pc.size());
            std::vector<int> side_a, side_b;
            for (int a = 0; a < n; ++a) {
                for (int b = a + 1; b < n; ++b) {
                    // Replacement multisets: {{c_{w,b} : w != b}} and {{c_{a,w} : w != a}},
                    // compared order-insensitively between the two sides.
                    side_a.clear();
                    side_b.clear();
                    for (int w = 0; w < n; ++w) {
                        if (w != b) side_b.push_back(pc[pair_index(std::min(w, b), std::max(w, b), n)]);
                        if (w != a) side_a.push_back(pc[pair_index(std::min(a, w), std::max(a, w), n)]);
                    }
                    std::sort(side_a.begin(), side_a.end());
                    std::sort(side_b.begin(), side_b.end());
                    if (side_b < side_a) side_a.swap(side_b);
                    std::vector<int64_t> sig{kTagSet2Wl, pc[pair_index(a, b, n)]};
                    for (int c : side_a) sig.push_back(c);
                    sig.push_back(kTagSep);
                    for (int c : side_b) sig.push_back(c);
                    next[gi][pair_index(a, b, n)] = dict->intern(sig);
                }
            }
        }
        return next;
    });
    return package_pair_result(graphs, std::move(res), dict);
}

std::vector<Coloring> refine_set2fwl(std::span<const Graph> graphs) {
    auto dict = std::make_shared<ColorDictionary>();
    std::vector<std::vector<int>> colors = initial_pair_colors(*dict, graphs);

    const int max_rounds = static_cast<int>(total_units(colors)) + 1;
    RoundstepResult res = run_rounds(std::move(colors), max_rounds, [&](const auto& cur) {
        std::vector<std::vector<int>> next(cur.size());
        for (size_t gi = 0; gi < graphs.size(); ++gi) {
            const int n = graphs[gi].node_count();
            const auto& pc = cur[gi];
            next[gi].resize(pc.size());
            std::vector<std::pair<int, int>> witness_colors;
            for (int p = 0; p < n; ++p) {
                for (int q = p + 1; q < n; ++q) {
                    // For every auxiliary node w: the unordered 2-multiset
                    // {{c_{w,q}, c_{p,w}}}; then hash the multiset over w.
                    witness_colors.clear();
                    for (int w = 0; w < n; ++w) {
                        if (w == p || w == q) continue;
                        int cwq = pc[pair_index(std::min(w, q), std::max(w, q), n)];
                        int cpw = pc[pair_index(std::min(p, w), std::max(p, w), n)];
                        witness_colors.emplace_back(std::min(cwq, cpw), std::max(cwq, cpw));
                    }
                    std::sort(witness_colors.begin(), witness_colors.end());
                    std::vector<int64_t> sig{kTagSet2Fwl, pc[pair_index(p, q, n)]};
                    for (auto [lo, hi] : witness_colors) {
                        sig.push_back(lo);
                        sig.push_back(hi);
                    }
                    next[gi][pair_index(p, q, n)] = dict->intern(sig);
                }
            }
        }
        return next;
    });
    return package_pair_result(graphs, std::move(res), dict);
}

std::vector<Coloring> lgan_hash_refine(std::span<const Graph> graphs, int layers) {
    if (layers < 1) throw std::invalid_argument("lgan_hash_refine: layers must be >= 1");
    auto dict = std::make_shared<ColorDictionary>();

    // Per graph: incident edge ids and neighbor-neighbor edge ids per node.
    struct Plan {
        std::vector<std::vector<int>> incident;
        std::vector<std::vector<int>> nn_edges;
    };
    std::vector<Plan> plans;
    std::vector<std::vector<int>> colors;
    for (const Graph& g : graphs) {
        Plan plan;
        plan.incident.resize(g.node_count());
        plan.nn_edges.resize(g.node_count());
        const auto& edges = g.edges();
        for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
            plan.incident[edges[e].first].push_back(e);
            plan.incident[edges[e].second].push_back(e);
        }
        for (int t = 0; t < g.node_count(); ++t) {
            const auto& nbrs = g.neighbors(t);
            for (size_t i = 0; i < nbrs.size(); ++i) {
                for (size_t j = i + 1; j < nbrs.size(); ++j) {
                    if (g.has_edge(nbrs[i], nbrs[j])) {
                        auto it = std::lower_bound(edges.begin(), edges.end(),
                                                   Edge{nbrs[i], nbrs[j]});
                        plan.nn_edges[t].push_back(static_cast<int>(it - edges.begin()));
                    }
                }
            }
        }
        plans.push_back(std::move(plan));

        std::vector<int> c(g.node_count());
        for (int v = 0; v < g.node_count(); ++v) c[v] = initial_node_color(*dict, g, v);
        colors.push_back(std::move(c));
    }

    RoundstepResult res = run_rounds(std::move(colors), layers, [&](const auto& cur) {
        std::vector<std::vector<int>> next(cur.size());
        for (size_t gi = 0; gi < graphs.size(); ++gi) {
            const Graph& g = graphs[gi];
            const Plan& plan = plans[gi];
            const auto& edges = g.edges();
            // Line-graph node colors for this layer (pairs are exactly edges).
            std::vector<int> pair_color(edges.size());
            for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
                int cu = cur[gi][edges[e].first];
                int cv = cur[gi][edges[e].second];
                pair_color[e] =
                    dict->intern({kTagPairHash, std::min(cu, cv), std::max(cu, cv)});
            }
            next[gi].resize(g.node_count());
            for (int t = 0; t < g.node_count(); ++t) {
                if (plan.incident[t].empty()) {
                    // Empty ego line graph: the node only re-hashes its own color.
                    next[gi][t] = dict->intern({kTagLganIsolated, cur[gi][t]});
                    continue;
                }
                std::vector<int> aggr_t, aggr_n;
                for (int e : plan.incident[t]) aggr_t.push_back(pair_color[e]);
                for (int e : plan.nn_edges[t]) aggr_n.push_back(pair_color[e]);
                std::sort(aggr_t.begin(), aggr_t.end());
                std::sort(aggr_n.begin(), aggr_n.end());
                std::vector<int64_t> sig{kTagLgan};
                for (int c : aggr_t) sig.push_back(c);
                sig.push_back(kTagSep);
                for (int c : aggr_n) sig.push_back(c);
                next[gi][t] = dict->intern(sig);
            }
        }
        return next;
    });

    std::vector<Coloring> out(graphs.size());
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        out[gi].unit_kind = UnitKind::Node;
        out[gi].colors = std::move(res.colors[gi]);
        out[gi].rounds = res.rounds;
        out[gi].stable = res.stable;
        out[gi].dictionary = dict;
    }
    return out;
}

namespace {
template <typename F>
Coloring single(const Graph& g, F f) {
    std::vector<Graph> one{g};
    return std::move(f(std::span<const Graph>(one))[0]);
}
}  // namespace

Coloring refine_1wl(const Graph& g) {
    return single(g, [](auto s) { return refine_1wl(s); });
}
Coloring refine_set2wl(const Graph& g) {
    return single(g, [](auto s) { return refine_set2wl(s); });
}
Coloring refine_set2fwl(const Graph& g) {
    return single(g, [](auto s) { return refine_set2fwl(s); });
}
Coloring lgan_hash_refine(const Graph& g, int layers) {
    std::vector<Graph> one{g};
    return std::move(lgan_hash_refine(std::span<const Graph>(one), layers)[0]);
}

bool distinguishable(const Coloring& a, const Coloring& b) {
    if (a.unit_kind != b.unit_kind)
        throw std::invalid_argument("distinguishable: colorings have different unit kinds");
    if (!a.dictionary || a.dictionary.get() != b.dictionary.get())
        throw std::invalid_argument(
            "distinguishable: colorings must come from the same joint refinement run");
    return a.histogram() != b.histogram();
}

}  // namespace lgan
