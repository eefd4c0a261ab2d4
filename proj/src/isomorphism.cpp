#include "lgan/isomorphism.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <queue>
#include <set>
#include <stdexcept>

namespace lgan {

namespace {

bool feature_rows_equal(const Graph& g, int u, const Graph& h, int w) {
    const bool gf = g.node_features().has_value();
    const bool hf = h.node_features().has_value();
    if (gf != hf) return false;
    if (!gf) return true;
    const Matrix& a = *g.node_features();
    const Matrix& b = *h.node_features();
    if (a.cols != b.cols) return false;
    for (int c = 0; c < a.cols; ++c)
        if (a.at(u, c) != b.at(w, c)) return false;
    return true;
}

bool node_compatible(const Graph& g, int u, const Graph& h, int w) {
    if (g.degree(u) != h.degree(w)) return false;
    const bool gl = g.node_labels().has_value();
    const bool hl = h.node_labels().has_value();
    if (gl != hl) return false;
    if (gl && (*g.node_labels())[u] != (*h.node_labels())[w]) return false;
    return feature_rows_equal(g, u, h, w);
}

bool extend_mapping(const Graph& g, const Graph& h, std::vector<int>& mapping,
                    std::vector<bool>& used, int next) {
    const int n = g.node_count();
    if (next == n) return true;
    for (int w = 0; w < n; ++w) {
        if (used[w] || !node_compatible(g, next, h, w)) continue;
        bool ok = true;
        for (int prev = 0; prev < next; ++prev) {
            if (g.has_edge(next, prev) != h.has_edge(w, mapping[prev])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        mapping[next] = w;
        used[w] = true;
        if (extend_mapping(g, h, mapping, used, next + 1)) return true;
        used[w] = false;
    }
    return false;
}

}  // namespace

bool brute_force_isomorphic(const Graph& g, const Graph& h) {
    if (g.node_count() > kBruteForceNodeLimit || h.node_count() > kBruteForceNodeLimit)
        throw std::invalid_argument(
            "brute_force_isomorphic: refusing graphs with more than " +
            std::to_string(kBruteForceNodeLimit) + " nodes (factorial search bound)");
    if (g.node_count() != h.node_count() || g.edge_count() != h.edge_count()) return false;

    auto degree_seq = [](const Graph& x) {
        std::vector<int> d;
        for (int v = 0; v < x.node_count(); ++v) d.push_back(x.degree(v));
        std::sort(d.begin(), d.end());
        return d;
    };
    if (degree_seq(g) != degree_seq(h)) return false;

    std::vector<int> mapping(g.node_count(), -1);
    std::vector<bool> used(g.node_count(), false);
    return extend_mapping(g, h, mapping, used, 0);
}

std::vector<int> content_color_classes(const Graph& g) {
    const int n = g.node_count();
    // Content key per node: optional label then optional feature row. Classes
    // are indexed by sorted key order so they survive relabeling.
    std::vector<std::vector<double>> keys(n);
    for (int v = 0; v < n; ++v) {
        if (g.node_labels()) keys[v].push_back(static_cast<double>((*g.node_labels())[v]));
        if (g.node_features())
            for (int c = 0; c < g.node_features()->cols; ++c)
                keys[v].push_back(g.node_features()->at(v, c));
    }
    std::vector<std::vector<double>> sorted_keys = keys;
    std::sort(sorted_keys.begin(), sorted_keys.end());
    sorted_keys.erase(std::unique(sorted_keys.begin(), sorted_keys.end()), sorted_keys.end());
    std::vector<int> classes(n, 0);
    for (int v = 0; v < n; ++v)
        classes[v] = static_cast<int>(
            std::lower_bound(sorted_keys.begin(), sorted_keys.end(), keys[v]) - sorted_keys.begin());
    return classes;
}

namespace {

using Partition = std::vector<std::vector<int>>;

class Canonicalizer {
public:
    Canonicalizer(const Graph& g, std::vector<int> init_colors)
        : g_(g), n_(g.node_count()), init_colors_(std::move(init_colors)) {}

    CanonicalForm run() {
        Partition start;
        std::map<int, std::vector<int>> by_color;
        for (int v = 0; v < n_; ++v) by_color[init_colors_[v]].push_back(v);
        for (auto& [c, members] : by_color) start.push_back(std::move(members));

        search(std::move(start));

        CanonicalForm out;
        out.labeling = best_labeling_;
        out.certificate = std::move(best_cert_);
        return out;
    }

private:
    // Equitable refinement: repeatedly split cells by the multiset of
    // neighbor cell ids; subcells keep their parent's position, ordered by
    // signature. Deterministic and isomorphism-equivariant.
    Partition refine(Partition p) const {
        std::vector<int> cell_of(n_);
        while (true) {
            for (int i = 0; i < static_cast<int>(p.size()); ++i)
                for (int v : p[i]) cell_of[v] = i;
            Partition np;
            bool changed = false;
            for (const auto& cell : p) {
                if (cell.size() == 1) {
                    np.push_back(cell);
                    continue;
                }
                std::map<std::vector<int>, std::vector<int>> groups;
                for (int v : cell) {
                    std::vector<int> sig;
                    sig.reserve(g_.neighbors(v).size());
                    for (int u : g_.neighbors(v)) sig.push_back(cell_of[u]);
                    std::sort(sig.begin(), sig.end());
                    groups[std::move(sig)].push_back(v);
                }
                if (groups.size() == 1) {
                    np.push_back(cell);
                } else {
                    changed = true;
                    for (auto& [sig, members] : groups) np.push_back(std::move(members));
                }
            }
            if (!changed) return p;
            p = std::move(np);
        }
    }

    void search(Partition p) {
        p = refine(std::move(p));
        int target = -1;
        for (int i = 0; i < static_cast<int>(p.size()); ++i) {
            if (p[i].size() > 1) {
                target = i;
                break;
            }
        }
        if (target < 0) {
            consider_leaf(p);
            return;
        }
        const std::vector<int> cell = p[target];
        for (int v : cell) {
            Partition q;
            q.reserve(p.size() + 1);
            for (int i = 0; i < static_cast<int>(p.size()); ++i) {
                if (i != target) {
                    q.push_back(p[i]);
                    continue;
                }
                q.push_back({v});
                std::vector<int> rest;
                for (int u : cell)
                    if (u != v) rest.push_back(u);
                q.push_back(std::move(rest));
            }
            search(std::move(q));
        }
    }

    void consider_leaf(const Partition& p) {
        std::vector<int> labeling(n_);  // old -> new
        for (int i = 0; i < n_; ++i) labeling[p[i][0]] = i;

        std::vector<uint64_t> cert;
        cert.reserve(2 + n_ + (n_ * (n_ - 1) / 2 + 63) / 64);
        cert.push_back(static_cast<uint64_t>(n_));
        for (int i = 0; i < n_; ++i)
            cert.push_back(static_cast<uint64_t>(init_colors_[p[i][0]]));
        uint64_t word = 0;
        int bit = 0;
        std::vector<int> inverse(n_);
        for (int v = 0; v < n_; ++v) inverse[labeling[v]] = v;
        for (int i = 0; i < n_; ++i) {
            for (int j = i + 1; j < n_; ++j) {
                if (g_.has_edge(inverse[i], inverse[j])) word |= (1ULL << bit);
                if (++bit == 64) {
                    cert.push_back(word);
                    word = 0;
                    bit = 0;
                }
            }
        }
        if (bit > 0) cert.push_back(word);

        if (best_labeling_.empty() || cert < best_cert_) {
            best_cert_ = std::move(cert);
            best_labeling_ = std::move(labeling);
        }
    }

    const Graph& g_;
    int n_;
    std::vector<int> init_colors_;
    std::vector<uint64_t> best_cert_;
    std::vector<int> best_labeling_;
};

}  // namespace

CanonicalForm canonical_form(const Graph& g, const std::vector<int>& init_colors) {
    std::vector<int> colors = init_colors;
    if (colors.empty()) colors.assign(g.node_count(), 0);
    if (static_cast<int>(colors.size()) != g.node_count())
        throw std::invalid_argument("canonical_form: init_colors length != node_count");
    if (g.node_count() == 0) return CanonicalForm{{}, {0}};
    return Canonicalizer(g, std::move(colors)).run();
}

bool is_connected(const Graph& g) {
    if (g.node_count() == 0) return true;
    std::vector<bool> seen(g.node_count(), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : g.neighbors(v)) {
            if (!seen[u]) {
                seen[u] = true;
                ++count;
                q.push(u);
            }
        }
    }
    return count == g.node_count();
}

namespace {

std::mutex g_enum_mutex;
std::map<int, std::vector<Graph>> g_enum_cache;

std::vector<Graph> enumerate_level(const std::vector<Graph>& prev, int k) {
    std::map<std::vector<uint64_t>, Graph> reps;
    for (const Graph& base : prev) {
        const int new_node = k - 1;
        for (uint32_t mask = 0; mask < (1u << new_node); ++mask) {
            std::vector<Edge> edges = base.edges();
            for (int i = 0; i < new_node; ++i)
                if (mask & (1u << i)) edges.emplace_back(i, new_node);
            Graph cand(k, std::move(edges));
            CanonicalForm cf = canonical_form(cand);
            if (reps.find(cf.certificate) == reps.end())
                reps.emplace(std::move(cf.certificate), cand.permuted(cf.labeling));
        }
    }
    std::vector<Graph> out;
    out.reserve(reps.size());
    for (auto& [cert, g] : reps) out.push_back(std::move(g));
    return out;
}

}  // namespace

std::vector<Graph> enumerate_graphs(int n) {
    if (n < 1) throw std::invalid_argument("enumerate_graphs: n must be >= 1");
    std::lock_guard<std::mutex> lock(g_enum_mutex);
    for (int k = 1; k <= n; ++k) {
        if (g_enum_cache.count(k)) continue;
        if (k == 1) {
            g_enum_cache[1] = {Graph(1, {})};
        } else {
            g_enum_cache[k] = enumerate_level(g_enum_cache[k - 1], k);
        }
    }
    return g_enum_cache[n];
}

std::vector<Graph> enumerate_connected(int n) {
    std::vector<Graph> out;
    for (const Graph& g : enumerate_graphs(n))
        if (is_connected(g)) out.push_back(g);
    return out;
}

std::vector<Graph> enumerate_min_degree1(int max_nodes) {
    std::vector<Graph> out;
    for (int k = 2; k <= max_nodes; ++k) {
        for (const Graph& g : enumerate_graphs(k)) {
            bool ok = true;
            for (int v = 0; v < k && ok; ++v)
                if (g.degree(v) == 0) ok = false;
            if (ok) out.push_back(g);
        }
    }
    return out;
}

}  // namespace lgan
