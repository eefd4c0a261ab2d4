#include "lgan/expressivity.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lgan/isomorphism.hpp"

namespace lgan {

PairVerdicts compare_pair(const Graph& g, const Graph& h, const std::string& pair_id, int layers) {
    PairVerdicts row;
    row.pair_id = pair_id;
    row.nodes_g = g.node_count();
    row.nodes_h = h.node_count();
    row.isomorphic = brute_force_isomorphic(g, h);

    std::vector<Graph> pair{g, h};
    std::span<const Graph> span(pair);

    auto c1 = refine_1wl(span);
    row.dist_1wl = distinguishable(c1[0], c1[1]);
    auto c2 = refine_set2wl(span);
    row.dist_set2wl = distinguishable(c2[0], c2[1]);
    auto cf = refine_set2fwl(span);
    row.dist_set2fwl = distinguishable(cf[0], cf[1]);
    int lg_layers = layers > 0 ? layers : std::max(g.node_count(), h.node_count());
    auto cl = lgan_hash_refine(span, lg_layers);
    row.dist_lgan_hash = distinguishable(cl[0], cl[1]);
    return row;
}

std::vector<PairVerdicts> enumerate_pair_report(int max_nodes, unsigned seed) {
    if (max_nodes > 7)
        throw std::invalid_argument("enumerate_pair_report: enumeration bound is 7 nodes");
    std::vector<Graph> family = enumerate_min_degree1(max_nodes);
    std::vector<PairVerdicts> rows;

    std::mt19937 rng(seed);
    for (size_t i = 0; i < family.size(); ++i) {
        // Soundness row: a graph against a random relabeling of itself.
        std::vector<int> perm(family[i].node_count());
        for (size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
        std::shuffle(perm.begin(), perm.end(), rng);
        rows.push_back(compare_pair(family[i], family[i].permuted(perm),
                                    "self_" + std::to_string(i)));
    }
    for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = i + 1; j < family.size(); ++j) {
            if (family[i].node_count() != family[j].node_count()) continue;
            rows.push_back(compare_pair(family[i], family[j],
                                        std::to_string(i) + "_" + std::to_string(j)));
        }
    }
    return rows;
}

WitnessResult find_theorem2_witness(int max_nodes) {
    if (max_nodes > kBruteForceNodeLimit)
        throw std::invalid_argument("find_theorem2_witness: max_nodes must be <= " +
                                    std::to_string(kBruteForceNodeLimit));
    WitnessResult res;

    auto qualifies = [&](const Graph& g, const Graph& h) {
        ++res.pairs_checked;
        std::vector<Graph> pair{g, h};
        std::span<const Graph> span(pair);
        auto c2 = refine_set2wl(span);
        if (distinguishable(c2[0], c2[1])) return false;
        auto cl = lgan_hash_refine(span, std::max(g.node_count(), h.node_count()));
        return distinguishable(cl[0], cl[1]);
    };

    if (max_nodes >= 6) {
        auto [g, h] = generate_pair(PairKind::OneWlBlind);
        if (qualifies(g, h)) {
            res.found = true;
            res.g = g;
            res.h = h;
            return res;
        }
    }

    std::vector<Graph> family = enumerate_min_degree1(max_nodes);
    for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = i + 1; j < family.size(); ++j) {
            if (family[i].node_count() != family[j].node_count()) continue;
            if (qualifies(family[i], family[j])) {
                res.found = true;
                res.g = family[i].with_uniform_features();
                res.h = family[j].with_uniform_features();
                return res;
            }
        }
    }
    return res;
}

std::string pair_report_csv(const std::vector<PairVerdicts>& rows) {
    std::ostringstream out;
    out << "pair_id,n,iso,1wl,set2wl,set2fwl,lgan_hash\n";
    for (const auto& r : rows) {
        out << r.pair_id << ',' << r.nodes_g << ',' << (r.isomorphic ? 1 : 0) << ','
            << (r.dist_1wl ? 1 : 0) << ',' << (r.dist_set2wl ? 1 : 0) << ','
            << (r.dist_set2fwl ? 1 : 0) << ',' << (r.dist_lgan_hash ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace lgan
