#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgan/graph.hpp"
#include "lgan/refinement.hpp"

namespace lgan {

/// Distinguishability verdicts for one graph pair across the test family.
struct PairVerdicts {
    std::string pair_id;
    int nodes_g = 0;
    int nodes_h = 0;
    bool isomorphic = false;
    bool dist_1wl = false;
    bool dist_set2wl = false;
    bool dist_set2fwl = false;
    bool dist_lgan_hash = false;
};

/// Runs all four refinement tests jointly on (g, h). lgan_hash uses
/// layers = max node count when `layers` <= 0.
PairVerdicts compare_pair(const Graph& g, const Graph& h, const std::string& pair_id,
                          int layers = 0);

/// Report rows for all non-isomorphic pairs of graphs with min degree >= 1 up
/// to max_nodes, plus one relabeled self-pair per graph as a soundness row.
std::vector<PairVerdicts> enumerate_pair_report(int max_nodes, unsigned seed = 7);

struct WitnessResult {
    bool found = false;
    Graph g;
    Graph h;
    long pairs_checked = 0;
};

/// Searches for a pair that set-based 2-WL cannot distinguish but the LGAN
/// hash refinement (layers = node count) can. The canonical (C6, 2xK3) pair is
/// tried first when it fits the bound; then all enumerated non-isomorphic
/// pairs with min degree >= 1, smaller node counts first. Exhaustion without a
/// witness yields found = false.
WitnessResult find_theorem2_witness(int max_nodes);

std::string pair_report_csv(const std::vector<PairVerdicts>& rows);

}  // namespace lgan
