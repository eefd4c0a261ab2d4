#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "lgan/graph.hpp"

namespace lgan {

enum class UnitKind { Node, UnorderedPair };

/// Injective HASH realized as a signature-interning dictionary: equal
/// signatures get equal ids, unseen signatures get fresh ids.
class ColorDictionary {
public:
    int intern(const std::vector<int64_t>& signature);
    int size() const { return next_id_; }

private:
    struct VecHash {
        size_t operator()(const std::vector<int64_t>& v) const {
            size_t h = 1469598103934665603ull;
            for (int64_t x : v) {
                h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            }
            return h;
        }
    };
    std::unordered_map<std::vector<int64_t>, int, VecHash> table_;
    int next_id_ = 0;
};

/// Result of one refinement run on one graph. Color ids are only comparable
/// between colorings produced by the same joint run (same dictionary).
struct Coloring {
    UnitKind unit_kind = UnitKind::Node;
    std::vector<int> colors;        // per unit
    std::vector<Edge> pair_units;   // unit index -> node pair, UnorderedPair only
    int rounds = 0;                 // refinement rounds executed
    bool stable = false;            // reached a fixed point of the partition
    std::shared_ptr<const ColorDictionary> dictionary;

    std::map<int, int> histogram() const;
};

// Joint refinement: all graphs share one dictionary and run in lockstep until
// the combined partition stabilizes, so histograms are mutually comparable.
std::vector<Coloring> refine_1wl(std::span<const Graph> graphs);
std::vector<Coloring> refine_set2wl(std::span<const Graph> graphs);
std::vector<Coloring> refine_set2fwl(std::span<const Graph> graphs);
std::vector<Coloring> lgan_hash_refine(std::span<const Graph> graphs, int layers);

Coloring refine_1wl(const Graph& g);
Coloring refine_set2wl(const Graph& g);
Coloring refine_set2fwl(const Graph& g);
Coloring lgan_hash_refine(const Graph& g, int layers);

/// True iff the stable color histograms differ as multisets. Requires both
/// colorings to come from the same joint run.
bool distinguishable(const Coloring& a, const Coloring& b);

}  // namespace lgan
