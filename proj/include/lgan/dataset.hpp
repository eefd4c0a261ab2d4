#pragma once

#include <string>
#include <vector>

#include "lgan/graph.hpp"

namespace lgan {

struct Dataset {
    std::vector<Graph> graphs;
    std::vector<int> labels;  // contiguous 0-based class ids
    std::string name;
    int num_classes = 0;
};

/// Reads a TU Dortmund flat-file dataset: `<name>_A.txt` (1-based directed
/// edge rows, duplicates collapsed), `<name>_graph_indicator.txt`,
/// `<name>_graph_labels.txt` and optional `<name>_node_labels.txt`.
Dataset parse_tu_dataset(const std::string& directory, const std::string& name);

/// Serializes back to the same flat-file format (each edge emitted in both
/// directions). parse(write(d)) reproduces the graphs exactly.
void write_tu_dataset(const Dataset& d, const std::string& directory, const std::string& name);

/// Attaches input features to every graph: one-hot node labels when the
/// dataset has them, otherwise degree one-hot with a dataset-wide max degree.
Dataset with_input_features(const Dataset& d);

int max_degree(const Dataset& d);

}  // namespace lgan
