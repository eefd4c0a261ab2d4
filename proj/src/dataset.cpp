#include "lgan/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lgan {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing required file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

int parse_int(const std::string& s, const std::string& path, size_t line_no) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("format error in " + path + " line " + std::to_string(line_no) +
                                 ": '" + s + "' is not an integer");
    }
}

}  // namespace

Dataset parse_tu_dataset(const std::string& directory, const std::string& name) {
    namespace fs = std::filesystem;
    const std::string base = (fs::path(directory) / name).string() + "_";

    const std::string indicator_path = base + "graph_indicator.txt";
    const std::string adjacency_path = base + "A.txt";
    const std::string labels_path = base + "graph_labels.txt";
    const std::string node_labels_path = base + "node_labels.txt";

    std::vector<std::string> indicator_lines = read_lines(indicator_path);
    const int total_nodes = static_cast<int>(indicator_lines.size());

    std::vector<int> graph_of_node(total_nodes);  // 0-based graph ids
    int num_graphs = 0;
    for (int i = 0; i < total_nodes; ++i) {
        int gid = parse_int(indicator_lines[i], indicator_path, i + 1);
        if (gid < 1)
            throw std::runtime_error("format error in " + indicator_path + " line " +
                                     std::to_string(i + 1) + ": graph id must be >= 1");
        graph_of_node[i] = gid - 1;
        num_graphs = std::max(num_graphs, gid);
    }

    // Node index local to its graph; nodes are numbered 1..N globally.
    std::vector<int> local_index(total_nodes);
    std::vector<int> graph_sizes(num_graphs, 0);
    for (int i = 0; i < total_nodes; ++i) local_index[i] = graph_sizes[graph_of_node[i]]++;

    std::vector<std::vector<Edge>> edges(num_graphs);
    std::vector<std::string> a_lines = read_lines(adjacency_path);
    for (size_t ln = 0; ln < a_lines.size(); ++ln) {
        if (a_lines[ln].empty()) continue;
        std::string row = a_lines[ln];
        std::replace(row.begin(), row.end(), ',', ' ');
        std::istringstream ss(row);
        std::string a, b;
        if (!(ss >> a >> b))
            throw std::runtime_error("format error in " + adjacency_path + " line " +
                                     std::to_string(ln + 1) + ": expected two node ids");
        int u = parse_int(a, adjacency_path, ln + 1);
        int v = parse_int(b, adjacency_path, ln + 1);
        if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
            throw std::runtime_error("format error in " + adjacency_path + " line " +
                                     std::to_string(ln + 1) + ": dangling node index");
        if (graph_of_node[u - 1] != graph_of_node[v - 1])
            throw std::runtime_error("format error in " + adjacency_path + " line " +
                                     std::to_string(ln + 1) + ": edge crosses graph boundary");
        int g = graph_of_node[u - 1];
        int lu = local_index[u - 1];
        int lv = local_index[v - 1];
        edges[g].emplace_back(std::min(lu, lv), std::max(lu, lv));
    }

    std::vector<std::string> label_lines = read_lines(labels_path);
    if (static_cast<int>(label_lines.size()) != num_graphs)
        throw std::runtime_error("format error: " + labels_path + " has " +
                                 std::to_string(label_lines.size()) + " lines, expected " +
                                 std::to_string(num_graphs));
    std::vector<int> raw_labels(num_graphs);
    for (int g = 0; g < num_graphs; ++g) raw_labels[g] = parse_int(label_lines[g], labels_path, g + 1);

    // Remap labels to a contiguous 0-based range (e.g. MUTAG's {-1,1} -> {0,1}).
    std::map<int, int> label_map;
    for (int l : raw_labels) label_map.emplace(l, 0);
    int next = 0;
    for (auto& [raw, mapped] : label_map) mapped = next++;

    std::vector<std::vector<int>> node_labels;
    bool have_node_labels = fs::exists(node_labels_path);
    if (have_node_labels) {
        std::vector<std::string> nl_lines = read_lines(node_labels_path);
        if (static_cast<int>(nl_lines.size()) != total_nodes)
            throw std::runtime_error("format error: " + node_labels_path + " has " +
                                     std::to_string(nl_lines.size()) + " lines, expected " +
                                     std::to_string(total_nodes));
        node_labels.assign(num_graphs, {});
        for (int g = 0; g < num_graphs; ++g) node_labels[g].resize(graph_sizes[g]);
        for (int i = 0; i < total_nodes; ++i)
            node_labels[graph_of_node[i]][local_index[i]] =
                parse_int(nl_lines[i], node_labels_path, i + 1);
    }

    Dataset d;
    d.name = name;
    d.num_classes = next;
    for (int g = 0; g < num_graphs; ++g) {
        if (have_node_labels) {
            d.graphs.emplace_back(graph_sizes[g], std::move(edges[g]), std::move(node_labels[g]));
        } else {
            d.graphs.emplace_back(graph_sizes[g], std::move(edges[g]));
        }
        d.labels.push_back(label_map[raw_labels[g]]);
    }
    return d;
}

void write_tu_dataset(const Dataset& d, const std::string& directory, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const std::string base = (fs::path(directory) / name).string() + "_";

    std::ofstream indicator(base + "graph_indicator.txt");
    std::ofstream adjacency(base + "A.txt");
    std::ofstream labels(base + "graph_labels.txt");
    bool have_node_labels = !d.graphs.empty() && d.graphs.front().node_labels().has_value();
    std::ofstream node_labels;
    if (have_node_labels) node_labels.open(base + "node_labels.txt");

    int offset = 0;
    for (size_t g = 0; g < d.graphs.size(); ++g) {
        const Graph& graph = d.graphs[g];
        for (int v = 0; v < graph.node_count(); ++v) {
            indicator << (g + 1) << '\n';
            if (have_node_labels) node_labels << (*graph.node_labels())[v] << '\n';
        }
        for (const auto& [u, v] : graph.edges()) {
            adjacency << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
            adjacency << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
        }
        labels << d.labels[g] << '\n';
        offset += graph.node_count();
    }
}

int max_degree(const Dataset& d) {
    int dmax = 0;
    for (const Graph& g : d.graphs)
        for (int v = 0; v < g.node_count(); ++v) dmax = std::max(dmax, g.degree(v));
    return dmax;
}

Dataset with_input_features(const Dataset& d) {
    bool have_labels = !d.graphs.empty() && d.graphs.front().node_labels().has_value();
    Dataset out = d;
    if (have_labels) {
        int max_label = 0;
        for (const Graph& g : d.graphs)
            for (int l : *g.node_labels()) max_label = std::max(max_label, l);
        for (Graph& g : out.graphs) {
            Matrix x(g.node_count(), max_label + 1);
            for (int v = 0; v < g.node_count(); ++v) x.at(v, (*g.node_labels())[v]) = 1.0;
            g = g.with_features(std::move(x));
        }
    } else {
        int dmax = max_degree(d);
        for (Graph& g : out.graphs) g = g.with_features(degree_one_hot(g, dmax));
    }
    return out;
}

}  // namespace lgan
