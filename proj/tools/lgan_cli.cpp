#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "lgan/attribution.hpp"
#include "lgan/dataset.hpp"
#include "lgan/expressivity.hpp"
#include "lgan/model.hpp"
#include "lgan/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    return buf;
}

fs::path resolve_out_dir(const std::string& explicit_dir, const std::string& command) {
    if (!explicit_dir.empty()) return explicit_dir;
    const char* root = std::getenv("LGAN_OUT_ROOT");
    fs::path base = root ? fs::path(root) : fs::path("runs");
    return base / (command + "-" + timestamp());
}

void write_manifest(const fs::path& out_dir, const std::string& command, unsigned seed,
                    const json& options, const std::vector<std::string>& artifacts) {
    json m;
    m["command"] = command;
    m["seed"] = seed;
    m["options"] = options;
    m["artifacts"] = artifacts;
    std::ofstream out(out_dir / "manifest.json");
    out << m.dump(2) << '\n';
}

json graph_to_json(const lgan::Graph& g) {
    json edges = json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    return json{{"node_count", g.node_count()}, {"edges", edges}};
}

lgan::Graph er_graph(int n, double mean_degree, std::mt19937& rng) {
    std::bernoulli_distribution coin(std::min(1.0, mean_degree / (n - 1)));
    std::vector<lgan::Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
    return lgan::Graph(n, std::move(edges)).with_uniform_features();
}

int run_wl_report(const std::string& pair_kind, int enumerate_n, unsigned seed,
                  const std::string& out_override) {
    fs::path out_dir = resolve_out_dir(out_override, "wl-report");
    fs::create_directories(out_dir);

    std::vector<lgan::PairVerdicts> rows;
    json options;
    std::vector<std::string> artifacts;

    if (!pair_kind.empty()) {
        auto [g, h] = lgan::generate_pair(lgan::pair_kind_from_string(pair_kind));
        rows.push_back(lgan::compare_pair(g, h, pair_kind));
        options["pair"] = pair_kind;
    } else {
        if (enumerate_n > 7) {
            std::cerr << "wl-report: --enumerate is capped at 7 nodes\n";
            return 2;
        }
        rows = lgan::enumerate_pair_report(enumerate_n, seed);
        options["enumerate"] = enumerate_n;

        lgan::WitnessResult witness = lgan::find_theorem2_witness(enumerate_n);
        if (witness.found) {
            rows.push_back(lgan::compare_pair(witness.g, witness.h, "witness"));
            json wj;
            wj["g"] = graph_to_json(witness.g);
            wj["h"] = graph_to_json(witness.h);
            wj["pairs_checked"] = witness.pairs_checked;
            std::ofstream wf(out_dir / "witness.json");
            wf << wj.dump(2) << '\n';
            artifacts.push_back("witness.json");
        }
    }

    std::ofstream csv(out_dir / "wl_report.csv");
    csv << lgan::pair_report_csv(rows);
    csv.close();
    artifacts.push_back("wl_report.csv");
    write_manifest(out_dir, "wl-report", seed, options, artifacts);
    std::cout << "wl-report: wrote " << (out_dir / "wl_report.csv").string() << "\n";
    return 0;
}

lgan::ExperimentConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    json j = json::parse(in);
    lgan::ExperimentConfig cfg;
    cfg.dataset_path = j.at("dataset_path").get<std::string>();
    cfg.dataset_name = j.at("dataset_name").get<std::string>();
    cfg.model.layers = j.value("layers", cfg.model.layers);
    cfg.model.hidden_dim = j.value("hidden_dim", cfg.model.hidden_dim);
    if (j.contains("variant")) cfg.model.variant = lgan::variant_from_string(j["variant"]);
    cfg.model.dropout = j.value("dropout", cfg.model.dropout);
    if (j.contains("readout")) cfg.model.readout = lgan::readout_from_string(j["readout"]);
    cfg.model.classifier_hidden = j.value("classifier_hidden", cfg.model.classifier_hidden);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.folds = j.value("folds", cfg.folds);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    return cfg;
}

int run_train(const std::string& config_path, long seed_override, int jobs_override,
              const std::string& out_override) {
    lgan::ExperimentConfig cfg = config_from_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<unsigned>(seed_override);
    if (jobs_override >= 1) cfg.jobs = jobs_override;

    fs::path out_dir = resolve_out_dir(out_override, "train");
    fs::create_directories(out_dir);

    lgan::Dataset data = lgan::parse_tu_dataset(cfg.dataset_path, cfg.dataset_name);
    lgan::CvReport report = lgan::cross_validate(cfg, data, out_dir.string());
    lgan::PreparedDataset prep = lgan::prepare_dataset(data);
    lgan::persist_report(report, prep, out_dir.string());

    json options;
    options["config"] = config_path;
    options["dataset"] = cfg.dataset_name;
    options["epochs"] = cfg.epochs;
    options["folds"] = cfg.folds;
    std::vector<std::string> artifacts{"report.json", "folds.csv"};
    for (int f = 0; f < cfg.folds; ++f)
        artifacts.push_back("checkpoint_fold" + std::to_string(f) + ".json");
    write_manifest(out_dir, "train", cfg.seed, options, artifacts);
    std::cout << "train: " << cfg.dataset_name << " accuracy " << report.summary() << " -> "
              << out_dir.string() << "\n";
    return 0;
}

int run_attribute(const std::string& checkpoint, const std::string& dataset_dir,
                  const std::string& dataset_name, int graph_id, const std::string& pair_kind,
                  int which, int target_class, int steps, unsigned seed,
                  const std::string& out_override) {
    lgan::Checkpoint ck = lgan::load_checkpoint(checkpoint);

    lgan::Graph graph;
    if (!pair_kind.empty()) {
        auto pair = lgan::generate_pair(lgan::pair_kind_from_string(pair_kind));
        graph = which == 0 ? pair.first : pair.second;
    } else {
        lgan::Dataset data = lgan::parse_tu_dataset(dataset_dir, dataset_name);
        if (graph_id < 0 || graph_id >= static_cast<int>(data.graphs.size()))
            throw std::runtime_error("attribute: graph id out of range");
        lgan::Dataset feat = lgan::with_input_features(data);
        graph = feat.graphs[graph_id];
    }
    if (!graph.node_features() || graph.node_features()->cols != ck.in_dim)
        throw std::runtime_error("attribute: graph feature width " +
                                 std::to_string(graph.node_features() ? graph.node_features()->cols : 0) +
                                 " does not match the checkpoint input width " +
                                 std::to_string(ck.in_dim));

    fs::path out_dir = resolve_out_dir(out_override, "attribute");
    fs::create_directories(out_dir);

    lgan::AttributionResult attr =
        lgan::ig_edge_attribution(ck.config, ck.params, graph, target_class, steps, graph_id);
    std::string dot_path = (out_dir / "attribution.dot").string();
    lgan::export_annotated(graph, attr, dot_path);

    json options;
    options["checkpoint"] = checkpoint;
    options["graph"] = graph_id;
    options["pair"] = pair_kind;
    options["steps"] = steps;
    options["target_class"] = attr.target_class;
    write_manifest(out_dir, "attribute", seed, options,
                   {"attribution.dot", "attribution.dot.json"});
    std::cout << "attribute: wrote " << dot_path << "\n";
    return 0;
}

int run_bench(const std::string& dataset_dir, const std::string& dataset_name,
              const std::string& fixture, const std::string& er_list, double mean_degree,
              int repeats, unsigned seed, const std::string& out_override) {
    fs::path out_dir = resolve_out_dir(out_override, "bench");
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, lgan::Graph>> graphs;
    std::mt19937 rng(seed);
    if (!fixture.empty()) {
        if (fixture == "c6") graphs.push_back({"c6", lgan::cycle_graph(6).with_uniform_features()});
        else if (fixture == "2k3")
            graphs.push_back({"2k3", lgan::disjoint_union(lgan::complete_graph(3),
                                                          lgan::complete_graph(3))
                                          .with_uniform_features()});
        else if (fixture.size() > 1 && fixture[0] == 'k')
            graphs.push_back({fixture,
                              lgan::complete_graph(std::stoi(fixture.substr(1))).with_uniform_features()});
        else
            throw std::runtime_error("bench: unknown fixture " + fixture +
                                     " (expected c6|2k3|k<n>)");
    } else if (!er_list.empty()) {
        std::stringstream ss(er_list);
        std::string tok;
        while (std::getline(ss, tok, ','))
            graphs.push_back({"er" + tok, er_graph(std::stoi(tok), mean_degree, rng)});
    } else {
        lgan::Dataset data =
            lgan::with_input_features(lgan::parse_tu_dataset(dataset_dir, dataset_name));
        for (size_t i = 0; i < data.graphs.size(); ++i)
            graphs.push_back({dataset_name + "_" + std::to_string(i), data.graphs[i]});
    }

    // Wide hidden layer keeps the timing compute-bound for the scaling fit.
    lgan::LganConfig cfg;
    cfg.layers = 1;
    cfg.hidden_dim = 64;
    cfg.classifier_hidden = 8;

    std::ofstream csv(out_dir / "bench.csv");
    csv << "graph_id,n,m,target_msgs,neighbor_msgs,per_layer_seconds\n";
    std::vector<double> xs, ys;
    for (const auto& [id, g] : graphs) {
        lgan::MessageCounts mc = lgan::message_counts(g);
        lgan::GraphPlan plan = lgan::build_plan(g);
        lgan::BatchPlan batch = lgan::merge_plans({&plan});
        lgan::ParamSet params =
            lgan::init_lgan_params(cfg, plan.features.cols, 2, seed);
        {
            lgan::Tape warm;
            lgan::lgan_forward(warm, batch, cfg, params, lgan::ForwardOptions{});
        }
        double best = 1e100;
        for (int r = 0; r < repeats; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            lgan::Tape tape;
            lgan::lgan_forward(tape, batch, cfg, params, lgan::ForwardOptions{});
            double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            best = std::min(best, dt);
        }
        csv << id << ',' << g.node_count() << ',' << g.edge_count() << ',' << mc.target_msgs << ','
            << mc.neighbor_msgs << ',' << best << '\n';
        xs.push_back(static_cast<double>(mc.target_msgs + mc.neighbor_msgs));
        ys.push_back(best);
    }
    csv.close();

    // Least-squares fit of time against total message count.
    json scaling;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= xs.size();
        my /= ys.size();
        double sxx = 0, sxy = 0, syy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        double slope = sxx > 0 ? sxy / sxx : 0.0;
        double r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
        scaling = {{"slope", slope}, {"intercept", my - slope * mx}, {"r2", r2},
                   {"points", xs.size()}};
        std::ofstream sj(out_dir / "scaling.json");
        sj << scaling.dump(2) << '\n';
    }

    json options;
    options["fixture"] = fixture;
    options["er"] = er_list;
    options["mean_degree"] = mean_degree;
    options["dataset"] = dataset_name;
    std::vector<std::string> artifacts{"bench.csv"};
    if (!scaling.is_null()) artifacts.push_back("scaling.json");
    write_manifest(out_dir, "bench", seed, options, artifacts);
    std::cout << "bench: wrote " << (out_dir / "bench.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Line graph aggregation network toolkit"};
    app.require_subcommand(1);

    unsigned seed = 0;
    std::string out_dir;
    auto* seed_opt =
        app.add_option("--seed", seed, "Master seed for all randomness (overrides config seeds)");
    app.add_option("--out-dir", out_dir, "Output directory (default: $LGAN_OUT_ROOT/<cmd>-<time>)");

    auto* wl = app.add_subcommand("wl-report", "Distinguishability report across WL-family tests");
    std::string pair_kind;
    int enumerate_n = 0;
    auto* pair_opt = wl->add_option("--pair", pair_kind, "onewl_blind|whitney_exception|triangle_flag");
    auto* enum_opt = wl->add_option("--enumerate", enumerate_n, "All pairs up to n nodes (n <= 7)");
    pair_opt->excludes(enum_opt);

    auto* train = app.add_subcommand("train", "Stratified cross-validation training");
    std::string config_path;
    int jobs_override = 0;
    train->add_option("--config", config_path, "JSON experiment config")->required();
    train->add_option("--jobs", jobs_override, "Parallel folds");

    auto* attribute = app.add_subcommand("attribute", "Integrated-gradients edge attribution");
    std::string checkpoint, a_dataset_dir, a_dataset_name, a_pair;
    int graph_id = -1, which = 1, target_class = -1, steps = 128;
    attribute->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    attribute->add_option("--dataset", a_dataset_dir, "TU dataset directory");
    attribute->add_option("--name", a_dataset_name, "TU dataset name");
    attribute->add_option("--graph", graph_id, "Graph index within the dataset");
    attribute->add_option("--pair", a_pair, "Use a generated pair instead of a dataset");
    attribute->add_option("--which", which, "0: first of pair, 1: second (default)");
    attribute->add_option("--target-class", target_class, "Class to attribute (-1: predicted)");
    attribute->add_option("--steps", steps, "Riemann-sum steps (>= 8)");

    auto* bench = app.add_subcommand("bench", "Message-count accounting and per-layer timing");
    std::string b_dataset_dir, b_dataset_name, b_fixture, b_er;
    double mean_degree = 8.0;
    int repeats = 5;
    bench->add_option("--dataset", b_dataset_dir, "TU dataset directory");
    bench->add_option("--name", b_dataset_name, "TU dataset name");
    bench->add_option("--fixture", b_fixture, "c6|2k3|k<n>");
    bench->add_option("--er", b_er, "Comma-separated node counts for an ER sweep");
    bench->add_option("--mean-degree", mean_degree, "ER mean degree");
    bench->add_option("--repeats", repeats, "Timing repetitions (min is reported)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (wl->parsed()) {
            if (pair_kind.empty() && enumerate_n == 0) {
                std::cerr << "wl-report: need --pair or --enumerate\n";
                return 2;
            }
            return run_wl_report(pair_kind, enumerate_n, seed, out_dir);
        }
        if (train->parsed())
            return run_train(config_path, seed_opt->count() ? static_cast<long>(seed) : -1,
                             jobs_override, out_dir);
        if (attribute->parsed())
            return run_attribute(checkpoint, a_dataset_dir, a_dataset_name, graph_id, a_pair, which,
                                 target_class, steps, seed, out_dir);
        if (bench->parsed())
            return run_bench(b_dataset_dir, b_dataset_name, b_fixture, b_er, mean_degree, repeats,
                             seed, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
