#include "lgan/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lgan {

void ExperimentConfig::validate() const {
    model.validate();
    if (epochs < 1) throw std::invalid_argument("ExperimentConfig: epochs must be >= 1");
    if (folds < 2) throw std::invalid_argument("ExperimentConfig: folds must be >= 2");
    if (batch_size < 1) throw std::invalid_argument("ExperimentConfig: batch_size must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("ExperimentConfig: lr must be positive");
    if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
}

std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, unsigned seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));

    std::mt19937 rng(seed);
    std::vector<int> fold_of(labels.size(), -1);
    for (auto& [cls, members] : by_class) {
        if (static_cast<int>(members.size()) < k)
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(cls) +
                                        " has only " + std::to_string(members.size()) +
                                        " members for k=" + std::to_string(k));
        std::shuffle(members.begin(), members.end(), rng);
        for (size_t i = 0; i < members.size(); ++i)
            fold_of[members[i]] = static_cast<int>(i % k);
    }
    return fold_of;
}

PreparedDataset prepare_dataset(const Dataset& raw) {
    PreparedDataset prep;
    prep.data = with_input_features(raw);
    for (const Graph& g : prep.data.graphs) prep.plans.push_back(build_plan(g));
    prep.in_dim = prep.plans.empty() ? 0 : prep.plans.front().features.cols;
    return prep;
}

namespace {

std::vector<int> predict(const LganConfig& cfg, const ParamSet& params,
                         const PreparedDataset& prep, const std::vector<int>& indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    // Evaluate in modest batches to keep tapes small.
    const int chunk = 64;
    for (size_t start = 0; start < indices.size(); start += chunk) {
        std::vector<const GraphPlan*> plans;
        for (size_t i = start; i < std::min(indices.size(), start + chunk); ++i)
            plans.push_back(&prep.plans[indices[i]]);
        BatchPlan batch = merge_plans(plans);
        Tape tape;
        Tensor logits = lgan_forward(tape, batch, cfg, params, ForwardOptions{});
        const Matrix& lv = logits.value();
        for (int r = 0; r < lv.rows; ++r) {
            int best = 0;
            for (int c = 1; c < lv.cols; ++c)
                if (lv.at(r, c) > lv.at(r, best)) best = c;
            out.push_back(best);
        }
    }
    return out;
}

}  // namespace

double evaluate_accuracy(const LganConfig& cfg, const ParamSet& params,
                         const PreparedDataset& prep, const std::vector<int>& indices) {
    if (indices.empty()) return 0.0;
    std::vector<int> pred = predict(cfg, params, prep, indices);
    int correct = 0;
    for (size_t i = 0; i < indices.size(); ++i)
        if (pred[i] == prep.data.labels[indices[i]]) ++correct;
    return static_cast<double>(correct) / indices.size();
}

FoldResult train_fold(const ExperimentConfig& cfg, const PreparedDataset& prep,
                      const std::vector<int>& fold_of, int fold) {
    cfg.validate();
    if (fold < 0 || fold >= cfg.folds)
        throw std::invalid_argument("train_fold: fold id out of range");

    std::vector<int> train_idx, test_idx;
    for (size_t i = 0; i < fold_of.size(); ++i)
        (fold_of[i] == fold ? test_idx : train_idx).push_back(static_cast<int>(i));

    std::seed_seq seq{cfg.seed, static_cast<unsigned>(fold)};
    std::vector<unsigned> seeds(2);
    seq.generate(seeds.begin(), seeds.end());
    std::mt19937 rng(seeds[0]);

    ParamSet params = init_lgan_params(cfg.model, prep.in_dim, prep.data.num_classes, seeds[1]);
    AdamState adam;
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;

    const auto t0 = std::chrono::steady_clock::now();
    FoldResult result;
    result.fold = fold;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = train_idx;
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const GraphPlan*> plans;
            std::vector<int> batch_labels;
            for (size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
                plans.push_back(&prep.plans[order[i]]);
                batch_labels.push_back(prep.data.labels[order[i]]);
            }
            BatchPlan batch = merge_plans(plans);
            Tape tape;
            ForwardOptions opts;
            opts.training = true;
            opts.rng = &rng;
            std::vector<Tensor> param_tensors;
            Tensor logits = lgan_forward(tape, batch, cfg.model, params, opts, &param_tensors);
            Tensor loss = tape.softmax_cross_entropy(logits, batch_labels);
            if (!std::isfinite(loss.value().data[0]))
                throw std::runtime_error("train_fold: non-finite loss at epoch " +
                                         std::to_string(epoch));
            tape.backward(loss);
            std::vector<Matrix> grads;
            grads.reserve(param_tensors.size());
            for (Tensor t : param_tensors) grads.push_back(t.grad());
            adam_step(params, grads, adam, adam_cfg);
        }
        result.epoch_trace.push_back(evaluate_accuracy(cfg.model, params, prep, test_idx));
    }
    result.accuracy = result.epoch_trace.back();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.params = std::move(params);
    return result;
}

namespace {

void save_partial_folds(const std::vector<FoldResult>& done, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream csv(fs::path(dir) / "partial_folds.csv");
    csv << "fold,accuracy,wall_seconds\n";
    for (const auto& f : done) csv << f.fold << ',' << f.accuracy << ',' << f.wall_seconds << '\n';
}

}  // namespace

CvReport cross_validate(const ExperimentConfig& cfg, const Dataset& raw,
                        const std::string& partial_dir) {
    cfg.validate();
    PreparedDataset prep = prepare_dataset(raw);
    std::vector<int> fold_of = stratified_kfold(prep.data.labels, cfg.folds, cfg.seed);

    CvReport report;
    report.config = cfg;
    report.folds.resize(cfg.folds);

    if (cfg.jobs <= 1) {
        std::vector<FoldResult> done;
        for (int f = 0; f < cfg.folds; ++f) {
            try {
                report.folds[f] = train_fold(cfg, prep, fold_of, f);
            } catch (...) {
                if (!partial_dir.empty()) save_partial_folds(done, partial_dir);
                throw;
            }
            done.push_back(report.folds[f]);
            done.back().params = ParamSet{};  // keep the partial log light
        }
    } else {
        std::vector<std::thread> workers;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::atomic<int> next{0};
        for (int w = 0; w < std::min(cfg.jobs, cfg.folds); ++w) {
            workers.emplace_back([&]() {
                for (int f = next.fetch_add(1); f < cfg.folds; f = next.fetch_add(1)) {
                    try {
                        report.folds[f] = train_fold(cfg, prep, fold_of, f);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (first_error) {
            if (!partial_dir.empty()) {
                std::vector<FoldResult> done;
                for (const auto& f : report.folds)
                    if (!f.epoch_trace.empty()) done.push_back(f);
                save_partial_folds(done, partial_dir);
            }
            std::rethrow_exception(first_error);
        }
    }

    double mean = 0.0;
    for (const auto& f : report.folds) mean += f.accuracy;
    mean /= report.folds.size();
    double var = 0.0;
    for (const auto& f : report.folds) var += (f.accuracy - mean) * (f.accuracy - mean);
    var /= report.folds.size();
    report.mean_accuracy = mean;
    report.std_accuracy = std::sqrt(var);
    return report;
}

std::string CvReport::summary() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << mean_accuracy * 100.0 << "±" << std_accuracy * 100.0;
    return out.str();
}

void persist_report(const CvReport& report, const PreparedDataset& prep,
                    const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nlohmann::json j;
    j["dataset"] = report.config.dataset_name;
    j["seed"] = report.config.seed;
    j["folds"] = report.config.folds;
    j["epochs"] = report.config.epochs;
    j["batch_size"] = report.config.batch_size;
    j["lr"] = report.config.lr;
    j["model"] = {{"layers", report.config.model.layers},
                  {"hidden_dim", report.config.model.hidden_dim},
                  {"variant", to_string(report.config.model.variant)},
                  {"dropout", report.config.model.dropout},
                  {"readout", to_string(report.config.model.readout)},
                  {"classifier_hidden", report.config.model.classifier_hidden}};
    std::vector<double> accs;
    for (const auto& f : report.folds) accs.push_back(f.accuracy);
    j["fold_accuracy"] = accs;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    j["summary"] = report.summary();
    std::ofstream rj(fs::path(out_dir) / "report.json");
    rj << j.dump(2) << '\n';

    std::ofstream csv(fs::path(out_dir) / "folds.csv");
    csv << "fold,accuracy,wall_seconds\n";
    for (const auto& f : report.folds)
        csv << f.fold << ',' << f.accuracy << ',' << f.wall_seconds << '\n';

    for (const auto& f : report.folds) {
        save_checkpoint((fs::path(out_dir) / ("checkpoint_fold" + std::to_string(f.fold) + ".json"))
                            .string(),
                        report.config.model, prep.in_dim, prep.data.num_classes, f.params);
    }
}

}  // namespace lgan
