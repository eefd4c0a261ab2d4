#pragma once

#include <string>
#include <vector>

#include "lgan/dataset.hpp"
#include "lgan/model.hpp"

namespace lgan {

struct ExperimentConfig {
    std::string dataset_path;
    std::string dataset_name;
    LganConfig model;
    double lr = 0.01;
    int epochs = 100;
    int batch_size = 32;
    int folds = 10;
    unsigned seed = 0;
    int jobs = 1;

    void validate() const;
};

/// Per-class round-robin fold assignment after a seeded shuffle. Fold sizes
/// differ by at most one within each class. Throws when a class has fewer
/// members than k.
std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, unsigned seed);

struct FoldResult {
    int fold = 0;
    double accuracy = 0.0;             // held-out accuracy at the final epoch
    std::vector<double> epoch_trace;   // held-out accuracy per epoch
    double wall_seconds = 0.0;
    ParamSet params;
};

struct CvReport {
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population std over folds
    ExperimentConfig config;

    /// Table-style "mean±std" in percent with one decimal, e.g. "92.5±6.3".
    std::string summary() const;
};

/// Precomputed plans shared by every fold.
struct PreparedDataset {
    Dataset data;                  // with input features attached
    std::vector<GraphPlan> plans;
    int in_dim = 0;
};

PreparedDataset prepare_dataset(const Dataset& raw);

/// Trains on all folds but `fold`, evaluates the held-out fold every epoch,
/// reports the final-epoch accuracy. Deterministic given the config seed.
FoldResult train_fold(const ExperimentConfig& cfg, const PreparedDataset& prep,
                      const std::vector<int>& fold_of, int fold);

/// Runs every fold and aggregates. If a fold fails and partial_dir is
/// non-empty, the completed folds are written there before the error
/// propagates.
CvReport cross_validate(const ExperimentConfig& cfg, const Dataset& raw,
                        const std::string& partial_dir = "");

double evaluate_accuracy(const LganConfig& cfg, const ParamSet& params,
                         const PreparedDataset& prep, const std::vector<int>& indices);

/// Persists report.json (deterministic: no timing) and folds.csv (with
/// wall-clock) under `out_dir`, plus one checkpoint per fold.
void persist_report(const CvReport& report, const PreparedDataset& prep,
                    const std::string& out_dir);

}  // namespace lgan
