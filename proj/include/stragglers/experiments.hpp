#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stragglers/dataset.hpp"
#include "stragglers/hard_sample_set.hpp"
#include "stragglers/inversion.hpp"
#include "stragglers/network.hpp"

namespace stragglers::experiments {

// Accuracy and macro-averaged metrics of one trained model on one test
// view, with the accuracy additionally restricted to the hard/easy groups.
struct MetricBundle {
    double overall_accuracy = 0.0;
    double hard_accuracy = 0.0;  // NaN when test∩hard is empty
    double easy_accuracy = 0.0;  // NaN when test∩easy is empty
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_accuracy;
    std::size_t test_count = 0;
    std::size_t hard_test_count = 0;
    std::size_t easy_test_count = 0;
    bool zero_division_flagged = false;

    double metric(const std::string& name) const;
    static const std::vector<std::string>& metric_names();
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

struct RunMetrics {
    int straggler_set_index = 0;
    int init_index = 0;
    MetricBundle metrics;
    std::optional<std::string> error;  // set when this run failed
};

// One grid point: configuration plus per-run and aggregated metrics.
struct ExperimentRecord {
    IdentifierMethod method = IdentifierMethod::straggler;
    data::RemovalGroup removal_group = data::RemovalGroup::hard;
    std::string ratio_label;
    double removal_fraction = 0.0;
    double hard_train_fraction = 0.0;
    std::size_t hard_in_train = 0;  // absolute counts after removal (first run's split)
    std::size_t easy_in_train = 0;
    std::size_t train_size = 0;
    std::vector<RunMetrics> runs;
    std::map<std::string, Aggregate> aggregates;

    bool any_failed() const;
};

struct BenchmarkConfig {
    std::string dataset_tag = "synthetic";
    std::size_t subset_size = 0;  // 0 keeps the full working set
    int straggler_sets = 3;
    int inits_per_set = 3;
    std::vector<std::string> ratio_grid = {"90:10", "80:20", "70:30", "60:40", "50:50"};
    std::vector<double> removal_grid = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
    std::vector<IdentifierMethod> identifiers = {IdentifierMethod::straggler,
                                                 IdentifierMethod::confidence,
                                                 IdentifierMethod::energy};
    std::uint64_t master_seed = 0;
    nn::TrainConfig train;
    inversion::StopAtInversionOptions stop_options;
    int overlap_runs = 15;
    // Score confidence/energy at the inversion snapshot instead of the
    // fully trained model (ablation switch).
    bool score_at_inversion = false;
    int jobs = 1;
};

struct IdentifierOutcome {
    IdentifierMethod method = IdentifierMethod::straggler;
    std::vector<HardSampleSet> hard_sets;  // one per straggler-set index
    std::vector<ExperimentRecord> remove_hard;
    std::vector<ExperimentRecord> remove_easy;
    double delta = 0.0;          // mean easy-accuracy minus mean hard-accuracy
    double delta_run_std = 0.0;  // std of per-run deltas
};

struct BenchmarkReport {
    std::vector<IdentifierOutcome> outcomes;
    std::vector<IdentifierMethod> ranking;  // by delta, descending
};

struct OverlapStat {
    IdentifierMethod method_a;
    IdentifierMethod method_b;
    double mean_pct = 0.0;
    double std_pct = 0.0;
    int runs = 0;
};

MetricBundle evaluate_split(const nn::NetworkParams& params, const data::DatasetView& test_view,
                            const HardSampleSet& hard);

Aggregate mean_std(const std::vector<double>& values);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

std::vector<int> class_distribution(const HardSampleSet& hard);

// Straggler sets for run indices 0..straggler_sets-1, each from an
// independent stop-at-inversion run.
std::vector<HardSampleSet> build_straggler_sets(const data::LabeledDataset& dataset,
                                                const BenchmarkConfig& config);

// Hard sets for one identifier, threshold-matched per run to the straggler
// counts (confidence/energy score a trained model; random draws uniformly).
std::vector<HardSampleSet> build_hard_sets(const data::LabeledDataset& dataset,
                                           const BenchmarkConfig& config, IdentifierMethod method,
                                           const std::vector<HardSampleSet>& straggler_sets);

// The section-4 sweep: for every (straggler set, init, ratio, fraction)
// build a split plan, train, evaluate; aggregate over the run matrix.
std::vector<ExperimentRecord> run_imbalance_sweep(const data::LabeledDataset& dataset,
                                                  const BenchmarkConfig& config,
                                                  data::RemovalGroup direction,
                                                  const std::vector<HardSampleSet>& hard_sets,
                                                  IdentifierMethod method);

BenchmarkReport run_benchmark(const data::LabeledDataset& dataset, const BenchmarkConfig& config);

// Per-run straggler/confidence/energy triples with matched thresholds;
// pairwise overlap mean and std over `runs` repetitions.
std::vector<OverlapStat> overlap_matrix(const data::LabeledDataset& dataset,
                                        const BenchmarkConfig& config, int runs);

// Mean per-class test error over independently seeded trainings on a
// standard split.
std::vector<double> class_error_rates(const data::LabeledDataset& dataset,
                                      const BenchmarkConfig& config, int runs,
                                      const std::string& ratio_label = "6:1");

// Runs fn(0..count-1) on up to `jobs` worker threads; results must be
// written to disjoint slots. Rethrows the first job exception.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace stragglers::experiments
