#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stragglers/hard_sample_set.hpp"
#include "stragglers/idx.hpp"

namespace stragglers::data {

struct Provenance {
    std::string source;
    std::uint64_t master_seed = 0;
    // Synthetic datasets flag their interleaved-region samples here (sorted).
    std::vector<std::int64_t> ground_truth_hard;
};

// Normalized sample vectors with class labels and stable ids. Ids are
// assigned once at construction and survive every shuffle/subset/split, so
// downstream hard-sample sets always refer to the same underlying samples.
// Immutable after construction; safe to share across threads.
struct LabeledDataset {
    std::vector<double> features;  // size() * dim, row-major
    std::vector<int> labels;
    std::vector<std::int64_t> ids;
    int num_classes = 0;
    int dim = 0;
    Provenance provenance;

    std::size_t size() const { return labels.size(); }

    std::span<const double> feature(std::size_t row) const {
        return {features.data() + row * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }

    // Row position of a sample id; throws Error if the id is unknown.
    std::size_t row_of(std::int64_t id) const;

    void rebuild_index();
    // Checks the type invariants (finite features, labels < k, every class
    // present, unique ids); throws on violation.
    void validate() const;

private:
    std::unordered_map<std::int64_t, std::size_t> id_to_row_;
};

// A non-owning ordered selection of dataset rows. Training, evaluation and
// radii computation all consume views, so splits never copy features.
struct DatasetView {
    const LabeledDataset* base = nullptr;
    std::vector<std::size_t> rows;

    std::size_t size() const { return rows.size(); }
    std::span<const double> feature(std::size_t i) const { return base->feature(rows[i]); }
    int label(std::size_t i) const { return base->labels[rows[i]]; }
    std::int64_t id(std::size_t i) const { return base->ids[rows[i]]; }
};

DatasetView full_view(const LabeledDataset& dataset);
DatasetView view_of_ids(const LabeledDataset& dataset, const std::vector<std::int64_t>& ids);

enum class RemovalGroup { hard, easy };

struct Removal {
    RemovalGroup group = RemovalGroup::hard;
    double fraction = 0.0;  // in [0,1], applied to train after placement
};

// Split request: how to distribute hard samples across train/test and what
// to remove from train afterwards. Test is never touched by removal.
struct SplitPlan {
    std::string ratio_label = "80:20";  // train:test
    double hard_train_fraction = 0.8;
    Removal removal;
    std::uint64_t seed = 0;
};

struct Split {
    DatasetView train;
    DatasetView test;
    std::vector<std::int64_t> train_ids;  // sorted
    std::vector<std::int64_t> test_ids;   // sorted
    std::vector<std::int64_t> removed_ids;
    SplitPlan plan;
};

// train:test fraction encoded by a label such as "80:20".
double parse_ratio_label(const std::string& label);

long long round_half_up(double x);

// Standardizes features in place by the global scalar mean/std of all
// entries; returns {mean, std}. Throws DegenerateVariance when std == 0.
std::pair<double, double> standardize_features(LabeledDataset& dataset);

// Appendix-B preprocessing: concatenate the two raw sets (train ids first),
// shuffle deterministically, scale bytes to [0,1] and standardize by the
// combined set's global mean/std.
LabeledDataset combine_shuffle_normalize(const RawDataset& train_raw, const RawDataset& test_raw,
                                         std::uint64_t seed);

// First n rows of a fresh seeded permutation. With renormalize (the
// default, per the subset protocol) statistics are recomputed on the
// subset; pass false to keep the parent scaling.
LabeledDataset take_subset(const LabeledDataset& dataset, std::size_t n, std::uint64_t seed,
                           bool renormalize = true);

// Places round(hard_train_fraction*|hard|) hard ids in train, fills the
// remaining train/test quota with easy ids per the ratio label, then removes
// the requested fraction of the named group from train.
Split materialize_split(const LabeledDataset& dataset, const SplitPlan& plan,
                        const HardSampleSet& hard);

// 2-class, 2-D oracle dataset: two well-separated easy blobs per class plus
// a small interleaved stripe region whose samples are flagged as
// ground-truth-hard in the provenance.
LabeledDataset make_synthetic(int n_per_class, double hard_region_fraction, std::uint64_t seed);

}  // namespace stragglers::data
