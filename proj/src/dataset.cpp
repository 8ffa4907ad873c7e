#include "stragglers/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stragglers/errors.hpp"
#include "stragglers/rng.hpp"

namespace stragglers::data {

namespace {

constexpr double kMinStd = 1e-12;

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);
    return perm;
}

}  // namespace

std::size_t LabeledDataset::row_of(std::int64_t id) const {
    auto it = id_to_row_.find(id);
    if (it == id_to_row_.end()) {
        throw Error("sample id " + std::to_string(id) + " not present in dataset");
    }
    return it->second;
}

void LabeledDataset::rebuild_index() {
    id_to_row_.clear();
    id_to_row_.reserve(ids.size());
    for (std::size_t row = 0; row < ids.size(); ++row) {
        id_to_row_.emplace(ids[row], row);
    }
}

void LabeledDataset::validate() const {
    if (labels.size() != ids.size() ||
        features.size() != labels.size() * static_cast<std::size_t>(dim)) {
        throw Error("dataset arrays disagree on sample count");
    }
    if (id_to_row_.size() != ids.size()) {
        throw Error("dataset ids are not unique");
    }
    std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw Error("label " + std::to_string(labels[i]) + " out of range at row " +
                        std::to_string(i));
        }
        seen[static_cast<std::size_t>(labels[i])] = true;
    }
    for (int c = 0; c < num_classes; ++c) {
        if (!seen[static_cast<std::size_t>(c)]) {
            throw MissingClass(c, "class " + std::to_string(c) + " has no samples");
        }
    }
    for (double v : features) {
        if (!std::isfinite(v)) {
            throw Error("non-finite feature entry");
        }
    }
}

DatasetView full_view(const LabeledDataset& dataset) {
    DatasetView view;
    view.base = &dataset;
    view.rows.resize(dataset.size());
    std::iota(view.rows.begin(), view.rows.end(), std::size_t{0});
    return view;
}

DatasetView view_of_ids(const LabeledDataset& dataset, const std::vector<std::int64_t>& ids) {
    DatasetView view;
    view.base = &dataset;
    view.rows.reserve(ids.size());
    for (std::int64_t id : ids) {
        view.rows.push_back(dataset.row_of(id));
    }
    return view;
}

double parse_ratio_label(const std::string& label) {
    const auto colon = label.find(':');
    if (colon == std::string::npos) {
        throw Error("ratio label '" + label + "' is not of the form train:test");
    }
    double train = 0.0;
    double test = 0.0;
    try {
        train = std::stod(label.substr(0, colon));
        test = std::stod(label.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error("ratio label '" + label + "' is not numeric");
    }
    if (train <= 0.0 || test <= 0.0) {
        throw Error("ratio label '" + label + "' must have positive parts");
    }
    return train / (train + test);
}

long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5));
}

std::pair<double, double> standardize_features(LabeledDataset& dataset) {
    if (dataset.features.empty()) {
        throw EmptySet("cannot standardize an empty dataset");
    }
    double mean = 0.0;
    for (double v : dataset.features) mean += v;
    mean /= static_cast<double>(dataset.features.size());
    double var = 0.0;
    for (double v : dataset.features) var += (v - mean) * (v - mean);
    var /= static_cast<double>(dataset.features.size());
    const double stddev = std::sqrt(var);
    if (stddev < kMinStd) {
        throw DegenerateVariance("feature standard deviation is 0; cannot normalize");
    }
    for (double& v : dataset.features) v = (v - mean) / stddev;
    return {mean, stddev};
}

LabeledDataset combine_shuffle_normalize(const RawDataset& train_raw, const RawDataset& test_raw,
                                         std::uint64_t seed) {
    if (train_raw.dim() != test_raw.dim()) {
        throw DimensionMismatch("train dim " + std::to_string(train_raw.dim()) +
                                " != test dim " + std::to_string(test_raw.dim()));
    }
    const std::size_t n = train_raw.size() + test_raw.size();
    const int dim = train_raw.dim();

    // Ids follow pre-shuffle concatenation order: train file rows first.
    const auto perm = seeded_permutation(n, seed);

    LabeledDataset out;
    out.dim = dim;
    out.features.resize(n * static_cast<std::size_t>(dim));
    out.labels.resize(n);
    out.ids.resize(n);
    int max_label = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t src = perm[pos];
        const bool from_train = src < train_raw.size();
        const RawDataset& raw = from_train ? train_raw : test_raw;
        const std::size_t local = from_train ? src : src - train_raw.size();
        const std::uint8_t* pixels = raw.pixels.data() + local * static_cast<std::size_t>(dim);
        double* dst = out.features.data() + pos * static_cast<std::size_t>(dim);
        for (int j = 0; j < dim; ++j) {
            dst[j] = static_cast<double>(pixels[j]) / 255.0;
        }
        out.labels[pos] = raw.labels[local];
        out.ids[pos] = static_cast<std::int64_t>(src);
        max_label = std::max(max_label, raw.labels[local]);
    }
    out.num_classes = max_label + 1;
    out.provenance.source = "idx";
    out.provenance.master_seed = seed;
    standardize_features(out);
    out.rebuild_index();
    out.validate();
    return out;
}

LabeledDataset take_subset(const LabeledDataset& dataset, std::size_t n, std::uint64_t seed,
                           bool renormalize) {
    if (n > dataset.size()) {
        throw SubsetTooLarge("requested subset of " + std::to_string(n) + " from dataset of " +
                             std::to_string(dataset.size()));
    }
    const auto perm = seeded_permutation(dataset.size(), seed);

    LabeledDataset out;
    out.dim = dataset.dim;
    out.num_classes = dataset.num_classes;
    out.features.resize(n * static_cast<std::size_t>(dataset.dim));
    out.labels.resize(n);
    out.ids.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t src = perm[pos];
        const auto f = dataset.feature(src);
        std::copy(f.begin(), f.end(), out.features.begin() + pos * static_cast<std::size_t>(dataset.dim));
        out.labels[pos] = dataset.labels[src];
        out.ids[pos] = dataset.ids[src];
    }
    out.provenance = dataset.provenance;
    out.provenance.source += "|subset(" + std::to_string(n) + ")";
    if (renormalize) {
        standardize_features(out);
    }
    out.rebuild_index();
    out.validate();
    return out;
}

Split materialize_split(const LabeledDataset& dataset, const SplitPlan& plan,
                        const HardSampleSet& hard) {
    const double train_frac = parse_ratio_label(plan.ratio_label);
    if (plan.hard_train_fraction < 0.0 || plan.hard_train_fraction > 1.0) {
        throw InfeasiblePlan("hard_train_fraction must lie in [0,1]");
    }
    if (plan.removal.fraction < 0.0 || plan.removal.fraction > 1.0) {
        throw InfeasiblePlan("removal fraction must lie in [0,1]");
    }

    std::vector<std::int64_t> hard_ids;
    hard_ids.reserve(hard.ids.size());
    std::vector<std::int64_t> easy_ids;
    easy_ids.reserve(dataset.size());
    for (std::int64_t id : dataset.ids) {
        (hard.contains(id) ? hard_ids : easy_ids).push_back(id);
    }
    if (hard_ids.size() != hard.ids.size()) {
        throw InfeasiblePlan("hard set contains ids absent from the dataset");
    }
    std::sort(hard_ids.begin(), hard_ids.end());
    std::sort(easy_ids.begin(), easy_ids.end());

    const std::size_t n = dataset.size();
    const auto train_total = round_half_up(train_frac * static_cast<double>(n));
    const auto hard_train = round_half_up(plan.hard_train_fraction *
                                          static_cast<double>(hard_ids.size()));
    const auto easy_train = train_total - hard_train;
    if (easy_train < 0 || easy_train > static_cast<long long>(easy_ids.size())) {
        throw InfeasiblePlan("train quota " + std::to_string(train_total) + " cannot be met with " +
                             std::to_string(hard_train) + " hard and " +
                             std::to_string(easy_ids.size()) + " available easy ids");
    }

    Rng hard_rng(derive_seed(plan.seed, {0x68617264}));  // "hard"
    Rng easy_rng(derive_seed(plan.seed, {0x65617379}));  // "easy"
    hard_rng.shuffle(hard_ids);
    easy_rng.shuffle(easy_ids);

    std::vector<std::int64_t> train_ids(hard_ids.begin(), hard_ids.begin() + hard_train);
    train_ids.insert(train_ids.end(), easy_ids.begin(), easy_ids.begin() + easy_train);
    std::vector<std::int64_t> test_ids(hard_ids.begin() + hard_train, hard_ids.end());
    test_ids.insert(test_ids.end(), easy_ids.begin() + easy_train, easy_ids.end());

    // Removal deletes from train only; test keeps its composition.
    std::vector<std::int64_t> group;
    const bool remove_hard = plan.removal.group == RemovalGroup::hard;
    for (std::int64_t id : train_ids) {
        if (hard.contains(id) == remove_hard) group.push_back(id);
    }
    std::sort(group.begin(), group.end());
    Rng removal_rng(derive_seed(plan.seed, {0x72656d6f}));  // "remo"
    removal_rng.shuffle(group);
    const auto remove_count = round_half_up(plan.removal.fraction *
                                            static_cast<double>(group.size()));
    std::vector<std::int64_t> removed(group.begin(), group.begin() + remove_count);
    std::sort(removed.begin(), removed.end());
    std::erase_if(train_ids, [&](std::int64_t id) {
        return std::binary_search(removed.begin(), removed.end(), id);
    });

    std::sort(train_ids.begin(), train_ids.end());
    std::sort(test_ids.begin(), test_ids.end());

    Split split;
    split.plan = plan;
    split.train_ids = std::move(train_ids);
    split.test_ids = std::move(test_ids);
    split.removed_ids = std::move(removed);
    split.train = view_of_ids(dataset, split.train_ids);
    split.test = view_of_ids(dataset, split.test_ids);
    return split;
}

LabeledDataset make_synthetic(int n_per_class, double hard_region_fraction, std::uint64_t seed) {
    if (n_per_class < 10) {
        throw Error("make_synthetic requires n_per_class >= 10");
    }
    if (hard_region_fraction < 0.0 || hard_region_fraction > 1.0) {
        throw Error("hard_region_fraction must lie in [0,1]");
    }
    constexpr int kClasses = 2;
    constexpr int kStripes = 5;          // interleaved region: alternating y-stripes
    constexpr double kStripeHalfWidth = 0.45;
    const int n_hard = static_cast<int>(round_half_up(hard_region_fraction * n_per_class));
    const int n_easy = n_per_class - n_hard;

    Rng rng(derive_seed(seed, {0x73796e74}));  // "synt"

    LabeledDataset out;
    out.dim = 2;
    out.num_classes = kClasses;
    const std::size_t total = static_cast<std::size_t>(kClasses) * n_per_class;
    out.features.resize(total * 2);
    out.labels.resize(total);
    out.ids.resize(total);

    std::size_t row = 0;
    std::vector<std::int64_t> hard_ids;
    for (int c = 0; c < kClasses; ++c) {
        const double side = c == 0 ? -1.0 : 1.0;
        // Two easy blobs per class, above and below the x axis, kept on
        // their side of x=0 with a wide margin so fraction 0 is separable.
        for (int i = 0; i < n_easy; ++i) {
            const double cy = (i % 2 == 0) ? 1.2 : -1.2;
            double x = 0.0;
            do {
                x = rng.normal(side * 2.0, 0.5);
            } while (std::abs(x - side * 2.0) > 1.2);
            const double y = rng.normal(cy, 0.35);
            out.features[row * 2 + 0] = x;
            out.features[row * 2 + 1] = y;
            out.labels[row] = c;
            out.ids[row] = static_cast<std::int64_t>(row);
            ++row;
        }
        // Interleaved stripes around x=0: class = stripe parity, so the two
        // classes alternate vertically and the region is learned late.
        for (int i = 0; i < n_hard; ++i) {
            const int parity_choices = c == 0 ? (kStripes + 1) / 2 : kStripes / 2;
            const int stripe = 2 * static_cast<int>(rng.next_below(parity_choices)) + c;
            const double stripe_lo = -1.0 + 2.0 * stripe / kStripes;
            const double y = stripe_lo + (2.0 / kStripes) * rng.uniform(0.05, 0.95);
            const double x = rng.uniform(-kStripeHalfWidth, kStripeHalfWidth);
            out.features[row * 2 + 0] = x;
            out.features[row * 2 + 1] = y;
            out.labels[row] = c;
            out.ids[row] = static_cast<std::int64_t>(row);
            hard_ids.push_back(static_cast<std::int64_t>(row));
            ++row;
        }
    }

    // Shuffle storage order; ids travel with samples.
    const auto perm = seeded_permutation(total, derive_seed(seed, {0x73687566}));
    LabeledDataset shuffled;
    shuffled.dim = 2;
    shuffled.num_classes = kClasses;
    shuffled.features.resize(total * 2);
    shuffled.labels.resize(total);
    shuffled.ids.resize(total);
    for (std::size_t pos = 0; pos < total; ++pos) {
        const std::size_t src = perm[pos];
        shuffled.features[pos * 2 + 0] = out.features[src * 2 + 0];
        shuffled.features[pos * 2 + 1] = out.features[src * 2 + 1];
        shuffled.labels[pos] = out.labels[src];
        shuffled.ids[pos] = out.ids[src];
    }
    std::sort(hard_ids.begin(), hard_ids.end());
    shuffled.provenance.source = "synthetic";
    shuffled.provenance.master_seed = seed;
    shuffled.provenance.ground_truth_hard = std::move(hard_ids);
    standardize_features(shuffled);
    shuffled.rebuild_index();
    shuffled.validate();
    return shuffled;
}

}  // namespace stragglers::data
