#include "stragglers/identifiers.hpp"

#include <algorithm>
#include <numeric>

#include "stragglers/errors.hpp"
#include "stragglers/rng.hpp"

namespace stragglers {

std::string to_string(IdentifierMethod method) {
    switch (method) {
        case IdentifierMethod::straggler: return "straggler";
        case IdentifierMethod::confidence: return "confidence";
        case IdentifierMethod::energy: return "energy";
        case IdentifierMethod::random_baseline: return "random";
    }
    return "unknown";
}

IdentifierMethod identifier_method_from_string(const std::string& name) {
    if (name == "straggler") return IdentifierMethod::straggler;
    if (name == "confidence") return IdentifierMethod::confidence;
    if (name == "energy") return IdentifierMethod::energy;
    if (name == "random") return IdentifierMethod::random_baseline;
    throw Error("unknown identifier method '" + name + "'");
}

}  // namespace stragglers

namespace stragglers::identifiers {

namespace {

// Select n ids by (score, id) order; `ascending` picks the lowest scores
// first (confidence), otherwise the highest (energy).
HardSampleSet select_by_score(const data::LabeledDataset& dataset,
                              const std::vector<double>& scores, std::size_t n, bool ascending,
                              IdentifierMethod method) {
    if (n > dataset.size()) {
        throw ThresholdTooLarge("threshold n=" + std::to_string(n) + " exceeds dataset size " +
                                std::to_string(dataset.size()));
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
        }
        return dataset.ids[a] < dataset.ids[b];
    });

    HardSampleSet set;
    set.method = method;
    set.threshold = "n=" + std::to_string(n);
    set.source = dataset.provenance.source;
    set.per_class_counts.assign(static_cast<std::size_t>(dataset.num_classes), 0);
    set.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = order[i];
        set.ids.push_back(dataset.ids[row]);
        set.per_class_counts[static_cast<std::size_t>(dataset.labels[row])] += 1;
    }
    std::sort(set.ids.begin(), set.ids.end());
    return set;
}

}  // namespace

HardSampleSet identify_by_confidence(const nn::NetworkParams& params,
                                     const data::LabeledDataset& dataset, std::size_t n) {
    std::vector<double> scores(dataset.size());
    for (std::size_t row = 0; row < dataset.size(); ++row) {
        scores[row] = nn::confidence(params, dataset.feature(row));
    }
    return select_by_score(dataset, scores, n, /*ascending=*/true, IdentifierMethod::confidence);
}

HardSampleSet identify_by_energy(const nn::NetworkParams& params,
                                 const data::LabeledDataset& dataset, std::size_t n) {
    std::vector<double> scores(dataset.size());
    for (std::size_t row = 0; row < dataset.size(); ++row) {
        scores[row] = nn::energy(params, dataset.feature(row));
    }
    return select_by_score(dataset, scores, n, /*ascending=*/false, IdentifierMethod::energy);
}

HardSampleSet identify_random(const data::LabeledDataset& dataset, std::size_t n,
                              std::uint64_t seed) {
    if (n > dataset.size()) {
        throw ThresholdTooLarge("threshold n=" + std::to_string(n) + " exceeds dataset size " +
                                std::to_string(dataset.size()));
    }
    std::vector<std::int64_t> pool = dataset.ids;
    std::sort(pool.begin(), pool.end());
    Rng rng(derive_seed(seed, {0x726e6473}));  // "rnds"
    rng.shuffle(pool);

    HardSampleSet set;
    set.method = IdentifierMethod::random_baseline;
    set.threshold = "n=" + std::to_string(n);
    set.source = dataset.provenance.source;
    set.per_class_counts.assign(static_cast<std::size_t>(dataset.num_classes), 0);
    set.ids.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(set.ids.begin(), set.ids.end());
    for (std::int64_t id : set.ids) {
        const std::size_t row = dataset.row_of(id);
        set.per_class_counts[static_cast<std::size_t>(dataset.labels[row])] += 1;
    }
    return set;
}

double overlap_pct(const HardSampleSet& a, const HardSampleSet& b) {
    if (a.ids.size() != b.ids.size()) {
        throw SizeMismatch("overlap requires equal-size sets, got " + std::to_string(a.ids.size()) +
                           " and " + std::to_string(b.ids.size()));
    }
    if (a.ids.empty()) {
        return 100.0;
    }
    std::vector<std::int64_t> common;
    std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                          std::back_inserter(common));
    return 100.0 * static_cast<double>(common.size()) / static_cast<double>(a.ids.size());
}

}  // namespace stragglers::identifiers
