#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stragglers/dataset.hpp"
#include "stragglers/geometry.hpp"
#include "stragglers/hard_sample_set.hpp"
#include "stragglers/network.hpp"

namespace stragglers::inversion {

// Per-class inversion epoch plus the parameter snapshot frozen at that
// epoch. A snapshot exists iff its epoch was recorded.
struct InversionResult {
    std::vector<std::optional<int>> epochs;                     // per class
    std::vector<std::optional<nn::NetworkParams>> snapshots;    // per class, deep copies
    int attempts = 0;
    geometry::RadiiTrace trace;  // checked (epoch, radii) tuples of the final attempt

    bool complete() const;
    std::vector<int> missing_classes() const;
};

struct StopAtInversionOptions {
    int max_attempts = 5;
    int radii_period = 5;  // radii are checked every this many epochs
    // Test seam: override the radii measurement. Defaults to
    // geometry::class_radii over the training view.
    std::function<std::vector<double>(const nn::NetworkParams&, const data::DatasetView&)>
        radii_provider;
};

// Epoch of the first measurement strictly greater than its predecessor;
// nullopt when the series is monotone nonincreasing.
std::optional<int> detect_first_rise(const std::vector<std::pair<int, double>>& series);

// Trains on the full dataset and appends (epoch, class radii) for every
// period epoch past the burn-in. With compute_radii=false training still
// runs but the trace stays empty.
geometry::RadiiTrace record_radii_trace(const data::LabeledDataset& dataset,
                                        const nn::TrainConfig& config, bool compute_radii = true);

// Trains while checking radii every options.radii_period epochs; freezes a
// deep copy of the parameters for a class on its first rise after the
// burn-in and stops once every class has a snapshot. Restarts with a fresh
// initialization when a full run leaves classes uncovered; throws
// InversionNotFound after max_attempts.
InversionResult train_stop_at_inversion(const data::LabeledDataset& dataset,
                                        const nn::TrainConfig& config,
                                        const StopAtInversionOptions& options = {});

// Samples misclassified by their own class's inversion snapshot, aggregated
// over classes into a dataset-level straggler set.
HardSampleSet extract_stragglers(const InversionResult& result,
                                 const data::LabeledDataset& dataset);

}  // namespace stragglers::inversion
