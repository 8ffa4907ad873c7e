#include "stragglers/inversion.hpp"

#include <algorithm>
#include <limits>

#include "stragglers/errors.hpp"
#include "stragglers/rng.hpp"

namespace stragglers::inversion {

bool InversionResult::complete() const {
    return std::all_of(snapshots.begin(), snapshots.end(),
                       [](const auto& s) { return s.has_value(); });
}

std::vector<int> InversionResult::missing_classes() const {
    std::vector<int> missing;
    for (std::size_t c = 0; c < snapshots.size(); ++c) {
        if (!snapshots[c].has_value()) missing.push_back(static_cast<int>(c));
    }
    return missing;
}

std::optional<int> detect_first_rise(const std::vector<std::pair<int, double>>& series) {
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].second > series[i - 1].second) {
            return series[i].first;
        }
    }
    return std::nullopt;
}

geometry::RadiiTrace record_radii_trace(const data::LabeledDataset& dataset,
                                        const nn::TrainConfig& config, bool compute_radii) {
    if (config.epochs < config.burn_in_epochs + 1) {
        throw Error("radii trace needs epochs >= burn_in + 1 (" +
                    std::to_string(config.epochs) + " <= " +
                    std::to_string(config.burn_in_epochs) + ")");
    }
    const auto view = data::full_view(dataset);
    geometry::RadiiTrace trace;
    trace.run_seed = config.seed;
    trace.dataset_tag = dataset.provenance.source;
    trace.radii_period = config.radii_period;
    trace.burn_in = config.burn_in_epochs;

    auto params = nn::init_params(dataset.dim, dataset.num_classes, config.seed);
    const int period = std::max(1, config.radii_period);
    nn::train(params, view, config,
              [&](int epoch, const nn::NetworkParams& p, double) {
                  if (compute_radii && epoch > config.burn_in_epochs && epoch % period == 0) {
                      trace.entries.push_back({epoch, geometry::class_radii(p, view)});
                  }
                  return true;
              });
    return trace;
}

InversionResult train_stop_at_inversion(const data::LabeledDataset& dataset,
                                        const nn::TrainConfig& config,
                                        const StopAtInversionOptions& options) {
    const auto view = data::full_view(dataset);
    const int k = dataset.num_classes;
    const int period = std::max(1, options.radii_period);
    auto measure_radii = options.radii_provider;
    if (!measure_radii) {
        measure_radii = [](const nn::NetworkParams& p, const data::DatasetView& v) {
            return geometry::class_radii(p, v);
        };
    }

    InversionResult result;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        result.epochs.assign(static_cast<std::size_t>(k), std::nullopt);
        result.snapshots.assign(static_cast<std::size_t>(k), std::nullopt);
        result.trace = geometry::RadiiTrace{};
        result.trace.dataset_tag = dataset.provenance.source;
        result.trace.radii_period = period;
        result.trace.burn_in = config.burn_in_epochs;
        result.attempts = attempt;

        nn::TrainConfig attempt_config = config;
        attempt_config.seed =
            derive_seed(config.seed, {0x61746d70, static_cast<std::uint64_t>(attempt)});
        result.trace.run_seed = attempt_config.seed;

        auto params = nn::init_params(dataset.dim, k, attempt_config.seed);
        std::vector<double> prev_radii(static_cast<std::size_t>(k),
                                       std::numeric_limits<double>::infinity());

        nn::train(params, view, attempt_config,
                  [&](int epoch, const nn::NetworkParams& p, double) {
                      if (epoch % period != 0) {
                          return true;
                      }
                      const auto current = measure_radii(p, view);
                      for (int c = 0; c < k; ++c) {
                          const auto ci = static_cast<std::size_t>(c);
                          if (!result.snapshots[ci].has_value() && current[ci] > prev_radii[ci] &&
                              epoch > config.burn_in_epochs) {
                              result.snapshots[ci] = p;  // deep copy, frozen
                              result.epochs[ci] = epoch;
                          }
                      }
                      prev_radii = current;
                      if (epoch > config.burn_in_epochs) {
                          result.trace.entries.push_back({epoch, current});
                      }
                      return !result.complete();
                  });

        if (result.complete()) {
            return result;
        }
    }

    const auto missing = result.missing_classes();
    std::string names;
    for (int c : missing) names += (names.empty() ? "" : ",") + std::to_string(c);
    throw InversionNotFound(missing, options.max_attempts,
                            "no inversion point for class(es) " + names + " after " +
                                std::to_string(options.max_attempts) + " attempts");
}

HardSampleSet extract_stragglers(const InversionResult& result,
                                 const data::LabeledDataset& dataset) {
    const int k = dataset.num_classes;
    if (static_cast<int>(result.snapshots.size()) != k) {
        throw MissingSnapshot(-1, "inversion result does not cover all classes");
    }
    for (int c = 0; c < k; ++c) {
        if (!result.snapshots[static_cast<std::size_t>(c)].has_value()) {
            throw MissingSnapshot(c, "no snapshot for class " + std::to_string(c));
        }
    }

    HardSampleSet hard;
    hard.method = IdentifierMethod::straggler;
    hard.threshold = "intrinsic";
    hard.source = dataset.provenance.source + "|seed=" + std::to_string(result.trace.run_seed);
    hard.per_class_counts.assign(static_cast<std::size_t>(k), 0);
    for (std::size_t row = 0; row < dataset.size(); ++row) {
        const int label = dataset.labels[row];
        const auto& snapshot = *result.snapshots[static_cast<std::size_t>(label)];
        if (nn::predict(snapshot, dataset.feature(row)) != label) {
            hard.ids.push_back(dataset.ids[row]);
            hard.per_class_counts[static_cast<std::size_t>(label)] += 1;
        }
    }
    std::sort(hard.ids.begin(), hard.ids.end());
    return hard;
}

}  // namespace stragglers::inversion
