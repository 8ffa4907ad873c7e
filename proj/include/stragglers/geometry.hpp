#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stragglers/dataset.hpp"
#include "stragglers/network.hpp"

namespace stragglers::geometry {

// Per-epoch, per-class squared gyration radii of the first-hidden-layer
// representations. Entries are appended in epoch order.
struct RadiiTrace {
    struct Entry {
        int epoch = 0;
        std::vector<double> radii;  // k entries, all >= 0
    };
    std::vector<Entry> entries;

    std::uint64_t run_seed = 0;
    std::string dataset_tag;
    int radii_period = 1;
    int burn_in = 20;

    // Radius series of one class as (epoch, value) pairs.
    std::vector<std::pair<int, double>> class_series(int cls) const;
};

// Mean squared distance to the centroid; algebraically equal to the
// half-mean pairwise form (1/2n^2) * sum_{x,y} ||x-y||^2.
double gyration_radius_sq(std::span<const double> points, std::size_t count, std::size_t dim);
double gyration_radius_sq(const std::vector<std::vector<double>>& points);

// Squared gyration radius of every class manifold in the view, measured on
// the first hidden layer of `params`. Throws MissingClass when a class has
// no samples in the view.
std::vector<double> class_radii(const nn::NetworkParams& params, const data::DatasetView& view);

}  // namespace stragglers::geometry
