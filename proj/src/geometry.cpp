#include "stragglers/geometry.hpp"

#include <cmath>

#include "stragglers/errors.hpp"

namespace stragglers::geometry {

std::vector<std::pair<int, double>> RadiiTrace::class_series(int cls) const {
    std::vector<std::pair<int, double>> series;
    series.reserve(entries.size());
    for (const auto& entry : entries) {
        series.emplace_back(entry.epoch, entry.radii.at(static_cast<std::size_t>(cls)));
    }
    return series;
}

double gyration_radius_sq(std::span<const double> points, std::size_t count, std::size_t dim) {
    if (count == 0) {
        throw EmptySet("gyration radius of an empty point set");
    }
    if (points.size() != count * dim) {
        throw DimensionMismatch("point buffer size does not match count*dim");
    }
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double* p = points.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += p[j];
    }
    for (double& c : centroid) c /= static_cast<double>(count);

    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double* p = points.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = p[j] - centroid[j];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(count);
}

double gyration_radius_sq(const std::vector<std::vector<double>>& points) {
    if (points.empty()) {
        throw EmptySet("gyration radius of an empty point set");
    }
    const std::size_t dim = points.front().size();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw DimensionMismatch("points have mixed dimensions");
        }
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return gyration_radius_sq(flat, points.size(), dim);
}

std::vector<double> class_radii(const nn::NetworkParams& params, const data::DatasetView& view) {
    const int k = view.base->num_classes;
    const std::size_t latent_dim = static_cast<std::size_t>(params.hidden1);
    const std::vector<double> all = nn::hidden1_latents(params, view);

    // Gather latents per class, then reduce each class independently.
    std::vector<std::vector<double>> latents(static_cast<std::size_t>(k));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < view.size(); ++i) {
        auto& bucket = latents[static_cast<std::size_t>(view.label(i))];
        bucket.insert(bucket.end(), all.begin() + static_cast<std::ptrdiff_t>(i * latent_dim),
                      all.begin() + static_cast<std::ptrdiff_t>((i + 1) * latent_dim));
        counts[static_cast<std::size_t>(view.label(i))] += 1;
    }

    std::vector<double> radii(static_cast<std::size_t>(k), 0.0);
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw MissingClass(c, "class " + std::to_string(c) + " absent from view");
        }
        radii[static_cast<std::size_t>(c)] = gyration_radius_sq(
            latents[static_cast<std::size_t>(c)], counts[static_cast<std::size_t>(c)], latent_dim);
    }
    return radii;
}

}  // namespace stragglers::geometry
