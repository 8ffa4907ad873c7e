#pragma once

#include <cstdint>
#include <vector>

#include "stragglers/dataset.hpp"
#include "stragglers/hard_sample_set.hpp"
#include "stragglers/network.hpp"

namespace stragglers::identifiers {

// The n ids with the lowest max-softmax confidence; ties break toward the
// lower id so selection is storage-order invariant.
HardSampleSet identify_by_confidence(const nn::NetworkParams& params,
                                     const data::LabeledDataset& dataset, std::size_t n);

// The n ids with the highest energy (negative log-sum-exp of logits).
HardSampleSet identify_by_energy(const nn::NetworkParams& params,
                                 const data::LabeledDataset& dataset, std::size_t n);

// Threshold-matched baseline: n ids drawn uniformly without replacement.
HardSampleSet identify_random(const data::LabeledDataset& dataset, std::size_t n,
                              std::uint64_t seed);

// 100 * |a intersect b| / |a|; requires |a| == |b| (threshold matched).
double overlap_pct(const HardSampleSet& a, const HardSampleSet& b);

}  // namespace stragglers::identifiers
