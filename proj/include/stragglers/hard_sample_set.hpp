#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace stragglers {

enum class IdentifierMethod { straggler, confidence, energy, random_baseline };

std::string to_string(IdentifierMethod method);
IdentifierMethod identifier_method_from_string(const std::string& name);

// A method-tagged set of sample ids deemed hard. `ids` is kept sorted so
// membership tests are cheap and serialized output is canonical.
struct HardSampleSet {
    IdentifierMethod method = IdentifierMethod::straggler;
    std::vector<std::int64_t> ids;
    std::vector<int> per_class_counts;  // indexed by class, sums to ids.size()
    std::string threshold;              // "intrinsic" for stragglers, "n=<count>" otherwise
    std::string source;                 // run descriptor

    std::size_t size() const { return ids.size(); }

    bool contains(std::int64_t id) const {
        return std::binary_search(ids.begin(), ids.end(), id);
    }
};

}  // namespace stragglers
