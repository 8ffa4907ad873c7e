#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stragglers::data {

// One MNIST-family file pair, decoded but untouched: pixel bytes and labels
// in file order. Sample i has implicit id i.
//
// IDX layout (big-endian):
//   images: magic 0x00000803 | count | rows | cols | count*rows*cols uint8
//   labels: magic 0x00000801 | count | count uint8
struct RawDataset {
    std::vector<std::uint8_t> pixels;  // count * (rows*cols), row-major
    std::vector<int> labels;
    int rows = 0;
    int cols = 0;

    std::size_t size() const { return labels.size(); }
    int dim() const { return rows * cols; }
};

// Throws BadMagic / CountMismatch / TruncatedFile; messages name the
// offending file and byte offset.
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace stragglers::data
