#include "stragglers/idx.hpp"

#include <cstdio>
#include <fstream>

#include "stragglers/errors.hpp"

namespace stragglers::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TruncatedFile("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be_u32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                          const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw TruncatedFile(path + ": need 4 bytes at offset " + std::to_string(offset) +
                            ", file has " + std::to_string(bytes.size()));
    }
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

std::string hex(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto image_bytes = read_file(images_path);
    const auto label_bytes = read_file(labels_path);

    const std::uint32_t image_magic = read_be_u32(image_bytes, 0, images_path);
    if (image_magic != kImageMagic) {
        throw BadMagic(images_path + ": image magic at offset 0 is " + hex(image_magic) +
                       ", expected " + hex(kImageMagic));
    }
    const std::uint32_t label_magic = read_be_u32(label_bytes, 0, labels_path);
    if (label_magic != kLabelMagic) {
        throw BadMagic(labels_path + ": label magic at offset 0 is " + hex(label_magic) +
                       ", expected " + hex(kLabelMagic));
    }

    const std::uint32_t n_images = read_be_u32(image_bytes, 4, images_path);
    const std::uint32_t rows = read_be_u32(image_bytes, 8, images_path);
    const std::uint32_t cols = read_be_u32(image_bytes, 12, images_path);
    const std::uint32_t n_labels = read_be_u32(label_bytes, 4, labels_path);

    if (n_images != n_labels) {
        throw CountMismatch(images_path + " has " + std::to_string(n_images) + " images but " +
                            labels_path + " has " + std::to_string(n_labels) +
                            " labels (counts at offset 4)");
    }

    const std::size_t pixel_count =
        static_cast<std::size_t>(n_images) * rows * cols;
    if (image_bytes.size() < 16 + pixel_count) {
        throw TruncatedFile(images_path + ": expected " + std::to_string(16 + pixel_count) +
                            " bytes, file has " + std::to_string(image_bytes.size()) +
                            " (truncated at offset " + std::to_string(image_bytes.size()) + ")");
    }
    if (label_bytes.size() < 8 + n_labels) {
        throw TruncatedFile(labels_path + ": expected " + std::to_string(8 + n_labels) +
                            " bytes, file has " + std::to_string(label_bytes.size()) +
                            " (truncated at offset " + std::to_string(label_bytes.size()) + ")");
    }

    RawDataset raw;
    raw.rows = static_cast<int>(rows);
    raw.cols = static_cast<int>(cols);
    raw.pixels.assign(image_bytes.begin() + 16, image_bytes.begin() + 16 + pixel_count);
    raw.labels.reserve(n_labels);
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        raw.labels.push_back(static_cast<int>(label_bytes[8 + i]));
    }
    return raw;
}

}  // namespace stragglers::data
