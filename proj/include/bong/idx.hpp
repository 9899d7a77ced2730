#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bong/dataset.hpp"

namespace bong {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

// Big-endian IDX image/label pair. Pixels are scaled to [0, 1], labels become
// one-hot over 10 classes. A negative limit reads every record.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 Index limit = -1);

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t n, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

}  // namespace bong
