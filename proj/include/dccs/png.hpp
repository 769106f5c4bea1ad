#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dccs {

// 8-bit grayscale PNG, row-major pixels.
void write_png_gray(const std::filesystem::path &path, int width, int height, const std::vector<std::uint8_t> &pixels);
std::vector<std::uint8_t> read_png_gray(const std::filesystem::path &path, int &width, int &height);

} // namespace dccs
