#pragma once

#include <filesystem>

#include "msr/fourier/kspace.hpp"

namespace msr::train {

// 8-bit grayscale PNG; values are clamped to [0, 1] and rounded.
void write_png(const std::filesystem::path& path, const fourier::Image& image);

}  // namespace msr::train
