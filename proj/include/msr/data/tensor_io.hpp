#pragma once

// Binary tensor files:
//   "MSRT" | u8 version (0x01) | u8 rank | rank x u32 LE dims | f32 LE values
// Values are row-major. Readers reject anything malformed without returning
// partial data.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "msr/fourier/kspace.hpp"
#include "msr/tensor.hpp"

namespace msr::data {

struct RawArray {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
};

[[nodiscard]] std::vector<std::uint8_t> encode_array(std::span<const std::uint32_t> dims,
                                                     std::span<const float> values);
[[nodiscard]] RawArray decode_array(std::span<const std::uint8_t> bytes);

void save_array(const std::filesystem::path& path, std::span<const std::uint32_t> dims,
                std::span<const float> values);
[[nodiscard]] RawArray load_array(const std::filesystem::path& path);

// Rank-4 round trip. Loading accepts rank 1..4, padding leading dims with 1.
void save_tensor(const std::filesystem::path& path, const Tensor<float>& t);
[[nodiscard]] Tensor<float> load_tensor(const std::filesystem::path& path);

// Images are stored as rank-2 float32 arrays.
void save_image(const std::filesystem::path& path, const fourier::Image& image);
[[nodiscard]] fourier::Image load_image(const std::filesystem::path& path);

}  // namespace msr::data
