#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msr/fourier/kspace.hpp"

namespace msr::data {

// Two contrasts of the same synthetic anatomy. Tissue k (1-based in `labels`,
// 0 = background) has intensity aux_levels[k-1] in `aux` and tar_levels[k-1]
// in `tar`; background is 0 in both.
struct PhantomPair {
    fourier::Image aux;
    fourier::Image tar;
    std::vector<int> labels;
    std::vector<double> aux_levels;
    std::vector<double> tar_levels;
};

// Deterministic in (seed, aux_seed). Geometry and target intensities come from
// `seed` alone; auxiliary intensities come from `aux_seed` (derived from
// `seed` when absent). Throws ConfigError for h, w < 16 or n_shapes < 1.
[[nodiscard]] PhantomPair generate_phantom(std::uint64_t seed, std::size_t height,
                                           std::size_t width, int n_shapes,
                                           std::optional<std::uint64_t> aux_seed = std::nullopt);

// Tissue intensities are drawn from [kMinLevel, kMaxLevel].
inline constexpr double kMinLevel = 0.2;
inline constexpr double kMaxLevel = 1.0;
// At least one visible tissue differs between contrasts by this much.
inline constexpr double kMinContrastGap = 0.3;

[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace msr::data
