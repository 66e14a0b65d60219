#include "msr/data/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "msr/error.hpp"

namespace msr::data {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PhantomPair generate_phantom(std::uint64_t seed, std::size_t height, std::size_t width,
                             int n_shapes, std::optional<std::uint64_t> aux_seed) {
    if (height < 16 || width < 16) {
        throw ConfigError("phantom size must be at least 16x16, got " + std::to_string(height) +
                          "x" + std::to_string(width));
    }
    if (n_shapes < 1) throw ConfigError("phantom needs at least one shape");

    std::mt19937_64 rng(seed);
    std::mt19937_64 aux_rng(aux_seed.value_or(mix_seed(seed, 0xA0A0)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> level(kMinLevel, kMaxLevel);

    const double h = static_cast<double>(height);
    const double w = static_cast<double>(width);

    PhantomPair out;
    out.labels.assign(height * width, 0);
    for (int k = 0; k < n_shapes; ++k) {
        const bool ellipse = unit(rng) < 0.6;
        const double cy = (0.2 + 0.6 * unit(rng)) * h;
        const double cx = (0.2 + 0.6 * unit(rng)) * w;
        const double ry = (0.08 + 0.22 * unit(rng)) * h;
        const double rx = (0.08 + 0.22 * unit(rng)) * w;
        const double theta = ellipse ? unit(rng) * std::numbers::pi : 0.0;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (std::size_t r = 0; r < height; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                const double dy = static_cast<double>(r) + 0.5 - cy;
                const double dx = static_cast<double>(c) + 0.5 - cx;
                bool inside;
                if (ellipse) {
                    const double u = (ct * dx + st * dy) / rx;
                    const double v = (-st * dx + ct * dy) / ry;
                    inside = u * u + v * v <= 1.0;
                } else {
                    inside = std::abs(dx) <= rx && std::abs(dy) <= ry;
                }
                if (inside) out.labels[r * width + c] = k + 1;
            }
        }
        out.tar_levels.push_back(level(rng));
        out.aux_levels.push_back(level(aux_rng));
    }

    // The last-painted tissue is always visible; force the contrast gap there
    // when no tissue already has it.
    std::vector<bool> visible(static_cast<std::size_t>(n_shapes), false);
    for (int l : out.labels) {
        if (l > 0) visible[static_cast<std::size_t>(l - 1)] = true;
    }
    bool diverges = false;
    for (std::size_t k = 0; k < visible.size(); ++k) {
        diverges = diverges ||
                   (visible[k] && std::abs(out.aux_levels[k] - out.tar_levels[k]) >= kMinContrastGap);
    }
    const auto last = static_cast<std::size_t>(n_shapes - 1);
    while (!diverges) {
        out.aux_levels[last] = level(aux_rng);
        diverges = std::abs(out.aux_levels[last] - out.tar_levels[last]) >= kMinContrastGap;
    }

    out.aux = fourier::Image(height, width);
    out.tar = fourier::Image(height, width);
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        const int l = out.labels[i];
        if (l == 0) continue;
        out.aux.data[i] = std::clamp(out.aux_levels[l - 1], 0.0, 1.0);
        out.tar.data[i] = std::clamp(out.tar_levels[l - 1], 0.0, 1.0);
    }
    return out;
}

}  // namespace msr::data
