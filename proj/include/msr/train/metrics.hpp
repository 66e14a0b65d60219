#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "msr/fourier/kspace.hpp"

namespace msr::train {

using fourier::Image;

// 10 log10(max_val^2 / MSE); +infinity when the images are identical.
[[nodiscard]] double psnr(const Image& pred, const Image& gt, double max_val = 1.0);

// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), k1 = 0.01,
// k2 = 0.03 and dynamic range 1, over valid window positions only.
// Throws ConfigError for images smaller than the window.
[[nodiscard]] double ssim(const Image& pred, const Image& gt);
inline constexpr std::size_t kSsimWindow = 11;

// sum (pred - gt)^2 / sum gt^2. Throws ValueError when gt is all zero.
[[nodiscard]] double nmse(const Image& pred, const Image& gt);

// |pred - gt| / saturation, clamped to [0, 1].
[[nodiscard]] Image error_map(const Image& pred, const Image& gt, double saturation = 0.2);

struct SampleMetrics {
    std::string id;
    double psnr = 0.0;
    double ssim = 0.0;
    double nmse = 0.0;
};

struct MetricReport {
    std::vector<SampleMetrics> samples;
    double mean_psnr = std::numeric_limits<double>::quiet_NaN();
    double mean_ssim = std::numeric_limits<double>::quiet_NaN();
    double mean_nmse = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] std::vector<double> psnr_values() const;
    [[nodiscard]] std::vector<double> ssim_values() const;
};

[[nodiscard]] SampleMetrics measure(const std::string& id, const Image& pred, const Image& gt);

// Fills the means from `samples`.
void summarize(MetricReport& report);

}  // namespace msr::train
