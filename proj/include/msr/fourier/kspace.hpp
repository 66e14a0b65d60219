#pragma once

// Centered orthonormal 2D Fourier transforms and k-space truncation used to
// simulate low-resolution MR acquisition.
//
// Convention: the DC coefficient sits at (H/2, W/2) with integer division, and
// the forward/inverse pair is unitary, so sum |k|^2 == sum |x|^2.

#include <complex>
#include <cstddef>
#include <vector>

#include "msr/error.hpp"

namespace msr::fourier {

// Real 2D array, row-major.
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), data(h * w, fill) {}
    Image(std::size_t h, std::size_t w, std::vector<double> values);

    double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * width + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * width + c]; }
    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
};

class KSpaceGrid {
public:
    KSpaceGrid() = default;
    KSpaceGrid(std::size_t h, std::size_t w);
    KSpaceGrid(std::size_t h, std::size_t w, std::vector<std::complex<double>> values);

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t dc_row() const noexcept { return height_ / 2; }
    [[nodiscard]] std::size_t dc_col() const noexcept { return width_ / 2; }

    std::complex<double>& operator()(std::size_t r, std::size_t c) noexcept {
        return data_[r * width_ + c];
    }
    const std::complex<double>& operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * width_ + c];
    }
    [[nodiscard]] const std::vector<std::complex<double>>& data() const noexcept { return data_; }
    [[nodiscard]] std::vector<std::complex<double>>& data() noexcept { return data_; }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::complex<double>> data_;
};

class ScaleFactor {
public:
    // Throws ConfigError for s < 1.
    explicit ScaleFactor(int s);

    [[nodiscard]] std::size_t value() const noexcept { return s_; }
    [[nodiscard]] bool divides(std::size_t h, std::size_t w) const noexcept {
        return h % s_ == 0 && w % s_ == 0;
    }
    // Throws ConfigError unless s divides both dimensions.
    void require_divides(std::size_t h, std::size_t w) const;

private:
    std::size_t s_;
};

[[nodiscard]] KSpaceGrid fft2c(const Image& image);

// Inverse transform keeping the complex result.
[[nodiscard]] KSpaceGrid ifft2c_complex(const KSpaceGrid& k);

// Inverse transform of a Hermitian-symmetric grid. The imaginary residue must
// stay below 1e-4 of the real part's peak magnitude, else ValueError.
[[nodiscard]] Image ifft2c(const KSpaceGrid& k);

// Central (H/s) x (W/s) block, scaled by 1/s.
[[nodiscard]] KSpaceGrid truncate_center(const KSpaceGrid& k, ScaleFactor s);

// (K(u) + conj(K(-u))) / 2 under the centered index convention. The real part
// of the inverse transform of any grid equals the inverse of this projection.
[[nodiscard]] KSpaceGrid hermitian_part(const KSpaceGrid& k);

// ifft2c(hermitian_part(truncate_center(fft2c(hr), s))).
[[nodiscard]] Image degrade(const Image& hr, ScaleFactor s);

// Right inverse of truncate_center: embeds the grid into an (sH) x (sW) zero
// grid scaled by s. For even-sized input the Nyquist row/column is mirrored
// onto the opposite edge so degrade(zero_fill_upsample(y)) == y.
[[nodiscard]] KSpaceGrid zero_pad_center(const KSpaceGrid& k, ScaleFactor s);

// Zero-filled k-space upsampling baseline.
[[nodiscard]] Image zero_fill_upsample(const Image& lr, ScaleFactor s);

}  // namespace msr::fourier
