#include "msr/fourier/kspace.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

namespace msr::fourier {
namespace {

// FFTW's planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

// Unnormalized in-place DFT over an h x w buffer.
void run_dft(fftw_complex* buf, std::size_t h, std::size_t w, int sign) {
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, sign,
                                FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw Error("fftw planning failed");
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

FftwBuffer alloc_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * std::max<std::size_t>(n, 1)));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer(p);
}

// centered -> origin: out[i] = in[(i + n/2) % n]
inline std::size_t ishift(std::size_t i, std::size_t n) noexcept { return (i + n / 2) % n; }
// origin -> centered: out[(i + n/2) % n] = in[i]
inline std::size_t fshift(std::size_t i, std::size_t n) noexcept { return (i + n / 2) % n; }

KSpaceGrid centered_transform(const std::vector<std::complex<double>>& in, std::size_t h,
                              std::size_t w, int sign) {
    auto buf = alloc_buffer(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const auto& v = in[ishift(r, h) * w + ishift(c, w)];
            buf[r * w + c][0] = v.real();
            buf[r * w + c][1] = v.imag();
        }
    }
    run_dft(buf.get(), h, w, sign);
    const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
    KSpaceGrid out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const auto* v = buf[r * w + c];
            out(fshift(r, h), fshift(c, w)) = {v[0] * norm, v[1] * norm};
        }
    }
    return out;
}

void require_finite(const std::vector<std::complex<double>>& v, const char* what) {
    for (const auto& z : v) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw ValueError(std::string(what) + ": non-finite input");
        }
    }
}

inline std::size_t mirror(std::size_t i, std::size_t n) noexcept {
    return (2 * (n / 2) + n - i) % n;
}

}  // namespace

Image::Image(std::size_t h, std::size_t w, std::vector<double> values)
    : height(h), width(w), data(std::move(values)) {
    if (data.size() != h * w) throw ShapeError("image data length does not match dimensions");
}

KSpaceGrid::KSpaceGrid(std::size_t h, std::size_t w) : height_(h), width_(w), data_(h * w) {}

KSpaceGrid::KSpaceGrid(std::size_t h, std::size_t w, std::vector<std::complex<double>> values)
    : height_(h), width_(w), data_(std::move(values)) {
    if (data_.size() != h * w) throw ShapeError("k-space data length does not match dimensions");
}

ScaleFactor::ScaleFactor(int s) : s_(static_cast<std::size_t>(s)) {
    if (s < 1) throw ConfigError("scale factor must be >= 1, got " + std::to_string(s));
}

void ScaleFactor::require_divides(std::size_t h, std::size_t w) const {
    if (!divides(h, w)) {
        throw ConfigError("scale factor " + std::to_string(s_) + " does not divide image size " +
                          std::to_string(h) + "x" + std::to_string(w));
    }
}

KSpaceGrid fft2c(const Image& image) {
    if (image.height == 0 || image.width == 0) throw ShapeError("fft2c: empty image");
    if (image.data.size() != image.height * image.width) throw ShapeError("fft2c: bad image");
    std::vector<std::complex<double>> in(image.data.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!std::isfinite(image.data[i])) throw ValueError("fft2c: non-finite input");
        in[i] = image.data[i];
    }
    return centered_transform(in, image.height, image.width, FFTW_FORWARD);
}

KSpaceGrid ifft2c_complex(const KSpaceGrid& k) {
    if (k.height() == 0 || k.width() == 0) throw ShapeError("ifft2c: empty grid");
    require_finite(k.data(), "ifft2c");
    return centered_transform(k.data(), k.height(), k.width(), FFTW_BACKWARD);
}

Image ifft2c(const KSpaceGrid& k) {
    const KSpaceGrid z = ifft2c_complex(k);
    Image out(k.height(), k.width());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t i = 0; i < z.data().size(); ++i) {
        out.data[i] = z.data()[i].real();
        max_re = std::max(max_re, std::abs(z.data()[i].real()));
        max_im = std::max(max_im, std::abs(z.data()[i].imag()));
    }
    if (max_im > 1e-4 * max_re) {
        throw ValueError("ifft2c: grid is not Hermitian (imaginary residue " +
                         std::to_string(max_im) + " vs real peak " + std::to_string(max_re) + ")");
    }
    return out;
}

KSpaceGrid truncate_center(const KSpaceGrid& k, ScaleFactor s) {
    s.require_divides(k.height(), k.width());
    const std::size_t h = k.height() / s.value();
    const std::size_t w = k.width() / s.value();
    const std::size_t r0 = k.dc_row() - h / 2;
    const std::size_t c0 = k.dc_col() - w / 2;
    const double scale = 1.0 / static_cast<double>(s.value());
    KSpaceGrid out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) out(r, c) = k(r0 + r, c0 + c) * scale;
    }
    return out;
}

KSpaceGrid hermitian_part(const KSpaceGrid& k) {
    const std::size_t h = k.height();
    const std::size_t w = k.width();
    KSpaceGrid out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            out(r, c) = 0.5 * (k(r, c) + std::conj(k(mirror(r, h), mirror(c, w))));
        }
    }
    return out;
}

Image degrade(const Image& hr, ScaleFactor s) {
    s.require_divides(hr.height, hr.width);
    return ifft2c(hermitian_part(truncate_center(fft2c(hr), s)));
}

KSpaceGrid zero_pad_center(const KSpaceGrid& k, ScaleFactor s) {
    const std::size_t h = k.height();
    const std::size_t w = k.width();
    const std::size_t big_h = h * s.value();
    const std::size_t big_w = w * s.value();
    const std::size_t r0 = big_h / 2 - h / 2;
    const std::size_t c0 = big_w / 2 - w / 2;

    // (large index, small index) pairs along each axis.
    auto axis_map = [&](std::size_t n, std::size_t offset) {
        std::vector<std::pair<std::size_t, std::size_t>> m;
        for (std::size_t i = 0; i < n; ++i) m.emplace_back(offset + i, i);
        if (s.value() > 1 && n % 2 == 0) m.emplace_back(offset + n, 0);
        return m;
    };
    const auto rows = axis_map(h, r0);
    const auto cols = axis_map(w, c0);
    const double scale = static_cast<double>(s.value());
    KSpaceGrid out(big_h, big_w);
    for (const auto& [R, r] : rows) {
        for (const auto& [C, c] : cols) out(R, C) = k(r, c) * scale;
    }
    return out;
}

Image zero_fill_upsample(const Image& lr, ScaleFactor s) {
    return ifft2c(zero_pad_center(fft2c(lr), s));
}

}  // namespace msr::fourier
