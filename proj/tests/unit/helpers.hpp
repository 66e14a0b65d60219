#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <numbers>
#include <random>
#include <vector>

#include "msr/fourier/kspace.hpp"
#include "msr/nn/autodiff.hpp"

namespace msr::test {

using Rng = std::mt19937_64;

template <typename T = float>
Tensor<T> random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Tensor<T> t(s);
    for (auto& v : t.vec()) v = static_cast<T>(d(rng));
    return t;
}

inline fourier::Image random_image(std::size_t h, std::size_t w, Rng& rng, double lo = 0.0,
                                   double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    fourier::Image img(h, w);
    for (auto& v : img.data) v = d(rng);
    return img;
}

inline double max_abs_diff(const fourier::Image& a, const fourier::Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return m;
}

// Centered orthonormal DFT evaluated term by term:
//   K[u, v] = (HW)^(-1/2) sum_{r,c} x[r, c] exp(sign 2 pi i ((u-ch)(r-ch)/H + (v-cw)(c-cw)/W))
// with ch = H/2, cw = W/2 (integer division). sign = -1 forward, +1 inverse.
inline std::vector<std::complex<double>> brute_dft(const std::vector<std::complex<double>>& x,
                                                   std::size_t h, std::size_t w, int sign) {
    const double ch = static_cast<double>(h / 2);
    const double cw = static_cast<double>(w / 2);
    std::vector<std::complex<double>> out(h * w);
    const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            std::complex<double> acc = 0.0;
            for (std::size_t r = 0; r < h; ++r) {
                for (std::size_t c = 0; c < w; ++c) {
                    const double phase = sign * 2.0 * std::numbers::pi *
                                         ((u - ch) * (r - ch) / static_cast<double>(h) +
                                          (v - cw) * (c - cw) / static_cast<double>(w));
                    acc += x[r * w + c] * std::polar(1.0, phase);
                }
            }
            out[u * w + v] = acc * norm;
        }
    }
    return out;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / ("msr_test_" + name)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline std::vector<std::complex<double>> to_complex(const fourier::Image& img) {
    return {img.data.begin(), img.data.end()};
}

}  // namespace msr::test
