#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msr/error.hpp"

namespace msr {

// Batch x channels x height x width.
struct Shape {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    [[nodiscard]] constexpr std::size_t numel() const noexcept { return n * c * h * w; }
    [[nodiscard]] constexpr std::size_t plane() const noexcept { return h * w; }
    [[nodiscard]] constexpr std::size_t item() const noexcept { return c * h * w; }

    friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
    return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) +
           "," + std::to_string(s.w) + ")";
}

template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.numel(), fill) {}
    Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.numel()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + to_string(shape_));
        }
    }

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] T* data() noexcept { return data_.data(); }
    [[nodiscard]] const T* data() const noexcept { return data_.data(); }
    [[nodiscard]] std::span<T> span() noexcept { return data_; }
    [[nodiscard]] std::span<const T> span() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& vec() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& vec() const noexcept { return data_; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
        return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
    }
    const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
        return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    template <typename U>
    [[nodiscard]] Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        std::transform(data_.begin(), data_.end(), out.begin(),
                       [](T v) { return static_cast<U>(v); });
        return Tensor<U>(shape_, std::move(out));
    }

private:
    Shape shape_{};
    std::vector<T> data_;
};

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

}  // namespace msr
