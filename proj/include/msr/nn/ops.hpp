#pragma once

#include <cstddef>
#include <vector>

#include "msr/nn/autodiff.hpp"

namespace msr::nn {

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T alpha);
template <typename T> Var<T> relu(const Var<T>& x);
template <typename T> Var<T> sigmoid(const Var<T>& x);
// E - x with E the all-ones tensor.
template <typename T> Var<T> one_minus(const Var<T>& x);

// Stride-1 convolution with zero "same" padding. w is (C_out, C_in, k, k)
// with odd k; bias is (1, C_out, 1, 1) or null.
template <typename T> Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& bias);

// (N, C, H, W) -> (N, C/s^2, sH, sW); input (n, c, h, w) lands at
// (n, c / s^2, s*h + (c % s^2) / s, s*w + (c % s^2) % s).
template <typename T> Var<T> pixel_shuffle(const Var<T>& x, std::size_t s);

template <typename T> Var<T> concat_channels(const std::vector<Var<T>>& xs);

// Spatial mean per channel: (N, C, H, W) -> (N, C, 1, 1).
template <typename T> Var<T> channel_mean(const Var<T>& x);

// x (N, C, H, W) times per-channel gate g (N, C, 1, 1).
template <typename T> Var<T> scale_channels(const Var<T>& x, const Var<T>& g);

// Single-channel 3x3x3 convolution over each item's (C, H, W) volume with
// zero padding. w has 27 elements ordered (dc, dh, dw); bias has 1.
template <typename T> Var<T> conv3d_volume(const Var<T>& x, const Var<T>& w, const Var<T>& bias);

// Affinity-weighted integration over m same-shaped stage features. Per batch
// item, each stage is flattened to a row of F (m x CHW), S = row_softmax(F F^T)
// and the result S F + F is stacked along channels: (N, m*C, H, W).
// If `affinity` is non-null it receives S as (N, 1, m, m).
template <typename T>
Var<T> stage_integration(const std::vector<Var<T>>& stages, Tensor<T>* affinity = nullptr);

// Scalar losses, shape (1, 1, 1, 1).
template <typename T> Var<T> mean_abs_error(const Var<T>& pred, const Var<T>& target);
template <typename T> Var<T> mean_squared_error(const Var<T>& pred, const Var<T>& target);
// sum_i weights[i] * x[i]
template <typename T> Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights);

// Records ReLU activation patterns on the current thread so a finite
// difference probe can tell whether it crossed a kink.
class KinkMonitor {
public:
    enum class Mode { kRecord, kCompare };

    explicit KinkMonitor(Mode mode);
    ~KinkMonitor();
    KinkMonitor(const KinkMonitor&) = delete;
    KinkMonitor& operator=(const KinkMonitor&) = delete;

    void set_mode(Mode mode) noexcept;
    [[nodiscard]] bool crossed() const noexcept { return crossed_; }

    template <typename T>
    void observe(const T* pre, std::size_t n);

private:
    Mode mode_;
    std::vector<std::vector<bool>> patterns_;
    std::size_t cursor_ = 0;
    bool crossed_ = false;
    KinkMonitor* prev_;
};

}  // namespace msr::nn
