#pragma once

// Network building blocks. Each block has an add_* function registering its
// parameters under a name prefix, and an apply function reading them back
// from the store.

#include <cstddef>
#include <string>
#include <vector>

#include "msr/nn/ops.hpp"
#include "msr/nn/param_store.hpp"

namespace msr::nn {

// A_H = sigmoid(F_aux), A_L = E - A_H.
template <typename T>
struct AttentionPair {
    Tensor<T> a_h;
    Tensor<T> a_l;
};

// Hidden width of the channel-attention squeeze is max(1, C / 4).
inline constexpr std::size_t kChannelAttentionReduction = 4;

// <name>.w (cout, cin, k, k) and <name>.b (1, cout, 1, 1).
template <typename T>
void add_conv(ParamStore<T>& store, const std::string& name, std::size_t cin, std::size_t cout,
              std::size_t k, Rng& rng);
template <typename T>
Var<T> conv(const ParamStore<T>& store, const std::string& name, const Var<T>& x);

// Squeeze-and-excitation gate: x * sigmoid(up(relu(down(mean_hw(x))))).
template <typename T>
void add_channel_attention(ParamStore<T>& store, const std::string& prefix, std::size_t c, Rng& rng);
template <typename T>
Var<T> channel_attention(const ParamStore<T>& store, const std::string& prefix, const Var<T>& x);

// x + tail(RCAB_{B-1}(...RCAB_0(x))), where each RCAB is
// y + CA(conv(relu(conv(y)))).
template <typename T>
void add_residual_group(ParamStore<T>& store, const std::string& prefix, std::size_t c,
                        std::size_t blocks, Rng& rng);
template <typename T>
Var<T> residual_group(const ParamStore<T>& store, const std::string& prefix, const Var<T>& x,
                      std::size_t blocks);

// G = sigmoid(conv3d(x)) * x + x with a single 3x3x3 kernel over (C, H, W).
template <typename T>
void add_channel_spatial_attention(ParamStore<T>& store, const std::string& prefix, Rng& rng);
template <typename T>
Var<T> channel_spatial_attention(const ParamStore<T>& store, const std::string& prefix,
                                 const Var<T>& x);

// High/low-intensity separable attention fusing auxiliary features into the
// target branch:
//   F  = reduce([f_aux, f_tar])                   1x1, 2C -> C
//   R  = q_out([q_high(F * A_H), q_low(F * A_L)]) + f_tar
// q_high, q_low and q_out are 3x3 convolutions followed by ReLU.
template <typename T>
void add_separable_attention(ParamStore<T>& store, const std::string& prefix, std::size_t c,
                             Rng& rng);
template <typename T>
Var<T> separable_attention(const ParamStore<T>& store, const std::string& prefix,
                           const Var<T>& f_aux, const Var<T>& f_tar,
                           AttentionPair<T>* maps = nullptr);

// Stage features (each (N, C, H, W)) -> (N, m*C, H, W). Requires m >= 2.
template <typename T>
Var<T> multi_stage_integration(const std::vector<Var<T>>& stages, Tensor<T>* affinity = nullptr);

}  // namespace msr::nn
