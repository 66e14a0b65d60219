#pragma once

#include <cstddef>
#include <vector>

#include "msr/nn/param_store.hpp"

namespace msr::train {

struct AdamConfig {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are owned here and matched to the
// store's entries by position, so one optimizer serves one store.
template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    // Applies update number t (t >= 1) using the gradients currently in
    // `params`. Throws NumericError, leaving every parameter untouched, if any
    // trainable gradient is non-finite.
    void step(nn::ParamStore<T>& params, std::size_t t);

    [[nodiscard]] const AdamConfig& config() const noexcept { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<T>> m_;
    std::vector<std::vector<T>> v_;
};

}  // namespace msr::train
