#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "msr/train/adam.hpp"
#include "msr/train/loss.hpp"

namespace msr::train {

struct TrainConfig {
    double lr = 1e-5;
    std::size_t epochs = 50;
    // When nonzero, training stops after exactly this many updates and
    // `epochs` is ignored.
    std::size_t max_steps = 0;
    std::size_t batch_size = 1;
    double alpha = 0.7;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    LossKind loss = LossKind::kL1;

    // Throws ConfigError when an invariant does not hold.
    void validate() const;
    [[nodiscard]] AdamConfig adam() const { return {lr, beta1, beta2, eps}; }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// lr 1e-5 for 50 epochs.
[[nodiscard]] TrainConfig standard_train_profile();
// lr 1e-3 for 200 steps, batch 4.
[[nodiscard]] TrainConfig desk_train_profile();

[[nodiscard]] std::string_view loss_name(LossKind kind) noexcept;
// "l1" or "l2"; throws ConfigError otherwise.
[[nodiscard]] LossKind parse_loss(std::string_view name);

}  // namespace msr::train
