#include "msr/train/config.hpp"

#include <cmath>
#include <string>

namespace msr::train {

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1 && max_steps < 1) throw ConfigError("epochs or max_steps must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

TrainConfig standard_train_profile() { return TrainConfig{}; }

TrainConfig desk_train_profile() {
    TrainConfig c;
    c.lr = 1e-3;
    c.max_steps = 200;
    c.batch_size = 4;
    return c;
}

std::string_view loss_name(LossKind kind) noexcept { return kind == LossKind::kL1 ? "l1" : "l2"; }

LossKind parse_loss(std::string_view name) {
    if (name == "l1") return LossKind::kL1;
    if (name == "l2") return LossKind::kL2;
    throw ConfigError("unknown loss '" + std::string(name) + "' (expected l1 or l2)");
}

}  // namespace msr::train
