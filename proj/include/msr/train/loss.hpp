#pragma once

#include "msr/nn/ops.hpp"

namespace msr::train {

enum class LossKind { kL1, kL2 };

// alpha * E|pred_tar - gt_tar| + (1 - alpha) * E|pred_aux - gt_aux|, with E the
// mean over every pixel of every sample in the batch. A null pred_aux drops
// the auxiliary term (equivalent to alpha = 1). kL2 swaps in squared error.
template <typename T>
nn::Var<T> joint_loss(const nn::Var<T>& pred_tar, const nn::Var<T>& gt_tar,
                      const nn::Var<T>& pred_aux, const nn::Var<T>& gt_aux, double alpha,
                      LossKind kind = LossKind::kL1);

}  // namespace msr::train
