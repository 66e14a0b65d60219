#include "msr/train/loss.hpp"

namespace msr::train {

template <typename T>
nn::Var<T> joint_loss(const nn::Var<T>& pred_tar, const nn::Var<T>& gt_tar,
                      const nn::Var<T>& pred_aux, const nn::Var<T>& gt_aux, double alpha,
                      LossKind kind) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    auto term = [kind](const nn::Var<T>& p, const nn::Var<T>& g) {
        return kind == LossKind::kL1 ? nn::mean_abs_error(p, g) : nn::mean_squared_error(p, g);
    };
    if (!pred_aux) return term(pred_tar, gt_tar);
    if (!gt_aux) throw ShapeError("joint_loss: auxiliary prediction without ground truth");
    return nn::add(nn::scale(term(pred_tar, gt_tar), static_cast<T>(alpha)),
                   nn::scale(term(pred_aux, gt_aux), static_cast<T>(1.0 - alpha)));
}

template nn::Var<float> joint_loss(const nn::Var<float>&, const nn::Var<float>&,
                                   const nn::Var<float>&, const nn::Var<float>&, double, LossKind);
template nn::Var<double> joint_loss(const nn::Var<double>&, const nn::Var<double>&,
                                    const nn::Var<double>&, const nn::Var<double>&, double, LossKind);

}  // namespace msr::train
