#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "json.hpp"
#include "msr/data/dataset.hpp"
#include "msr/nn/model.hpp"
#include "msr/train/config.hpp"
#include "msr/train/metrics.hpp"

namespace msr::train {

// One training batch stacked along N. x_aux is null when the model has no
// auxiliary branch.
struct Batch {
    nn::Var<float> x_aux;
    nn::Var<float> x_tar;
    nn::Var<float> y_tar;
};

[[nodiscard]] Tensor<float> stack_images(const std::vector<const fourier::Image*>& images);
[[nodiscard]] Batch make_batch(const std::vector<data::SamplePair>& samples,
                               const std::vector<std::size_t>& indices, bool with_aux);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    std::size_t step = 0;   // updates applied so far
    double loss = 0.0;      // mean batch loss over the epoch
    double val_psnr = std::numeric_limits<double>::quiet_NaN();
    double val_ssim = std::numeric_limits<double>::quiet_NaN();
};

// {epoch, step, loss, val_psnr, val_ssim}; infinite PSNR becomes "inf" and
// a missing validation split gives nulls.
[[nodiscard]] nlohmann::ordered_json to_json(const EpochRecord& r);

struct FitResult {
    nn::SANet<float> model;  // holds the best-validation parameters
    std::vector<EpochRecord> epochs;
    std::vector<double> step_losses;
    std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam on the joint loss. Deterministic for a fixed TrainConfig::seed: the
// model is initialised from it and each epoch's sample order is derived from
// it. Throws NumericError on a non-finite loss.
[[nodiscard]] FitResult fit(const nn::ModelConfig& model_cfg,
                            const std::vector<data::SamplePair>& train,
                            const std::vector<data::SamplePair>& val, const TrainConfig& cfg,
                            const EpochCallback& on_epoch = {});

// Super-resolved target for each sample, in order.
[[nodiscard]] std::vector<fourier::Image> predict(const nn::SANet<float>& model,
                                                  const std::vector<data::SamplePair>& samples,
                                                  std::size_t batch_size = 4);

[[nodiscard]] MetricReport evaluate(const nn::SANet<float>& model,
                                    const std::vector<data::SamplePair>& samples,
                                    std::size_t batch_size = 4);

// Zero-filled k-space upsampling of each y_tar.
[[nodiscard]] MetricReport evaluate_zero_fill(const std::vector<data::SamplePair>& samples);

// Scores x_tar against itself; exercises the reporting path.
[[nodiscard]] MetricReport evaluate_identity(const std::vector<data::SamplePair>& samples);

[[nodiscard]] nlohmann::ordered_json to_json(const MetricReport& report);

// JSON number, or "inf"/"-inf" for infinities and null for NaN.
[[nodiscard]] nlohmann::ordered_json json_number(double v);

}  // namespace msr::train
