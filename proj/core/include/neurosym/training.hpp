#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "neurosym/cluster.hpp"
#include "neurosym/predictors.hpp"
#include "neurosym/weighting.hpp"

namespace neurosym {

/// One training example: a cluster with ground-truth future and its labels.
struct TrainingSample {
    Cluster cluster;
    ClusterAlphas alphas;
};

enum class Optimizer { Adam, Sgd };

Optimizer parse_optimizer(std::string_view name);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 0;  // 0: full batch
    std::uint64_t seed = 0;      // shuffling order
    bool shuffle = true;
    Optimizer optimizer = Optimizer::Adam;
    std::size_t threads = 1;
    double decay_rate = 1.0;         // learning rate multiplier applied every decay_every updates
    std::size_t decay_every = 1000;

    void validate() const;
};

struct TrainResult {
    /// Mean loss over the samples seen during each epoch, each evaluated before the
    /// update of its own mini-batch.
    std::vector<double> epoch_losses;
    /// Mean loss over the whole dataset after the last epoch.
    double final_loss = 0.0;
};

/// Mini-batch gradient descent on mean squared displacement error. Batch gradients are
/// accumulated in dataset order, split into `threads` contiguous chunks that are summed
/// in chunk order. Throws InvalidInputError on an empty dataset and DivergenceError when a
/// loss or parameter becomes non-finite.
TrainResult train(Predictor& model, const std::vector<TrainingSample>& data, const TrainConfig& config);

/// Mean loss of `model` over `data`.
double dataset_loss(const Predictor& model, const std::vector<TrainingSample>& data, std::size_t threads = 1);

struct GradientCheckReport {
    struct Block {
        std::string name;
        double max_relative_error = 0.0;
        std::size_t checked = 0;
    };
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;  // flat parameter index
    std::vector<Block> blocks;
    bool passed = false;
};

/// Analytic gradient against central differences (f(p+eps) - f(p-eps)) / 2eps for every
/// parameter. Relative error is |a - n| / max(|a|, |n|, floor).
GradientCheckReport gradient_check(const Predictor& model, const TrainingSample& sample, double epsilon = 1e-5,
                                   double tolerance = 1e-4, double floor = 1e-6);

}  // namespace neurosym
