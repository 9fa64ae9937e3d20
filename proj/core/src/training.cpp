#include "neurosym/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "neurosym/error.hpp"

namespace neurosym {

Optimizer parse_optimizer(std::string_view name) {
    if (name == "adam") return Optimizer::Adam;
    if (name == "sgd") return Optimizer::Sgd;
    throw InvalidConfigError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidConfigError("learning_rate must be finite and >= 0");
    }
    if (threads < 1) throw InvalidConfigError("threads must be >= 1");
    if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) throw InvalidConfigError("decay_rate must be finite and > 0");
    if (decay_every < 1) throw InvalidConfigError("decay_every must be >= 1");
}

namespace {

struct BatchOutcome {
    double loss_sum = 0.0;
    bool finite = true;
};

// Sums losses and gradients of data[idx[first..last)] into `grad`.
BatchOutcome accumulate(const Predictor& model, const std::vector<TrainingSample>& data,
                        const std::vector<std::size_t>& idx, std::size_t first, std::size_t last,
                        std::vector<double>* grad) {
    BatchOutcome out;
    for (std::size_t i = first; i < last; ++i) {
        const auto& s = data[idx[i]];
        const double loss = model.loss_and_gradient(s.cluster, s.alphas,
                                                    grad ? std::span<double>(*grad) : std::span<double>());
        if (!std::isfinite(loss)) out.finite = false;
        out.loss_sum += loss;
    }
    return out;
}

BatchOutcome parallel_accumulate(const Predictor& model, const std::vector<TrainingSample>& data,
                                 const std::vector<std::size_t>& idx, std::size_t first, std::size_t last,
                                 std::size_t threads, std::vector<double>* grad) {
    const std::size_t n = last - first;
    const std::size_t workers = std::min(threads, n);
    if (workers <= 1) return accumulate(model, data, idx, first, last, grad);

    std::vector<std::vector<double>> partial(workers);
    std::vector<BatchOutcome> outcomes(workers);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t a = first + n * w / workers;
        const std::size_t b = first + n * (w + 1) / workers;
        if (grad) partial[w].assign(grad->size(), 0.0);
        pool.emplace_back([&, w, a, b] {
            try {
                outcomes[w] = accumulate(model, data, idx, a, b, grad ? &partial[w] : nullptr);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    BatchOutcome total;
    for (std::size_t w = 0; w < workers; ++w) {
        total.loss_sum += outcomes[w].loss_sum;
        total.finite = total.finite && outcomes[w].finite;
        if (grad) {
            for (std::size_t j = 0; j < grad->size(); ++j) (*grad)[j] += partial[w][j];
        }
    }
    return total;
}

}  // namespace

double dataset_loss(const Predictor& model, const std::vector<TrainingSample>& data, std::size_t threads) {
    if (data.empty()) throw InvalidInputError("dataset is empty");
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    return parallel_accumulate(model, data, idx, 0, data.size(), std::max<std::size_t>(threads, 1), nullptr).loss_sum /
           static_cast<double>(data.size());
}

TrainResult train(Predictor& model, const std::vector<TrainingSample>& data, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw InvalidInputError("training dataset is empty");

    auto& values = model.parameters().values();
    const std::size_t P = values.size();
    const std::size_t batch = config.batch_size == 0 ? data.size() : std::min(config.batch_size, data.size());

    std::vector<double> grad(P), m(P, 0.0), v(P, 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double beta1_t = 1.0, beta2_t = 1.0;
    double lr = config.learning_rate;
    std::size_t updates = 0;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    nn::SplitMix64 rng(config.seed);

    TrainResult result;
    result.epoch_losses.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            for (std::size_t i = order.size(); i > 1; --i) {
                const auto j = static_cast<std::size_t>(rng.next() % i);
                std::swap(order[i - 1], order[j]);
            }
        }
        double epoch_loss = 0.0;
        for (std::size_t first = 0; first < data.size(); first += batch) {
            const std::size_t last = std::min(first + batch, data.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            const auto outcome = parallel_accumulate(model, data, order, first, last, config.threads, &grad);
            if (!outcome.finite) throw DivergenceError(epoch);
            epoch_loss += outcome.loss_sum;

            const double inv = 1.0 / static_cast<double>(last - first);
            if (config.optimizer == Optimizer::Sgd) {
                for (std::size_t j = 0; j < P; ++j) values[j] -= lr * grad[j] * inv;
            } else {
                beta1_t *= beta1;
                beta2_t *= beta2;
                for (std::size_t j = 0; j < P; ++j) {
                    const double g = grad[j] * inv;
                    m[j] = beta1 * m[j] + (1.0 - beta1) * g;
                    v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
                    const double mh = m[j] / (1.0 - beta1_t);
                    const double vh = v[j] / (1.0 - beta2_t);
                    values[j] -= lr * mh / (std::sqrt(vh) + adam_eps);
                }
            }
            if (!model.parameters().all_finite()) throw DivergenceError(epoch);
            if (++updates % config.decay_every == 0) lr *= config.decay_rate;
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    result.final_loss = dataset_loss(model, data, config.threads);
    if (!std::isfinite(result.final_loss)) throw DivergenceError(config.epochs);
    return result;
}

GradientCheckReport gradient_check(const Predictor& model, const TrainingSample& sample, double epsilon,
                                   double tolerance, double floor) {
    if (!(epsilon > 0.0)) throw InvalidConfigError("gradient_check: epsilon must be > 0");
    const auto probe = model.clone();
    auto& values = probe->parameters().values();
    std::vector<double> analytic(values.size(), 0.0);
    probe->loss_and_gradient(sample.cluster, sample.alphas, analytic);

    GradientCheckReport report;
    for (const auto& blk : probe->parameters().blocks()) {
        GradientCheckReport::Block b{blk.name, 0.0, blk.size()};
        for (std::size_t j = blk.offset; j < blk.offset + blk.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + epsilon;
            const double up = probe->loss_and_gradient(sample.cluster, sample.alphas, {});
            values[j] = saved - epsilon;
            const double down = probe->loss_and_gradient(sample.cluster, sample.alphas, {});
            values[j] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double err =
                std::abs(analytic[j] - numeric) / std::max({std::abs(analytic[j]), std::abs(numeric), floor});
            b.max_relative_error = std::max(b.max_relative_error, err);
            if (err > report.max_relative_error) {
                report.max_relative_error = err;
                report.worst_index = j;
            }
        }
        report.blocks.push_back(std::move(b));
    }
    report.passed = report.max_relative_error < tolerance;
    return report;
}

}  // namespace neurosym
