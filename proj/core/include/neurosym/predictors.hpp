#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "neurosym/cluster.hpp"
#include "neurosym/cnd.hpp"
#include "neurosym/metrics.hpp"
#include "neurosym/nn/lstm.hpp"
#include "neurosym/nn/parameters.hpp"
#include "neurosym/weighting.hpp"

namespace neurosym {

/// Extrapolates the last observed per-step displacement for `pred_len` steps.
/// Throws InsufficientDataError when fewer than 2 positions are observed.
PredictionResult predict_constant_velocity(const std::vector<Vec2>& observed, std::size_t pred_len);

PredictionResult predict_constant_velocity(const Cluster& cluster, std::size_t pred_len);

/// Softmax of alpha[k] * e[k] over the entries with mask[k] set; masked entries get 0.
/// Throws EmptyAttentionError when every entry is masked, InvalidInputError on size mismatch.
std::vector<double> input_attention(std::span<const double> e, std::span<const double> alpha,
                                    const std::vector<bool>& mask);

enum class ModelKind : std::uint32_t { Linear = 0, Pooled = 1, Attention = 2 };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// Common interface of the trainable predictors. Every model predicts per-step
/// displacements of the cluster center and is trained on their mean squared error.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual ModelKind kind() const noexcept = 0;
    virtual std::size_t pred_len() const noexcept = 0;

    nn::ParameterSet& parameters() noexcept { return params_; }
    const nn::ParameterSet& parameters() const noexcept { return params_; }

    /// Predicted positions for the cluster center.
    PredictionResult predict(const Cluster& cluster, const ClusterAlphas& alphas) const;

    /// Per-step displacements, pred_len of them.
    virtual std::vector<Vec2> forward(const Cluster& cluster, const ClusterAlphas& alphas) const = 0;

    /// Loss against cluster.future; when `grad` is non-empty, adds dLoss/dparams to it.
    virtual double loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas,
                                     std::span<double> grad) const = 0;

    virtual std::unique_ptr<Predictor> clone() const = 0;

    /// Hyper-parameters serialized into the model file's dimension table.
    virtual std::vector<std::uint64_t> dimension_table() const = 0;

protected:
    nn::ParameterSet params_;
};

/// Mean over steps and coordinates of the squared displacement error.
double displacement_loss(const std::vector<Vec2>& predicted_disp, const Cluster& cluster);

/// Ground-truth per-step displacements of the center over the prediction horizon.
std::vector<Vec2> target_displacements(const Cluster& cluster);

/// Affine map from the observed displacement history to the future displacements. Used
/// as a reference model for the training loop and the gradient checker.
class LinearPredictor final : public Predictor {
public:
    LinearPredictor(std::size_t obs_len, std::size_t pred_len, std::uint64_t seed);

    ModelKind kind() const noexcept override { return ModelKind::Linear; }
    std::size_t pred_len() const noexcept override { return pred_len_; }
    std::vector<Vec2> forward(const Cluster& cluster, const ClusterAlphas& alphas) const override;
    double loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas, std::span<double> grad) const override;
    std::unique_ptr<Predictor> clone() const override { return std::make_unique<LinearPredictor>(*this); }
    std::vector<std::uint64_t> dimension_table() const override;

private:
    Eigen::VectorXd features(const Cluster& cluster) const;

    std::size_t obs_len_, pred_len_;
    std::size_t w_, b_;
};

/// Observed steps at which neighbour interactions are pooled.
enum class PoolingSteps : std::uint8_t { EveryStep = 0, FinalStep = 1 };

/// Source of interaction labels for decoder steps when pooling is recomputed during the rollout.
enum class AlphaRollout : std::uint8_t { HoldLast = 0, Relabel = 1 };

struct PooledConfig {
    std::size_t obs_len = 8;
    std::size_t pred_len = 12;
    std::size_t embedding_dim = 16;
    std::size_t encoder_h_dim = 32;
    std::size_t decoder_h_dim = 32;
    Activation activation = Activation::Tanh;
    bool neurosym = true;                     // scale interaction embeddings by alpha
    PoolingSteps pooling = PoolingSteps::EveryStep;
    bool pool_every_timestep = false;         // recompute pooling at every decoder step
    AlphaRollout rollout = AlphaRollout::HoldLast;
    QtcVariant relabel_variant = QtcVariant::C1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Recurrent encoder-decoder with max-pooled, alpha-weighted interaction embeddings.
///
/// At every observed step the relative pose of each valid neighbour is embedded, scaled
/// by its label and max-pooled elementwise across neighbours (zeros when none is present).
/// The pooled vector joins the center's displacement as encoder input; the final pooled
/// vector and the decoder hidden state feed the affine displacement head.
class PooledPredictor final : public Predictor {
public:
    explicit PooledPredictor(const PooledConfig& config);

    ModelKind kind() const noexcept override { return ModelKind::Pooled; }
    std::size_t pred_len() const noexcept override { return cfg_.pred_len; }
    const PooledConfig& config() const noexcept { return cfg_; }

    /// Same parameters with weighting switched on or off.
    PooledPredictor with_weighting(bool neurosym) const;

    std::vector<Vec2> forward(const Cluster& cluster, const ClusterAlphas& alphas) const override;
    double loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas, std::span<double> grad) const override;
    std::unique_ptr<Predictor> clone() const override { return std::make_unique<PooledPredictor>(*this); }
    std::vector<std::uint64_t> dimension_table() const override;

    static PooledConfig config_from_dimensions(const std::vector<std::uint64_t>& dims);

private:
    struct Tape;
    double run(const Cluster& cluster, const ClusterAlphas& alphas, std::vector<Vec2>* disp,
               std::span<double> grad) const;

    PooledConfig cfg_;
    std::size_t emb_w_, emb_b_, bridge_w_, bridge_b_, out_w_, out_b_;
    nn::LstmBlocks enc_, dec_;
    std::shared_ptr<const CndGraph> relabel_graph_;
};

struct AttentionConfig {
    std::size_t obs_len = 8;
    std::size_t pred_len = 12;
    std::size_t series_count = 1;  // n*
    std::size_t attention_dim = 16;
    std::size_t encoder_h_dim = 32;
    std::size_t decoder_h_dim = 32;
    bool neurosym = true;  // multiply pre-softmax scores by alpha
    std::uint64_t seed = 0;

    void validate() const;
};

/// Dual-stage attention encoder-decoder.
///
/// Encoder: for each step the score of series k is
///   e = v . tanh(W_s [h; s] + W_x x^k_{1..T_h} + b) + c,
/// scaled by alpha and normalized with input_attention; the attention-weighted
/// concatenation of the series positions drives the encoder LSTM. Decoder: temporal
/// attention over the encoder hidden states produces a context that, with the previous
/// displacement, drives the decoder LSTM; an affine head maps (d, context) to the next
/// displacement, reused autoregressively over the horizon.
class AttentionPredictor final : public Predictor {
public:
    explicit AttentionPredictor(const AttentionConfig& config);

    ModelKind kind() const noexcept override { return ModelKind::Attention; }
    std::size_t pred_len() const noexcept override { return cfg_.pred_len; }
    const AttentionConfig& config() const noexcept { return cfg_; }

    AttentionPredictor with_weighting(bool neurosym) const;

    std::vector<Vec2> forward(const Cluster& cluster, const ClusterAlphas& alphas) const override;
    double loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas, std::span<double> grad) const override;
    std::unique_ptr<Predictor> clone() const override { return std::make_unique<AttentionPredictor>(*this); }
    std::vector<std::uint64_t> dimension_table() const override;

    static AttentionConfig config_from_dimensions(const std::vector<std::uint64_t>& dims);

    /// Input attention weights of every encoder step (obs_len x n*) from the last forward pass
    /// of `cluster`; recomputed on demand.
    std::vector<std::vector<double>> input_attention_weights(const Cluster& cluster, const ClusterAlphas& alphas) const;

private:
    double run(const Cluster& cluster, const ClusterAlphas& alphas, std::vector<Vec2>* disp, std::span<double> grad,
               std::vector<std::vector<double>>* attention) const;

    AttentionConfig cfg_;
    std::size_t se_w_, se_b_, st_w_, st_b_, sc_v_, sc_c_;
    std::size_t ta_wd_, ta_uh_, ta_b_, ta_v_, out_w_, out_b_;
    nn::LstmBlocks enc_, dec_;
};

/// Free-function entry points mirroring the predictor methods.
PredictionResult predict_pooled(const PooledPredictor& model, const Cluster& cluster, const ClusterAlphas& alphas);
PredictionResult predict_attention(const AttentionPredictor& model, const Cluster& cluster,
                                   const ClusterAlphas& alphas);

}  // namespace neurosym
