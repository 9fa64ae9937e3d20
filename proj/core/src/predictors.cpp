#include "neurosym/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neurosym/error.hpp"

namespace neurosym {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec2(Vec2 v) {
    VectorXd out(2);
    out << v.x, v.y;
    return out;
}

Vec2 to_vec2(const VectorXd& v) { return {v(0), v(1)}; }

VectorXd concat(const VectorXd& a, const VectorXd& b) {
    VectorXd out(a.size() + b.size());
    out << a, b;
    return out;
}

VectorXd activation_derivative(Activation act, const VectorXd& pre, const VectorXd& out) {
    switch (act) {
        case Activation::Identity: return VectorXd::Ones(pre.size());
        case Activation::Tanh: return (1.0 - out.array().square()).matrix();
        case Activation::Relu: return (pre.array() > 0.0).cast<double>().matrix();
    }
    return VectorXd::Ones(pre.size());
}

void check_cluster(const Cluster& cluster, const ClusterAlphas& alphas, std::size_t obs_len) {
    if (cluster.series.empty() || cluster.mask.empty() || !cluster.mask[0]) {
        throw DegenerateClusterError("cluster has no valid center series");
    }
    if (cluster.mask.size() != cluster.series.size() || cluster.present.size() != cluster.series.size()) {
        throw InvalidInputError("cluster mask/presence sizes do not match its series");
    }
    for (const auto& s : cluster.series) {
        if (s.size() != obs_len) {
            throw InvalidInputError("cluster series length " + std::to_string(s.size()) + " differs from obs_len " +
                                    std::to_string(obs_len));
        }
    }
    if (alphas.size() != cluster.series.size()) throw InvalidInputError("alpha table does not match cluster series");
    for (const auto& row : alphas) {
        if (row.size() != obs_len) throw InvalidInputError("alpha row length differs from obs_len");
    }
}

}  // namespace

PredictionResult predict_constant_velocity(const std::vector<Vec2>& observed, std::size_t pred_len) {
    if (observed.size() < 2) throw InsufficientDataError("constant velocity needs at least 2 observed positions");
    PredictionResult r;
    const Vec2 last = observed.back();
    const Vec2 step = last - observed[observed.size() - 2];
    r.predicted.reserve(pred_len);
    for (std::size_t f = 1; f <= pred_len; ++f) r.predicted.push_back(last + static_cast<double>(f) * step);
    return r;
}

PredictionResult predict_constant_velocity(const Cluster& cluster, std::size_t pred_len) {
    if (cluster.series.empty()) throw DegenerateClusterError("cluster has no series");
    auto r = predict_constant_velocity(cluster.series[0], pred_len);
    r.agent_id = cluster.center_agent;
    r.start_frame = cluster.start_frame;
    if (cluster.future.size() == pred_len) r.ground_truth = cluster.future;
    return r;
}

std::vector<double> input_attention(std::span<const double> e, std::span<const double> alpha,
                                    const std::vector<bool>& mask) {
    if (e.size() != alpha.size() || e.size() != mask.size()) {
        throw InvalidInputError("input_attention: score, alpha and mask sizes differ");
    }
    double top = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (!mask[k]) continue;
        any = true;
        top = std::max(top, alpha[k] * e[k]);
    }
    if (!any) throw EmptyAttentionError("input_attention: every series is masked");
    std::vector<double> w(e.size(), 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (!mask[k]) continue;
        w[k] = std::exp(alpha[k] * e[k] - top);
        sum += w[k];
    }
    for (double& v : w) v /= sum;
    return w;
}

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::Linear: return "linear";
        case ModelKind::Pooled: return "pooled";
        case ModelKind::Attention: return "attention";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "linear") return ModelKind::Linear;
    if (name == "pooled") return ModelKind::Pooled;
    if (name == "attention") return ModelKind::Attention;
    throw InvalidInputError("unknown model '" + std::string(name) + "' (expected pooled, attention or linear)");
}

PredictionResult Predictor::predict(const Cluster& cluster, const ClusterAlphas& alphas) const {
    const auto disp = forward(cluster, alphas);
    PredictionResult r;
    r.agent_id = cluster.center_agent;
    r.start_frame = cluster.start_frame;
    Vec2 pos = cluster.series[0].back();
    for (Vec2 d : disp) {
        pos += d;
        r.predicted.push_back(pos);
    }
    if (cluster.future.size() == disp.size()) r.ground_truth = cluster.future;
    return r;
}

std::vector<Vec2> target_displacements(const Cluster& cluster) {
    std::vector<Vec2> out;
    Vec2 prev = cluster.series.at(0).back();
    for (Vec2 p : cluster.future) {
        out.push_back(p - prev);
        prev = p;
    }
    return out;
}

double displacement_loss(const std::vector<Vec2>& predicted_disp, const Cluster& cluster) {
    const auto target = target_displacements(cluster);
    if (target.size() != predicted_disp.size()) {
        throw InvalidInputError("cluster future has " + std::to_string(target.size()) + " steps, model predicts " +
                                std::to_string(predicted_disp.size()));
    }
    double sum = 0.0;
    for (std::size_t f = 0; f < target.size(); ++f) {
        const Vec2 d = predicted_disp[f] - target[f];
        sum += d.x * d.x + d.y * d.y;
    }
    return sum / (2.0 * static_cast<double>(target.size()));
}

namespace {

// dLoss/d(displacement f) for displacement_loss.
std::vector<Vec2> loss_gradient(const std::vector<Vec2>& predicted_disp, const Cluster& cluster) {
    const auto target = target_displacements(cluster);
    std::vector<Vec2> g(target.size());
    const double scale = 1.0 / static_cast<double>(target.size());
    for (std::size_t f = 0; f < target.size(); ++f) g[f] = scale * (predicted_disp[f] - target[f]);
    return g;
}

void check_grad_span(std::span<double> grad, std::size_t n) {
    if (!grad.empty() && grad.size() != n) throw InvalidInputError("gradient buffer size does not match parameters");
}

}  // namespace

// ---------------------------------------------------------------------------
// LinearPredictor

LinearPredictor::LinearPredictor(std::size_t obs_len, std::size_t pred_len, std::uint64_t seed)
    : obs_len_(obs_len), pred_len_(pred_len) {
    if (obs_len < 2 || pred_len < 1) throw InvalidConfigError("linear model needs obs_len >= 2 and pred_len >= 1");
    const auto in = static_cast<Eigen::Index>(2 * (obs_len - 1));
    const auto out = static_cast<Eigen::Index>(2 * pred_len);
    w_ = params_.add("linear.w", out, in);
    b_ = params_.add("linear.b", out, 1);
    nn::SplitMix64 rng(seed);
    params_.init_uniform(w_, 1.0 / std::sqrt(static_cast<double>(in)), rng);
}

std::vector<std::uint64_t> LinearPredictor::dimension_table() const { return {obs_len_, pred_len_}; }

VectorXd LinearPredictor::features(const Cluster& cluster) const {
    const auto& x = cluster.series[0];
    VectorXd f(static_cast<Eigen::Index>(2 * (obs_len_ - 1)));
    for (std::size_t t = 1; t < obs_len_; ++t) {
        const Vec2 d = x[t] - x[t - 1];
        f(static_cast<Eigen::Index>(2 * (t - 1))) = d.x;
        f(static_cast<Eigen::Index>(2 * (t - 1) + 1)) = d.y;
    }
    return f;
}

std::vector<Vec2> LinearPredictor::forward(const Cluster& cluster, const ClusterAlphas& alphas) const {
    check_cluster(cluster, alphas, obs_len_);
    const VectorXd y = params_.view(w_) * features(cluster) + params_.view(b_);
    std::vector<Vec2> out(pred_len_);
    for (std::size_t f = 0; f < pred_len_; ++f) out[f] = {y(2 * f), y(2 * f + 1)};
    return out;
}

double LinearPredictor::loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas,
                                          std::span<double> grad) const {
    check_grad_span(grad, params_.size());
    const auto disp = forward(cluster, alphas);
    const double loss = displacement_loss(disp, cluster);
    if (!grad.empty()) {
        const auto g = loss_gradient(disp, cluster);
        VectorXd gy(static_cast<Eigen::Index>(2 * pred_len_));
        for (std::size_t f = 0; f < pred_len_; ++f) {
            gy(2 * f) = g[f].x;
            gy(2 * f + 1) = g[f].y;
        }
        params_.view(w_, grad.data()).noalias() += gy * features(cluster).transpose();
        params_.view(b_, grad.data()) += gy;
    }
    return loss;
}

// ---------------------------------------------------------------------------
// PooledPredictor

void PooledConfig::validate() const {
    if (obs_len < 3) throw InvalidConfigError("pooled: obs_len must be >= 3");
    if (pred_len < 1) throw InvalidConfigError("pooled: pred_len must be >= 1");
    if (embedding_dim < 1 || encoder_h_dim < 1 || decoder_h_dim < 1) {
        throw InvalidConfigError("pooled: layer dimensions must be >= 1");
    }
}

PooledPredictor::PooledPredictor(const PooledConfig& config) : cfg_(config) {
    cfg_.validate();
    const auto E = static_cast<Eigen::Index>(cfg_.embedding_dim);
    const auto H = static_cast<Eigen::Index>(cfg_.encoder_h_dim);
    const auto D = static_cast<Eigen::Index>(cfg_.decoder_h_dim);
    emb_w_ = params_.add("interaction.w", E, 2);
    emb_b_ = params_.add("interaction.b", E, 1);
    enc_ = nn::LstmBlocks::add(params_, "encoder", 2 + E, H);
    bridge_w_ = params_.add("bridge.w", D, H);
    bridge_b_ = params_.add("bridge.b", D, 1);
    dec_ = nn::LstmBlocks::add(params_, "decoder", 2 + E, D);
    out_w_ = params_.add("head.w", 2, D + E);
    out_b_ = params_.add("head.b", 2, 1);

    nn::SplitMix64 rng(cfg_.seed);
    params_.init_uniform(emb_w_, 1.0 / std::sqrt(2.0), rng);
    params_.init_uniform(emb_b_, 0.1, rng);
    enc_.init(params_, rng);
    params_.init_uniform(bridge_w_, 1.0 / std::sqrt(static_cast<double>(H)), rng);
    dec_.init(params_, rng);
    params_.init_uniform(out_w_, 0.1 / std::sqrt(static_cast<double>(D + E)), rng);

    if (cfg_.pool_every_timestep && cfg_.rollout == AlphaRollout::Relabel) {
        relabel_graph_ = std::make_shared<const CndGraph>(build_cnd(cfg_.relabel_variant));
    }
}

PooledPredictor PooledPredictor::with_weighting(bool neurosym) const {
    PooledPredictor copy = *this;
    copy.cfg_.neurosym = neurosym;
    return copy;
}

std::vector<std::uint64_t> PooledPredictor::dimension_table() const {
    return {cfg_.obs_len,
            cfg_.pred_len,
            cfg_.embedding_dim,
            cfg_.encoder_h_dim,
            cfg_.decoder_h_dim,
            static_cast<std::uint64_t>(cfg_.activation),
            cfg_.neurosym ? 1u : 0u,
            static_cast<std::uint64_t>(cfg_.pooling),
            cfg_.pool_every_timestep ? 1u : 0u,
            static_cast<std::uint64_t>(cfg_.rollout),
            static_cast<std::uint64_t>(cfg_.relabel_variant),
            cfg_.seed};
}

PooledConfig PooledPredictor::config_from_dimensions(const std::vector<std::uint64_t>& d) {
    if (d.size() != 12) throw ParseError("pooled model dimension table must have 12 entries");
    if (d[5] > 2 || d[7] > 1 || d[9] > 1 || d[10] > 2) throw ParseError("pooled model dimension table out of range");
    PooledConfig c;
    c.obs_len = d[0];
    c.pred_len = d[1];
    c.embedding_dim = d[2];
    c.encoder_h_dim = d[3];
    c.decoder_h_dim = d[4];
    c.activation = static_cast<Activation>(d[5]);
    c.neurosym = d[6] != 0;
    c.pooling = static_cast<PoolingSteps>(d[7]);
    c.pool_every_timestep = d[8] != 0;
    c.rollout = static_cast<AlphaRollout>(d[9]);
    c.relabel_variant = static_cast<QtcVariant>(d[10]);
    c.seed = d[11];
    return c;
}

namespace {

// One max-pooling evaluation over the neighbours of the center at one instant.
struct PoolRecord {
    std::vector<Vec2> rel;
    std::vector<double> alpha;
    std::vector<VectorXd> pre, act;
    std::vector<int> argmax;  // per embedding dimension, -1 when nobody is pooled
    VectorXd pooled;
};

}  // namespace

struct PooledPredictor::Tape {
    std::vector<nn::LstmStep> enc;
    std::vector<std::optional<PoolRecord>> obs_pool;  // per observed step
    VectorXd bridge_h;
    std::vector<nn::LstmStep> dec;
    std::vector<std::optional<PoolRecord>> dec_pool;  // per decoder step, when recomputed
    std::vector<VectorXd> head_in;
    std::vector<Vec2> disp;
};

double PooledPredictor::run(const Cluster& cluster, const ClusterAlphas& alphas, std::vector<Vec2>* disp_out,
                            std::span<double> grad) const {
    check_cluster(cluster, alphas, cfg_.obs_len);
    check_grad_span(grad, params_.size());
    const std::size_t T = cfg_.obs_len;
    const std::size_t F = cfg_.pred_len;
    const auto E = static_cast<Eigen::Index>(cfg_.embedding_dim);
    const auto H = static_cast<Eigen::Index>(cfg_.encoder_h_dim);
    const auto D = static_cast<Eigen::Index>(cfg_.decoder_h_dim);
    const auto emb_w = params_.view(emb_w_);
    const auto emb_b = params_.view(emb_b_);
    const auto& center = cluster.series[0];

    auto pool = [&](Vec2 center_pos, const std::vector<Vec2>& others, const std::vector<double>& alpha) {
        PoolRecord rec;
        rec.rel.reserve(others.size());
        for (std::size_t m = 0; m < others.size(); ++m) {
            const Vec2 rel = others[m] - center_pos;
            VectorXd pre = emb_w * vec2(rel) + emb_b;
            VectorXd act = apply_activation(cfg_.activation, pre);
            rec.rel.push_back(rel);
            rec.alpha.push_back(alpha[m]);
            rec.pre.push_back(std::move(pre));
            rec.act.push_back(std::move(act));
        }
        rec.pooled = VectorXd::Zero(E);
        rec.argmax.assign(static_cast<std::size_t>(E), -1);
        for (Eigen::Index j = 0; j < E; ++j) {
            for (std::size_t m = 0; m < others.size(); ++m) {
                const double w = cfg_.neurosym ? rec.alpha[m] * rec.act[m](j) : rec.act[m](j);
                if (rec.argmax[j] < 0 || w > rec.pooled(j)) {
                    rec.pooled(j) = w;
                    rec.argmax[j] = static_cast<int>(m);
                }
            }
        }
        return rec;
    };

    // Observed-step pooling.
    Tape tape;
    tape.obs_pool.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (cfg_.pooling == PoolingSteps::FinalStep && t + 1 != T) continue;
        std::vector<Vec2> others;
        std::vector<double> alpha;
        for (std::size_t k = 1; k < cluster.series.size(); ++k) {
            if (!cluster.mask[k] || !cluster.present[k][t]) continue;
            others.push_back(cluster.series[k][t]);
            alpha.push_back(alphas[k][t]);
        }
        tape.obs_pool[t] = pool(center[t], others, alpha);
    }

    // Encoder.
    tape.enc.resize(T);
    VectorXd h = VectorXd::Zero(H), c = VectorXd::Zero(H);
    for (std::size_t t = 0; t < T; ++t) {
        const Vec2 d = t == 0 ? Vec2{} : center[t] - center[t - 1];
        const VectorXd p = cfg_.pooling == PoolingSteps::EveryStep ? tape.obs_pool[t]->pooled : VectorXd::Zero(E);
        nn::lstm_forward(params_, enc_, concat(vec2(d), p), h, c, tape.enc[t]);
        h = tape.enc[t].h;
        c = tape.enc[t].c;
    }

    // Decoder.
    tape.bridge_h = (params_.view(bridge_w_) * h + params_.view(bridge_b_)).array().tanh().matrix();
    VectorXd hd = tape.bridge_h, cd = VectorXd::Zero(D);
    tape.dec.resize(F);
    tape.dec_pool.resize(F);
    tape.head_in.resize(F);
    tape.disp.resize(F);

    // Neighbours carried along the rollout by their last observed displacement.
    std::vector<std::size_t> roll_members;
    for (std::size_t k = 1; k < cluster.series.size(); ++k) {
        if (cluster.mask[k] && cluster.present[k][T - 1]) roll_members.push_back(k);
    }
    auto neighbour_at = [&](std::size_t k, std::size_t time) {  // time index from window start
        if (time < T) return cluster.series[k][time];
        const Vec2 v = cluster.series[k][T - 1] - cluster.series[k][T - 2];
        return cluster.series[k][T - 1] + static_cast<double>(time - (T - 1)) * v;
    };
    std::vector<Vec2> center_hist(center.begin(), center.end());  // observed then predicted

    Vec2 y_prev = center[T - 1] - center[T - 2];
    for (std::size_t f = 0; f < F; ++f) {
        const VectorXd* p_dec = &tape.obs_pool[T - 1]->pooled;
        if (f > 0 && cfg_.pool_every_timestep) {
            const std::size_t tau = T - 1 + f;
            std::vector<Vec2> others;
            std::vector<double> alpha;
            for (std::size_t k : roll_members) {
                others.push_back(neighbour_at(k, tau));
                if (cfg_.rollout == AlphaRollout::HoldLast) {
                    alpha.push_back(alphas[k][T - 1]);
                } else {
                    const PairSample s{center_hist[tau - 2], center_hist[tau - 1], center_hist[tau],
                                       neighbour_at(k, tau - 2), neighbour_at(k, tau - 1), neighbour_at(k, tau),
                                       cluster.dt > 0.0 ? cluster.dt : 1.0};
                    alpha.push_back(relabel_graph_->alpha(qtc_state(s, relabel_graph_->variant())));
                }
            }
            tape.dec_pool[f] = pool(center_hist[tau], others, alpha);
            p_dec = &tape.dec_pool[f]->pooled;
        }
        nn::lstm_forward(params_, dec_, concat(vec2(y_prev), *p_dec), hd, cd, tape.dec[f]);
        hd = tape.dec[f].h;
        cd = tape.dec[f].c;
        tape.head_in[f] = concat(hd, *p_dec);
        const VectorXd y = params_.view(out_w_) * tape.head_in[f] + params_.view(out_b_);
        tape.disp[f] = to_vec2(y);
        y_prev = tape.disp[f];
        center_hist.push_back(center_hist.back() + tape.disp[f]);
    }

    if (disp_out) *disp_out = tape.disp;
    if (cluster.future.empty() && grad.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double loss = displacement_loss(tape.disp, cluster);
    if (grad.empty()) return loss;

    // ---- backward ----
    double* g = grad.data();
    auto pool_backward = [&](const PoolRecord& rec, const VectorXd& dp) {
        std::vector<VectorXd> dw(rec.rel.size(), VectorXd::Zero(E));
        for (Eigen::Index j = 0; j < E; ++j) {
            if (rec.argmax[j] >= 0) dw[static_cast<std::size_t>(rec.argmax[j])](j) += dp(j);
        }
        Vec2 d_center{};
        for (std::size_t m = 0; m < rec.rel.size(); ++m) {
            if (dw[m].isZero(0.0)) continue;
            const VectorXd da = cfg_.neurosym ? VectorXd(rec.alpha[m] * dw[m]) : dw[m];
            const VectorXd dpre = da.cwiseProduct(activation_derivative(cfg_.activation, rec.pre[m], rec.act[m]));
            params_.view(emb_w_, g).noalias() += dpre * vec2(rec.rel[m]).transpose();
            params_.view(emb_b_, g) += dpre;
            const VectorXd drel = emb_w.transpose() * dpre;
            d_center -= to_vec2(drel);
        }
        return d_center;
    };

    const auto dl = loss_gradient(tape.disp, cluster);
    const auto out_w = params_.view(out_w_);
    VectorXd dh_dec = VectorXd::Zero(D), dc_dec = VectorXd::Zero(D);
    Vec2 dy_next{}, pos_acc{};
    VectorXd dp_final = VectorXd::Zero(E);
    VectorXd dx, dh_prev, dc_prev;
    for (std::size_t f = F; f-- > 0;) {
        const Vec2 gd = dl[f] + dy_next + pos_acc;
        const VectorXd gv = vec2(gd);
        params_.view(out_w_, g).noalias() += gv * tape.head_in[f].transpose();
        params_.view(out_b_, g) += gv;
        const VectorXd dhead = out_w.transpose() * gv;
        const VectorXd dh = dhead.head(D) + dh_dec;
        VectorXd dp = dhead.tail(E);
        nn::lstm_backward(params_, dec_, tape.dec[f], dh, dc_dec, g, dx, dh_prev, dc_prev);
        dy_next = {dx(0), dx(1)};
        dp += dx.tail(E);
        dh_dec = dh_prev;
        dc_dec = dc_prev;
        if (tape.dec_pool[f]) {
            pos_acc += pool_backward(*tape.dec_pool[f], dp);
        } else {
            dp_final += dp;
        }
    }

    const VectorXd dbridge = dh_dec.cwiseProduct((1.0 - tape.bridge_h.array().square()).matrix());
    params_.view(bridge_w_, g).noalias() += dbridge * h.transpose();
    params_.view(bridge_b_, g) += dbridge;
    VectorXd dh_enc = params_.view(bridge_w_).transpose() * dbridge;
    VectorXd dc_enc = VectorXd::Zero(H);
    for (std::size_t t = T; t-- > 0;) {
        nn::lstm_backward(params_, enc_, tape.enc[t], dh_enc, dc_enc, g, dx, dh_prev, dc_prev);
        VectorXd dp = VectorXd::Zero(E);
        if (cfg_.pooling == PoolingSteps::EveryStep) dp += dx.tail(E);
        if (t + 1 == T) dp += dp_final;
        if (tape.obs_pool[t]) pool_backward(*tape.obs_pool[t], dp);
        dh_enc = dh_prev;
        dc_enc = dc_prev;
    }
    return loss;
}

std::vector<Vec2> PooledPredictor::forward(const Cluster& cluster, const ClusterAlphas& alphas) const {
    std::vector<Vec2> disp;
    Cluster no_future = cluster;
    no_future.future.clear();
    run(no_future, alphas, &disp, {});
    return disp;
}

double PooledPredictor::loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas,
                                          std::span<double> grad) const {
    return run(cluster, alphas, nullptr, grad);
}

// ---------------------------------------------------------------------------
// AttentionPredictor

void AttentionConfig::validate() const {
    if (obs_len < 3) throw InvalidConfigError("attention: obs_len must be >= 3");
    if (pred_len < 1) throw InvalidConfigError("attention: pred_len must be >= 1");
    if (series_count < 1) throw InvalidConfigError("attention: series_count (n*) must be >= 1");
    if (attention_dim < 1 || encoder_h_dim < 1 || decoder_h_dim < 1) {
        throw InvalidConfigError("attention: layer dimensions must be >= 1");
    }
}

AttentionPredictor::AttentionPredictor(const AttentionConfig& config) : cfg_(config) {
    cfg_.validate();
    const auto T = static_cast<Eigen::Index>(cfg_.obs_len);
    const auto K = static_cast<Eigen::Index>(cfg_.series_count);
    const auto A = static_cast<Eigen::Index>(cfg_.attention_dim);
    const auto H = static_cast<Eigen::Index>(cfg_.encoder_h_dim);
    const auto D = static_cast<Eigen::Index>(cfg_.decoder_h_dim);
    se_w_ = params_.add("input_attention.series.w", A, 2 * T);
    se_b_ = params_.add("input_attention.series.b", A, 1);
    st_w_ = params_.add("input_attention.state.w", A, 2 * H);
    st_b_ = params_.add("input_attention.state.b", A, 1);
    sc_v_ = params_.add("input_attention.score.v", 1, A);
    sc_c_ = params_.add("input_attention.score.c", 1, 1);
    enc_ = nn::LstmBlocks::add(params_, "encoder", 2 * K, H);
    ta_wd_ = params_.add("temporal_attention.state.w", H, 2 * D);
    ta_uh_ = params_.add("temporal_attention.hidden.w", H, H);
    ta_b_ = params_.add("temporal_attention.b", H, 1);
    ta_v_ = params_.add("temporal_attention.v", 1, H);
    dec_ = nn::LstmBlocks::add(params_, "decoder", 2 + H, D);
    out_w_ = params_.add("head.w", 2, D + H);
    out_b_ = params_.add("head.b", 2, 1);

    nn::SplitMix64 rng(cfg_.seed);
    params_.init_uniform(se_w_, 1.0 / std::sqrt(static_cast<double>(2 * T)), rng);
    params_.init_uniform(se_b_, 0.1, rng);
    params_.init_uniform(st_w_, 1.0 / std::sqrt(static_cast<double>(2 * H)), rng);
    params_.init_uniform(sc_v_, 1.0 / std::sqrt(static_cast<double>(A)), rng);
    params_.init_uniform(sc_c_, 0.5, rng);
    enc_.init(params_, rng);
    params_.init_uniform(ta_wd_, 1.0 / std::sqrt(static_cast<double>(2 * D)), rng);
    params_.init_uniform(ta_uh_, 1.0 / std::sqrt(static_cast<double>(H)), rng);
    params_.init_uniform(ta_v_, 1.0 / std::sqrt(static_cast<double>(H)), rng);
    dec_.init(params_, rng);
    params_.init_uniform(out_w_, 0.1 / std::sqrt(static_cast<double>(D + H)), rng);
}

AttentionPredictor AttentionPredictor::with_weighting(bool neurosym) const {
    AttentionPredictor copy = *this;
    copy.cfg_.neurosym = neurosym;
    return copy;
}

std::vector<std::uint64_t> AttentionPredictor::dimension_table() const {
    return {cfg_.obs_len,       cfg_.pred_len,       cfg_.series_count,        cfg_.attention_dim,
            cfg_.encoder_h_dim, cfg_.decoder_h_dim, cfg_.neurosym ? 1u : 0u, cfg_.seed};
}

AttentionConfig AttentionPredictor::config_from_dimensions(const std::vector<std::uint64_t>& d) {
    if (d.size() != 8) throw ParseError("attention model dimension table must have 8 entries");
    AttentionConfig c;
    c.obs_len = d[0];
    c.pred_len = d[1];
    c.series_count = d[2];
    c.attention_dim = d[3];
    c.encoder_h_dim = d[4];
    c.decoder_h_dim = d[5];
    c.neurosym = d[6] != 0;
    c.seed = d[7];
    return c;
}

double AttentionPredictor::run(const Cluster& cluster, const ClusterAlphas& alphas, std::vector<Vec2>* disp_out,
                               std::span<double> grad, std::vector<std::vector<double>>* attention_out) const {
    check_cluster(cluster, alphas, cfg_.obs_len);
    check_grad_span(grad, params_.size());
    if (cluster.series_count() != cfg_.series_count) {
        throw InvalidInputError("attention model expects " + std::to_string(cfg_.series_count) + " series, cluster has " +
                                std::to_string(cluster.series_count()));
    }
    const std::size_t T = cfg_.obs_len;
    const std::size_t F = cfg_.pred_len;
    const std::size_t K = cfg_.series_count;
    const auto A = static_cast<Eigen::Index>(cfg_.attention_dim);
    const auto H = static_cast<Eigen::Index>(cfg_.encoder_h_dim);
    const auto D = static_cast<Eigen::Index>(cfg_.decoder_h_dim);
    const auto& center = cluster.series[0];
    const Vec2 origin = center[T - 1];

    // Series relative to the center's last observed position; masked series never enter the math.
    std::vector<std::vector<Vec2>> rel(K);
    std::vector<VectorXd> flat(K), z(K);
    const auto se_w = params_.view(se_w_);
    const auto se_b = params_.view(se_b_);
    for (std::size_t k = 0; k < K; ++k) {
        if (!cluster.mask[k]) continue;
        rel[k].resize(T);
        flat[k].resize(static_cast<Eigen::Index>(2 * T));
        for (std::size_t t = 0; t < T; ++t) {
            rel[k][t] = cluster.series[k][t] - origin;
            flat[k](static_cast<Eigen::Index>(2 * t)) = rel[k][t].x;
            flat[k](static_cast<Eigen::Index>(2 * t + 1)) = rel[k][t].y;
        }
        z[k] = se_w * flat[k] + se_b;
    }

    const auto st_w = params_.view(st_w_);
    const auto st_b = params_.view(st_b_);
    const auto sc_v = params_.view(sc_v_);
    const double sc_c = params_.view(sc_c_)(0, 0);

    struct EncStep {
        VectorXd hs_prev;                 // [h; s] before the step
        std::vector<VectorXd> act;        // tanh(q + z^k), valid k
        std::vector<double> score;        // e^k
        std::vector<double> weight;       // attention weights
        nn::LstmStep lstm;
    };
    std::vector<EncStep> enc(T);
    VectorXd h = VectorXd::Zero(H), s = VectorXd::Zero(H);
    std::vector<double> scaled_alpha(K, 1.0);
    if (attention_out) attention_out->clear();
    for (std::size_t t = 0; t < T; ++t) {
        EncStep& st = enc[t];
        st.hs_prev = concat(h, s);
        const VectorXd q = st_w * st.hs_prev + st_b;
        st.act.assign(K, VectorXd());
        st.score.assign(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            if (!cluster.mask[k]) continue;
            st.act[k] = (q + z[k]).array().tanh().matrix();
            st.score[k] = (sc_v * st.act[k])(0) + sc_c;
            scaled_alpha[k] = cfg_.neurosym ? alphas[k][t] : 1.0;
        }
        st.weight = input_attention(st.score, scaled_alpha, cluster.mask);
        if (attention_out) attention_out->push_back(st.weight);
        VectorXd u = VectorXd::Zero(static_cast<Eigen::Index>(2 * K));
        for (std::size_t k = 0; k < K; ++k) {
            if (!cluster.mask[k]) continue;
            u(static_cast<Eigen::Index>(2 * k)) = st.weight[k] * rel[k][t].x;
            u(static_cast<Eigen::Index>(2 * k + 1)) = st.weight[k] * rel[k][t].y;
        }
        nn::lstm_forward(params_, enc_, u, h, s, st.lstm);
        h = st.lstm.h;
        s = st.lstm.c;
    }

    MatrixXd hidden(H, static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) hidden.col(static_cast<Eigen::Index>(t)) = enc[t].lstm.h;
    const MatrixXd uh = params_.view(ta_uh_) * hidden;  // precomputed U h_i

    struct DecStep {
        VectorXd ds_prev;   // [d; s'] before the step
        MatrixXd act;       // H x T, tanh activations of the temporal scores
        VectorXd beta;      // T
        VectorXd context;   // H
        nn::LstmStep lstm;
        VectorXd head_in;
    };
    std::vector<DecStep> dec(F);
    std::vector<Vec2> disp(F);
    VectorXd d = VectorXd::Zero(D), sd = VectorXd::Zero(D);
    Vec2 y_prev = center[T - 1] - center[T - 2];
    const auto ta_wd = params_.view(ta_wd_);
    const auto ta_b = params_.view(ta_b_);
    const auto ta_v = params_.view(ta_v_);
    for (std::size_t f = 0; f < F; ++f) {
        DecStep& st = dec[f];
        st.ds_prev = concat(d, sd);
        const VectorXd r = ta_wd * st.ds_prev + ta_b;
        st.act = (uh.colwise() + r).array().tanh().matrix();
        VectorXd l = (ta_v * st.act).transpose();
        const double top = l.maxCoeff();
        st.beta = (l.array() - top).exp().matrix();
        st.beta /= st.beta.sum();
        st.context = hidden * st.beta;
        nn::lstm_forward(params_, dec_, concat(vec2(y_prev), st.context), d, sd, st.lstm);
        d = st.lstm.h;
        sd = st.lstm.c;
        st.head_in = concat(d, st.context);
        disp[f] = to_vec2(params_.view(out_w_) * st.head_in + params_.view(out_b_));
        y_prev = disp[f];
    }

    if (disp_out) *disp_out = disp;
    if (cluster.future.empty() && grad.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double loss = displacement_loss(disp, cluster);
    if (grad.empty()) return loss;

    // ---- backward ----
    double* g = grad.data();
    const auto dl = loss_gradient(disp, cluster);
    const auto out_w = params_.view(out_w_);
    MatrixXd dhidden = MatrixXd::Zero(H, static_cast<Eigen::Index>(T));
    VectorXd dd = VectorXd::Zero(D), dsd = VectorXd::Zero(D);
    Vec2 dy_next{};
    VectorXd dx, dh_prev, dc_prev;
    for (std::size_t f = F; f-- > 0;) {
        const DecStep& st = dec[f];
        const VectorXd gv = vec2(dl[f] + dy_next);
        params_.view(out_w_, g).noalias() += gv * st.head_in.transpose();
        params_.view(out_b_, g) += gv;
        const VectorXd dhead = out_w.transpose() * gv;
        VectorXd dctx = dhead.tail(H);
        nn::lstm_backward(params_, dec_, st.lstm, dhead.head(D) + dd, dsd, g, dx, dh_prev, dc_prev);
        dy_next = {dx(0), dx(1)};
        dctx += dx.tail(H);
        // context = hidden * beta
        dhidden.noalias() += dctx * st.beta.transpose();
        const VectorXd dbeta = hidden.transpose() * dctx;
        const double mean = st.beta.dot(dbeta);
        const VectorXd dlog = st.beta.cwiseProduct((dbeta.array() - mean).matrix());
        // l_i = v . act_i
        params_.view(ta_v_, g).noalias() += (st.act * dlog).transpose();
        const MatrixXd dpre = (ta_v.transpose() * dlog.transpose()).cwiseProduct(
            (1.0 - st.act.array().square()).matrix());  // H x T
        params_.view(ta_uh_, g).noalias() += dpre * hidden.transpose();
        dhidden.noalias() += params_.view(ta_uh_).transpose() * dpre;
        const VectorXd dr = dpre.rowwise().sum();
        params_.view(ta_wd_, g).noalias() += dr * st.ds_prev.transpose();
        params_.view(ta_b_, g) += dr;
        const VectorXd dds = ta_wd.transpose() * dr;
        dd = dh_prev + dds.head(D);
        dsd = dc_prev + dds.tail(D);
    }

    std::vector<VectorXd> dz(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (cluster.mask[k]) dz[k] = VectorXd::Zero(A);
    }
    VectorXd dh = VectorXd::Zero(H), ds = VectorXd::Zero(H);
    for (std::size_t t = T; t-- > 0;) {
        const EncStep& st = enc[t];
        nn::lstm_backward(params_, enc_, st.lstm, dh + dhidden.col(static_cast<Eigen::Index>(t)), ds, g, dx, dh_prev,
                          dc_prev);
        // u = concat_k weight^k x^k_t
        std::vector<double> dweight(K, 0.0);
        double mean = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (!cluster.mask[k]) continue;
            dweight[k] = dx(static_cast<Eigen::Index>(2 * k)) * rel[k][t].x +
                         dx(static_cast<Eigen::Index>(2 * k + 1)) * rel[k][t].y;
            mean += st.weight[k] * dweight[k];
        }
        VectorXd dq = VectorXd::Zero(A);
        for (std::size_t k = 0; k < K; ++k) {
            if (!cluster.mask[k]) continue;
            const double dscaled = st.weight[k] * (dweight[k] - mean);
            const double de = cfg_.neurosym ? alphas[k][t] * dscaled : dscaled;
            params_.view(sc_v_, g).noalias() += de * st.act[k].transpose();
            params_.view(sc_c_, g)(0, 0) += de;
            const VectorXd dpre =
                (de * sc_v.transpose()).cwiseProduct((1.0 - st.act[k].array().square()).matrix());
            dq += dpre;
            dz[k] += dpre;
        }
        params_.view(st_w_, g).noalias() += dq * st.hs_prev.transpose();
        params_.view(st_b_, g) += dq;
        const VectorXd dhs = st_w.transpose() * dq;
        dh = dh_prev + dhs.head(H);
        ds = dc_prev + dhs.tail(H);
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (!cluster.mask[k]) continue;
        params_.view(se_w_, g).noalias() += dz[k] * flat[k].transpose();
        params_.view(se_b_, g) += dz[k];
    }
    return loss;
}

std::vector<Vec2> AttentionPredictor::forward(const Cluster& cluster, const ClusterAlphas& alphas) const {
    std::vector<Vec2> disp;
    Cluster no_future = cluster;
    no_future.future.clear();
    run(no_future, alphas, &disp, {}, nullptr);
    return disp;
}

double AttentionPredictor::loss_and_gradient(const Cluster& cluster, const ClusterAlphas& alphas,
                                             std::span<double> grad) const {
    return run(cluster, alphas, nullptr, grad, nullptr);
}

std::vector<std::vector<double>> AttentionPredictor::input_attention_weights(const Cluster& cluster,
                                                                            const ClusterAlphas& alphas) const {
    std::vector<std::vector<double>> att;
    Cluster no_future = cluster;
    no_future.future.clear();
    run(no_future, alphas, nullptr, {}, &att);
    return att;
}

PredictionResult predict_pooled(const PooledPredictor& model, const Cluster& cluster, const ClusterAlphas& alphas) {
    return model.predict(cluster, alphas);
}

PredictionResult predict_attention(const AttentionPredictor& model, const Cluster& cluster,
                                   const ClusterAlphas& alphas) {
    return model.predict(cluster, alphas);
}

}  // namespace neurosym
