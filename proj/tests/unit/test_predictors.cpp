#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "neurosym/error.hpp"
#include "neurosym/predictors.hpp"
#include "neurosym/training.hpp"
#include "synthetic.hpp"

using namespace neurosym;

namespace {

PooledConfig small_pooled(std::size_t obs = 5, std::size_t pred = 3) {
    PooledConfig c;
    c.obs_len = obs;
    c.pred_len = pred;
    c.embedding_dim = 4;
    c.encoder_h_dim = 5;
    c.decoder_h_dim = 6;
    c.seed = 17;
    return c;
}

AttentionConfig small_attention(std::size_t n_star, std::size_t obs = 5, std::size_t pred = 3) {
    AttentionConfig c;
    c.obs_len = obs;
    c.pred_len = pred;
    c.series_count = n_star;
    c.attention_dim = 4;
    c.encoder_h_dim = 5;
    c.decoder_h_dim = 6;
    c.seed = 23;
    return c;
}

std::vector<PooledConfig> pooled_variants() {
    std::vector<PooledConfig> out;
    for (auto pooling : {PoolingSteps::EveryStep, PoolingSteps::FinalStep}) {
        for (bool every : {false, true}) {
            for (auto rollout : {AlphaRollout::HoldLast, AlphaRollout::Relabel}) {
                if (!every && rollout == AlphaRollout::Relabel) continue;
                auto c = small_pooled();
                c.pooling = pooling;
                c.pool_every_timestep = every;
                c.rollout = rollout;
                out.push_back(c);
            }
        }
    }
    return out;
}

bool bitwise_equal(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(Vec2)) != 0) return false;
    }
    return true;
}

Cluster with_pad(Cluster c, double pad) {
    for (std::size_t k = 0; k < c.series.size(); ++k) {
        if (c.mask[k]) continue;
        for (auto& p : c.series[k]) p = Vec2{pad, pad};
    }
    return c;
}

}  // namespace

TEST(ConstantVelocity, Examples) {
    const auto r = predict_constant_velocity({{0, 0}, {1, 0}}, 3);
    EXPECT_EQ(r.predicted, (std::vector<Vec2>{{2, 0}, {3, 0}, {4, 0}}));
    const auto still = predict_constant_velocity({{1, 2}, {1, 2}, {1, 2}}, 4);
    EXPECT_EQ(still.predicted, std::vector<Vec2>(4, Vec2{1, 2}));
    EXPECT_THROW(predict_constant_velocity({{0, 0}}, 3), InsufficientDataError);
}

TEST(ConstantVelocity, ClusterOverload) {
    synth::Random rng(1);
    const auto c = synth::toy_cluster(rng, 3, 1, 6, 4);
    const auto r = predict_constant_velocity(c, 4);
    EXPECT_EQ(r.agent_id, c.center_agent);
    EXPECT_EQ(r.ground_truth, c.future);
    EXPECT_EQ(r.predicted, predict_constant_velocity(c.series[0], 4).predicted);
}

TEST(InputAttention, Examples) {
    const std::vector<double> ones{1, 1, 1};
    const auto u = input_attention(std::vector<double>{0, 0, 0}, ones, {true, true, true});
    for (double w : u) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
    const auto r = input_attention(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)}, ones,
                                   {true, true, true});
    EXPECT_NEAR(r[0], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(r[1], 2.0 / 6.0, 1e-15);
    EXPECT_NEAR(r[2], 3.0 / 6.0, 1e-15);
    const auto single = input_attention(std::vector<double>{5, 5}, std::vector<double>{1, 1}, {true, false});
    EXPECT_EQ(single, (std::vector<double>{1.0, 0.0}));
}

TEST(InputAttention, Errors) {
    EXPECT_THROW(input_attention(std::vector<double>{1, 2}, std::vector<double>{1, 1}, {false, false}),
                 EmptyAttentionError);
    EXPECT_THROW(input_attention(std::vector<double>{1, 2}, std::vector<double>{1}, {true, true}),
                 InvalidInputError);
    EXPECT_THROW(input_attention(std::vector<double>{1, 2}, std::vector<double>{1, 1}, {true}),
                 InvalidInputError);
}

TEST(InputAttention, Properties) {
    synth::Random rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(8);
        std::vector<double> e(n), a(n);
        std::vector<bool> mask(n);
        for (std::size_t k = 0; k < n; ++k) {
            e[k] = rng.uniform(-30, 30);
            a[k] = rng.uniform(0.01, 1.0);
            mask[k] = rng.index(3) != 0;
        }
        mask[rng.index(n)] = true;
        const auto w = input_attention(e, a, mask);
        double sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_GE(w[k], 0.0);
            if (!mask[k]) EXPECT_EQ(w[k], 0.0);
            sum += w[k];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        // shift invariance of the weighted scores of valid entries
        const double shift = rng.uniform(-10, 10);
        auto shifted = e;
        for (std::size_t k = 0; k < n; ++k) shifted[k] += shift / a[k];
        const auto w2 = input_attention(shifted, a, mask);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(w[k], w2[k], 1e-12);
    }
    const auto huge = input_attention(std::vector<double>{1000, 999}, std::vector<double>{1, 1}, {true, true});
    EXPECT_TRUE(std::isfinite(huge[0]) && std::isfinite(huge[1]));
}

TEST(ModelKind, Names) {
    for (auto k : {ModelKind::Linear, ModelKind::Pooled, ModelKind::Attention}) {
        EXPECT_EQ(parse_model_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_model_kind("gan"), InvalidInputError);
}

TEST(Displacements, TargetsAndLoss) {
    synth::Random rng(6);
    const auto c = synth::toy_cluster(rng, 2, 1, 5, 3);
    const auto d = target_displacements(c);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0], c.future[0] - c.series[0].back());
    EXPECT_EQ(d[2], c.future[2] - c.future[1]);
    EXPECT_EQ(displacement_loss(d, c), 0.0);
    auto off = d;
    off[1] += Vec2{0.2, 0};
    EXPECT_NEAR(displacement_loss(off, c), 0.04 / (2.0 * 3.0), 1e-15);
}

TEST(PooledPredictor, PredictIsCumulativeDisplacement) {
    synth::Random rng(2);
    const PooledPredictor m(small_pooled());
    const auto c = synth::toy_cluster(rng, 3, 2, 5, 3);
    const auto a = synth::random_alphas(rng, c);
    const auto disp = m.forward(c, a);
    const auto r = predict_pooled(m, c, a);
    ASSERT_EQ(r.predicted.size(), 3u);
    Vec2 p = c.series[0].back();
    for (std::size_t t = 0; t < 3; ++t) {
        p += disp[t];
        EXPECT_EQ(r.predicted[t], p);
    }
    EXPECT_EQ(r.ground_truth, c.future);
    for (const auto& q : r.predicted) EXPECT_TRUE(is_finite(q));
}

TEST(PooledPredictor, IdentityWeightingIsBitwiseBaseline) {
    for (const auto& cfg : pooled_variants()) {
        // relabelled rollouts draw decoder labels from the graph, so alpha is not identically 1
        if (cfg.rollout == AlphaRollout::Relabel) continue;
        synth::Random rng(9);
        const PooledPredictor weighted(cfg);
        const auto baseline = weighted.with_weighting(false);
        for (int trial = 0; trial < 20; ++trial) {
            const auto c = synth::toy_cluster(rng, 4, 1 + rng.index(3), 5, 3);
            const auto ones = uniform_alphas(c);
            EXPECT_TRUE(bitwise_equal(weighted.forward(c, ones), baseline.forward(c, ones)));
            EXPECT_TRUE(bitwise_equal(baseline.forward(c, ones), baseline.forward(c, synth::random_alphas(rng, c))));
        }
    }
}

TEST(PooledPredictor, WeightingChangesOutput) {
    synth::Random rng(10);
    const PooledPredictor m(small_pooled());
    const auto c = synth::toy_cluster(rng, 3, 2, 5, 3);
    EXPECT_FALSE(bitwise_equal(m.forward(c, uniform_alphas(c)), m.forward(c, synth::random_alphas(rng, c))));
}

TEST(PooledPredictor, PaddingIsInert) {
    for (const auto& cfg : pooled_variants()) {
        synth::Random rng(12);
        const PooledPredictor m(cfg);
        for (int trial = 0; trial < 10; ++trial) {
            const auto c = synth::toy_cluster(rng, 5, rng.index(4), 5, 3);
            const auto a = synth::random_alphas(rng, c);
            const auto ref = m.forward(c, a);
            for (double pad : {-100.0, 0.5, 1e6}) EXPECT_TRUE(bitwise_equal(ref, m.forward(with_pad(c, pad), a)));
        }
    }
}

TEST(PooledPredictor, PoolingIsPermutationInvariantAndIdempotent) {
    for (const auto& cfg : pooled_variants()) {
        synth::Random rng(14);
        const PooledPredictor m(cfg);
        for (int trial = 0; trial < 10; ++trial) {
            auto c = synth::toy_cluster(rng, 4, 3, 5, 3);
            auto a = synth::random_alphas(rng, c);
            const auto ref = m.forward(c, a);

            auto perm = c;
            auto perm_a = a;
            std::swap(perm.series[1], perm.series[3]);
            std::swap(perm.sources[1], perm.sources[3]);
            std::swap(perm_a[1], perm_a[3]);
            EXPECT_TRUE(bitwise_equal(ref, m.forward(perm, perm_a)));

            // slot 3 duplicates slot 1 versus slot 3 masked
            auto single = c;
            single.mask[3] = false;
            single.present[3].assign(5, false);
            auto dup = c;
            dup.series[3] = dup.series[1];
            auto dup_a = a;
            dup_a[3] = dup_a[1];
            EXPECT_TRUE(bitwise_equal(m.forward(single, a), m.forward(dup, dup_a)));
        }
    }
}

TEST(PooledPredictor, CenterOnlyEqualsNoContextRollout) {
    synth::Random rng(15);
    PooledPredictor m(small_pooled());
    auto no_context = m;
    for (std::size_t i = 0; i < no_context.parameters().block_count(); ++i) {
        const auto& name = no_context.parameters().block(i).name;
        if (name.rfind("interaction.", 0) == 0) no_context.parameters().fill(i, 0.0);
    }
    for (int trial = 0; trial < 10; ++trial) {
        const auto with_neighbours = synth::toy_cluster(rng, 3, 2, 5, 3);
        auto center_only = with_neighbours;
        for (std::size_t k = 1; k < 3; ++k) {
            center_only.mask[k] = false;
            center_only.present[k].assign(5, false);
        }
        const auto a = synth::random_alphas(rng, with_neighbours);
        EXPECT_TRUE(bitwise_equal(m.forward(center_only, uniform_alphas(center_only)),
                                  no_context.forward(with_neighbours, a)));
    }
}

TEST(PooledPredictor, RejectsDegenerateCluster) {
    synth::Random rng(16);
    const PooledPredictor m(small_pooled());
    auto c = synth::toy_cluster(rng, 2, 1, 5, 3);
    const auto a = uniform_alphas(c);
    auto bad = c;
    bad.mask[0] = false;
    EXPECT_THROW(m.forward(bad, a), DegenerateClusterError);
    auto short_obs = synth::toy_cluster(rng, 2, 1, 4, 3);
    EXPECT_THROW(m.forward(short_obs, uniform_alphas(short_obs)), InvalidInputError);
}

TEST(PooledPredictor, DeterministicGivenSeed) {
    synth::Random rng(18);
    const auto c = synth::toy_cluster(rng, 3, 2, 5, 3);
    const auto a = synth::random_alphas(rng, c);
    const PooledPredictor m1(small_pooled()), m2(small_pooled());
    EXPECT_EQ(m1.parameters(), m2.parameters());
    EXPECT_TRUE(bitwise_equal(m1.forward(c, a), m2.forward(c, a)));
    auto other = small_pooled();
    other.seed = 18;
    EXPECT_NE(PooledPredictor(other).parameters().values(), m1.parameters().values());
}

TEST(PooledPredictor, DimensionTableRoundTrip) {
    for (const auto& cfg : pooled_variants()) {
        const PooledPredictor m(cfg);
        const auto back = PooledPredictor::config_from_dimensions(m.dimension_table());
        EXPECT_EQ(PooledPredictor(back).dimension_table(), m.dimension_table());
        EXPECT_EQ(PooledPredictor(back).parameters(), m.parameters());
    }
    EXPECT_THROW(PooledPredictor::config_from_dimensions({1, 2, 3}), ParseError);
}

TEST(PooledPredictor, GradientCheck) {
    for (const auto& cfg : pooled_variants()) {
        synth::Random rng(19);
        const PooledPredictor m(cfg);
        const auto c = synth::toy_cluster(rng, 3, 2, 5, 3);
        const auto rep = gradient_check(m, {c, synth::random_alphas(rng, c)});
        EXPECT_TRUE(rep.passed) << rep.max_relative_error;
        EXPECT_LT(rep.max_relative_error, 1e-4);
        for (const auto& b : rep.blocks) EXPECT_GT(b.checked, 0u) << b.name;
    }
}

TEST(AttentionPredictor, IdentityWeightingIsBitwiseBaseline) {
    synth::Random rng(20);
    const AttentionPredictor weighted(small_attention(4));
    const auto baseline = weighted.with_weighting(false);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = synth::toy_cluster(rng, 4, rng.index(4), 5, 3);
        const auto ones = uniform_alphas(c);
        EXPECT_TRUE(bitwise_equal(weighted.forward(c, ones), baseline.forward(c, ones)));
        EXPECT_TRUE(bitwise_equal(baseline.forward(c, ones), baseline.forward(c, synth::random_alphas(rng, c))));
    }
}

TEST(AttentionPredictor, SingleSeriesGetsFullWeight) {
    synth::Random rng(21);
    const AttentionPredictor m(small_attention(1));
    const auto c = synth::toy_cluster(rng, 1, 0, 5, 3);
    const auto w = m.input_attention_weights(c, uniform_alphas(c));
    ASSERT_EQ(w.size(), 5u);
    for (const auto& row : w) EXPECT_EQ(row, std::vector<double>{1.0});
    const auto r = predict_attention(m, c, uniform_alphas(c));
    EXPECT_EQ(r.predicted.size(), 3u);
}

TEST(AttentionPredictor, WeightsFollowMask) {
    synth::Random rng(22);
    const AttentionPredictor m(small_attention(4));
    const auto c = synth::toy_cluster(rng, 4, 2, 5, 3);
    for (const auto& row : m.input_attention_weights(c, synth::random_alphas(rng, c))) {
        ASSERT_EQ(row.size(), 4u);
        EXPECT_EQ(row[3], 0.0);
        EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(AttentionPredictor, PaddingIsInert) {
    synth::Random rng(24);
    const AttentionPredictor m(small_attention(5));
    for (int trial = 0; trial < 10; ++trial) {
        const auto c = synth::toy_cluster(rng, 5, rng.index(4), 5, 3);
        const auto a = synth::random_alphas(rng, c);
        const auto ref = m.forward(c, a);
        for (double pad : {-100.0, 0.5, 1e6}) EXPECT_TRUE(bitwise_equal(ref, m.forward(with_pad(c, pad), a)));
    }
}

TEST(AttentionPredictor, ShapeChecks) {
    synth::Random rng(25);
    const AttentionPredictor m(small_attention(3));
    const auto wrong = synth::toy_cluster(rng, 4, 1, 5, 3);
    EXPECT_THROW(m.forward(wrong, uniform_alphas(wrong)), InvalidInputError);
    auto bad = synth::toy_cluster(rng, 3, 1, 5, 3);
    bad.mask[0] = false;
    EXPECT_THROW(m.forward(bad, uniform_alphas(bad)), DegenerateClusterError);
}

TEST(AttentionPredictor, DimensionTableRoundTrip) {
    const AttentionPredictor m(small_attention(4));
    const auto back = AttentionPredictor::config_from_dimensions(m.dimension_table());
    EXPECT_EQ(AttentionPredictor(back).parameters(), m.parameters());
}

TEST(AttentionPredictor, GradientCheck) {
    for (std::size_t n_star : {2u, 3u, 4u}) {
        synth::Random rng(26 + n_star);
        const AttentionPredictor m(small_attention(n_star, 5, 2));
        const auto c = synth::toy_cluster(rng, n_star, n_star - 1, 5, 2);
        const auto rep = gradient_check(m, {c, synth::random_alphas(rng, c)});
        EXPECT_TRUE(rep.passed) << rep.max_relative_error;
    }
}

TEST(LinearPredictor, GradientIsExact) {
    synth::Random rng(30);
    const LinearPredictor m(5, 3, 4);
    const auto c = synth::toy_cluster(rng, 2, 1, 5, 3);
    const auto rep = gradient_check(m, {c, uniform_alphas(c)});
    EXPECT_LT(rep.max_relative_error, 1e-8);
    EXPECT_TRUE(rep.passed);
}
