#include "neurosym/weighting.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "neurosym/error.hpp"

namespace neurosym {

AlphaSequence label_sequence(const std::vector<QtcState>& states, const CndGraph& graph) {
    AlphaSequence out;
    if (states.empty()) return out;
    out.values.reserve(states.size());
    out.values.push_back(graph.alpha(states.front()));
    for (std::size_t t = 0; t + 1 < states.size(); ++t) out.values.push_back(graph.alpha(states[t]));
    return out;
}

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::Identity;
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw InvalidInputError("unknown activation '" + std::string(name) + "'");
}

void EmbeddingParams::validate() const {
    if (bias.size() != weights.rows()) throw InvalidInputError("embedding bias size does not match weight rows");
    if (!weights.allFinite() || !bias.allFinite()) throw InvalidInputError("embedding parameters must be finite");
}

Eigen::VectorXd apply_activation(Activation act, const Eigen::VectorXd& pre) {
    switch (act) {
        case Activation::Identity: return pre;
        case Activation::Tanh: return pre.array().tanh().matrix();
        case Activation::Relu: return pre.cwiseMax(0.0);
    }
    return pre;
}

Eigen::VectorXd embed(const EmbeddingParams& params, const Eigen::VectorXd& v) {
    params.validate();
    if (v.size() != params.input_dim()) {
        throw InvalidInputError("embed: input has dimension " + std::to_string(v.size()) + ", expected " +
                                std::to_string(params.input_dim()));
    }
    return apply_activation(params.activation, params.weights * v + params.bias);
}

Eigen::VectorXd weight_interaction(double alpha, const EmbeddingParams& params, Vec2 xa, Vec2 xb) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInputError("weight_interaction: alpha must be in (0, 1]");
    const Vec2 rel = xb - xa;
    Eigen::VectorXd v(2);
    v << rel.x, rel.y;
    return alpha * embed(params, v);
}

ClusterAlphas uniform_alphas(const Cluster& cluster) {
    return ClusterAlphas(cluster.series_count(), std::vector<double>(cluster.obs_len(), 1.0));
}

ClusterAlphas cluster_alphas(const Cluster& cluster, const CndGraph& graph, const QtcTolerances& tol) {
    ClusterAlphas out = uniform_alphas(cluster);
    const std::size_t n = cluster.obs_len();
    if (n < 3) throw InsufficientDataError("cluster_alphas: observation window shorter than 3 steps");
    for (std::size_t k = 1; k < cluster.series_count(); ++k) {
        if (!cluster.mask[k]) continue;
        const auto states = qtc_sequence(cluster.series[0], cluster.series[k], cluster.dt > 0.0 ? cluster.dt : 1.0,
                                         graph.variant(), tol);
        const auto labels = label_sequence(states, graph);
        auto& row = out[k];
        row[0] = labels[0];
        for (std::size_t t = 1; t + 1 < n; ++t) row[t] = labels[t - 1];
        row[n - 1] = graph.alpha(states.back());
    }
    return out;
}

std::vector<LabeledPairRow> label_pair(const Trajectory& a, const Trajectory& b, const CndGraph& graph,
                                       const QtcTolerances& tol) {
    std::vector<LabeledPairRow> rows;
    const double dt = a.dt > 0.0 ? a.dt : 1.0;
    std::vector<Vec2> pa, pb;
    std::vector<double> times;
    auto flush = [&] {
        if (pa.size() >= 3) {
            const auto states = qtc_sequence(pa, pb, dt, graph.variant(), tol);
            const auto labels = label_sequence(states, graph);
            for (std::size_t i = 0; i < states.size(); ++i) rows.push_back({times[i + 1], states[i], labels[i]});
        }
        pa.clear();
        pb.clear();
        times.clear();
    };
    std::size_t i = 0, j = 0;
    std::int64_t last_frame = 0;
    while (i < a.samples.size() && j < b.samples.size()) {
        const auto& sa = a.samples[i];
        const auto& sb = b.samples[j];
        if (sa.frame < sb.frame) {
            ++i;
        } else if (sb.frame < sa.frame) {
            ++j;
        } else {
            if (!pa.empty() && sa.frame != last_frame + 1) flush();
            pa.push_back(sa.position);
            pb.push_back(sb.position);
            times.push_back(sa.t);
            last_frame = sa.frame;
            ++i;
            ++j;
        }
    }
    flush();
    return rows;
}

void write_labeled_pair_tsv(std::ostream& out, const std::vector<LabeledPairRow>& rows) {
    out << "t\tstate\talpha\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.t);
        out << buf << '\t' << r.state.str() << '\t';
        std::snprintf(buf, sizeof buf, "%.17g", r.alpha);
        out << buf << '\n';
    }
    if (!out) throw IoError("write_labeled_pair_tsv: write failed");
}

}  // namespace neurosym
