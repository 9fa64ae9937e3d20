#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "neurosym/cluster.hpp"
#include "neurosym/cnd.hpp"
#include "neurosym/qtc.hpp"

namespace neurosym {

/// Stability labels aligned one-to-one with a sequence of QTC states.
struct AlphaSequence {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    double operator[](std::size_t i) const { return values[i]; }

    friend bool operator==(const AlphaSequence&, const AlphaSequence&) = default;
};

/// Each state's label applies to the interaction one step later; the first entry is
/// labelled by its own state. Throws InvalidInputError for states of another variant.
AlphaSequence label_sequence(const std::vector<QtcState>& states, const CndGraph& graph);

enum class Activation { Identity, Tanh, Relu };

Activation parse_activation(std::string_view name);

/// Dense layer: activation(weights * v + bias).
struct EmbeddingParams {
    Eigen::MatrixXd weights;  // embedding_dim x input_dim
    Eigen::VectorXd bias;     // embedding_dim
    Activation activation = Activation::Identity;

    Eigen::Index input_dim() const noexcept { return weights.cols(); }
    Eigen::Index embedding_dim() const noexcept { return weights.rows(); }

    /// Throws InvalidInputError on inconsistent dimensions or non-finite entries.
    void validate() const;
};

Eigen::VectorXd apply_activation(Activation act, const Eigen::VectorXd& pre);

Eigen::VectorXd embed(const EmbeddingParams& params, const Eigen::VectorXd& v);

/// alpha * embed(params, xb - xa); alpha must lie in (0, 1].
Eigen::VectorXd weight_interaction(double alpha, const EmbeddingParams& params, Vec2 xa, Vec2 xb);

/// Per-series, per-observed-step labels for a cluster: `alphas[k][t]` weights series k at
/// observed step t. The center series and padded series carry 1. For a valid neighbour the
/// QTC states of (center, neighbour) at interior steps are labelled with label_sequence;
/// step 0 takes the first label and the last step takes the label of the last state.
using ClusterAlphas = std::vector<std::vector<double>>;

ClusterAlphas cluster_alphas(const Cluster& cluster, const CndGraph& graph, const QtcTolerances& tol = {});

/// All-ones labels shaped like cluster_alphas(cluster, ...).
ClusterAlphas uniform_alphas(const Cluster& cluster);

/// Rows `t state alpha` for one agent pair.
struct LabeledPairRow {
    double t = 0.0;
    QtcState state;
    double alpha = 1.0;
};

/// Labels every run of >= 3 common consecutive frames of two trajectories.
std::vector<LabeledPairRow> label_pair(const Trajectory& a, const Trajectory& b, const CndGraph& graph,
                                       const QtcTolerances& tol = {});

void write_labeled_pair_tsv(std::ostream& out, const std::vector<LabeledPairRow>& rows);

}  // namespace neurosym
