#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

#include "neurosym/nn/parameters.hpp"

namespace neurosym::nn {

/// Parameter block indices of one single-layer LSTM cell inside a ParameterSet.
/// Gate rows are ordered input, forget, candidate, output.
struct LstmBlocks {
    std::size_t wx = 0;  // 4H x I
    std::size_t wh = 0;  // 4H x H
    std::size_t b = 0;   // 4H
    Eigen::Index input_dim = 0;
    Eigen::Index hidden_dim = 0;

    static LstmBlocks add(ParameterSet& params, const std::string& prefix, Eigen::Index input_dim,
                          Eigen::Index hidden_dim);

    /// Uniform(+-1/sqrt(H)) weights, forget-gate bias 1.
    template <typename Rng>
    void init(ParameterSet& params, Rng& rng) const;
};

/// Values kept from one forward step for the backward pass.
struct LstmStep {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd i, f, g, o, c, tanh_c, h;
};

void lstm_forward(const ParameterSet& params, const LstmBlocks& blk, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev, LstmStep& step);

/// Accumulates parameter gradients into `grad` (laid out like `params`) and returns the
/// gradients with respect to x, h_prev and c_prev.
void lstm_backward(const ParameterSet& params, const LstmBlocks& blk, const LstmStep& step, const Eigen::VectorXd& dh,
                   const Eigen::VectorXd& dc, double* grad, Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev,
                   Eigen::VectorXd& dc_prev);

template <typename Rng>
void LstmBlocks::init(ParameterSet& params, Rng& rng) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    params.init_uniform(wx, scale, rng);
    params.init_uniform(wh, scale, rng);
    params.fill(b, 0.0);
    params.view(b).block(hidden_dim, 0, hidden_dim, 1).setConstant(1.0);
}

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); }

}  // namespace neurosym::nn
