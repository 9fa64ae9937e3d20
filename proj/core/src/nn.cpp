#include <cmath>

#include "neurosym/nn/lstm.hpp"
#include "neurosym/nn/parameters.hpp"

namespace neurosym::nn {

std::size_t ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    ParamBlock b{std::move(name), rows, cols, values_.size()};
    values_.resize(values_.size() + b.size(), 0.0);
    blocks_.push_back(std::move(b));
    return blocks_.size() - 1;
}

void ParameterSet::fill(std::size_t i, double value) { view(i).setConstant(value); }

bool ParameterSet::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

LstmBlocks LstmBlocks::add(ParameterSet& params, const std::string& prefix, Eigen::Index input_dim,
                           Eigen::Index hidden_dim) {
    LstmBlocks blk;
    blk.input_dim = input_dim;
    blk.hidden_dim = hidden_dim;
    blk.wx = params.add(prefix + ".wx", 4 * hidden_dim, input_dim);
    blk.wh = params.add(prefix + ".wh", 4 * hidden_dim, hidden_dim);
    blk.b = params.add(prefix + ".b", 4 * hidden_dim, 1);
    return blk;
}

void lstm_forward(const ParameterSet& params, const LstmBlocks& blk, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev, LstmStep& s) {
    const Eigen::Index H = blk.hidden_dim;
    const Eigen::VectorXd z = params.view(blk.wx) * x + params.view(blk.wh) * h_prev + params.view(blk.b);
    s.x = x;
    s.h_prev = h_prev;
    s.c_prev = c_prev;
    s.i = sigmoid(z.segment(0, H));
    s.f = sigmoid(z.segment(H, H));
    s.g = z.segment(2 * H, H).array().tanh().matrix();
    s.o = sigmoid(z.segment(3 * H, H));
    s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
    s.tanh_c = s.c.array().tanh().matrix();
    s.h = s.o.cwiseProduct(s.tanh_c);
}

void lstm_backward(const ParameterSet& params, const LstmBlocks& blk, const LstmStep& s, const Eigen::VectorXd& dh,
                   const Eigen::VectorXd& dc_in, double* grad, Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev,
                   Eigen::VectorXd& dc_prev) {
    const Eigen::Index H = blk.hidden_dim;
    const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_c);
    const Eigen::VectorXd dc =
        dc_in + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
    const Eigen::VectorXd d_f = dc.cwiseProduct(s.c_prev);
    const Eigen::VectorXd d_i = dc.cwiseProduct(s.g);
    const Eigen::VectorXd d_g = dc.cwiseProduct(s.i);
    dc_prev = dc.cwiseProduct(s.f);

    Eigen::VectorXd dz(4 * H);
    dz.segment(0, H) = d_i.array() * s.i.array() * (1.0 - s.i.array());
    dz.segment(H, H) = d_f.array() * s.f.array() * (1.0 - s.f.array());
    dz.segment(2 * H, H) = d_g.array() * (1.0 - s.g.array().square());
    dz.segment(3 * H, H) = d_o.array() * s.o.array() * (1.0 - s.o.array());

    params.view(blk.wx, grad).noalias() += dz * s.x.transpose();
    params.view(blk.wh, grad).noalias() += dz * s.h_prev.transpose();
    params.view(blk.b, grad) += dz;
    dx = params.view(blk.wx).transpose() * dz;
    dh_prev = params.view(blk.wh).transpose() * dz;
}

}  // namespace neurosym::nn
