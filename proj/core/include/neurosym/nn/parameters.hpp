#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace neurosym::nn {

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

struct ParamBlock {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t offset = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(rows * cols); }

    friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Named column-major parameter blocks stored back to back in one flat buffer, so a
/// gradient is simply another buffer of the same length.
class ParameterSet {
public:
    /// Appends a zero-initialized block and returns its index.
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

    std::size_t block_count() const noexcept { return blocks_.size(); }
    const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
    const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

    std::size_t size() const noexcept { return values_.size(); }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    ConstMatrixMap view(std::size_t i) const { return view(i, values_.data()); }
    MatrixMap view(std::size_t i) { return view(i, values_.data()); }

    /// Views block `i` inside any buffer laid out like this set (e.g. a gradient).
    ConstMatrixMap view(std::size_t i, const double* base) const {
        const auto& b = blocks_[i];
        return ConstMatrixMap(base + b.offset, b.rows, b.cols);
    }
    MatrixMap view(std::size_t i, double* base) const {
        const auto& b = blocks_[i];
        return MatrixMap(base + b.offset, b.rows, b.cols);
    }

    /// Uniform(-scale, scale) initialization of one block.
    template <typename Rng>
    void init_uniform(std::size_t i, double scale, Rng& rng);

    void fill(std::size_t i, double value);

    bool all_finite() const noexcept;

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

private:
    std::vector<ParamBlock> blocks_;
    std::vector<double> values_;
};

/// splitmix64-based generator: portable, so initializations are identical across
/// standard libraries for a given seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

template <typename Rng>
void ParameterSet::init_uniform(std::size_t i, double scale, Rng& rng) {
    auto m = view(i);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = (2.0 * rng.uniform() - 1.0) * scale;
    }
}

}  // namespace neurosym::nn
