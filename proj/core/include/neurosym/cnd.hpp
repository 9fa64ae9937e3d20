#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "neurosym/qtc.hpp"

namespace neurosym {

/// All 3^m states of a variant in canonical lexicographic order (-, 0, +).
std::vector<QtcState> enumerate_states(QtcVariant variant);

/// L1 distance between the numeric encodings of two states of the same variant.
int conceptual_distance(const QtcState& a, const QtcState& b);

/// Whether `b` can follow `a` in one continuous transition: the states differ, no symbol
/// jumps between Minus and Plus, and no transition mixes a symbol leaving Zero with
/// another arriving at Zero.
bool is_neighbour(const QtcState& a, const QtcState& b);

/// Conceptual Neighbourhood Diagram of a QTC variant with its stability labels.
///
/// States are indexed by QtcState::index(). The graph is immutable once built and can be
/// shared freely between threads.
class CndGraph {
public:
    struct Edge {
        std::uint32_t target;
        std::uint8_t distance;

        friend bool operator==(const Edge&, const Edge&) = default;
    };

    CndGraph() = default;

    QtcVariant variant() const noexcept { return variant_; }
    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<QtcState>& states() const noexcept { return states_; }

    /// Outgoing edges of state `index`, ascending target.
    const std::vector<Edge>& edges(std::size_t index) const { return adjacency_.at(index); }

    /// 1 / (number of neighbours) of the state.
    double alpha(const QtcState& s) const;
    double alpha(std::size_t index) const { return alpha_.at(index); }
    const std::vector<double>& alpha_table() const noexcept { return alpha_; }

    /// Throws InvalidInputError when `s` is not a state of this graph's variant.
    std::vector<QtcState> neighbours(const QtcState& s) const;

    bool contains(const QtcState& s) const noexcept { return s.variant() == variant_; }

    friend bool operator==(const CndGraph&, const CndGraph&) = default;

private:
    friend CndGraph build_cnd(QtcVariant variant);
    friend class CndGraphAssembler;

    QtcVariant variant_ = QtcVariant::C1;
    std::vector<QtcState> states_;
    std::vector<std::vector<Edge>> adjacency_;
    std::vector<double> alpha_;
};

CndGraph build_cnd(QtcVariant variant);

/// Neighbour set of `s` in `graph`.
std::vector<QtcState> neighbours(const CndGraph& graph, const QtcState& s);

enum class CndFormat { Tsv, Json };

CndFormat parse_cnd_format(std::string_view name);

/// TSV: header `state alpha n_neighbours neighbours`, one row per state, alpha printed
/// with 17 significant digits. JSON: object keyed by state with `alpha` and `neighbours`.
void export_cnd(const CndGraph& graph, CndFormat format, std::ostream& out);
std::string export_cnd(const CndGraph& graph, CndFormat format);

/// Reconstructs a graph; rejects self-edges, asymmetric adjacency, duplicate or missing
/// states, and alpha values that differ from 1/n_neighbours by more than 1e-9.
CndGraph import_cnd(std::istream& in, CndFormat format);
CndGraph import_cnd(std::string_view bytes, CndFormat format);
CndGraph load_cnd_file(const std::string& path);

}  // namespace neurosym
