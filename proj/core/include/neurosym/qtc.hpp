#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "neurosym/geometry.hpp"
#include "neurosym/trajectory.hpp"

namespace neurosym {

enum class QtcSymbol : std::int8_t { Minus = -1, Zero = 0, Plus = 1 };

constexpr int numeric(QtcSymbol s) noexcept { return static_cast<int>(s); }

constexpr QtcSymbol symbol_from_numeric(int v) noexcept {
    return v < 0 ? QtcSymbol::Minus : (v > 0 ? QtcSymbol::Plus : QtcSymbol::Zero);
}

constexpr char to_char(QtcSymbol s) noexcept {
    switch (s) {
        case QtcSymbol::Minus: return '-';
        case QtcSymbol::Zero: return '0';
        case QtcSymbol::Plus: return '+';
    }
    return '?';
}

constexpr QtcSymbol negate(QtcSymbol s) noexcept { return symbol_from_numeric(-numeric(s)); }

enum class QtcVariant : std::uint8_t { B1, C1, C2 };

constexpr std::size_t symbol_count(QtcVariant v) noexcept {
    switch (v) {
        case QtcVariant::B1: return 2;
        case QtcVariant::C1: return 4;
        case QtcVariant::C2: return 6;
    }
    return 0;
}

/// 3^m, the number of basic states of a variant.
constexpr std::size_t state_count(QtcVariant v) noexcept {
    std::size_t n = 1;
    for (std::size_t i = 0; i < symbol_count(v); ++i) n *= 3;
    return n;
}

std::string_view to_string(QtcVariant v) noexcept;

/// Accepts "b1", "c1", "c2" (case-insensitive).
QtcVariant parse_variant(std::string_view name);

/// Variant whose symbol count equals `m`; throws InvalidInputError otherwise.
QtcVariant variant_for_symbol_count(std::size_t m);

inline constexpr std::size_t kMaxQtcSymbols = 6;

/// One qualitative relation between an agent pair at one instant.
class QtcState {
public:
    QtcState() = default;

    /// All symbols Zero.
    explicit QtcState(QtcVariant variant) : variant_(variant) {}

    /// Throws InvalidInputError if `symbols.size() != symbol_count(variant)`.
    QtcState(QtcVariant variant, const std::vector<QtcSymbol>& symbols);

    /// Parses the canonical form ("-0+-"); whitespace is ignored, the variant is
    /// inferred from the number of symbols.
    static QtcState parse(std::string_view text);

    /// State with the given position in canonical lexicographic order (-, 0, +).
    static QtcState from_index(QtcVariant variant, std::size_t index);

    QtcVariant variant() const noexcept { return variant_; }
    std::size_t size() const noexcept { return symbol_count(variant_); }

    QtcSymbol operator[](std::size_t i) const noexcept { return symbols_[i]; }
    void set(std::size_t i, QtcSymbol s) noexcept { symbols_[i] = s; }

    /// Position in canonical lexicographic order, q1 most significant.
    std::size_t index() const noexcept;

    /// Canonical string form, one character per symbol.
    std::string str() const;

    friend bool operator==(const QtcState&, const QtcState&) = default;

private:
    QtcVariant variant_ = QtcVariant::C1;
    std::array<QtcSymbol, kMaxQtcSymbols> symbols_{};
};

/// Zero-band widths for each comparison.
struct QtcTolerances {
    double distance = 1e-3;  // m
    double cross = 1e-6;     // m^2
    double speed = 1e-3;     // m/s
    double angle = 1e-3;     // rad

    /// Throws InvalidConfigError if any tolerance is negative or non-finite.
    void validate() const;
};

/// Positions of two points at t-, t, t+ and the sample interval.
struct PairSample {
    Vec2 pk_prev, pk_curr, pk_next;
    Vec2 pl_prev, pl_curr, pl_next;
    double dt = 1.0;

    Vec2 velocity_k() const { return (pk_next - pk_curr) / dt; }
    Vec2 velocity_l() const { return (pl_next - pl_curr) / dt; }

    /// The same sample with the roles of k and l exchanged.
    PairSample swapped() const { return {pl_prev, pl_curr, pl_next, pk_prev, pk_curr, pk_next, dt}; }
};

/// q1: Minus when k moved towards l's current position, Plus when it moved away.
QtcSymbol classify_towards(Vec2 pk_prev, Vec2 pk_curr, Vec2 pl_curr, double eps);

/// q3: sign of the cross product of (pk_curr - pk_next) and (pk_curr - pl_curr).
QtcSymbol classify_side(Vec2 pk_curr, Vec2 pk_next, Vec2 pl_curr, double eps);

/// q5: Minus when k is slower than l.
QtcSymbol classify_speed(Vec2 vk, Vec2 vl, double eps);

/// q6: compares the angle between vk and (pl - pk) to the angle between vl and (pk - pl).
/// Returns Zero when either velocity is exactly zero; throws DegenerateGeometryError when
/// pk == pl.
QtcSymbol classify_angle(Vec2 vk, Vec2 vl, Vec2 pk, Vec2 pl, double eps);

QtcState qtc_state(const PairSample& sample, QtcVariant variant, const QtcTolerances& tol = {});

/// One state per interior timestamp of two aligned trajectories (output length n - 2).
/// Throws AlignmentError on timestamp mismatch and InsufficientDataError when n < 3.
std::vector<QtcState> qtc_sequence(const Trajectory& a, const Trajectory& b, QtcVariant variant,
                                   const QtcTolerances& tol = {});

/// Same as above for raw position series sampled every `dt` seconds.
std::vector<QtcState> qtc_sequence(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double dt,
                                   QtcVariant variant, const QtcTolerances& tol = {});

}  // namespace neurosym
