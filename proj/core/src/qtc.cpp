#include "neurosym/qtc.hpp"

#include <cctype>
#include <cmath>

#include "neurosym/error.hpp"

namespace neurosym {

namespace {

void require_finite(std::initializer_list<Vec2> points, const char* op) {
    for (Vec2 p : points) {
        if (!is_finite(p)) throw InvalidInputError(std::string(op) + ": non-finite coordinate");
    }
}

void require_eps(double eps, const char* op) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw InvalidInputError(std::string(op) + ": tolerance must be finite and >= 0");
    }
}

// Three-way split of `value` around a zero band of half-width eps.
QtcSymbol banded_sign(double value, double eps) {
    if (value < -eps) return QtcSymbol::Minus;
    if (value > eps) return QtcSymbol::Plus;
    return QtcSymbol::Zero;
}

}  // namespace

std::string_view to_string(QtcVariant v) noexcept {
    switch (v) {
        case QtcVariant::B1: return "b1";
        case QtcVariant::C1: return "c1";
        case QtcVariant::C2: return "c2";
    }
    return "?";
}

QtcVariant parse_variant(std::string_view name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "b1") return QtcVariant::B1;
    if (lower == "c1") return QtcVariant::C1;
    if (lower == "c2") return QtcVariant::C2;
    throw InvalidInputError("unknown QTC variant '" + std::string(name) + "' (expected b1, c1 or c2)");
}

QtcVariant variant_for_symbol_count(std::size_t m) {
    switch (m) {
        case 2: return QtcVariant::B1;
        case 4: return QtcVariant::C1;
        case 6: return QtcVariant::C2;
        default: throw InvalidInputError("no QTC variant has " + std::to_string(m) + " symbols");
    }
}

QtcState::QtcState(QtcVariant variant, const std::vector<QtcSymbol>& symbols) : variant_(variant) {
    if (symbols.size() != symbol_count(variant)) {
        throw InvalidInputError("QTC state of variant " + std::string(to_string(variant)) + " needs " +
                                std::to_string(symbol_count(variant)) + " symbols, got " +
                                std::to_string(symbols.size()));
    }
    for (std::size_t i = 0; i < symbols.size(); ++i) symbols_[i] = symbols[i];
}

QtcState QtcState::parse(std::string_view text) {
    std::vector<QtcSymbol> symbols;
    for (char c : text) {
        switch (c) {
            case '-': symbols.push_back(QtcSymbol::Minus); break;
            case '0': symbols.push_back(QtcSymbol::Zero); break;
            case '+': symbols.push_back(QtcSymbol::Plus); break;
            case ' ':
            case '\t': break;
            default:
                throw InvalidInputError("invalid QTC symbol '" + std::string(1, c) + "' in \"" +
                                        std::string(text) + "\"");
        }
    }
    return QtcState(variant_for_symbol_count(symbols.size()), symbols);
}

QtcState QtcState::from_index(QtcVariant variant, std::size_t index) {
    if (index >= state_count(variant)) throw InvalidInputError("QTC state index out of range");
    QtcState s(variant);
    const std::size_t m = symbol_count(variant);
    for (std::size_t i = m; i-- > 0;) {
        s.symbols_[i] = symbol_from_numeric(static_cast<int>(index % 3) - 1);
        index /= 3;
    }
    return s;
}

std::size_t QtcState::index() const noexcept {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < size(); ++i) idx = idx * 3 + static_cast<std::size_t>(numeric(symbols_[i]) + 1);
    return idx;
}

std::string QtcState::str() const {
    std::string out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(to_char(symbols_[i]));
    return out;
}

void QtcTolerances::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"distance", distance}, {"cross", cross}, {"speed", speed}, {"angle", angle}};
    for (const auto& [name, v] : fields) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidConfigError(std::string("tolerance '") + name + "' must be finite and >= 0");
        }
    }
}

QtcSymbol classify_towards(Vec2 pk_prev, Vec2 pk_curr, Vec2 pl_curr, double eps) {
    require_eps(eps, "classify_towards");
    require_finite({pk_prev, pk_curr, pl_curr}, "classify_towards");
    // Positive difference means the distance shrank, i.e. motion towards l.
    const double shrink = distance(pk_prev, pl_curr) - distance(pk_curr, pl_curr);
    return negate(banded_sign(shrink, eps));
}

QtcSymbol classify_side(Vec2 pk_curr, Vec2 pk_next, Vec2 pl_curr, double eps) {
    require_eps(eps, "classify_side");
    require_finite({pk_curr, pk_next, pl_curr}, "classify_side");
    return banded_sign(cross(pk_curr - pk_next, pk_curr - pl_curr), eps);
}

QtcSymbol classify_speed(Vec2 vk, Vec2 vl, double eps) {
    require_eps(eps, "classify_speed");
    require_finite({vk, vl}, "classify_speed");
    return banded_sign(norm(vk) - norm(vl), eps);
}

QtcSymbol classify_angle(Vec2 vk, Vec2 vl, Vec2 pk, Vec2 pl, double eps) {
    require_eps(eps, "classify_angle");
    require_finite({vk, vl, pk, pl}, "classify_angle");
    if (pk == pl) throw DegenerateGeometryError("classify_angle: coincident positions");
    const Vec2 zero{};
    if (vk == zero || vl == zero) return QtcSymbol::Zero;
    const double theta_k = unsigned_angle(vk, pl - pk);
    const double theta_l = unsigned_angle(vl, pk - pl);
    return banded_sign(theta_k - theta_l, eps);
}

QtcState qtc_state(const PairSample& s, QtcVariant variant, const QtcTolerances& tol) {
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw InvalidInputError("qtc_state: dt must be > 0");
    QtcState state(variant);
    state.set(0, classify_towards(s.pk_prev, s.pk_curr, s.pl_curr, tol.distance));
    state.set(1, classify_towards(s.pl_prev, s.pl_curr, s.pk_curr, tol.distance));
    if (variant == QtcVariant::B1) return state;
    state.set(2, classify_side(s.pk_curr, s.pk_next, s.pl_curr, tol.cross));
    state.set(3, classify_side(s.pl_curr, s.pl_next, s.pk_curr, tol.cross));
    if (variant == QtcVariant::C1) return state;
    const Vec2 vk = s.velocity_k();
    const Vec2 vl = s.velocity_l();
    state.set(4, classify_speed(vk, vl, tol.speed));
    state.set(5, classify_angle(vk, vl, s.pk_curr, s.pl_curr, tol.angle));
    return state;
}

std::vector<QtcState> qtc_sequence(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double dt,
                                   QtcVariant variant, const QtcTolerances& tol) {
    if (a.size() != b.size()) throw AlignmentError("qtc_sequence: series lengths differ");
    if (a.size() < 3) throw InsufficientDataError("qtc_sequence: need at least 3 samples");
    std::vector<QtcState> out;
    out.reserve(a.size() - 2);
    for (std::size_t t = 1; t + 1 < a.size(); ++t) {
        const PairSample s{a[t - 1], a[t], a[t + 1], b[t - 1], b[t], b[t + 1], dt};
        out.push_back(qtc_state(s, variant, tol));
    }
    return out;
}

std::vector<QtcState> qtc_sequence(const Trajectory& a, const Trajectory& b, QtcVariant variant,
                                   const QtcTolerances& tol) {
    if (a.size() != b.size()) throw AlignmentError("qtc_sequence: trajectories have different lengths");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.samples[i].t != b.samples[i].t) {
            throw AlignmentError("qtc_sequence: timestamp mismatch at sample " + std::to_string(i));
        }
    }
    if (a.size() < 3) throw InsufficientDataError("qtc_sequence: need at least 3 samples");
    std::vector<Vec2> pa, pb;
    pa.reserve(a.size());
    pb.reserve(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa.push_back(a.samples[i].position);
        pb.push_back(b.samples[i].position);
    }
    const double dt = a.dt > 0.0 ? a.dt : a.samples[1].t - a.samples[0].t;
    return qtc_sequence(pa, pb, dt, variant, tol);
}

}  // namespace neurosym
