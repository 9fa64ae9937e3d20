#include "neurosym/cnd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "neurosym/error.hpp"

namespace neurosym {

namespace {

void require_same_variant(const QtcState& a, const QtcState& b, const char* op) {
    if (a.variant() != b.variant()) throw InvalidInputError(std::string(op) + ": QTC variant mismatch");
}

std::string format_alpha(double alpha) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", alpha);
    return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::vector<QtcState> enumerate_states(QtcVariant variant) {
    const std::size_t n = state_count(variant);
    std::vector<QtcState> states;
    states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) states.push_back(QtcState::from_index(variant, i));
    return states;
}

int conceptual_distance(const QtcState& a, const QtcState& b) {
    require_same_variant(a, b, "conceptual_distance");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(numeric(a[i]) - numeric(b[i]));
    return d;
}

bool is_neighbour(const QtcState& a, const QtcState& b) {
    require_same_variant(a, b, "is_neighbour");
    bool changed = false;
    bool leaves_zero = false;
    bool reaches_zero = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const QtcSymbol from = a[i];
        const QtcSymbol to = b[i];
        if (from == to) continue;
        changed = true;
        if (from != QtcSymbol::Zero && to != QtcSymbol::Zero) return false;  // sign flip skips 0
        if (from == QtcSymbol::Zero) {
            leaves_zero = true;
        } else {
            reaches_zero = true;
        }
    }
    return changed && !(leaves_zero && reaches_zero);
}

// Fills a CndGraph from an explicit adjacency list, deriving distances and alphas.
class CndGraphAssembler {
public:
    static CndGraph assemble(QtcVariant variant, std::vector<std::vector<std::uint32_t>> targets) {
        CndGraph g;
        g.variant_ = variant;
        g.states_ = enumerate_states(variant);
        g.adjacency_.resize(g.states_.size());
        g.alpha_.resize(g.states_.size());
        for (std::size_t s = 0; s < g.states_.size(); ++s) {
            auto& row = targets[s];
            std::sort(row.begin(), row.end());
            g.adjacency_[s].reserve(row.size());
            for (std::uint32_t t : row) {
                const int d = conceptual_distance(g.states_[s], g.states_[t]);
                g.adjacency_[s].push_back({t, static_cast<std::uint8_t>(d)});
            }
            g.alpha_[s] = row.empty() ? 1.0 : 1.0 / static_cast<double>(row.size());
        }
        return g;
    }
};

CndGraph build_cnd(QtcVariant variant) {
    const auto states = enumerate_states(variant);
    std::vector<std::vector<std::uint32_t>> targets(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (std::size_t t = 0; t < states.size(); ++t) {
            if (is_neighbour(states[s], states[t])) targets[s].push_back(static_cast<std::uint32_t>(t));
        }
    }
    return CndGraphAssembler::assemble(variant, std::move(targets));
}

double CndGraph::alpha(const QtcState& s) const {
    if (!contains(s)) throw InvalidInputError("state " + s.str() + " does not belong to this CND");
    return alpha_[s.index()];
}

std::vector<QtcState> CndGraph::neighbours(const QtcState& s) const {
    if (!contains(s)) throw InvalidInputError("state " + s.str() + " does not belong to this CND");
    std::vector<QtcState> out;
    const auto& row = adjacency_[s.index()];
    out.reserve(row.size());
    for (const Edge& e : row) out.push_back(states_[e.target]);
    return out;
}

std::vector<QtcState> neighbours(const CndGraph& graph, const QtcState& s) { return graph.neighbours(s); }

CndFormat parse_cnd_format(std::string_view name) {
    if (name == "tsv") return CndFormat::Tsv;
    if (name == "json") return CndFormat::Json;
    throw InvalidInputError("unknown CND format '" + std::string(name) + "' (expected tsv or json)");
}

void export_cnd(const CndGraph& graph, CndFormat format, std::ostream& out) {
    const auto& states = graph.states();
    if (format == CndFormat::Tsv) {
        out << "state\talpha\tn_neighbours\tneighbours\n";
        for (std::size_t s = 0; s < states.size(); ++s) {
            const auto& row = graph.edges(s);
            out << states[s].str() << '\t' << format_alpha(graph.alpha(s)) << '\t' << row.size() << '\t';
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                out << states[row[i].target].str();
            }
            out << '\n';
        }
    } else {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        for (std::size_t s = 0; s < states.size(); ++s) {
            nlohmann::ordered_json entry;
            entry["alpha"] = graph.alpha(s);
            auto nb = nlohmann::ordered_json::array();
            for (const auto& e : graph.edges(s)) nb.push_back(states[e.target].str());
            entry["neighbours"] = std::move(nb);
            doc[states[s].str()] = std::move(entry);
        }
        out << doc.dump(2) << '\n';
    }
    if (!out) throw IoError("export_cnd: write failed");
}

std::string export_cnd(const CndGraph& graph, CndFormat format) {
    std::ostringstream os;
    export_cnd(graph, format, os);
    return os.str();
}

namespace {

struct RawEntry {
    std::string state;
    double alpha = 0.0;
    std::vector<std::string> neighbours;
    std::size_t line = 0;
};

std::vector<RawEntry> read_tsv_entries(std::istream& in) {
    std::vector<RawEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("state\t", 0) == 0) continue;
        }
        const auto fields = split(line, '\t');
        if (fields.size() != 4) throw ParseError("expected 4 tab-separated fields", line_no);
        RawEntry e;
        e.line = line_no;
        e.state = fields[0];
        const char* first = fields[1].data();
        const char* last = first + fields[1].size();
        auto [ptr, ec] = std::from_chars(first, last, e.alpha);
        if (ec != std::errc{} || ptr != last) throw ParseError("malformed alpha '" + fields[1] + "'", line_no);
        std::size_t count = 0;
        auto [p2, ec2] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), count);
        if (ec2 != std::errc{} || p2 != fields[2].data() + fields[2].size()) {
            throw ParseError("malformed n_neighbours '" + fields[2] + "'", line_no);
        }
        if (!fields[3].empty()) e.neighbours = split(fields[3], ',');
        if (e.neighbours.size() != count) {
            throw ParseError("n_neighbours says " + fields[2] + " but " + std::to_string(e.neighbours.size()) +
                                 " neighbours are listed",
                             line_no);
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<RawEntry> read_json_entries(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("invalid JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw ParseError("CND JSON must be an object keyed by state");
    std::vector<RawEntry> entries;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto& v = it.value();
        if (!v.is_object() || !v.contains("alpha") || !v.contains("neighbours") || !v["alpha"].is_number() ||
            !v["neighbours"].is_array()) {
            throw ParseError("entry '" + it.key() + "' needs numeric 'alpha' and array 'neighbours'");
        }
        RawEntry e;
        e.state = it.key();
        e.alpha = v["alpha"].get<double>();
        for (const auto& n : v["neighbours"]) {
            if (!n.is_string()) throw ParseError("entry '" + it.key() + "': neighbours must be strings");
            e.neighbours.push_back(n.get<std::string>());
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

QtcState parse_state_field(const std::string& text, std::size_t line) {
    try {
        return QtcState::parse(text);
    } catch (const InvalidInputError& ex) {
        throw ParseError(std::string("unknown state string: ") + ex.what(), line);
    }
}

CndGraph assemble_checked(const std::vector<RawEntry>& entries) {
    if (entries.empty()) throw ParseError("CND serialization contains no states");
    const QtcVariant variant = parse_state_field(entries.front().state, entries.front().line).variant();
    const std::size_t n = state_count(variant);
    std::vector<std::vector<std::uint32_t>> targets(n);
    std::vector<bool> seen(n, false);
    for (const RawEntry& e : entries) {
        const QtcState s = parse_state_field(e.state, e.line);
        if (s.variant() != variant) throw ParseError("state " + e.state + " has the wrong symbol count", e.line);
        const std::size_t si = s.index();
        if (seen[si]) throw ParseError("duplicate state " + e.state, e.line);
        seen[si] = true;
        for (const std::string& nt : e.neighbours) {
            const QtcState t = parse_state_field(nt, e.line);
            if (t.variant() != variant) throw ParseError("neighbour " + nt + " has the wrong symbol count", e.line);
            if (t == s) throw ParseError("self-edge on state " + e.state, e.line);
            targets[si].push_back(static_cast<std::uint32_t>(t.index()));
        }
        auto sorted = targets[si];
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ParseError("duplicate neighbour listed for state " + e.state, e.line);
        }
        if (targets[si].empty()) throw ParseError("state " + e.state + " has no neighbours", e.line);
        const double expected = 1.0 / static_cast<double>(targets[si].size());
        if (!std::isfinite(e.alpha) || std::abs(e.alpha - expected) > 1e-9) {
            throw ParseError("alpha of state " + e.state + " is inconsistent with its " +
                                 std::to_string(targets[si].size()) + " neighbours",
                             e.line);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw ParseError("missing state " + QtcState::from_index(variant, i).str());
    }
    for (std::size_t s = 0; s < n; ++s) {
        for (std::uint32_t t : targets[s]) {
            const auto& back = targets[t];
            if (std::find(back.begin(), back.end(), static_cast<std::uint32_t>(s)) == back.end()) {
                throw ParseError("asymmetric edge " + QtcState::from_index(variant, s).str() + " -> " +
                                 QtcState::from_index(variant, t).str());
            }
        }
    }
    return CndGraphAssembler::assemble(variant, std::move(targets));
}

}  // namespace

CndGraph import_cnd(std::istream& in, CndFormat format) {
    const auto entries = format == CndFormat::Tsv ? read_tsv_entries(in) : read_json_entries(in);
    return assemble_checked(entries);
}

CndGraph import_cnd(std::string_view bytes, CndFormat format) {
    std::istringstream is{std::string(bytes)};
    return import_cnd(is, format);
}

CndGraph load_cnd_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CND file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    const auto first = bytes.find_first_not_of(" \t\r\n");
    const CndFormat format = (first != std::string::npos && bytes[first] == '{') ? CndFormat::Json : CndFormat::Tsv;
    return import_cnd(bytes, format);
}

}  // namespace neurosym
