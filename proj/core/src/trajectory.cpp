#include "neurosym/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "neurosym/error.hpp"

namespace neurosym {

bool Trajectory::is_contiguous() const noexcept {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].frame != samples[i - 1].frame + 1) return false;
    }
    return true;
}

std::optional<std::size_t> Trajectory::index_of(std::int64_t frame) const noexcept {
    auto it = std::lower_bound(samples.begin(), samples.end(), frame,
                               [](const TrajectorySample& s, std::int64_t f) { return s.frame < f; });
    if (it == samples.end() || it->frame != frame) return std::nullopt;
    return static_cast<std::size_t>(it - samples.begin());
}

const Trajectory* Scene::find(AgentId id) const noexcept {
    auto it = std::lower_bound(trajectories.begin(), trajectories.end(), id,
                               [](const Trajectory& t, AgentId v) { return t.agent_id < v; });
    if (it == trajectories.end() || it->agent_id != id) return nullptr;
    return &*it;
}

void ObservationWindow::validate() const {
    if (obs_len < 3) throw InvalidConfigError("obs_len must be >= 3 (QTC needs t-, t, t+)");
    if (pred_len < 1) throw InvalidConfigError("pred_len must be >= 1");
    if (stride < 1) throw InvalidConfigError("stride must be >= 1");
}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_number(std::string_view tok, std::size_t line, const char* field) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(std::string("non-numeric ") + field + " '" + std::string(tok) + "'", line);
    }
    return v;
}

std::int64_t parse_integral(std::string_view tok, std::size_t line, const char* field) {
    const double v = parse_number(tok, line, field);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) {
        throw ParseError(std::string(field) + " '" + std::string(tok) + "' is not an integer", line);
    }
    return static_cast<std::int64_t>(v);
}

bool skippable(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Scene parse_tsv_scene(std::istream& in, double frame_rate, std::int64_t frame_step) {
    if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) throw InvalidConfigError("frame_rate must be > 0");
    if (frame_step < 1) throw InvalidConfigError("frame_step must be >= 1");
    std::map<AgentId, std::map<std::int64_t, Vec2>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto tok = tokenize(line);
        if (tok.size() != 4) {
            throw ParseError("expected 4 fields (frame_id agent_id x y), got " + std::to_string(tok.size()), line_no);
        }
        const std::int64_t raw_frame = parse_integral(tok[0], line_no, "frame_id");
        const AgentId agent = parse_integral(tok[1], line_no, "agent_id");
        const double x = parse_number(tok[2], line_no, "x");
        const double y = parse_number(tok[3], line_no, "y");
        if (raw_frame % frame_step != 0) {
            throw ParseError("frame_id " + std::to_string(raw_frame) + " is not a multiple of the frame step", line_no);
        }
        const std::int64_t frame = raw_frame / frame_step;
        auto [it, inserted] = rows[agent].emplace(frame, Vec2{x, y});
        if (!inserted) {
            throw DuplicateObservationError(
                "duplicate observation of agent " + std::to_string(agent) + " at frame " + std::to_string(raw_frame),
                line_no);
        }
    }
    Scene scene;
    scene.frame_rate = frame_rate;
    const double dt = 1.0 / frame_rate;
    for (const auto& [agent, frames] : rows) {
        Trajectory traj;
        traj.agent_id = agent;
        traj.dt = dt;
        traj.samples.reserve(frames.size());
        for (const auto& [frame, pos] : frames) {
            traj.samples.push_back({frame, static_cast<double>(frame) / frame_rate, pos});
        }
        scene.trajectories.push_back(std::move(traj));
    }
    return scene;
}

Scene parse_tsv_scene_file(const std::string& path, double frame_rate, std::int64_t frame_step) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file '" + path + "'");
    return parse_tsv_scene(in, frame_rate, frame_step);
}

void write_tsv_scene(std::ostream& out, const Scene& scene) {
    std::vector<std::tuple<std::int64_t, AgentId, Vec2>> rows;
    for (const auto& traj : scene.trajectories) {
        for (const auto& s : traj.samples) rows.emplace_back(s.frame, traj.agent_id, s.position);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) <
                                                        std::tie(std::get<0>(b), std::get<1>(b)); });
    for (const auto& [frame, agent, pos] : rows) {
        out << frame << '\t' << agent << '\t' << format_double(pos.x) << '\t' << format_double(pos.y) << '\n';
    }
    if (!out) throw IoError("write_tsv_scene: write failed");
}

std::vector<StaticObject> parse_static_objects(std::istream& in) {
    std::vector<StaticObject> objects;
    std::set<std::string> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto tok = tokenize(line);
        if (tok.size() != 3) throw ParseError("expected 3 fields (label x y)", line_no);
        StaticObject obj{std::string(tok[0]), {parse_number(tok[1], line_no, "x"), parse_number(tok[2], line_no, "y")}};
        if (!labels.insert(obj.label).second) throw ParseError("duplicate static object label '" + obj.label + "'", line_no);
        objects.push_back(std::move(obj));
    }
    return objects;
}

std::vector<StaticObject> parse_static_objects_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open static object file '" + path + "'");
    return parse_static_objects(in);
}

Trajectory fill_gaps(const Trajectory& traj, std::size_t max_gap) {
    if (traj.samples.empty()) return traj;
    std::vector<std::vector<TrajectorySample>> segments(1);
    segments.back().push_back(traj.samples.front());
    const double dt = traj.dt;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& prev = traj.samples[i - 1];
        const auto& cur = traj.samples[i];
        const std::int64_t missing = cur.frame - prev.frame - 1;
        if (missing > static_cast<std::int64_t>(max_gap)) {
            segments.emplace_back();
        } else {
            for (std::int64_t k = 1; k <= missing; ++k) {
                const double w = static_cast<double>(k) / static_cast<double>(missing + 1);
                const std::int64_t f = prev.frame + k;
                const double t = dt > 0.0 ? prev.t + static_cast<double>(k) * dt : prev.t + w * (cur.t - prev.t);
                segments.back().push_back({f, t, prev.position + w * (cur.position - prev.position)});
            }
        }
        segments.back().push_back(cur);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].size() > segments[best].size()) best = i;
    }
    Trajectory out;
    out.agent_id = traj.agent_id;
    out.dt = traj.dt;
    out.samples = std::move(segments[best]);
    return out;
}

Scene fill_gaps(const Scene& scene, std::size_t max_gap) {
    Scene out = scene;
    for (auto& traj : out.trajectories) traj = fill_gaps(traj, max_gap);
    return out;
}

std::vector<WindowSlice> sliding_windows(const Scene& scene, const ObservationWindow& w) {
    w.validate();
    std::vector<WindowSlice> out;
    const std::size_t need = w.total();
    for (const auto& traj : scene.trajectories) {
        if (traj.samples.size() < need) continue;
        const std::int64_t first = traj.samples.front().frame;
        const auto& s = traj.samples;
        // run_end[i]: one past the last index of the contiguous run containing sample i.
        std::vector<std::size_t> run_end(s.size());
        run_end.back() = s.size();
        for (std::size_t i = s.size() - 1; i-- > 0;) {
            run_end[i] = (s[i + 1].frame == s[i].frame + 1) ? run_end[i + 1] : i + 1;
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            if ((s[i].frame - first) % static_cast<std::int64_t>(w.stride) != 0) continue;
            if (run_end[i] - i < need) continue;
            WindowSlice slice;
            slice.agent_id = traj.agent_id;
            slice.start_frame = s[i].frame;
            for (std::size_t k = 0; k < w.obs_len; ++k) slice.observed.push_back(s[i + k].position);
            for (std::size_t k = 0; k < w.pred_len; ++k) slice.future.push_back(s[i + w.obs_len + k].position);
            out.push_back(std::move(slice));
        }
    }
    return out;
}

}  // namespace neurosym
