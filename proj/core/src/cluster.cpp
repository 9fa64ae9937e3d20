#include "neurosym/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <tuple>

#include "neurosym/error.hpp"

namespace neurosym {

std::size_t Cluster::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

void ClusterConfig::validate() const {
    if (!(radius > 0.0) || std::isnan(radius)) throw InvalidConfigError("radius must be > 0");
    if (n_star < 1) throw InvalidConfigError("n_star must be >= 1");
    if (!std::isfinite(pad_value)) throw InvalidConfigError("pad_value must be finite");
}

namespace {

struct Candidate {
    SeriesSource source;
    double min_distance = 0.0;
    std::vector<Vec2> series;
    std::vector<bool> present;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    return std::tie(a.min_distance, a.source.kind, a.source.agent_id, a.source.label) <
           std::tie(b.min_distance, b.source.kind, b.source.agent_id, b.source.label);
}

// Smallest distance between two agents over all frames where both are observed.
double min_scene_distance(const Trajectory& a, const Trajectory& b) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t i = 0, j = 0;
    while (i < a.samples.size() && j < b.samples.size()) {
        if (a.samples[i].frame < b.samples[j].frame) {
            ++i;
        } else if (b.samples[j].frame < a.samples[i].frame) {
            ++j;
        } else {
            best = std::min(best, distance(a.samples[i].position, b.samples[j].position));
            ++i;
            ++j;
        }
    }
    return best;
}

double min_scene_distance(const Trajectory& a, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : a.samples) best = std::min(best, distance(s.position, p));
    return best;
}

// Neighbour series over the window frames, holding the nearest observation across gaps.
std::optional<Candidate> agent_candidate(const Trajectory& center, const Trajectory& other, const WindowSlice& win,
                                         const ClusterConfig& cfg) {
    const std::size_t n = win.observed.size();
    Candidate c;
    c.source = {SeriesSource::Kind::Agent, other.agent_id, {}};
    c.series.assign(n, Vec2{});
    c.present.assign(n, false);
    double window_min = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> first_seen;
    for (std::size_t t = 0; t < n; ++t) {
        if (auto idx = other.index_of(win.start_frame + static_cast<std::int64_t>(t))) {
            c.series[t] = other.samples[*idx].position;
            c.present[t] = true;
            if (!first_seen) first_seen = t;
            window_min = std::min(window_min, distance(win.observed[t], c.series[t]));
        }
    }
    if (!first_seen) return std::nullopt;
    double qualifying = window_min;
    if (cfg.scope == MembershipScope::Scene) qualifying = min_scene_distance(center, other);
    if (!(qualifying <= cfg.radius)) return std::nullopt;
    // Fill gaps: backward fill before the first observation, forward hold afterwards.
    Vec2 last = c.series[*first_seen];
    for (std::size_t t = 0; t < n; ++t) {
        if (c.present[t]) {
            last = c.series[t];
        } else {
            c.series[t] = last;
        }
    }
    c.min_distance = window_min;
    return c;
}

std::optional<Candidate> static_candidate(const Trajectory& center, const StaticObject& obj, const WindowSlice& win,
                                          const ClusterConfig& cfg) {
    double window_min = std::numeric_limits<double>::infinity();
    for (Vec2 p : win.observed) window_min = std::min(window_min, distance(p, obj.position));
    const double qualifying = cfg.scope == MembershipScope::Scene ? min_scene_distance(center, obj.position) : window_min;
    if (!(qualifying <= cfg.radius)) return std::nullopt;
    Candidate c;
    c.source = {SeriesSource::Kind::StaticObject, 0, obj.label};
    c.min_distance = window_min;
    c.series.assign(win.observed.size(), obj.position);
    c.present.assign(win.observed.size(), true);
    return c;
}

std::vector<Candidate> candidates_for(const Scene& scene, const Trajectory& center, const WindowSlice& win,
                                      const ClusterConfig& cfg) {
    std::vector<Candidate> out;
    for (const auto& other : scene.trajectories) {
        if (other.agent_id == center.agent_id) continue;
        if (auto c = agent_candidate(center, other, win, cfg)) out.push_back(std::move(*c));
    }
    for (const auto& obj : scene.static_objects) {
        if (auto c = static_candidate(center, obj, win, cfg)) out.push_back(std::move(*c));
    }
    std::sort(out.begin(), out.end(), candidate_less);
    return out;
}

}  // namespace

std::vector<Cluster> build_clusters(const Scene& scene, const ObservationWindow& window, const ClusterConfig& cfg) {
    cfg.validate();
    const auto windows = sliding_windows(scene, window);
    std::vector<Cluster> clusters;
    clusters.reserve(windows.size());
    const double dt = scene.frame_rate > 0.0 ? 1.0 / scene.frame_rate : 0.0;
    for (const auto& win : windows) {
        const Trajectory* center = scene.find(win.agent_id);
        auto cands = candidates_for(scene, *center, win, cfg);
        if (cands.size() > cfg.n_star - 1) cands.resize(cfg.n_star - 1);  // drops the farthest

        Cluster c;
        c.center_agent = win.agent_id;
        c.start_frame = win.start_frame;
        c.radius = cfg.radius;
        c.dt = dt;
        c.future = win.future;
        c.series.push_back(win.observed);
        c.mask.push_back(true);
        c.present.emplace_back(win.observed.size(), true);
        c.sources.push_back({SeriesSource::Kind::Agent, win.agent_id, {}});
        for (auto& cand : cands) {
            c.series.push_back(std::move(cand.series));
            c.mask.push_back(true);
            c.present.push_back(std::move(cand.present));
            c.sources.push_back(std::move(cand.source));
        }
        while (c.series.size() < cfg.n_star) {
            c.series.emplace_back(win.observed.size(), Vec2{cfg.pad_value, cfg.pad_value});
            c.mask.push_back(false);
            c.present.emplace_back(win.observed.size(), false);
            c.sources.push_back({});
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::size_t max_series_count(const Scene& scene, const ObservationWindow& window, double radius, MembershipScope scope) {
    ClusterConfig cfg;
    cfg.radius = radius;
    cfg.scope = scope;
    cfg.validate();
    std::size_t best = 0;
    for (const auto& win : sliding_windows(scene, window)) {
        const Trajectory* center = scene.find(win.agent_id);
        best = std::max(best, candidates_for(scene, *center, win, cfg).size());
    }
    return best + 1;
}

void write_clusters_tsv(std::ostream& out, const std::vector<Cluster>& clusters) {
    out << "cluster\tcenter\tstart_frame\tslot\tsource\tvalid\tstep\tpresent\tx\ty\n";
    char buf[96];
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        const auto& c = clusters[ci];
        for (std::size_t k = 0; k < c.series.size(); ++k) {
            std::string source;
            switch (c.sources[k].kind) {
                case SeriesSource::Kind::Agent: source = "agent:" + std::to_string(c.sources[k].agent_id); break;
                case SeriesSource::Kind::StaticObject: source = "static:" + c.sources[k].label; break;
                case SeriesSource::Kind::Padding: source = "pad"; break;
            }
            for (std::size_t t = 0; t < c.series[k].size(); ++t) {
                std::snprintf(buf, sizeof buf, "%.17g\t%.17g", c.series[k][t].x, c.series[k][t].y);
                out << ci << '\t' << c.center_agent << '\t' << c.start_frame << '\t' << k << '\t' << source << '\t'
                    << (c.mask[k] ? 1 : 0) << '\t' << t << '\t' << (c.present[k][t] ? 1 : 0) << '\t' << buf << '\n';
            }
        }
    }
    if (!out) throw IoError("write_clusters_tsv: write failed");
}

}  // namespace neurosym
