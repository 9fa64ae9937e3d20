#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurosym/geometry.hpp"

namespace neurosym {

using AgentId = std::int64_t;

/// One observation of an agent. `frame` is the integer frame index, `t` its time in seconds.
struct TrajectorySample {
    std::int64_t frame = 0;
    double t = 0.0;
    Vec2 position;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
    AgentId agent_id = 0;
    std::vector<TrajectorySample> samples;  // ascending frame
    double dt = 0.0;                        // seconds per frame

    std::size_t size() const noexcept { return samples.size(); }

    /// True when every consecutive pair of samples is exactly one frame apart.
    bool is_contiguous() const noexcept;

    /// Index of `frame` in `samples`, if observed.
    std::optional<std::size_t> index_of(std::int64_t frame) const noexcept;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct StaticObject {
    std::string label;
    Vec2 position;

    friend bool operator==(const StaticObject&, const StaticObject&) = default;
};

struct Scene {
    std::vector<Trajectory> trajectories;  // ascending agent_id
    std::vector<StaticObject> static_objects;
    double frame_rate = 0.0;  // Hz

    const Trajectory* find(AgentId id) const noexcept;

    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Observation / prediction horizon in steps.
struct ObservationWindow {
    std::size_t obs_len = 8;
    std::size_t pred_len = 12;
    std::size_t stride = 1;

    std::size_t total() const noexcept { return obs_len + pred_len; }

    /// Throws InvalidConfigError unless obs_len >= 3, pred_len >= 1, stride >= 1.
    void validate() const;
};

/// One target-agent window: `observed` holds obs_len positions, `future` pred_len positions.
struct WindowSlice {
    AgentId agent_id = 0;
    std::int64_t start_frame = 0;
    std::vector<Vec2> observed;
    std::vector<Vec2> future;
};

/// Default frame rates of the two supported dataset families.
inline constexpr double kEthUcyFrameRate = 2.5;
inline constexpr double kJrdbFrameRate = 15.0;

/// Reads whitespace-separated `frame_id agent_id x y` rows. Frame ids are divided by
/// `frame_step` (ETH/UCY exports number frames in steps of 10) before timestamps are
/// assigned as frame / frame_rate. Blank lines and lines starting with '#' are skipped.
Scene parse_tsv_scene(std::istream& in, double frame_rate, std::int64_t frame_step = 1);
Scene parse_tsv_scene_file(const std::string& path, double frame_rate, std::int64_t frame_step = 1);

/// Writes the dynamic part of a scene in the same row format, sorted by (frame, agent).
void write_tsv_scene(std::ostream& out, const Scene& scene);

/// Reads `label x y` rows for static context objects.
std::vector<StaticObject> parse_static_objects(std::istream& in);
std::vector<StaticObject> parse_static_objects_file(const std::string& path);

/// Linearly interpolates gaps of at most `max_gap` missing frames. Longer gaps split
/// the track; only the longest contiguous segment (earliest on ties) is kept.
Trajectory fill_gaps(const Trajectory& traj, std::size_t max_gap);

/// Applies fill_gaps to every trajectory of the scene.
Scene fill_gaps(const Scene& scene, std::size_t max_gap);

/// Every stride-aligned window (aligned to each agent's first frame) in which the target
/// agent is observed for obs_len + pred_len consecutive frames.
std::vector<WindowSlice> sliding_windows(const Scene& scene, const ObservationWindow& window);

}  // namespace neurosym
