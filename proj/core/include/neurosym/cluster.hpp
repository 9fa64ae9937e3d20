#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "neurosym/trajectory.hpp"

namespace neurosym {

/// Proxemic social distance among acquaintances, upper bound.
inline constexpr double kDefaultInteractionRadius = 3.7;

/// Time span over which a neighbour must come within the radius to join a cluster.
enum class MembershipScope {
    Window,  // any observed step of the window
    Scene,   // any common frame of the whole scene (neighbour must still appear in the window)
};

struct SeriesSource {
    enum class Kind : std::uint8_t { Agent, StaticObject, Padding };

    Kind kind = Kind::Padding;
    AgentId agent_id = 0;  // Kind::Agent
    std::string label;     // Kind::StaticObject

    friend bool operator==(const SeriesSource&, const SeriesSource&) = default;
};

/// Fixed-size interaction cluster around one agent for one observation window.
///
/// series[0] is the center agent's own history. Valid neighbours follow in ascending
/// minimum distance; the remaining slots carry the pad value with mask == false.
/// `present[k][t]` tells whether series k was actually observed at step t; gaps inside a
/// valid neighbour series hold the nearest observed position.
struct Cluster {
    AgentId center_agent = 0;
    std::int64_t start_frame = 0;
    double radius = kDefaultInteractionRadius;
    double dt = 0.0;
    std::vector<std::vector<Vec2>> series;  // n* x obs_len
    std::vector<bool> mask;                 // n*
    std::vector<std::vector<bool>> present; // n* x obs_len
    std::vector<SeriesSource> sources;      // n*
    std::vector<Vec2> future;               // pred_len ground-truth positions of the center

    std::size_t series_count() const noexcept { return series.size(); }
    std::size_t obs_len() const noexcept { return series.empty() ? 0 : series.front().size(); }
    std::size_t valid_count() const noexcept;
};

struct ClusterConfig {
    double radius = kDefaultInteractionRadius;
    std::size_t n_star = 1;
    double pad_value = 0.0;
    MembershipScope scope = MembershipScope::Window;

    /// Throws InvalidConfigError when radius <= 0 or n_star < 1.
    void validate() const;
};

/// One cluster per window returned by sliding_windows(scene, window), in the same order.
std::vector<Cluster> build_clusters(const Scene& scene, const ObservationWindow& window, const ClusterConfig& config);

/// 1 + the largest number of distinct agents and static objects that enter any agent's
/// radius during one of its windows.
std::size_t max_series_count(const Scene& scene, const ObservationWindow& window, double radius,
                             MembershipScope scope = MembershipScope::Window);

/// Long-format TSV: `cluster center start_frame slot source valid step present x y`.
void write_clusters_tsv(std::ostream& out, const std::vector<Cluster>& clusters);

}  // namespace neurosym
