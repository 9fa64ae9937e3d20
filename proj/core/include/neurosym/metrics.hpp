#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurosym/geometry.hpp"
#include "neurosym/trajectory.hpp"

namespace neurosym {

/// Predicted positions of one agent over the prediction horizon.
struct PredictionResult {
    AgentId agent_id = 0;
    std::int64_t start_frame = 0;
    std::vector<Vec2> predicted;
    std::vector<Vec2> ground_truth;  // empty when unknown

    bool has_ground_truth() const noexcept { return !ground_truth.empty(); }
};

enum class StdKind { Population, Sample };

struct MetricsReport {
    double ade = 0.0;
    double fde = 0.0;
    double de_std = 0.0;
    double fde_std = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t n_samples = 0;
    std::size_t horizon = 0;
};

/// Mean Euclidean error over every trajectory and step. All metric functions throw
/// InvalidInputError when the input is empty, ground truth is missing, or horizons differ.
double ade(const std::vector<PredictionResult>& results);

/// Mean Euclidean error at the final step.
double fde(const std::vector<PredictionResult>& results);

struct DisplacementStds {
    double de_std = 0.0;
    double fde_std = 0.0;
};

/// Standard deviation of the per-step errors (DE-STD) and of the final-step errors (FDE-STD).
DisplacementStds displacement_stds(const std::vector<PredictionResult>& results,
                                   StdKind kind = StdKind::Population);

struct RmseMae {
    double rmse = 0.0;
    double mae = 0.0;
};

/// RMSE and MAE over every scalar coordinate residual, x and y pooled.
RmseMae rmse_mae(const std::vector<PredictionResult>& results);

MetricsReport compute_metrics(const std::vector<PredictionResult>& results, StdKind kind = StdKind::Population);

/// Percent error drop of `treated` relative to `baseline`; requires baseline > 0.
double relative_gain(double baseline, double treated);

enum class Metric { Ade, Fde, DeStd, FdeStd, Rmse, Mae };

const char* metric_name(Metric m) noexcept;
double metric_value(const MetricsReport& r, Metric m) noexcept;

/// One column of a comparison table: reports per horizon (e.g. 8 and 12 steps) for the
/// baseline and the treated model.
struct ComparisonEntry {
    std::string name;
    std::vector<MetricsReport> baseline;
    std::vector<MetricsReport> treated;
};

inline const std::vector<Metric> kDisplacementMetrics{Metric::Ade, Metric::Fde, Metric::DeStd, Metric::FdeStd};
inline const std::vector<Metric> kRegressionMetrics{Metric::Rmse, Metric::Mae};

/// Aligned text table: per metric a baseline row, a treated row and a relative-gain row,
/// with per-horizon values joined by " / " and a mean-gain column.
void write_report_text(std::ostream& out, const std::vector<ComparisonEntry>& entries,
                       const std::vector<Metric>& metrics = kDisplacementMetrics);

/// Long-format TSV: `metric dataset horizon baseline treated gain`, one row per cell.
void write_report_tsv(std::ostream& out, const std::vector<ComparisonEntry>& entries,
                      const std::vector<Metric>& metrics = kDisplacementMetrics);

/// Reads `agent_id start_frame step x_pred y_pred x_true y_true` rows as written by
/// write_predictions_tsv. Ground-truth columns may be "nan" when unknown.
std::vector<PredictionResult> read_predictions_tsv(std::istream& in);
std::vector<PredictionResult> read_predictions_file(const std::string& path);
void write_predictions_tsv(std::ostream& out, const std::vector<PredictionResult>& results);

}  // namespace neurosym
