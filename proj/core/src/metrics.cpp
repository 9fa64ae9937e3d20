#include "neurosym/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "neurosym/error.hpp"

namespace neurosym {

namespace {

std::size_t checked_horizon(const std::vector<PredictionResult>& results) {
    if (results.empty()) throw InvalidInputError("metrics: no prediction results");
    const std::size_t horizon = results.front().predicted.size();
    if (horizon == 0) throw InvalidInputError("metrics: empty prediction horizon");
    for (const auto& r : results) {
        if (!r.has_ground_truth()) {
            throw InvalidInputError("metrics: agent " + std::to_string(r.agent_id) + " has no ground truth");
        }
        if (r.predicted.size() != horizon || r.ground_truth.size() != horizon) {
            throw InvalidInputError("metrics: prediction horizons differ");
        }
    }
    return horizon;
}

double stddev(const std::vector<double>& v, StdKind kind) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double denom = kind == StdKind::Population ? static_cast<double>(v.size()) : static_cast<double>(v.size() - 1);
    return std::sqrt(ss / denom);
}

std::string fmt_num(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string fmt_gain(double baseline, double treated) {
    if (!(baseline > 0.0)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f", relative_gain(baseline, treated));
    return buf;
}

}  // namespace

double ade(const std::vector<PredictionResult>& results) {
    const std::size_t horizon = checked_horizon(results);
    double sum = 0.0;
    for (const auto& r : results) {
        for (std::size_t t = 0; t < horizon; ++t) sum += distance(r.predicted[t], r.ground_truth[t]);
    }
    return sum / (static_cast<double>(results.size()) * static_cast<double>(horizon));
}

double fde(const std::vector<PredictionResult>& results) {
    const std::size_t horizon = checked_horizon(results);
    double sum = 0.0;
    for (const auto& r : results) sum += distance(r.predicted[horizon - 1], r.ground_truth[horizon - 1]);
    return sum / static_cast<double>(results.size());
}

DisplacementStds displacement_stds(const std::vector<PredictionResult>& results, StdKind kind) {
    const std::size_t horizon = checked_horizon(results);
    std::vector<double> all, finals;
    all.reserve(results.size() * horizon);
    finals.reserve(results.size());
    for (const auto& r : results) {
        for (std::size_t t = 0; t < horizon; ++t) all.push_back(distance(r.predicted[t], r.ground_truth[t]));
        finals.push_back(all.back());
    }
    return {stddev(all, kind), stddev(finals, kind)};
}

RmseMae rmse_mae(const std::vector<PredictionResult>& results) {
    const std::size_t horizon = checked_horizon(results);
    double sq = 0.0, abs_sum = 0.0;
    for (const auto& r : results) {
        for (std::size_t t = 0; t < horizon; ++t) {
            const Vec2 d = r.predicted[t] - r.ground_truth[t];
            sq += d.x * d.x + d.y * d.y;
            abs_sum += std::abs(d.x) + std::abs(d.y);
        }
    }
    const double n = 2.0 * static_cast<double>(results.size()) * static_cast<double>(horizon);
    return {std::sqrt(sq / n), abs_sum / n};
}

MetricsReport compute_metrics(const std::vector<PredictionResult>& results, StdKind kind) {
    MetricsReport r;
    r.horizon = checked_horizon(results);
    r.n_samples = results.size();
    r.ade = ade(results);
    r.fde = fde(results);
    const auto stds = displacement_stds(results, kind);
    r.de_std = stds.de_std;
    r.fde_std = stds.fde_std;
    const auto rm = rmse_mae(results);
    r.rmse = rm.rmse;
    r.mae = rm.mae;
    return r;
}

double relative_gain(double baseline, double treated) {
    if (!(baseline > 0.0) || !std::isfinite(baseline)) throw InvalidInputError("relative_gain: baseline must be > 0");
    return 100.0 * (baseline - treated) / baseline;
}

const char* metric_name(Metric m) noexcept {
    switch (m) {
        case Metric::Ade: return "ADE";
        case Metric::Fde: return "FDE";
        case Metric::DeStd: return "DE-STD";
        case Metric::FdeStd: return "FDE-STD";
        case Metric::Rmse: return "RMSE";
        case Metric::Mae: return "MAE";
    }
    return "?";
}

double metric_value(const MetricsReport& r, Metric m) noexcept {
    switch (m) {
        case Metric::Ade: return r.ade;
        case Metric::Fde: return r.fde;
        case Metric::DeStd: return r.de_std;
        case Metric::FdeStd: return r.fde_std;
        case Metric::Rmse: return r.rmse;
        case Metric::Mae: return r.mae;
    }
    return 0.0;
}

void write_report_text(std::ostream& out, const std::vector<ComparisonEntry>& entries,
                       const std::vector<Metric>& metrics) {
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header{"Measure", "Model"};
    for (const auto& e : entries) header.push_back(e.name);
    header.push_back("Mean Gain");
    table.push_back(header);

    for (Metric m : entries.empty() ? std::vector<Metric>{} : metrics) {
        std::vector<std::string> base{metric_name(m), "Baseline"};
        std::vector<std::string> treat{"", "NeuroSyM"};
        std::vector<std::string> gain{"", "Relative Gain (%)"};
        std::size_t horizons = 0;
        for (const auto& e : entries) horizons = std::max(horizons, std::min(e.baseline.size(), e.treated.size()));
        std::vector<double> gain_sum(horizons, 0.0);
        std::vector<std::size_t> gain_n(horizons, 0);
        for (const auto& e : entries) {
            std::string b, t, g;
            const std::size_t h = std::min(e.baseline.size(), e.treated.size());
            for (std::size_t i = 0; i < h; ++i) {
                const double bv = metric_value(e.baseline[i], m);
                const double tv = metric_value(e.treated[i], m);
                const std::string sep = i ? " / " : "";
                b += sep + fmt_num(bv);
                t += sep + fmt_num(tv);
                g += sep + fmt_gain(bv, tv);
                if (bv > 0.0) {
                    gain_sum[i] += relative_gain(bv, tv);
                    ++gain_n[i];
                }
            }
            base.push_back(b);
            treat.push_back(t);
            gain.push_back(g);
        }
        std::string mean;
        for (std::size_t i = 0; i < horizons; ++i) {
            char buf[64];
            if (gain_n[i]) {
                std::snprintf(buf, sizeof buf, "%+.2f", gain_sum[i] / static_cast<double>(gain_n[i]));
            } else {
                std::snprintf(buf, sizeof buf, "n/a");
            }
            mean += (i ? "/" : "") + std::string(buf);
        }
        base.push_back("---");
        treat.push_back("---");
        gain.push_back(mean);
        table.push_back(base);
        table.push_back(treat);
        table.push_back(gain);
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    }
}

void write_report_tsv(std::ostream& out, const std::vector<ComparisonEntry>& entries,
                      const std::vector<Metric>& metrics) {
    out << "metric\tdataset\thorizon\tbaseline\ttreated\tgain\n";
    char buf[128];
    for (Metric m : metrics) {
        for (const auto& e : entries) {
            const std::size_t h = std::min(e.baseline.size(), e.treated.size());
            for (std::size_t i = 0; i < h; ++i) {
                const double bv = metric_value(e.baseline[i], m);
                const double tv = metric_value(e.treated[i], m);
                if (bv > 0.0) {
                    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g", bv, tv, relative_gain(bv, tv));
                } else {
                    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\tnan", bv, tv);
                }
                out << metric_name(m) << '\t' << e.name << '\t' << e.baseline[i].horizon << '\t' << buf << '\n';
            }
        }
    }
}

std::vector<PredictionResult> read_predictions_tsv(std::istream& in) {
    std::map<std::pair<AgentId, std::int64_t>, std::map<std::size_t, std::pair<Vec2, Vec2>>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.rfind("agent_id", 0) == 0) continue;
        std::istringstream ls(line);
        std::string tok[7];
        for (auto& t : tok) {
            if (!(ls >> t)) throw ParseError("expected 7 fields", line_no);
        }
        auto num = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw ParseError("malformed number '" + s + "'", line_no);
                return v;
            } catch (const std::logic_error&) {
                throw ParseError("malformed number '" + s + "'", line_no);
            }
        };
        const auto agent = static_cast<AgentId>(num(tok[0]));
        const auto start = static_cast<std::int64_t>(num(tok[1]));
        const auto step = static_cast<std::size_t>(num(tok[2]));
        if (!rows[{agent, start}].emplace(step, std::pair{Vec2{num(tok[3]), num(tok[4])}, Vec2{num(tok[5]), num(tok[6])}}).second) {
            throw ParseError("duplicate step " + std::to_string(step), line_no);
        }
    }
    std::vector<PredictionResult> out;
    for (const auto& [key, steps] : rows) {
        PredictionResult r;
        r.agent_id = key.first;
        r.start_frame = key.second;
        bool gt = true;
        std::size_t expect = 0;
        for (const auto& [step, pair] : steps) {
            if (step != expect++) throw ParseError("non-contiguous steps for agent " + std::to_string(key.first));
            r.predicted.push_back(pair.first);
            r.ground_truth.push_back(pair.second);
            gt = gt && is_finite(pair.second);
        }
        if (!gt) r.ground_truth.clear();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PredictionResult> read_predictions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions file '" + path + "'");
    return read_predictions_tsv(in);
}

void write_predictions_tsv(std::ostream& out, const std::vector<PredictionResult>& results) {
    out << "agent_id\tstart_frame\tstep\tx_pred\ty_pred\tx_true\ty_true\n";
    char buf[160];
    for (const auto& r : results) {
        for (std::size_t t = 0; t < r.predicted.size(); ++t) {
            const Vec2 gt = r.has_ground_truth() ? r.ground_truth[t] : Vec2{NAN, NAN};
            std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\t%.17g", r.predicted[t].x, r.predicted[t].y, gt.x, gt.y);
            out << r.agent_id << '\t' << r.start_frame << '\t' << t << '\t' << buf << '\n';
        }
    }
    if (!out) throw IoError("write_predictions_tsv: write failed");
}

}  // namespace neurosym
