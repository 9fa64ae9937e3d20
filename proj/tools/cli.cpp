#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "neurosym/cluster.hpp"
#include "neurosym/cnd.hpp"
#include "neurosym/error.hpp"
#include "neurosym/metrics.hpp"
#include "neurosym/model_io.hpp"
#include "neurosym/predictors.hpp"
#include "neurosym/qtc.hpp"
#include "neurosym/training.hpp"
#include "neurosym/trajectory.hpp"
#include "neurosym/weighting.hpp"

namespace neurosym::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    return f;
}

void finish_output(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw IoError("failed to write '" + path + "'");
}

// ---------------------------------------------------------------------------
// Shared option groups

struct SceneOptions {
    std::string scene;
    std::string statics;
    double frame_rate = kEthUcyFrameRate;
    std::int64_t frame_step = 1;
    std::size_t max_gap = 2;

    void add(CLI::App* app) {
        app->add_option("--scene", scene, "Trajectory file: whitespace-separated `frame agent x y` rows")
            ->required()
            ->check(CLI::ExistingFile);
        app->add_option("--static", statics, "Static context objects: `label x y` rows")->check(CLI::ExistingFile);
        app->add_option("--frame-rate", frame_rate, "Frames per second (2.5 for ETH/UCY, 15 for JRDB centroids)")
            ->check(CLI::PositiveNumber);
        app->add_option("--frame-step", frame_step, "Raw frame-id increment between consecutive frames")
            ->check(CLI::PositiveNumber);
        app->add_option("--max-gap", max_gap, "Interpolate gaps of at most this many missing frames");
    }

    Scene load() const {
        Scene s = parse_tsv_scene_file(scene, frame_rate, frame_step);
        if (!statics.empty()) s.static_objects = parse_static_objects_file(statics);
        return fill_gaps(s, max_gap);
    }
};

struct ToleranceOptions {
    QtcTolerances tol;

    void add(CLI::App* app) {
        app->add_option("--eps-distance", tol.distance, "Zero band of the towards/away test (m)");
        app->add_option("--eps-cross", tol.cross, "Zero band of the left/right cross product (m^2)");
        app->add_option("--eps-speed", tol.speed, "Zero band of the speed comparison (m/s)");
        app->add_option("--eps-angle", tol.angle, "Zero band of the angle comparison (rad)");
    }
};

struct ClusterOptions {
    double radius = kDefaultInteractionRadius;
    std::string n_star = "auto";
    double pad_value = 0.0;
    std::string scope = "window";

    void add(CLI::App* app, bool with_n_star = true) {
        app->add_option("--radius", radius, "Interaction radius R (m)")->check(CLI::PositiveNumber);
        if (with_n_star) app->add_option("--n-star", n_star, "Series per cluster, or `auto` for the scene maximum");
        app->add_option("--pad-value", pad_value, "Coordinate written into padded (masked) series");
        app->add_option("--scope", scope, "Membership interval: window or scene")
            ->check(CLI::IsMember({"window", "scene"}));
    }

    MembershipScope membership() const { return scope == "scene" ? MembershipScope::Scene : MembershipScope::Window; }

    /// n* as given, or the scene maximum for `auto`.
    std::size_t resolve_n_star(const Scene& scene, const ObservationWindow& w) const {
        if (n_star == "auto") return max_series_count(scene, w, radius, membership());
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(n_star, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != n_star.size() || v < 1) throw InvalidConfigError("--n-star: expected `auto` or an integer >= 1");
        return static_cast<std::size_t>(v);
    }

    ClusterConfig config(std::size_t n) const {
        ClusterConfig c;
        c.radius = radius;
        c.n_star = n;
        c.pad_value = pad_value;
        c.scope = membership();
        c.validate();
        return c;
    }
};

struct CndOptions {
    std::string cnd_path;
    std::string variant = "c1";

    void add(CLI::App* app) {
        app->add_option("--cnd", cnd_path, "CND table from `cnd` (overrides --variant)")->check(CLI::ExistingFile);
        app->add_option("--variant", variant, "QTC variant used when no --cnd is given: b1, c1, c2")
            ->check(CLI::IsMember({"b1", "c1", "c2"}));
    }

    CndGraph graph() const { return cnd_path.empty() ? build_cnd(parse_variant(variant)) : load_cnd_file(cnd_path); }
};

std::vector<TrainingSample> make_samples(const std::vector<Cluster>& clusters, const CndGraph& graph,
                                         const QtcTolerances& tol) {
    std::vector<TrainingSample> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) out.push_back({c, cluster_alphas(c, graph, tol)});
    return out;
}

// ---------------------------------------------------------------------------
// cnd

struct CndCommand {
    std::string variant = "c1";
    std::string out_path;
    std::string format = "tsv";

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("cnd", "Build the conceptual neighbourhood diagram and its stability labels");
        c->add_option("--variant", variant, "QTC variant: b1, c1, c2")->check(CLI::IsMember({"b1", "c1", "c2"}));
        c->add_option("--out", out_path, "Output file (`-` for stdout)")->required();
        c->add_option("--format", format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) const {
        const auto graph = build_cnd(parse_variant(variant));
        const auto fmt = parse_cnd_format(format);
        const std::string bytes = export_cnd(graph, fmt);
        if (out_path == "-") {
            out << bytes;
        } else {
            auto f = open_output(out_path, true);
            f << bytes;
            finish_output(f, out_path);
        }
        const std::string canonical = fmt == CndFormat::Tsv ? bytes : export_cnd(graph, CndFormat::Tsv);
        auto& log = out_path == "-" ? err : out;
        log << "states: " << graph.size() << "\n";
        log << "checksum: fnv1a64:" << hex64(fnv1a64(canonical)) << "\n";
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

// ---------------------------------------------------------------------------
// label

struct LabelCommand {
    SceneOptions scene;
    ToleranceOptions tol;
    std::string cnd_path;
    std::string out_dir;
    double radius = kDefaultInteractionRadius;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("label", "Write per-pair `t state alpha` label files");
        scene.add(c);
        tol.add(c);
        c->add_option("--cnd", cnd_path, "CND table from `cnd`")->required();
        c->add_option("--out", out_dir, "Output directory for pair_<a>_<b>.tsv files")->required();
        c->add_option("--radius", radius, "Pairs are labelled when they come within this distance (m)")
            ->check(CLI::PositiveNumber);
        cmd = c;
    }

    int run(std::ostream& out) const {
        tol.tol.validate();
        const auto graph = load_cnd_file(cnd_path);
        const Scene s = scene.load();
        fs::create_directories(out_dir);
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
            for (std::size_t j = i + 1; j < s.trajectories.size(); ++j) {
                const auto& a = s.trajectories[i];
                const auto& b = s.trajectories[j];
                bool close = false;
                for (const auto& sa : a.samples) {
                    const auto k = b.index_of(sa.frame);
                    if (k && distance(sa.position, b.samples[*k].position) <= radius) {
                        close = true;
                        break;
                    }
                }
                if (!close) continue;
                const auto rows = label_pair(a, b, graph, tol.tol);
                const std::string path = (fs::path(out_dir) / ("pair_" + std::to_string(a.agent_id) + "_" +
                                                              std::to_string(b.agent_id) + ".tsv"))
                                             .string();
                auto f = open_output(path);
                write_labeled_pair_tsv(f, rows);
                finish_output(f, path);
                ++pairs;
            }
        }
        out << "pairs: " << pairs << "\n";
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

// ---------------------------------------------------------------------------
// cluster

struct ClusterCommand {
    SceneOptions scene;
    ClusterOptions cluster;
    ObservationWindow window;
    std::string out_path;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("cluster", "Build padded interaction clusters for every observation window");
        scene.add(c);
        cluster.add(c);
        c->add_option("--obs-len", window.obs_len, "Observed steps T_h");
        c->add_option("--pred-len", window.pred_len, "Predicted steps T_f");
        c->add_option("--stride", window.stride, "Window stride in frames");
        c->add_option("--out", out_path, "Output TSV")->required();
        cmd = c;
    }

    int run(std::ostream& out) const {
        window.validate();
        const Scene s = scene.load();
        const auto n = cluster.resolve_n_star(s, window);
        const auto clusters = build_clusters(s, window, cluster.config(n));
        auto f = open_output(out_path);
        write_clusters_tsv(f, clusters);
        finish_output(f, out_path);
        out << "clusters: " << clusters.size() << "\n";
        out << "n_star: " << n << "\n";
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

// ---------------------------------------------------------------------------
// train

struct TrainCommand {
    SceneOptions scene;
    ClusterOptions cluster;
    ToleranceOptions tol;
    CndOptions cnd;
    std::string model = "pooled";
    std::string weighting = "neurosym";
    std::optional<std::size_t> obs_len;
    std::size_t pred_len = 12;
    std::size_t stride = 1;
    std::optional<std::size_t> epochs, batch_size;
    std::optional<double> lr, decay_rate;
    std::size_t decay_every = 1000;
    std::string optimizer = "adam";
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::size_t embedding_dim = 16, encoder_h_dim = 32, decoder_h_dim = 32, attention_dim = 16;
    std::string activation = "tanh";
    std::string pooling = "every";
    bool pool_every_timestep = false;
    std::string rollout = "hold";
    std::string out_path;
    std::string loss_path;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("train", "Train a predictor on the windows of a scene");
        scene.add(c);
        cluster.add(c);
        tol.add(c);
        cnd.add(c);
        c->add_option("--model", model, "pooled, attention or linear")
            ->check(CLI::IsMember({"pooled", "attention", "linear"}));
        c->add_option("--weighting", weighting, "neurosym (alpha-weighted) or none (unweighted baseline)")
            ->check(CLI::IsMember({"neurosym", "none"}));
        c->add_option("--obs-len", obs_len, "Observed steps T_h [default: 8, attention 5]");
        c->add_option("--pred-len", pred_len, "Predicted steps T_f");
        c->add_option("--stride", stride, "Window stride in frames");
        c->add_option("--epochs", epochs, "Training epochs [default: 200, attention 80]");
        c->add_option("--batch-size", batch_size, "Mini-batch size, 0 for full batch [default: 10, attention 5]");
        c->add_option("--lr", lr, "Learning rate [default: 1e-4, attention 1e-3]");
        c->add_option("--decay-rate", decay_rate, "Learning-rate decay factor [default: 1, attention 0.99]");
        c->add_option("--decay-every", decay_every, "Updates between learning-rate decays");
        c->add_option("--optimizer", optimizer, "adam or sgd")->check(CLI::IsMember({"adam", "sgd"}));
        c->add_option("--seed", seed, "Initialization and shuffling seed");
        c->add_option("--threads", threads, "Worker threads; 1 is bitwise reproducible")->check(CLI::PositiveNumber);
        c->add_option("--embedding-dim", embedding_dim, "Interaction embedding size (pooled)");
        c->add_option("--encoder-h-dim", encoder_h_dim, "Encoder hidden size");
        c->add_option("--decoder-h-dim", decoder_h_dim, "Decoder hidden size");
        c->add_option("--attention-dim", attention_dim, "Input-attention embedding size (attention)");
        c->add_option("--activation", activation, "Interaction embedding activation: identity, tanh, relu")
            ->check(CLI::IsMember({"identity", "tanh", "relu"}));
        c->add_option("--pooling", pooling, "Observed steps that are pooled: every or final")
            ->check(CLI::IsMember({"every", "final"}));
        c->add_flag("--pool-every-timestep", pool_every_timestep, "Recompute pooling at every decoder step");
        c->add_option("--rollout", rollout, "Labels during decoding with pooling: hold or relabel")
            ->check(CLI::IsMember({"hold", "relabel"}));
        c->add_option("--out", out_path, "Output model file")->required();
        c->add_option("--loss-out", loss_path, "Per-epoch loss TSV");
        cmd = c;
    }

    ObservationWindow window() const {
        ObservationWindow w;
        w.obs_len = obs_len.value_or(model == "attention" ? 5 : 8);
        w.pred_len = pred_len;
        w.stride = stride;
        return w;
    }

    TrainConfig train_config() const {
        const bool att = model == "attention";
        TrainConfig t;
        t.learning_rate = lr.value_or(att ? 1e-3 : 1e-4);
        t.epochs = epochs.value_or(att ? 80 : 200);
        t.batch_size = batch_size.value_or(att ? 5 : 10);
        t.decay_rate = decay_rate.value_or(att ? 0.99 : 1.0);
        t.decay_every = decay_every;
        t.optimizer = parse_optimizer(optimizer);
        t.seed = seed;
        t.threads = threads;
        t.validate();
        return t;
    }

    std::unique_ptr<Predictor> build(const ObservationWindow& w, std::size_t n_star, QtcVariant variant) const {
        const bool ns = weighting == "neurosym";
        if (model == "linear") return std::make_unique<LinearPredictor>(w.obs_len, w.pred_len, seed);
        if (model == "attention") {
            AttentionConfig a;
            a.obs_len = w.obs_len;
            a.pred_len = w.pred_len;
            a.series_count = n_star;
            a.attention_dim = attention_dim;
            a.encoder_h_dim = encoder_h_dim;
            a.decoder_h_dim = decoder_h_dim;
            a.neurosym = ns;
            a.seed = seed;
            return std::make_unique<AttentionPredictor>(a);
        }
        PooledConfig p;
        p.obs_len = w.obs_len;
        p.pred_len = w.pred_len;
        p.embedding_dim = embedding_dim;
        p.encoder_h_dim = encoder_h_dim;
        p.decoder_h_dim = decoder_h_dim;
        p.activation = parse_activation(activation);
        p.neurosym = ns;
        p.pooling = pooling == "final" ? PoolingSteps::FinalStep : PoolingSteps::EveryStep;
        p.pool_every_timestep = pool_every_timestep;
        p.rollout = rollout == "relabel" ? AlphaRollout::Relabel : AlphaRollout::HoldLast;
        p.relabel_variant = variant;
        p.seed = seed;
        return std::make_unique<PooledPredictor>(p);
    }

    int run(std::ostream& out) const {
        const auto w = window();
        w.validate();
        tol.tol.validate();
        const auto tc = train_config();
        const Scene s = scene.load();
        const auto graph = cnd.graph();
        const auto n = cluster.resolve_n_star(s, w);
        const auto clusters = build_clusters(s, w, cluster.config(n));
        if (clusters.empty()) throw InsufficientDataError("scene has no complete observation window");
        const auto samples = make_samples(clusters, graph, tol.tol);
        auto m = build(w, n, graph.variant());

        const auto result = train(*m, samples, tc);

        auto f = open_output(out_path, true);
        save_model(*m, f);
        finish_output(f, out_path);
        if (!loss_path.empty()) {
            auto lf = open_output(loss_path);
            lf << "epoch\tloss\n";
            for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
                lf << e << '\t' << fmt_double(result.epoch_losses[e]) << '\n';
            }
            finish_output(lf, loss_path);
        }
        out << "model: " << to_string(m->kind()) << (weighting == "neurosym" ? " (neurosym)" : " (unweighted)")
            << "\n";
        out << "clusters: " << clusters.size() << "\n";
        out << "n_star: " << n << "\n";
        out << "parameters: " << m->parameters().size() << "\n";
        out << "epochs: " << tc.epochs << "\n";
        out << "final_loss: " << fmt_double(result.final_loss) << "\n";
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

// ---------------------------------------------------------------------------
// predict

struct PredictCommand {
    SceneOptions scene;
    ClusterOptions cluster;
    ToleranceOptions tol;
    CndOptions cnd;
    std::string model_path;
    bool constant_velocity = false;
    std::size_t obs_len = 8, pred_len = 12, stride = 1;
    std::size_t threads = 1;
    std::string out_path;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("predict", "Predict the future of every window center");
        scene.add(c);
        cluster.add(c);
        tol.add(c);
        cnd.add(c);
        c->add_option("--model", model_path, "Model file from `train`")->check(CLI::ExistingFile);
        c->add_flag("--constant-velocity", constant_velocity, "Constant-velocity baseline instead of a model");
        c->add_option("--obs-len", obs_len, "Observed steps T_h (ignored with --model)");
        c->add_option("--pred-len", pred_len, "Predicted steps T_f (ignored with --model)");
        c->add_option("--stride", stride, "Window stride in frames");
        c->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        c->add_option("--out", out_path, "Output predictions TSV")->required();
        cmd = c;
    }

    int run(std::ostream& out) const {
        if (constant_velocity == !model_path.empty()) {
            throw InvalidConfigError("predict: give exactly one of --model or --constant-velocity");
        }
        tol.tol.validate();
        std::unique_ptr<Predictor> m;
        ObservationWindow w;
        w.stride = stride;
        std::optional<std::size_t> fixed_n;
        if (!constant_velocity) m = load_model_file(model_path);
        if (m) {
            const auto dims = m->dimension_table();
            w.obs_len = dims[0];
            w.pred_len = dims[1];
            if (m->kind() == ModelKind::Attention) fixed_n = dims[2];
        } else {
            w.obs_len = obs_len;
            w.pred_len = pred_len;
        }
        w.validate();
        const Scene s = scene.load();
        const auto n = fixed_n ? *fixed_n : cluster.resolve_n_star(s, w);
        const auto clusters = build_clusters(s, w, cluster.config(n));
        std::vector<PredictionResult> results(clusters.size());
        if (m) {
            const auto graph = cnd.graph();
            const auto samples = make_samples(clusters, graph, tol.tol);
            for (std::size_t i = 0; i < samples.size(); ++i) results[i] = m->predict(samples[i].cluster, samples[i].alphas);
        } else {
            for (std::size_t i = 0; i < clusters.size(); ++i) {
                results[i] = predict_constant_velocity(clusters[i], w.pred_len);
            }
        }
        auto f = open_output(out_path);
        write_predictions_tsv(f, results);
        finish_output(f, out_path);
        out << "predictions: " << results.size() << "\n";
        if (!results.empty() && results.front().has_ground_truth()) {
            const auto r = compute_metrics(results);
            out << "ade: " << fmt_double(r.ade) << "\n";
            out << "fde: " << fmt_double(r.fde) << "\n";
        }
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

// ---------------------------------------------------------------------------
// evaluate

struct Assertion {
    Metric metric;
    std::string op;
    double threshold;
    std::string text;
};

Assertion parse_assertion(const std::string& text) {
    static const std::vector<std::pair<std::string, Metric>> names{
        {"ade", Metric::Ade},   {"fde", Metric::Fde},   {"de_std", Metric::DeStd},
        {"fde_std", Metric::FdeStd}, {"rmse", Metric::Rmse}, {"mae", Metric::Mae}};
    const auto pos = text.find_first_of("<>");
    if (pos == std::string::npos) throw InvalidConfigError("--assert '" + text + "': expected e.g. ade<=0.5");
    const std::string name = text.substr(0, pos);
    std::string op = text.substr(pos, 1);
    std::size_t vpos = pos + 1;
    if (vpos < text.size() && text[vpos] == '=') {
        op += '=';
        ++vpos;
    }
    const auto it = std::find_if(names.begin(), names.end(), [&](const auto& p) { return p.first == name; });
    if (it == names.end()) throw InvalidConfigError("--assert: unknown metric '" + name + "'");
    std::size_t used = 0;
    double thr = 0.0;
    try {
        thr = std::stod(text.substr(vpos), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || vpos + used != text.size()) throw InvalidConfigError("--assert '" + text + "': bad threshold");
    return {it->second, op, thr, text};
}

bool holds(const Assertion& a, double v) {
    if (a.op == "<") return v < a.threshold;
    if (a.op == "<=") return v <= a.threshold;
    if (a.op == ">") return v > a.threshold;
    return v >= a.threshold;
}

std::vector<PredictionResult> truncate(const std::vector<PredictionResult>& rs, std::size_t h) {
    std::vector<PredictionResult> out = rs;
    for (auto& r : out) {
        if (r.predicted.size() < h || r.ground_truth.size() < h) {
            throw InvalidInputError("horizon " + std::to_string(h) + " exceeds the predicted horizon");
        }
        r.predicted.resize(h);
        r.ground_truth.resize(h);
    }
    return out;
}

struct EvaluateCommand {
    std::string predictions, baseline, neurosym;
    std::string name;
    std::vector<std::size_t> horizons;
    std::string std_kind = "population";
    std::string metrics = "displacement";
    std::string tsv_path;
    std::vector<std::string> asserts;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("evaluate", "Compute displacement metrics and relative gains");
        c->add_option("--predictions", predictions, "Single predictions TSV to score")->check(CLI::ExistingFile);
        c->add_option("--baseline", baseline, "Baseline predictions TSV")->check(CLI::ExistingFile);
        c->add_option("--neurosym", neurosym, "NeuroSyM predictions TSV")->check(CLI::ExistingFile);
        c->add_option("--name", name, "Dataset column name [default: file stem]");
        c->add_option("--horizons", horizons, "Evaluated prefixes of the horizon, e.g. 8,12 [default: full]")
            ->delimiter(',');
        c->add_option("--std", std_kind, "population or sample standard deviation")
            ->check(CLI::IsMember({"population", "sample"}));
        c->add_option("--metrics", metrics, "displacement, regression or all")
            ->check(CLI::IsMember({"displacement", "regression", "all"}));
        c->add_option("--tsv", tsv_path, "Also write the machine-readable table here");
        c->add_option("--assert", asserts, "Threshold on the scored (or NeuroSyM) run at the longest horizon, "
                                           "e.g. ade<=0.5; failing exits 3");
        cmd = c;
    }

    int run(std::ostream& out) const {
        const bool single = !predictions.empty();
        if (single == (!baseline.empty() || !neurosym.empty()) || (!single && (baseline.empty() || neurosym.empty()))) {
            throw InvalidConfigError("evaluate: give --predictions, or both --baseline and --neurosym");
        }
        std::vector<Assertion> checks;
        for (const auto& a : asserts) checks.push_back(parse_assertion(a));
        const StdKind kind = std_kind == "sample" ? StdKind::Sample : StdKind::Population;
        std::vector<Metric> selected;
        if (metrics != "regression") selected.insert(selected.end(), kDisplacementMetrics.begin(), kDisplacementMetrics.end());
        if (metrics != "displacement") selected.insert(selected.end(), kRegressionMetrics.begin(), kRegressionMetrics.end());

        const auto treated_rs = read_predictions_file(single ? predictions : neurosym);
        std::vector<PredictionResult> base_rs;
        if (!single) base_rs = read_predictions_file(baseline);
        if (treated_rs.empty()) throw InvalidInputError("no predictions to evaluate");
        const std::size_t full = treated_rs.front().predicted.size();
        if (!single) {
            if (base_rs.empty()) throw InvalidInputError("no baseline predictions to evaluate");
            if (base_rs.front().predicted.size() != full) {
                throw InvalidInputError("baseline and neurosym predictions have different horizons");
            }
            if (base_rs.size() != treated_rs.size()) {
                throw InvalidInputError("baseline and neurosym files score different numbers of windows");
            }
        }
        std::vector<std::size_t> hs = horizons.empty() ? std::vector<std::size_t>{full} : horizons;
        for (auto h : hs) {
            if (h < 1) throw InvalidConfigError("--horizons entries must be >= 1");
        }

        ComparisonEntry entry;
        entry.name = name.empty() ? fs::path(single ? predictions : neurosym).stem().string() : name;
        for (auto h : hs) {
            entry.treated.push_back(compute_metrics(truncate(treated_rs, h), kind));
            if (!single) entry.baseline.push_back(compute_metrics(truncate(base_rs, h), kind));
        }

        if (single) {
            out << "metric";
            for (auto h : hs) out << '\t' << "h=" << h;
            out << '\n';
            for (Metric m : selected) {
                out << metric_name(m);
                for (const auto& r : entry.treated) out << '\t' << fmt_double(metric_value(r, m));
                out << '\n';
            }
            out << "n_samples\t" << entry.treated.front().n_samples << '\n';
            if (!tsv_path.empty()) {
                auto f = open_output(tsv_path);
                f << "metric\tdataset\thorizon\tvalue\n";
                for (Metric m : selected) {
                    for (std::size_t i = 0; i < hs.size(); ++i) {
                        f << metric_name(m) << '\t' << entry.name << '\t' << hs[i] << '\t'
                          << fmt_double(metric_value(entry.treated[i], m)) << '\n';
                    }
                }
                finish_output(f, tsv_path);
            }
        } else {
            write_report_text(out, {entry}, selected);
            if (!tsv_path.empty()) {
                auto f = open_output(tsv_path);
                write_report_tsv(f, {entry}, selected);
                finish_output(f, tsv_path);
            }
        }

        const std::size_t longest = static_cast<std::size_t>(
            std::max_element(hs.begin(), hs.end()) - hs.begin());
        bool ok = true;
        for (const auto& a : checks) {
            const double v = metric_value(entry.treated[longest], a.metric);
            if (!holds(a, v)) {
                out << "assertion failed: " << a.text << " (value " << fmt_double(v) << ")\n";
                ok = false;
            }
        }
        return ok ? kOk : kAssertFailed;
    }

    CLI::App* cmd = nullptr;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"NeuroSyM toolchain: QTC labeling, CND stability weights, interaction-aware trajectory prediction",
                 "neurosym"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
    app.require_subcommand(1);

    CndCommand cnd;
    LabelCommand label;
    ClusterCommand cluster;
    TrainCommand train_cmd;
    PredictCommand predict;
    EvaluateCommand evaluate;
    cnd.add(app);
    label.add(app);
    cluster.add(app);
    train_cmd.add(app);
    predict.add(app);
    evaluate.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*cnd.cmd) return cnd.run(out, err);
        if (*label.cmd) return label.run(out);
        if (*cluster.cmd) return cluster.run(out);
        if (*train_cmd.cmd) return train_cmd.run(out);
        if (*predict.cmd) return predict.run(out);
        if (*evaluate.cmd) return evaluate.run(out);
    } catch (const InvalidConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace neurosym::cli
