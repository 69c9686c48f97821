#include "emsim/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "emsim/io.hpp"

namespace emsim {

std::optional<int> first_visualization(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan,
                                       const DetectorProfile& profile) {
    const OccupancyGrid& g = plan.grid();
    if (visibility(profile, g, trace.spawn, episode.truth.source) == VerdictReason::InView) return -1;
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        if (visibility(profile, g, trace.steps[i].pose, episode.truth.source) == VerdictReason::InView)
            return static_cast<int>(i);
    return std::nullopt;
}

bool ag_success(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan, const DetectorProfile& profile) {
    return first_visualization(trace, episode, plan, profile).has_value();
}

double spl(bool success, double path_length, double optimal_length) {
    if (!(optimal_length > 0.0)) throw MetricError("optimal path length must be > 0");
    if (!success) return 0.0;
    return optimal_length / std::max(path_length, optimal_length);
}

double optimal_path_length(const EpisodeSpec& episode, const Floorplan& plan, const DetectorProfile& profile) {
    const OccupancyGrid& g = plan.grid();
    const Point src = episode.truth.source;
    const Point start = episode.spawn.position();
    if (!g.contains(start) || g.occupied(g.cell_of(start))) throw MetricError("spawn is not a free cell");
    DistanceField field(g, g.cell_of(start));
    const double res = g.resolution();
    const int reach = static_cast<int>(std::ceil(profile.range / res)) + 1;
    const Cell sc = g.cell_of(src);
    double best = std::numeric_limits<double>::infinity();
    for (int r = sc.row - reach; r <= sc.row + reach; ++r)
        for (int c = sc.col - reach; c <= sc.col + reach; ++c) {
            const Cell cell{c, r};
            if (g.occupied(cell)) continue;
            const Point p = g.center(cell);
            if (distance(p, src) > profile.range) continue;
            const double d = field.meters(cell);
            if (d >= best) continue;
            if (line_of_sight(g, p, src)) best = d;
        }
    if (!std::isfinite(best)) throw MetricError("no reachable pose sees the source");
    return best;
}

std::string to_string(PolicyKind p) { return p == PolicyKind::Ours ? "ours" : "df"; }

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "ours") return PolicyKind::Ours;
    if (s == "df") return PolicyKind::DirectionFollowing;
    throw ConfigError("unknown policy: " + s + " (expected ours or df)");
}

bool EpisodeResult::detection_failure() const {
    if (polarity == Polarity::Positive) return !outcome || *outcome != cls;
    return outcome.has_value();
}

EpisodeResult evaluate_episode(const EpisodeSpec& episode, const Trace& trace, const Floorplan& plan,
                               const DetectorProfile& profile) {
    EpisodeResult r;
    r.episode_id = episode.id;
    r.cls = episode.cls;
    r.polarity = episode.polarity;
    r.policy = trace.policy;
    r.outcome = trace.outcome;
    r.steps = trace.steps_used;
    r.collisions = trace.collisions;
    r.termination = trace.termination;
    r.opl = optimal_path_length(episode, plan, profile);
    const auto first = first_visualization(trace, episode, plan, profile);
    r.ag_success = first.has_value();
    if (first) {
        int forwards = 0;
        for (int i = 0; i <= *first; ++i) {
            const StepRecord& s = trace.steps[static_cast<std::size_t>(i)];
            if (s.action.type == ActionType::Forward && !s.collision) ++forwards;
        }
        r.pl = kForwardStep * forwards;
    } else {
        r.pl = trace.path_length;
    }
    r.spl = spl(r.ag_success, r.pl, r.opl);
    return r;
}

namespace {

std::string failure_cause(const EpisodeResult& r) {
    if (r.polarity == Polarity::Negative) return "false-alarm";
    if (r.termination == Termination::CollisionAbort) return "collision-abort";
    if (r.ag_success && r.termination != Termination::BudgetExhausted) return "detector-miss";
    if (r.termination == Termination::BudgetExhausted) return "budget-exhausted";
    return "search-exhausted";
}

}  // namespace

Metrics aggregate(const std::vector<EpisodeResult>& results) {
    Metrics m;
    struct Acc {
        int n = 0, success = 0, fail = 0;
        double spl = 0.0;
    };
    std::map<std::string, Acc> by_class;
    int success = 0, pos_fail = 0, neg_fail = 0;
    double spl_sum = 0.0;
    for (const char* k : {"budget-exhausted", "collision-abort", "detector-miss", "search-exhausted"})
        m.failures[k] = 0;
    for (const EpisodeResult& r : results) {
        if (!r.ok()) {
            ++m.n_errors;
            continue;
        }
        ++m.n_episodes;
        success += r.ag_success ? 1 : 0;
        spl_sum += r.spl;
        const bool fail = r.detection_failure();
        if (r.polarity == Polarity::Positive) {
            ++m.n_positive;
            pos_fail += fail ? 1 : 0;
        } else {
            ++m.n_negative;
            neg_fail += fail ? 1 : 0;
        }
        if (fail) ++m.failures[failure_cause(r)];
        Acc& a = by_class[to_string(r.cls) + "/" + to_string(r.polarity)];
        ++a.n;
        a.success += r.ag_success ? 1 : 0;
        a.fail += fail ? 1 : 0;
        a.spl += r.spl;
    }
    if (m.n_episodes == 0) throw MetricError("no episodes to aggregate");
    m.ag_sr = static_cast<double>(success) / m.n_episodes;
    m.ag_spl = spl_sum / m.n_episodes;
    m.edfnr = m.n_positive ? static_cast<double>(pos_fail) / m.n_positive : 0.0;
    m.edfpr = m.n_negative ? static_cast<double>(neg_fail) / m.n_negative : 0.0;
    for (const auto& [k, a] : by_class)
        m.breakdown[k] = {a.n, static_cast<double>(a.success) / a.n, a.spl / a.n, static_cast<double>(a.fail) / a.n};
    return m;
}

Metrics aggregate(const std::vector<std::pair<EpisodeSpec, Trace>>& runs, const DetectorProfile& profile) {
    std::vector<EpisodeResult> results;
    results.reserve(runs.size());
    for (const auto& [ep, trace] : runs) {
        auto ctx = SceneCache::global().get(ep.scene_seed, ep.floorplan_params);
        results.push_back(evaluate_episode(ep, trace, ctx->plan(), profile));
    }
    return aggregate(results);
}

Trace run_episode(const EpisodeSpec& episode, const BatchOptions& options) {
    auto ctx =
        SceneCache::global().get(episode.scene_seed, episode.floorplan_params, options.agent.nav_inflation_cells);
    if (options.policy == PolicyKind::Ours) {
        SceneGraph graph = episode_graph(episode, *ctx, options.traits);
        return ours_policy(episode, *ctx, graph, options.agent);
    }
    return df_policy(episode, *ctx, options.agent);
}

namespace {

struct Slot {
    EpisodeResult result;
    Trace trace;
};

// Runs `work(i)` for i in [0, n) over up to `jobs` threads.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& work) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, jobs < 1 ? 1 : jobs));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
    };
    if (workers == 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

Slot run_one(const EpisodeSpec& ep, const BatchOptions& options) {
    Slot s;
    try {
        s.trace = run_episode(ep, options);
        auto ctx = SceneCache::global().get(ep.scene_seed, ep.floorplan_params, options.agent.nav_inflation_cells);
        s.result = evaluate_episode(ep, s.trace, ctx->plan(), options.agent.detector);
    } catch (const std::exception& e) {
        s.result.episode_id = ep.id;
        s.result.cls = ep.cls;
        s.result.polarity = ep.polarity;
        s.result.policy = to_string(options.policy);
        s.result.error = e.what();
    }
    return s;
}

BatchResult collect(std::vector<Slot> slots, const BatchOptions& options) {
    std::stable_sort(slots.begin(), slots.end(),
                     [](const Slot& a, const Slot& b) { return a.result.episode_id < b.result.episode_id; });
    BatchResult out;
    for (Slot& s : slots) {
        out.records.push_back(std::move(s.result));
        if (options.keep_traces) out.traces.push_back(std::move(s.trace));
    }
    bool any_ok = std::any_of(out.records.begin(), out.records.end(), [](const EpisodeResult& r) { return r.ok(); });
    if (any_ok) {
        out.metrics = aggregate(out.records);
    } else {
        out.metrics.n_errors = static_cast<int>(out.records.size());
    }
    return out;
}

}  // namespace

BatchResult run_batch(const std::vector<EpisodeSpec>& episodes, const BatchOptions& options) {
    std::vector<Slot> slots(episodes.size());
    parallel_for(episodes.size(), options.jobs, [&](std::size_t i) { slots[i] = run_one(episodes[i], options); });
    return collect(std::move(slots), options);
}

BatchResult run_batch(const std::filesystem::path& manifest_path, const BatchOptions& options) {
    const Manifest manifest = read_manifest(manifest_path);
    std::vector<Slot> slots(manifest.episodes.size());
    parallel_for(manifest.episodes.size(), options.jobs, [&](std::size_t i) {
        const std::filesystem::path file = manifest.base_dir / manifest.episodes[i];
        EpisodeSpec ep;
        try {
            const Json j = read_json_file(file);
            ep = episode_from_json(j);
            if (j.contains("floorplan")) {
                auto ctx = SceneCache::global().get(ep.scene_seed, ep.floorplan_params,
                                                    options.agent.nav_inflation_cells);
                if (!(floorplan_from_json(j.at("floorplan")) == ctx->plan()))
                    throw ConfigError("embedded floorplan differs from the regenerated scene");
            }
        } catch (const std::exception& e) {
            slots[i].result.episode_id = manifest.episodes[i];
            slots[i].result.policy = to_string(options.policy);
            slots[i].result.error = e.what();
            return;
        }
        slots[i] = run_one(ep, options);
    });
    return collect(std::move(slots), options);
}

AblationVariant parse_ablation_variant(const std::string& s) {
    AblationVariant v;
    if (s == "full") return v;
    if (s == "no-direction") return {AblationVariant::Kind::NoDirection, 0.0};
    if (s == "no-label") return {AblationVariant::Kind::NoLabel, 0.0};
    if (s == "periodic-falls") return {AblationVariant::Kind::PeriodicFalls, 0.0};
    const std::string prefix = "heatmap-noise";
    if (s.rfind(prefix, 0) == 0) {
        std::string arg = s.substr(prefix.size());
        if (!arg.empty() && (arg.front() == ':' || arg.front() == '=')) {
            arg = arg.substr(1);
        } else if (arg.size() >= 2 && arg.front() == '(' && arg.back() == ')') {
            arg = arg.substr(1, arg.size() - 2);
        } else {
            throw ConfigError("heatmap-noise needs a sigma, e.g. heatmap-noise:0.15");
        }
        try {
            std::size_t used = 0;
            v.sigma = std::stod(arg, &used);
            if (used != arg.size()) throw ConfigError("bad sigma");
        } catch (const std::logic_error&) {
            throw ConfigError("cannot parse sigma in " + s);
        }
        if (!(v.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
        v.kind = AblationVariant::Kind::HeatmapNoise;
        return v;
    }
    throw ConfigError("unknown ablation variant: " + s);
}

std::string to_string(const AblationVariant& v) {
    switch (v.kind) {
        case AblationVariant::Kind::Full: return "full";
        case AblationVariant::Kind::NoDirection: return "no-direction";
        case AblationVariant::Kind::NoLabel: return "no-label";
        case AblationVariant::Kind::PeriodicFalls: return "periodic-falls";
        case AblationVariant::Kind::HeatmapNoise: {
            std::ostringstream os;
            os << "heatmap-noise:" << v.sigma;
            return os.str();
        }
    }
    return "?";
}

EpisodeSpec apply_variant(const EpisodeSpec& episode, const AblationVariant& variant, int emission_interval) {
    EpisodeSpec ep = episode;
    if (variant.kind == AblationVariant::Kind::HeatmapNoise && variant.sigma > 0.0) {
        std::mt19937_64 rng(mix_seed(episode.seed, 0x4ea7a1));
        Heatmap h = add_heatmap_noise(episode.heatmap.values, variant.sigma, rng);
        h.sigma_applied = episode.heatmap.sigma_applied + variant.sigma;
        ep.heatmap = std::move(h);
    }
    if (variant.kind == AblationVariant::Kind::PeriodicFalls && ep.cls == EmergencyKind::Fall) {
        ep.audio = make_audio_event(ep.audio.source, ep.audio.true_class, Periodicity::Periodic, ep.step_budget,
                                    emission_interval);
    }
    return ep;
}

BatchResult run_ablation(const std::vector<EpisodeSpec>& episodes, const AblationVariant& variant,
                         BatchOptions options) {
    if (variant.kind == AblationVariant::Kind::NoDirection) options.agent.inference.use_direction = false;
    if (variant.kind == AblationVariant::Kind::NoLabel) options.agent.inference.use_label = false;
    std::vector<EpisodeSpec> eps;
    eps.reserve(episodes.size());
    for (const EpisodeSpec& e : episodes) eps.push_back(apply_variant(e, variant));
    return run_batch(eps, options);
}

std::string results_csv(const std::vector<EpisodeResult>& records) {
    std::string out = "episode_id,class,polarity,policy,ag_success,pl,opl,spl,outcome,steps,collisions\n";
    char buf[512];
    for (const EpisodeResult& r : records) {
        if (!r.ok()) continue;
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%d,%.4f,%.4f,%.6f,%s,%d,%d\n", r.episode_id.c_str(),
                      to_string(r.cls).c_str(), to_string(r.polarity).c_str(), r.policy.c_str(), r.ag_success ? 1 : 0,
                      r.pl, r.opl, r.spl, r.outcome ? to_string(*r.outcome).c_str() : "none", r.steps, r.collisions);
        out += buf;
    }
    return out;
}

std::string metrics_summary(const Metrics& m) {
    Json j = {{"ag_sr", m.ag_sr},           {"ag_spl", m.ag_spl},         {"edfnr", m.edfnr},
              {"edfpr", m.edfpr},           {"n_episodes", m.n_episodes}, {"n_positive", m.n_positive},
              {"n_negative", m.n_negative}, {"n_errors", m.n_errors},     {"failures", m.failures}};
    Json b = Json::object();
    for (const auto& [k, c] : m.breakdown)
        b[k] = {{"n", c.n}, {"ag_sr", c.ag_sr}, {"ag_spl", c.ag_spl}, {"failure_rate", c.failure_rate}};
    j["breakdown"] = b;
    return j.dump(2) + "\n";
}

namespace {

struct SvgFrame {
    double scale = 40.0;  // px per meter
    double height_m = 0.0;
    double x(double v) const { return v * scale; }
    double y(double v) const { return (height_m - v) * scale; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

std::string render_trace_svg(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan) {
    const OccupancyGrid& g = plan.grid();
    const double res = g.resolution();
    SvgFrame f{40.0, g.height() * res};
    const double cell = res * f.scale;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(g.width() * cell) << "\" height=\""
       << fmt(g.height() * cell) << "\" viewBox=\"0 0 " << fmt(g.width() * cell) << " " << fmt(g.height() * cell)
       << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    double max_heat = 0.0;
    const bool heat_ok = episode.heatmap.values.size() == plan.room_count();
    if (heat_ok)
        for (double v : episode.heatmap.values.values()) max_heat = std::max(max_heat, v);

    // Row runs of equal content keep the file small.
    for (int r = 0; r < g.height(); ++r) {
        int c = 0;
        while (c < g.width()) {
            const RoomId id = plan.rooms().at({c, r});
            int e = c;
            while (e < g.width() && plan.rooms().at({e, r}) == id) ++e;
            const std::string geom = "x=\"" + fmt(c * cell) + "\" y=\"" + fmt(f.y((r + 1) * res)) + "\" width=\"" +
                                     fmt((e - c) * cell) + "\" height=\"" + fmt(cell) + "\"";
            if (!id.valid()) {
                os << "<rect " << geom << " fill=\"#333333\"/>\n";
            } else {
                const double heat = heat_ok && max_heat > 0.0 ? episode.heatmap.values[id] / max_heat : 0.0;
                char op[16];
                std::snprintf(op, sizeof op, "%.3f", 0.08 + 0.6 * heat);
                os << "<rect " << geom << " fill=\"#e8743b\" fill-opacity=\"" << op << "\"/>\n";
            }
            c = e;
        }
    }
    for (const RoomInfo& info : plan.rooms().rooms()) {
        const Point p = plan.centroid(info.id);
        os << "<text x=\"" << fmt(f.x(p.x)) << "\" y=\"" << fmt(f.y(p.y)) << "\" font-size=\"12\" "
           << "text-anchor=\"middle\" fill=\"#555555\">" << to_string(info.label) << "</text>\n";
    }

    if (!trace.steps.empty()) {
        os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" << fmt(f.x(trace.spawn.x))
           << "," << fmt(f.y(trace.spawn.y));
        Pose last = trace.spawn;
        for (const StepRecord& s : trace.steps) {
            if (s.pose.x == last.x && s.pose.y == last.y) continue;
            os << " " << fmt(f.x(s.pose.x)) << "," << fmt(f.y(s.pose.y));
            last = s.pose;
        }
        os << "\"/>\n";
    }
    const char* src_color = episode.truth.emergency ? "#d62728" : "#ff9f1c";
    os << "<circle cx=\"" << fmt(f.x(episode.truth.source.x)) << "\" cy=\"" << fmt(f.y(episode.truth.source.y))
       << "\" r=\"7\" fill=\"" << src_color << "\"/>\n";
    os << "<circle cx=\"" << fmt(f.x(trace.spawn.x)) << "\" cy=\"" << fmt(f.y(trace.spawn.y))
       << "\" r=\"6\" fill=\"#2ca02c\"/>\n";
    for (const StepRecord& s : trace.steps) {
        if (s.action.type != ActionType::Declare) continue;
        const double x = f.x(s.pose.x), y = f.y(s.pose.y);
        os << "<path d=\"M" << fmt(x - 6) << " " << fmt(y - 6) << " L" << fmt(x + 6) << " " << fmt(y + 6) << " M"
           << fmt(x - 6) << " " << fmt(y + 6) << " L" << fmt(x + 6) << " " << fmt(y - 6)
           << "\" stroke=\"#9467bd\" stroke-width=\"3\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void render_trace(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan,
                  const std::filesystem::path& out) {
    write_text_file(out, render_trace_svg(trace, episode, plan));
}

}  // namespace emsim
