#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emsim/agent.hpp"
#include "emsim/episodes.hpp"
#include "emsim/identify.hpp"
#include "emsim/world.hpp"

namespace emsim {

// True iff the source was within detector range and field of view with line of sight at the
// spawn or after any step. Independent of what the policy declared.
bool ag_success(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan,
                const DetectorProfile& profile = {});

// Index of the first step whose pose visualizes the source: -1 for the spawn, nullopt if never.
std::optional<int> first_visualization(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan,
                                       const DetectorProfile& profile = {});

// success ? optimal / max(path, optimal) : 0. Throws MetricError unless optimal > 0.
double spl(bool success, double path_length, double optimal_length);

// Geodesic distance from the spawn to the nearest cell within detector range of the source
// with line of sight (the agent can always turn to face it). Throws MetricError if unreachable.
double optimal_path_length(const EpisodeSpec& episode, const Floorplan& plan, const DetectorProfile& profile = {});

enum class PolicyKind { Ours, DirectionFollowing };

std::string to_string(PolicyKind p);
PolicyKind policy_kind_from_string(const std::string& s);

struct EpisodeResult {
    std::string episode_id;
    EmergencyKind cls = EmergencyKind::Fall;
    Polarity polarity = Polarity::Positive;
    std::string policy;
    bool ag_success = false;
    double pl = 0.0;  // path length up to the first visualization, or the whole trace on failure
    double opl = 0.0;
    double spl = 0.0;
    std::optional<EmergencyKind> outcome;
    int steps = 0;
    int collisions = 0;
    Termination termination = Termination::BudgetExhausted;
    std::string error;  // nonempty for episodes that could not be loaded or run

    bool ok() const { return error.empty(); }
    // Positive: missed or wrong kind. Negative: any declaration.
    bool detection_failure() const;
};

EpisodeResult evaluate_episode(const EpisodeSpec& episode, const Trace& trace, const Floorplan& plan,
                               const DetectorProfile& profile = {});

struct ClassBreakdown {
    int n = 0;
    double ag_sr = 0.0;
    double ag_spl = 0.0;
    double failure_rate = 0.0;  // EDFNR for positives, EDFPR for negatives
};

struct Metrics {
    double ag_sr = 0.0;
    double ag_spl = 0.0;
    double edfnr = 0.0;
    double edfpr = 0.0;
    int n_episodes = 0;
    int n_positive = 0;
    int n_negative = 0;
    int n_errors = 0;
    std::map<std::string, ClassBreakdown> breakdown;  // "fall/positive", ...
    // Detection failures by cause: budget-exhausted, collision-abort, detector-miss, search-exhausted.
    std::map<std::string, int> failures;
};

// Episodes with errors are counted in n_errors only. Throws MetricError when nothing is left.
Metrics aggregate(const std::vector<EpisodeResult>& results);
Metrics aggregate(const std::vector<std::pair<EpisodeSpec, Trace>>& runs, const DetectorProfile& profile = {});

struct BatchOptions {
    PolicyKind policy = PolicyKind::Ours;
    AgentConfig agent;
    int jobs = 1;
    TraitTable traits = default_trait_table();
    bool keep_traces = false;
};

struct BatchResult {
    Metrics metrics;
    std::vector<EpisodeResult> records;  // sorted by episode id
    std::vector<Trace> traces;           // parallel to records when keep_traces
};

// Runs one episode with the requested policy on a cached scene.
Trace run_episode(const EpisodeSpec& episode, const BatchOptions& options);

BatchResult run_batch(const std::vector<EpisodeSpec>& episodes, const BatchOptions& options);
// Loads every manifest entry; unreadable or invalid entries become error records.
// Throws IoError if the manifest itself cannot be read.
BatchResult run_batch(const std::filesystem::path& manifest, const BatchOptions& options);

struct AblationVariant {
    enum class Kind { Full, NoDirection, NoLabel, HeatmapNoise, PeriodicFalls };
    Kind kind = Kind::Full;
    double sigma = 0.0;  // HeatmapNoise only
};

// "full", "no-direction", "no-label", "heatmap-noise:<sigma>" (also "heatmap-noise(<sigma>)"),
// "periodic-falls". Throws ConfigError otherwise.
AblationVariant parse_ablation_variant(const std::string& s);
std::string to_string(const AblationVariant& v);

// Episode transformed for a variant: extra heatmap noise is seeded per episode so the same
// draw is shared across sigma levels; periodic-falls rewrites fall audio as periodic.
EpisodeSpec apply_variant(const EpisodeSpec& episode, const AblationVariant& variant,
                          int emission_interval = EpisodeParams{}.emission_interval);

BatchResult run_ablation(const std::vector<EpisodeSpec>& episodes, const AblationVariant& variant,
                         BatchOptions options);

// Fixed-column CSV: episode_id,class,polarity,policy,ag_success,pl,opl,spl,outcome,steps,collisions.
std::string results_csv(const std::vector<EpisodeResult>& records);
std::string metrics_summary(const Metrics& m);

// SVG of occupancy, heatmap-shaded rooms, trajectory, source, spawn and declaration point.
std::string render_trace_svg(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan);
// Throws IoError when `out` cannot be written.
void render_trace(const Trace& trace, const EpisodeSpec& episode, const Floorplan& plan,
                  const std::filesystem::path& out);

}  // namespace emsim
