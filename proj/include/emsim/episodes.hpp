#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emsim/acoustics.hpp"
#include "emsim/common.hpp"
#include "emsim/scenegraph.hpp"
#include "emsim/world.hpp"

namespace emsim {

// ---------------------------------------------------------------------------
// Activity schedule (stand-in for a generative daily-routine model)
// ---------------------------------------------------------------------------

struct ScheduleEntry {
    double start_hour = 0.0;  // [start, end) in hours
    double end_hour = 24.0;
    std::string activity;
    std::map<RoomLabel, double> rooms;
};

class ActivitySchedule {
public:
    ActivitySchedule() = default;
    // Throws ConfigError unless entries tile [0, 24) without overlap and each distribution sums to 1.
    explicit ActivitySchedule(std::vector<ScheduleEntry> entries);

    static const ActivitySchedule& default_schedule();

    const std::vector<ScheduleEntry>& entries() const { return entries_; }
    // Throws ConfigError if no entry covers `hour`.
    const ScheduleEntry& at(double hour) const;

private:
    std::vector<ScheduleEntry> entries_;
};

RoomLabel sample_human_room(const ActivitySchedule& schedule, double hour, std::mt19937_64& rng);

// The entry's label distribution mapped onto a plan: labels absent from the plan are dropped
// and renormalized, a label's mass is split evenly across its rooms; uniform if nothing matches.
RoomDistribution entry_room_distribution(const ScheduleEntry& entry, const Floorplan& plan);

// Time-integrated room occupancy of the schedule on `plan`.
RoomDistribution schedule_occupancy(const ActivitySchedule& schedule, const Floorplan& plan);

// Per-room i.i.d. N(0, sigma) noise, negatives clamped to 0, renormalized; uniform if every
// entry clamps to 0. Noise is drawn as standard normals scaled by sigma, so one seed gives
// the same perturbation direction at every sigma.
Heatmap add_heatmap_noise(const RoomDistribution& base, double sigma, std::mt19937_64& rng);

Heatmap make_heatmap(const ActivitySchedule& schedule, const Floorplan& plan, double sigma, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Scenes and episodes
// ---------------------------------------------------------------------------

struct Scene {
    std::uint64_t seed = 0;
    Floorplan plan;
    std::vector<PlacedObject> objects;
};

// Floorplan plus furniture placed by room label.
Scene generate_scene(std::uint64_t seed, const GenerationParams& params = {});

enum class Polarity { Positive, Negative };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

struct EpisodeParams {
    GenerationParams floorplan;
    int scene_count = 36;
    std::uint64_t scene_base_seed = 7000;
    ActivitySchedule schedule = ActivitySchedule::default_schedule();
    double heatmap_sigma = 0.05;
    int step_budget = 500;
    int emission_interval = 5;
    bool exclude_source_room_spawn = true;
    int clearance_cells = 2;  // sources and spawns keep this distance from walls
    double spawn_hidden_range = 5.0;  // spawns may not see the source within this range
    bool periodic_falls = false;
    // Fire positives start at objects whose fire_cause exceeds this; the default skips the
    // 0.01 floor given to inert objects.
    double fire_source_threshold = 0.01;
};

struct GroundTruth {
    Point source;
    RoomId source_room;
    bool emergency = false;
    std::optional<Pose> human;  // fallen human, positive falls only
    std::string source_entity;  // "fallen_human", "box", "suitcase", object label, "alarm"
    int source_object = -1;     // scene object id for fire positives
};

struct EpisodeSpec {
    std::string id;
    std::uint64_t seed = 0;
    std::uint64_t scene_seed = 0;
    GenerationParams floorplan_params;
    EmergencyKind cls = EmergencyKind::Fall;
    Polarity polarity = Polarity::Positive;
    double time_of_day = 0.0;
    std::string activity;
    AudioEvent audio;
    GroundTruth truth;
    Pose spawn;
    Heatmap heatmap;
    int step_budget = 500;
};

// Throws GenerationError when the request cannot be met (e.g. fire positive without a fire source).
EpisodeSpec generate_episode(std::uint64_t seed, EmergencyKind cls, Polarity polarity, const EpisodeParams& params,
                             const std::string& id = {});

// Same as above on an already generated scene.
EpisodeSpec generate_episode_in(const Scene& scene, std::uint64_t seed, EmergencyKind cls, Polarity polarity,
                                const EpisodeParams& params, const std::string& id = {});

struct BatchRequest {
    std::uint64_t seed = 1;
    int count = 128;
    std::optional<EmergencyKind> cls;  // nullopt: even fall/fire split
    double positive_fraction = 0.5;
};

std::vector<EpisodeSpec> generate_batch(const BatchRequest& request, const EpisodeParams& params);

}  // namespace emsim
