#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emsim/acoustics.hpp"
#include "emsim/episodes.hpp"
#include "emsim/identify.hpp"
#include "emsim/inference.hpp"
#include "emsim/scenegraph.hpp"
#include "emsim/world.hpp"

namespace emsim {

inline constexpr double kForwardStep = 0.15;  // meters
inline constexpr double kTurnStep = 15.0;     // degrees
inline constexpr int kDefaultStepBudget = 500;

enum class ActionType { TurnLeft, TurnRight, Forward, Listen, Declare, Stop };

std::string to_string(ActionType a);
ActionType action_type_from_string(const std::string& s);

struct Action {
    ActionType type = ActionType::Listen;
    std::optional<EmergencyKind> kind;  // Declare only

    static Action turn_left() { return {ActionType::TurnLeft, std::nullopt}; }
    static Action turn_right() { return {ActionType::TurnRight, std::nullopt}; }
    static Action forward() { return {ActionType::Forward, std::nullopt}; }
    static Action listen() { return {ActionType::Listen, std::nullopt}; }
    static Action declare(EmergencyKind k) { return {ActionType::Declare, k}; }
    static Action stop() { return {ActionType::Stop, std::nullopt}; }

    bool operator==(const Action&) const = default;
};

struct StepOutcome {
    Pose pose;
    bool collision = false;
};

// Discrete kinematics. Forward moves 0.15 m along the heading unless the segment crosses an
// occupied cell, in which case the pose is unchanged and the collision flag is set.
StepOutcome step(const Floorplan& plan, const Pose& pose, const Action& action);

struct StepRecord {
    int step = 0;
    Action action;
    Pose pose;  // after the action
    bool collision = false;
    std::optional<AudioObservation> observation;
    std::optional<std::vector<double>> posterior;
    std::optional<DetectorVerdict> verdict;
};

enum class Termination { Declared, Cleared, BudgetExhausted, CollisionAbort };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct Trace {
    std::string episode_id;
    std::string policy;
    Pose spawn;
    std::vector<StepRecord> steps;
    double path_length = 0.0;  // 0.15 m per successful Forward
    int forward_moves = 0;
    int collisions = 0;
    int steps_used = 0;
    std::optional<EmergencyKind> outcome;  // declared kind, if any
    Termination termination = Termination::BudgetExhausted;
};

enum class CollisionPolicy { Continue, Abort };

struct AgentConfig {
    InferenceConfig inference;
    DetectorProfile detector;
    AcousticsConfig acoustics;
    double label_error = 0.0;  // uniform confusion noise of the audio labeler
    int step_budget = kDefaultStepBudget;
    bool unlimited_budget = false;
    int safety_cap = 200000;  // hard stop when the budget is disabled
    int relisten_interval = 10;
    bool relisten_after_silence = false;  // keep listening after a Listen returned nothing
    int scan_turns = 24;
    CollisionPolicy collision_policy = CollisionPolicy::Continue;
    int nav_inflation_cells = 2;
    double waypoint_tolerance = kForwardStep;
    double max_segment = 1.0;  // meters between waypoints
    double heading_tolerance = kTurnStep / 2.0;
    double portal_overshoot = 0.8;  // meters past a doorway when the baseline crosses it
    bool record_posteriors = true;
};

// Per-floorplan precomputation shared read-only across episodes.
struct SceneContext {
    Scene scene;
    OccupancyGrid nav_grid;  // walls inflated for waypoint planning
    RoomRoutes routes;       // raw grid, for inference
    RoomRoutes nav_routes;   // nav grid, for planning and distance queries

    SceneContext(Scene s, int nav_inflation_cells);
    const Floorplan& plan() const { return scene.plan; }
};

// Thread-safe memo of scenes keyed by (seed, generation params).
class SceneCache {
public:
    std::shared_ptr<const SceneContext> get(std::uint64_t seed, const GenerationParams& params,
                                            int nav_inflation_cells = 2);
    static SceneCache& global();

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const SceneContext>> cache_;
};

// Build the agent's scene graph for an episode: scene objects plus the episode heatmap.
SceneGraph episode_graph(const EpisodeSpec& episode, const SceneContext& ctx, const TraitTable& traits);

// Our modular policy: listen for a trigger, infer the most likely source room, go there and
// scan, clear and reselect until a detection is declared or every room is cleared.
Trace ours_policy(const EpisodeSpec& episode, const SceneContext& ctx, const SceneGraph& graph,
                  const AgentConfig& config);
Trace ours_policy(const EpisodeSpec& episode, const SceneGraph& graph, const AgentConfig& config);

// Direction-following baseline: walks along the heard bearing, crosses the doorway that best
// matches it, then explores rooms nearest-first. No scene graph, heatmap or posterior.
Trace df_policy(const EpisodeSpec& episode, const SceneContext& ctx, const AgentConfig& config);
Trace df_policy(const EpisodeSpec& episode, const AgentConfig& config);

}  // namespace emsim
