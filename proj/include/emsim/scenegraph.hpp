#pragma once

#include <map>
#include <string>
#include <vector>

#include "emsim/common.hpp"
#include "emsim/world.hpp"

namespace emsim {

// Room-level human-activity prior handed to the agent.
struct Heatmap {
    RoomDistribution values;
    double sigma_applied = 0.0;

    bool operator==(const Heatmap&) const = default;
};

using TraitMap = std::map<std::string, double>;
// Object category -> trait probabilities ("fire_cause", "trip_hazard", ...).
using TraitTable = std::map<std::string, TraitMap>;

inline constexpr const char* kFireCause = "fire_cause";
inline constexpr const char* kTripHazard = "trip_hazard";
inline constexpr double kDefaultClearFactor = 0.01;

// Editable defaults standing in for a per-object language-model query. No object is given an
// exactly-zero fire probability: a zero would lock its room out of the posterior for good.
const TraitTable& default_trait_table();

struct PlacedObject {
    int id = 0;
    std::string label;
    Point position;

    bool operator==(const PlacedObject&) const = default;
};

struct RoomNode {
    RoomId id;
    RoomLabel label = RoomLabel::LivingRoom;
    Point centroid;
};

struct PlaceNode {
    int id = 0;
    Point position;
    RoomId parent_room;
};

struct StaticObjectNode {
    int id = 0;
    std::string label;
    Point position;
    RoomId parent_room;
    int parent_place = -1;
    TraitMap traits;
};

// Dynamic agent with a probabilistic room edge instead of a fixed parent.
struct AgentNode {
    std::string id;
    RoomDistribution room_belief;
};

enum class EdgeKind { ObjectToPlace, PlaceToRoom };

struct ContainmentEdge {
    EdgeKind kind;
    int child;
    int parent;
};

// Three-layer scene graph (rooms, places, objects) plus probabilistic agent nodes.
class SceneGraph {
public:
    SceneGraph() = default;
    SceneGraph(std::vector<RoomNode> rooms, std::vector<PlaceNode> places, std::vector<StaticObjectNode> objects,
               std::vector<AgentNode> agents);

    const std::vector<RoomNode>& rooms() const { return rooms_; }
    const std::vector<PlaceNode>& places() const { return places_; }
    const std::vector<StaticObjectNode>& objects() const { return objects_; }
    const std::vector<AgentNode>& agents() const { return agents_; }
    std::size_t room_count() const { return rooms_.size(); }

    std::vector<ContainmentEdge> edges() const;

    // Throws LookupError for unknown agent ids.
    const AgentNode& agent(const std::string& id) const;
    AgentNode& agent(const std::string& id);

    // Throws ConfigError when a structural invariant is broken.
    void validate() const;

private:
    std::vector<RoomNode> rooms_;
    std::vector<PlaceNode> places_;
    std::vector<StaticObjectNode> objects_;
    std::vector<AgentNode> agents_;
};

inline constexpr const char* kHumanAgent = "human";

// Places are one per 1 m block of free cells per room. Each agent's room belief is the
// renormalized heatmap. Throws ConfigError if the heatmap misses a room, a trait is
// outside [0,1], or an object category has no trait entry.
SceneGraph build_pdsg(const Floorplan& plan, const std::vector<PlacedObject>& objects, const Heatmap& heatmap,
                      const TraitTable& traits, const std::vector<std::string>& agent_ids = {kHumanAgent});

RoomDistribution agent_room_distribution(const SceneGraph& graph, const std::string& agent);

// Per-room sum of the trait over objects, normalized. Uniform when no object carries it.
RoomDistribution trait_room_likelihood(const SceneGraph& graph, const std::string& trait);

// seen=false: multiply the room by clear_factor and renormalize. seen=true: collapse onto the room.
SceneGraph update_agent_belief(const SceneGraph& graph, const std::string& agent, RoomId room, bool seen,
                               double clear_factor = kDefaultClearFactor);

// In-place variant of the belief update on one node.
void apply_agent_observation(AgentNode& node, RoomId room, bool seen, double clear_factor = kDefaultClearFactor);

}  // namespace emsim
