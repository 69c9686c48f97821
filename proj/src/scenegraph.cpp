#include "emsim/scenegraph.hpp"

#include <algorithm>
#include <limits>

namespace emsim {

const TraitTable& default_trait_table() {
    static const TraitTable table = {
        {"stove", {{kFireCause, 0.9}, {kTripHazard, 0.0}}},
        {"toaster", {{kFireCause, 0.6}, {kTripHazard, 0.0}}},
        {"skillet", {{kFireCause, 0.7}, {kTripHazard, 0.0}}},
        {"microwave", {{kFireCause, 0.4}, {kTripHazard, 0.0}}},
        {"refrigerator", {{kFireCause, 0.05}, {kTripHazard, 0.0}}},
        {"sink", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"fireplace", {{kFireCause, 0.7}, {kTripHazard, 0.1}}},
        {"candle", {{kFireCause, 0.3}, {kTripHazard, 0.0}}},
        {"television", {{kFireCause, 0.1}, {kTripHazard, 0.0}}},
        {"sofa", {{kFireCause, 0.05}, {kTripHazard, 0.0}}},
        {"lamp", {{kFireCause, 0.1}, {kTripHazard, 0.2}}},
        {"rug", {{kFireCause, 0.01}, {kTripHazard, 0.6}}},
        {"bed", {{kFireCause, 0.02}, {kTripHazard, 0.0}}},
        {"dresser", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"space_heater", {{kFireCause, 0.5}, {kTripHazard, 0.3}}},
        {"desk", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"computer", {{kFireCause, 0.1}, {kTripHazard, 0.0}}},
        {"power_strip", {{kFireCause, 0.3}, {kTripHazard, 0.4}}},
        {"bookshelf", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"hair_dryer", {{kFireCause, 0.2}, {kTripHazard, 0.1}}},
        {"toilet", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"bathtub", {{kFireCause, 0.01}, {kTripHazard, 0.3}}},
        {"coat_rack", {{kFireCause, 0.01}, {kTripHazard, 0.1}}},
        {"dining_table", {{kFireCause, 0.01}, {kTripHazard, 0.0}}},
        {"chair", {{kFireCause, 0.01}, {kTripHazard, 0.2}}},
    };
    return table;
}

SceneGraph::SceneGraph(std::vector<RoomNode> rooms, std::vector<PlaceNode> places,
                       std::vector<StaticObjectNode> objects, std::vector<AgentNode> agents)
    : rooms_(std::move(rooms)), places_(std::move(places)), objects_(std::move(objects)), agents_(std::move(agents)) {
    validate();
}

std::vector<ContainmentEdge> SceneGraph::edges() const {
    std::vector<ContainmentEdge> out;
    for (const PlaceNode& p : places_) out.push_back({EdgeKind::PlaceToRoom, p.id, p.parent_room.value});
    for (const StaticObjectNode& o : objects_) out.push_back({EdgeKind::ObjectToPlace, o.id, o.parent_place});
    return out;
}

const AgentNode& SceneGraph::agent(const std::string& id) const {
    for (const AgentNode& a : agents_)
        if (a.id == id) return a;
    throw LookupError("unknown agent: " + id);
}

AgentNode& SceneGraph::agent(const std::string& id) {
    for (AgentNode& a : agents_)
        if (a.id == id) return a;
    throw LookupError("unknown agent: " + id);
}

void SceneGraph::validate() const {
    for (std::size_t i = 0; i < rooms_.size(); ++i)
        if (rooms_[i].id.value != static_cast<int>(i)) throw ConfigError("room node ids must be 0..n-1");
    for (std::size_t i = 0; i < places_.size(); ++i) {
        if (places_[i].id != static_cast<int>(i)) throw ConfigError("place ids must be 0..n-1");
        if (!places_[i].parent_room.valid() || places_[i].parent_room.index() >= rooms_.size())
            throw ConfigError("place without a parent room");
    }
    for (const StaticObjectNode& o : objects_) {
        if (!o.parent_room.valid() || o.parent_room.index() >= rooms_.size())
            throw ConfigError("object without a parent room");
        if (o.parent_place < 0 || static_cast<std::size_t>(o.parent_place) >= places_.size())
            throw ConfigError("object without a parent place");
        if (places_[o.parent_place].parent_room != o.parent_room)
            throw ConfigError("object and its place disagree on the room");
        for (const auto& [name, v] : o.traits)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("trait " + name + " outside [0,1]");
    }
    for (const AgentNode& a : agents_) {
        if (a.room_belief.size() != rooms_.size()) throw ConfigError("agent belief must cover every room");
        if (!a.room_belief.is_normalized()) throw ConfigError("agent belief must sum to 1");
    }
}

SceneGraph build_pdsg(const Floorplan& plan, const std::vector<PlacedObject>& objects, const Heatmap& heatmap,
                      const TraitTable& traits, const std::vector<std::string>& agent_ids) {
    const std::size_t n = plan.room_count();
    if (heatmap.values.size() != n) throw ConfigError("heatmap must cover every room");
    // Already-normalized heatmaps go in untouched; rescaling would perturb the last bits.
    RoomDistribution belief =
        heatmap.values.is_normalized() ? heatmap.values : RoomDistribution::normalized(heatmap.values.vec());

    std::vector<RoomNode> rooms;
    for (const RoomInfo& info : plan.rooms().rooms()) rooms.push_back({info.id, info.label, plan.centroid(info.id)});

    // Places: free, non-portal cells grouped by room and 1 m block; each place sits on the
    // member cell nearest the block's centroid.
    const OccupancyGrid& grid = plan.grid();
    const int block = std::max(1, static_cast<int>(std::lround(1.0 / grid.resolution())));
    struct Cluster {
        RoomId room;
        int bx, by;
        double sx = 0.0, sy = 0.0;
        std::vector<Cell> cells;
    };
    std::map<std::tuple<int, int, int>, Cluster> clusters;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        Cell c = grid.cell_at(i);
        RoomId r = plan.rooms().at(c);
        if (!r.valid() || plan.portal_at(c) >= 0) continue;
        auto key = std::make_tuple(r.value, c.row / block, c.col / block);
        Cluster& cl = clusters[key];
        cl.room = r;
        Point p = grid.center(c);
        cl.sx += p.x;
        cl.sy += p.y;
        cl.cells.push_back(c);
    }
    std::vector<PlaceNode> places;
    for (auto& [key, cl] : clusters) {
        Point mean{cl.sx / cl.cells.size(), cl.sy / cl.cells.size()};
        Cell best = cl.cells.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (Cell c : cl.cells) {
            double d = distance(grid.center(c), mean);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        places.push_back({static_cast<int>(places.size()), grid.center(best), cl.room});
    }

    std::vector<StaticObjectNode> nodes;
    for (const PlacedObject& obj : objects) {
        auto it = traits.find(obj.label);
        if (it == traits.end()) throw ConfigError("no trait entry for object category " + obj.label);
        for (const auto& [name, v] : it->second)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("trait " + name + " of " + obj.label + " outside [0,1]");
        RoomId room = room_of(plan.rooms(), obj.position);
        int parent = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (const PlaceNode& p : places) {
            if (p.parent_room != room) continue;
            double d = distance(p.position, obj.position);
            if (d < best_d) {
                best_d = d;
                parent = p.id;
            }
        }
        nodes.push_back({obj.id, obj.label, obj.position, room, parent, it->second});
    }

    std::vector<AgentNode> agents;
    for (const std::string& id : agent_ids) agents.push_back({id, belief});
    return SceneGraph(std::move(rooms), std::move(places), std::move(nodes), std::move(agents));
}

RoomDistribution agent_room_distribution(const SceneGraph& graph, const std::string& agent) {
    return graph.agent(agent).room_belief;
}

RoomDistribution trait_room_likelihood(const SceneGraph& graph, const std::string& trait) {
    std::vector<double> mass(graph.room_count(), 0.0);
    double total = 0.0;
    for (const StaticObjectNode& o : graph.objects()) {
        auto it = o.traits.find(trait);
        if (it == o.traits.end()) continue;
        mass[o.parent_room.index()] += it->second;
        total += it->second;
    }
    if (!(total > 0.0)) return RoomDistribution::uniform(graph.room_count());
    return RoomDistribution::normalized(std::move(mass));
}

void apply_agent_observation(AgentNode& node, RoomId room, bool seen, double clear_factor) {
    if (!room.valid() || room.index() >= node.room_belief.size()) throw LookupError("unknown room id");
    std::vector<double> p = node.room_belief.vec();
    if (seen) {
        std::fill(p.begin(), p.end(), 0.0);
        p[room.index()] = 1.0;
        node.room_belief = RoomDistribution(std::move(p));
        return;
    }
    p[room.index()] *= clear_factor;
    node.room_belief = RoomDistribution::normalized(std::move(p));
}

SceneGraph update_agent_belief(const SceneGraph& graph, const std::string& agent, RoomId room, bool seen,
                               double clear_factor) {
    SceneGraph out = graph;
    apply_agent_observation(out.agent(agent), room, seen, clear_factor);
    return out;
}

}  // namespace emsim
