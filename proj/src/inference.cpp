#include "emsim/inference.hpp"

#include <cmath>
#include <limits>

namespace emsim {

RoomRoutes::RoomRoutes(const Floorplan& plan, const OccupancyGrid& grid) : resolution_(grid.resolution()) {
    fields_.reserve(plan.room_count());
    for (const RoomInfo& info : plan.rooms().rooms()) fields_.emplace_back(grid, plan.anchor(info.id));
}

double RoomRoutes::distance(Point from, RoomId r) const {
    const DistanceField& f = to_room(r);
    Cell c{static_cast<int>(std::floor(from.x / resolution_)), static_cast<int>(std::floor(from.y / resolution_))};
    return f.meters(c);
}

RoomPosterior::RoomPosterior(RoomDistribution d, bool degenerate_evidence)
    : dist_(std::move(d)), degenerate_(degenerate_evidence) {
    if (!dist_.is_normalized()) throw ConfigError("posterior must be a normalized distribution");
}

RoomPosterior init_prior(std::size_t room_count) {
    if (room_count == 0) throw ConfigError("prior over zero rooms");
    return RoomPosterior(RoomDistribution::uniform(room_count));
}

double direction_likelihood(const Floorplan& plan, const Pose& agent, double bearing, RoomId room,
                            const InferenceConfig& config, const RoomRoutes* routes) {
    if (!(config.direction_threshold_deg > 0.0 && config.direction_threshold_deg <= 180.0))
        throw ConfigError("direction threshold must be in (0, 180]");
    if (!room.valid() || room.index() >= plan.room_count()) throw LookupError("unknown room id");
    const Point here = agent.position();
    const OccupancyGrid& grid = plan.grid();
    if (!grid.contains(here) || grid.occupied(grid.cell_of(here))) return config.p_direction_mismatch;
    if (room_of(plan.rooms(), here) == room) return config.p_direction_match;

    std::vector<Cell> path;
    if (routes != nullptr) {
        path = routes->to_room(room).path_to_source(grid.cell_of(here));
    } else {
        DistanceField field(grid, plan.anchor(room));
        path = field.path_to_source(grid.cell_of(here));
    }
    if (path.empty()) return config.p_direction_mismatch;
    const double expected = path_initial_bearing(plan, here, plan.anchor_point(room), path);
    return std::abs(angle_diff(bearing, expected)) <= config.direction_threshold_deg ? config.p_direction_match
                                                                                     : config.p_direction_mismatch;
}

std::vector<double> direction_likelihoods(const Floorplan& plan, const Pose& agent, double bearing,
                                          const InferenceConfig& config, const RoomRoutes* routes) {
    std::vector<double> out(plan.room_count());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = direction_likelihood(plan, agent, bearing, RoomId{static_cast<int>(i)}, config, routes);
    return out;
}

RoomDistribution label_likelihood(const SceneGraph& graph, EmergencyKind kind, const TriggerConfig& triggers) {
    if (grounding_of(kind, triggers) == Grounding::AgentGrounded) return agent_room_distribution(graph, kHumanAgent);
    return trait_room_likelihood(graph, kFireCause);
}

RoomPosterior posterior_update(const RoomPosterior& prior, std::span<const double> label_lik,
                               std::span<const double> dir_lik) {
    const std::size_t n = prior.size();
    if (label_lik.size() != n || dir_lik.size() != n) throw ConfigError("likelihoods must cover the prior's rooms");
    std::vector<double> post(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(label_lik[i] >= 0.0) || !(dir_lik[i] >= 0.0)) throw ConfigError("likelihoods must be >= 0");
        post[i] = prior.values()[i] * label_lik[i] * dir_lik[i];
        total += post[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) return RoomPosterior(prior.distribution(), true);
    for (double& v : post) v /= total;
    return RoomPosterior(RoomDistribution(std::move(post)));
}

RoomPosterior clear_room(const RoomPosterior& posterior, RoomId room, double clear_factor) {
    if (!room.valid() || room.index() >= posterior.size()) throw LookupError("unknown room id");
    std::vector<double> p = posterior.distribution().vec();
    p[room.index()] *= clear_factor;
    double total = 0.0;
    for (double v : p) total += v;
    if (!(total > 0.0)) return posterior;
    for (double& v : p) v /= total;
    return RoomPosterior(RoomDistribution(std::move(p)));
}

RoomId select_target(const RoomPosterior& posterior, const Pose& agent, const Floorplan& plan,
                     const std::set<RoomId>& exclude, const RoomRoutes* routes) {
    const std::size_t n = posterior.size();
    bool all_excluded = true;
    for (std::size_t i = 0; i < n; ++i) all_excluded &= exclude.count(RoomId{static_cast<int>(i)}) > 0;

    double best_p = -1.0;
    std::vector<RoomId> best;
    for (std::size_t i = 0; i < n; ++i) {
        RoomId r{static_cast<int>(i)};
        if (!all_excluded && exclude.count(r)) continue;
        const double p = posterior[r];
        if (p > best_p) {
            best_p = p;
            best = {r};
        } else if (p == best_p) {
            best.push_back(r);
        }
    }
    if (best.size() == 1) return best.front();

    const Point here = agent.position();
    double best_d = std::numeric_limits<double>::infinity();
    RoomId choice = best.front();
    for (RoomId r : best) {
        double d;
        if (routes != nullptr) {
            d = routes->distance(here, r);
        } else {
            DistanceField field(plan.grid(), plan.anchor(r));
            d = field.meters(plan.grid().cell_of(here));
        }
        if (d < best_d) {
            best_d = d;
            choice = r;
        }
    }
    return choice;
}

RoomPosterior reobserve(const RoomPosterior& posterior, const AudioObservation& obs, const SceneGraph& graph,
                        const Floorplan& plan, const Pose& agent, const InferenceConfig& config,
                        const RoomRoutes* routes) {
    auto kind = is_emergency_trigger(obs.label, config.triggers);
    if (!kind) return posterior;
    const std::size_t n = posterior.size();
    std::vector<double> label = config.use_label ? label_likelihood(graph, *kind, config.triggers).vec()
                                                 : std::vector<double>(n, 1.0);
    std::vector<double> dir = config.use_direction ? direction_likelihoods(plan, agent, obs.bearing, config, routes)
                                                   : std::vector<double>(n, 1.0);
    return posterior_update(posterior, label, dir);
}

void EmergencyBelief::on_trigger(EmergencyKind kind) {
    if (status_ == Status::Confirmed) return;
    status_ = Status::Searching;
    kind_ = kind;
}

bool EmergencyBelief::on_room_cleared(RoomId room) {
    if (status_ == Status::Confirmed) return false;
    cleared_.insert(room);
    if (cleared_.size() >= room_count_) {
        status_ = Status::Cleared;
        return true;
    }
    return false;
}

bool EmergencyBelief::on_detection(bool emergency, std::optional<EmergencyKind> kind) {
    if (!emergency || !kind) return false;
    status_ = Status::Confirmed;
    kind_ = kind;
    return true;
}

}  // namespace emsim
