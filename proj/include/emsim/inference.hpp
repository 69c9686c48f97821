#pragma once

#include <optional>
#include <set>
#include <vector>

#include "emsim/acoustics.hpp"
#include "emsim/common.hpp"
#include "emsim/scenegraph.hpp"
#include "emsim/world.hpp"

namespace emsim {

// Distance fields rooted at every room anchor on one grid, so agent-to-room paths and
// distances are lookups instead of fresh searches.
class RoomRoutes {
public:
    RoomRoutes() = default;
    RoomRoutes(const Floorplan& plan, const OccupancyGrid& grid);
    explicit RoomRoutes(const Floorplan& plan) : RoomRoutes(plan, plan.grid()) {}

    const DistanceField& to_room(RoomId r) const { return fields_.at(r.index()); }
    double distance(Point from, RoomId r) const;

private:
    double resolution_ = 0.1;
    std::vector<DistanceField> fields_;
};

// P(room | evidence). Always a valid distribution.
class RoomPosterior {
public:
    RoomPosterior() = default;
    // Throws ConfigError if `d` is not normalized within 1e-9.
    explicit RoomPosterior(RoomDistribution d, bool degenerate_evidence = false);

    double operator[](RoomId r) const { return dist_[r]; }
    std::size_t size() const { return dist_.size(); }
    const RoomDistribution& distribution() const { return dist_; }
    std::span<const double> values() const { return dist_.values(); }
    // Set when the last update's evidence had zero mass everywhere and the prior was kept.
    bool degenerate_evidence() const { return degenerate_; }

private:
    RoomDistribution dist_;
    bool degenerate_ = false;
};

struct InferenceConfig {
    double direction_threshold_deg = 30.0;
    double p_direction_match = 0.99;
    double p_direction_mismatch = 0.01;
    double clear_factor = kDefaultClearFactor;
    bool use_direction = true;
    bool use_label = true;
    TriggerConfig triggers;
};

RoomPosterior init_prior(std::size_t room_count);

// Step likelihood of an observed bearing given the audio came from `room`: compares the bearing
// with the initial leg of the shortest path to the room (toward its first doorway, or direct).
// Rooms containing the agent score as matches; unreachable rooms as mismatches.
double direction_likelihood(const Floorplan& plan, const Pose& agent, double bearing, RoomId room,
                            const InferenceConfig& config = {}, const RoomRoutes* routes = nullptr);

std::vector<double> direction_likelihoods(const Floorplan& plan, const Pose& agent, double bearing,
                                          const InferenceConfig& config = {}, const RoomRoutes* routes = nullptr);

// Agent-grounded kinds read the human's room belief; object-grounded kinds the fire-cause traits.
RoomDistribution label_likelihood(const SceneGraph& graph, EmergencyKind kind, const TriggerConfig& triggers = {});

// Element-wise prior * label * direction, renormalized. An all-zero product keeps the prior
// and flags degenerate evidence. Throws ConfigError on mismatched sizes.
RoomPosterior posterior_update(const RoomPosterior& prior, std::span<const double> label_lik,
                               std::span<const double> dir_lik);

RoomPosterior clear_room(const RoomPosterior& posterior, RoomId room, double clear_factor = kDefaultClearFactor);

// Argmax over rooms not in `exclude`; ties go to the shorter path from the agent, then the smaller id.
// If every room is excluded the exclusion is ignored.
RoomId select_target(const RoomPosterior& posterior, const Pose& agent, const Floorplan& plan,
                     const std::set<RoomId>& exclude = {}, const RoomRoutes* routes = nullptr);

// Re-applies label and direction likelihoods for a fresh observation, using `posterior` as prior.
// Non-trigger labels leave the posterior unchanged.
RoomPosterior reobserve(const RoomPosterior& posterior, const AudioObservation& obs, const SceneGraph& graph,
                        const Floorplan& plan, const Pose& agent, const InferenceConfig& config = {},
                        const RoomRoutes* routes = nullptr);

// Decision-level emergency state: declare, keep searching, or report nothing.
class EmergencyBelief {
public:
    enum class Status { NoneSuspected, Searching, Confirmed, Cleared };

    explicit EmergencyBelief(std::size_t room_count) : room_count_(room_count) {}

    Status status() const { return status_; }
    std::optional<EmergencyKind> kind() const { return kind_; }
    const std::set<RoomId>& rooms_cleared() const { return cleared_; }

    void on_trigger(EmergencyKind kind);
    // Returns true once every room has been cleared.
    bool on_room_cleared(RoomId room);
    // Confirms only for a positive verdict; returns whether the status became Confirmed.
    bool on_detection(bool emergency, std::optional<EmergencyKind> kind);

private:
    std::size_t room_count_;
    Status status_ = Status::NoneSuspected;
    std::optional<EmergencyKind> kind_;
    std::set<RoomId> cleared_;
};

}  // namespace emsim
