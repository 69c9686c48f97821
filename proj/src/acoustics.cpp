#include "emsim/acoustics.hpp"

#include <algorithm>
#include <cmath>

namespace emsim {

std::string to_string(EmergencyKind k) { return k == EmergencyKind::Fall ? "fall" : "fire"; }

EmergencyKind emergency_kind_from_string(const std::string& s) {
    if (s == "fall") return EmergencyKind::Fall;
    if (s == "fire") return EmergencyKind::Fire;
    throw ConfigError("unknown emergency kind: " + s);
}

std::string to_string(AudioClass c) {
    switch (c) {
        case AudioClass::Thud: return "thud";
        case AudioClass::GlassBreak: return "glass_break";
        case AudioClass::SmokeAlarm: return "smoke_alarm";
        case AudioClass::Speech: return "speech";
        case AudioClass::ApplianceHum: return "appliance_hum";
        case AudioClass::DoorSlam: return "door_slam";
    }
    return "?";
}

AudioClass audio_class_from_string(const std::string& s) {
    for (AudioClass c : kAllAudioClasses)
        if (to_string(c) == s) return c;
    throw ConfigError("unknown audio class: " + s);
}

std::string to_string(Periodicity p) {
    switch (p) {
        case Periodicity::Aperiodic: return "aperiodic";
        case Periodicity::Periodic: return "periodic";
        case Periodicity::Semiperiodic: return "semiperiodic";
    }
    return "?";
}

Periodicity periodicity_from_string(const std::string& s) {
    for (Periodicity p : {Periodicity::Aperiodic, Periodicity::Periodic, Periodicity::Semiperiodic})
        if (to_string(p) == s) return p;
    throw ConfigError("unknown periodicity: " + s);
}

std::string to_string(Grounding g) { return g == Grounding::AgentGrounded ? "agent" : "object"; }

bool AudioEvent::emits_at(int step) const {
    return std::binary_search(emission_schedule.begin(), emission_schedule.end(), step);
}

std::optional<int> AudioEvent::latest_emission(int step) const {
    auto it = std::upper_bound(emission_schedule.begin(), emission_schedule.end(), step);
    if (it == emission_schedule.begin()) return std::nullopt;
    int s = *std::prev(it);
    if (step - s < std::max(1, interval)) return s;
    return std::nullopt;
}

AudioEvent make_audio_event(Point source, AudioClass cls, Periodicity periodicity, int episode_steps, int interval,
                            int cutoff_step) {
    AudioEvent e;
    e.source = source;
    e.true_class = cls;
    e.periodicity = periodicity;
    if (periodicity == Periodicity::Aperiodic) {
        e.interval = 1;
        e.emission_schedule = {0};
        return e;
    }
    if (interval < 1) throw ConfigError("emission interval must be >= 1");
    e.interval = interval;
    for (int s = 0; s < episode_steps; s += interval) e.emission_schedule.push_back(s);
    if (periodicity == Periodicity::Semiperiodic) {
        if (cutoff_step < 0 || cutoff_step > episode_steps) throw ConfigError("semiperiodic event needs a cutoff step");
        e.cutoff_step = cutoff_step;
    }
    return e;
}

// ---------------------------------------------------------------------------
// Labeler
// ---------------------------------------------------------------------------

Labeler::Labeler(const ConfusionMatrix& confusion, std::uint64_t seed) : confusion_(confusion), rng_(seed) {
    identity_ = true;
    for (std::size_t i = 0; i < kAudioClassCount; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < kAudioClassCount; ++j) {
            if (confusion_[i][j] < 0.0) throw ConfigError("confusion entries must be >= 0");
            s += confusion_[i][j];
            if ((i == j) != (confusion_[i][j] == 1.0)) identity_ = false;
        }
        if (std::abs(s - 1.0) > kNormTolerance) throw ConfigError("confusion rows must sum to 1");
    }
}

Labeler Labeler::identity(std::uint64_t seed) {
    ConfusionMatrix m{};
    for (std::size_t i = 0; i < kAudioClassCount; ++i) m[i][i] = 1.0;
    return Labeler(m, seed);
}

Labeler Labeler::uniform_noise(double error, std::uint64_t seed) {
    if (!(error >= 0.0 && error <= 1.0)) throw ConfigError("label error rate outside [0,1]");
    ConfusionMatrix m{};
    for (std::size_t i = 0; i < kAudioClassCount; ++i)
        for (std::size_t j = 0; j < kAudioClassCount; ++j)
            m[i][j] = i == j ? 1.0 - error : error / static_cast<double>(kAudioClassCount - 1);
    return Labeler(m, seed);
}

AudioClass Labeler::sample(AudioClass true_class) {
    const auto& row = confusion_[static_cast<std::size_t>(true_class)];
    if (identity_) return true_class;
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    double acc = 0.0;
    for (std::size_t j = 0; j < kAudioClassCount; ++j) {
        acc += row[j];
        if (u < acc) return kAllAudioClasses[j];
    }
    return true_class;
}

// ---------------------------------------------------------------------------
// Perception
// ---------------------------------------------------------------------------

double path_initial_bearing(const Floorplan& plan, Point agent, Point target, std::span<const Cell> path) {
    const RoomId agent_room = room_of(plan.rooms(), agent);
    const RoomId target_room = room_of(plan.rooms(), target);
    if (agent_room == target_room) return bearing_between(agent, target);
    const int start_portal = plan.portal_at(plan.grid().cell_of(agent));
    for (Cell c : path) {
        int p = plan.portal_at(c);
        if (p >= 0 && p != start_portal) return bearing_between(agent, plan.portals()[p].midpoint);
    }
    return bearing_between(agent, target);
}

std::optional<AudioObservation> observe_audio(const AudioEvent& event, const Pose& agent, const Floorplan& plan,
                                              Labeler& labeler, int step, const AcousticsConfig& config,
                                              const DistanceField* source_field) {
    const OccupancyGrid& grid = plan.grid();
    if (!grid.contains(event.source) || grid.occupied(grid.cell_of(event.source)))
        throw ConfigError("audio source lies in a wall");
    if (!event.latest_emission(step)) return std::nullopt;

    AudioObservation obs;
    obs.step = step;
    obs.label = labeler.sample(event.true_class);

    if (event.periodicity == Periodicity::Semiperiodic && event.cutoff_step >= 0 && step >= event.cutoff_step) {
        obs.bearing = std::uniform_real_distribution<double>(0.0, 360.0)(labeler.rng());
        obs.bearing = wrap_degrees(obs.bearing);
        return obs;
    }

    const Point here = agent.position();
    const Cell agent_cell = grid.cell_of(here);
    std::vector<Cell> path;
    if (source_field != nullptr && source_field->source() == grid.cell_of(event.source)) {
        path = source_field->path_to_source(agent_cell);
    } else {
        DistanceField field(grid, grid.cell_of(event.source));
        path = field.path_to_source(agent_cell);
    }
    double bearing = path_initial_bearing(plan, here, event.source, path);
    if (config.bearing_noise_deg > 0.0)
        bearing += std::normal_distribution<double>(0.0, config.bearing_noise_deg)(labeler.rng());
    obs.bearing = wrap_degrees(bearing);
    return obs;
}

std::optional<EmergencyKind> is_emergency_trigger(AudioClass label, const TriggerConfig& config) {
    auto it = config.triggers.find(label);
    if (it == config.triggers.end()) return std::nullopt;
    return it->second;
}

Grounding grounding_of(EmergencyKind kind, const TriggerConfig& config) {
    auto it = config.grounding.find(kind);
    if (it != config.grounding.end()) return it->second;
    return kind == EmergencyKind::Fall ? Grounding::AgentGrounded : Grounding::ObjectGrounded;
}

}  // namespace emsim
