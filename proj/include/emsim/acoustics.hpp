#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "emsim/common.hpp"
#include "emsim/world.hpp"

namespace emsim {

enum class AudioClass { Thud, GlassBreak, SmokeAlarm, Speech, ApplianceHum, DoorSlam };
inline constexpr std::size_t kAudioClassCount = 6;
inline constexpr AudioClass kAllAudioClasses[kAudioClassCount] = {AudioClass::Thud,    AudioClass::GlassBreak,
                                                                  AudioClass::SmokeAlarm, AudioClass::Speech,
                                                                  AudioClass::ApplianceHum, AudioClass::DoorSlam};

std::string to_string(AudioClass c);
AudioClass audio_class_from_string(const std::string& s);

enum class Periodicity { Aperiodic, Periodic, Semiperiodic };

std::string to_string(Periodicity p);
Periodicity periodicity_from_string(const std::string& s);

struct AudioEvent {
    Point source;
    AudioClass true_class = AudioClass::Thud;
    Periodicity periodicity = Periodicity::Aperiodic;
    std::vector<int> emission_schedule;  // ascending step indices
    int interval = 1;                    // steps between emissions (1 for aperiodic)
    int cutoff_step = -1;                // semiperiodic: first step whose bearing is worthless

    bool emits_at(int step) const;
    // Most recent emission s <= step with step - s < interval.
    std::optional<int> latest_emission(int step) const;

    bool operator==(const AudioEvent&) const = default;
};

// aperiodic: one emission at step 0. periodic: every `interval` steps through `episode_steps`.
// semiperiodic: like periodic, with bearings randomized from `cutoff_step` on.
AudioEvent make_audio_event(Point source, AudioClass cls, Periodicity periodicity, int episode_steps, int interval,
                            int cutoff_step = -1);

struct AudioObservation {
    AudioClass label = AudioClass::Thud;
    double bearing = 0.0;  // world-frame degrees, east = 0, counterclockwise positive
    int step = 0;

    bool operator==(const AudioObservation&) const = default;
};

using ConfusionMatrix = std::array<std::array<double, kAudioClassCount>, kAudioClassCount>;

// Stand-in for an audio tagger: samples a perceived class from a row-stochastic confusion
// matrix. Carries the episode's seeded generator, also used for bearing noise.
class Labeler {
public:
    // Throws ConfigError unless every row sums to 1 within 1e-9.
    Labeler(const ConfusionMatrix& confusion, std::uint64_t seed);
    static Labeler identity(std::uint64_t seed);
    // Keeps the true class with probability 1 - error, otherwise uniform over the other classes.
    static Labeler uniform_noise(double error, std::uint64_t seed);

    AudioClass sample(AudioClass true_class);
    const ConfusionMatrix& confusion() const { return confusion_; }
    std::mt19937_64& rng() { return rng_; }

private:
    ConfusionMatrix confusion_;
    std::mt19937_64 rng_;
    bool identity_ = false;
};

struct AcousticsConfig {
    double bearing_noise_deg = 0.0;  // zero-mean Gaussian sigma on the reported bearing
};

// Bearing of the first leg of `path` (cells from agent to target): toward the midpoint of the
// first doorway crossed, or straight at `target` when agent and target share a room or the
// only doorway on the path is the one the agent stands in.
double path_initial_bearing(const Floorplan& plan, Point agent, Point target, std::span<const Cell> path);

// Pseudo-truth audio perception for a Listen at `step`: hears the most recent emission within
// the last emission interval, nothing otherwise. `source_field` may carry a distance field rooted
// at the source cell to avoid recomputing it. Throws ConfigError if the source is in a wall.
std::optional<AudioObservation> observe_audio(const AudioEvent& event, const Pose& agent, const Floorplan& plan,
                                              Labeler& labeler, int step, const AcousticsConfig& config = {},
                                              const DistanceField* source_field = nullptr);

enum class Grounding { AgentGrounded, ObjectGrounded };

std::string to_string(Grounding g);

struct TriggerConfig {
    std::map<AudioClass, EmergencyKind> triggers = {{AudioClass::Thud, EmergencyKind::Fall},
                                                    {AudioClass::SmokeAlarm, EmergencyKind::Fire}};
    std::map<EmergencyKind, Grounding> grounding = {{EmergencyKind::Fall, Grounding::AgentGrounded},
                                                    {EmergencyKind::Fire, Grounding::ObjectGrounded}};
};

std::optional<EmergencyKind> is_emergency_trigger(AudioClass label, const TriggerConfig& config = {});
Grounding grounding_of(EmergencyKind kind, const TriggerConfig& config = {});

}  // namespace emsim
