#pragma once

#include <optional>
#include <random>
#include <string>

#include "emsim/common.hpp"
#include "emsim/episodes.hpp"
#include "emsim/world.hpp"

namespace emsim {

enum class VerdictReason { InView, Occluded, OutOfRange, Misclassified };

std::string to_string(VerdictReason r);
VerdictReason verdict_reason_from_string(const std::string& s);

struct DetectorVerdict {
    bool emergency = false;
    std::optional<EmergencyKind> kind;  // set iff emergency
    VerdictReason reason = VerdictReason::OutOfRange;

    bool operator==(const DetectorVerdict&) const = default;
};

struct DetectorProfile {
    double fov_deg = 90.0;
    double range = 5.0;  // meters
    double false_negative_rate = 0.0;
    double false_positive_rate = 0.0;

    void validate() const;
    bool operator==(const DetectorProfile&) const = default;
};

// "oracle", "noisy:<fnr>,<fpr>", or "imperfect". Throws ConfigError on anything else.
// "imperfect" uses fixed nonzero miss and false-alarm rates.
DetectorProfile parse_detector_profile(const std::string& spec);
std::string to_string(const DetectorProfile& profile);

// Geometric visibility of `target` from `pose`: InView, Occluded (in range and field of view but
// blocked) or OutOfRange (too far or outside the field of view).
VerdictReason visibility(const DetectorProfile& profile, const OccupancyGrid& grid, const Pose& pose, Point target);

// Visibility-based stand-in for a vision-language emergency check.
class SimulatedDetector {
public:
    SimulatedDetector(DetectorProfile profile, std::uint64_t seed);

    const DetectorProfile& profile() const { return profile_; }
    DetectorVerdict detect(const EpisodeSpec& episode, const Pose& pose, const Floorplan& plan);

private:
    DetectorProfile profile_;
    std::mt19937_64 rng_;
};

}  // namespace emsim
