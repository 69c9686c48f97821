#include "emsim/identify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace emsim {

std::string to_string(VerdictReason r) {
    switch (r) {
        case VerdictReason::InView: return "in-view";
        case VerdictReason::Occluded: return "occluded";
        case VerdictReason::OutOfRange: return "out-of-range";
        case VerdictReason::Misclassified: return "misclassified";
    }
    return "?";
}

VerdictReason verdict_reason_from_string(const std::string& s) {
    for (VerdictReason r :
         {VerdictReason::InView, VerdictReason::Occluded, VerdictReason::OutOfRange, VerdictReason::Misclassified})
        if (to_string(r) == s) return r;
    throw ConfigError("unknown verdict reason: " + s);
}

void DetectorProfile::validate() const {
    if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw ConfigError("detector fov must be in (0, 360]");
    if (!(range > 0.0)) throw ConfigError("detector range must be > 0");
    if (!(false_negative_rate >= 0.0 && false_negative_rate <= 1.0)) throw ConfigError("fnr outside [0,1]");
    if (!(false_positive_rate >= 0.0 && false_positive_rate <= 1.0)) throw ConfigError("fpr outside [0,1]");
}

DetectorProfile parse_detector_profile(const std::string& spec) {
    DetectorProfile p;
    if (spec == "oracle") return p;
    if (spec == "imperfect") {
        p.false_negative_rate = 0.2;
        p.false_positive_rate = 1e-4;
        return p;
    }
    const std::string prefix = "noisy:";
    if (spec.rfind(prefix, 0) == 0) {
        std::string rest = spec.substr(prefix.size());
        auto comma = rest.find(',');
        if (comma == std::string::npos) throw ConfigError("noisy detector needs <fnr>,<fpr>");
        try {
            std::size_t used = 0;
            p.false_negative_rate = std::stod(rest.substr(0, comma), &used);
            if (used != comma) throw ConfigError("bad fnr");
            std::string fpr = rest.substr(comma + 1);
            p.false_positive_rate = std::stod(fpr, &used);
            if (used != fpr.size()) throw ConfigError("bad fpr");
        } catch (const std::logic_error&) {
            throw ConfigError("cannot parse detector profile: " + spec);
        }
        p.validate();
        return p;
    }
    throw ConfigError("unknown detector profile: " + spec);
}

std::string to_string(const DetectorProfile& profile) {
    if (profile == DetectorProfile{}) return "oracle";
    std::ostringstream os;
    os << "noisy:" << profile.false_negative_rate << "," << profile.false_positive_rate;
    return os.str();
}

VerdictReason visibility(const DetectorProfile& profile, const OccupancyGrid& grid, const Pose& pose, Point target) {
    const Point here = pose.position();
    const double d = distance(here, target);
    if (d > profile.range) return VerdictReason::OutOfRange;
    if (d > 1e-9 && std::abs(angle_diff(bearing_between(here, target), pose.heading)) > profile.fov_deg / 2.0)
        return VerdictReason::OutOfRange;
    return line_of_sight(grid, here, target) ? VerdictReason::InView : VerdictReason::Occluded;
}

SimulatedDetector::SimulatedDetector(DetectorProfile profile, std::uint64_t seed) : profile_(profile), rng_(seed) {
    profile_.validate();
}

DetectorVerdict SimulatedDetector::detect(const EpisodeSpec& episode, const Pose& pose, const Floorplan& plan) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double u_fn = u(rng_);
    const double u_fp = u(rng_);

    const VerdictReason seen = visibility(profile_, plan.grid(), pose, episode.truth.source);
    if (episode.truth.emergency && seen == VerdictReason::InView) {
        if (u_fn < profile_.false_negative_rate) return {false, std::nullopt, VerdictReason::Misclassified};
        return {true, episode.cls, VerdictReason::InView};
    }
    if (u_fp < profile_.false_positive_rate) return {true, episode.cls, VerdictReason::Misclassified};
    return {false, std::nullopt, seen};
}

}  // namespace emsim
