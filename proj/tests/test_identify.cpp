#include "doctest.h"
#include "fixtures.hpp"

#include "emsim/identify.hpp"

using namespace emsim;

namespace {

EpisodeSpec with_source(const Floorplan& plan, Point src, bool fallen_human) {
    AudioEvent a = make_audio_event(src, AudioClass::Thud, Periodicity::Aperiodic, 500, 5);
    return fx::toy_episode(plan, EmergencyKind::Fall, fallen_human ? Polarity::Positive : Polarity::Negative, src,
                           Pose{}, {0.4, 0.3, 0.3}, a);
}

}  // namespace

TEST_CASE("oracle detector: fallen human in view") {
    Floorplan plan = fx::three_room_plan();
    EpisodeSpec ep = with_source(plan, {2.55, 1.55}, true);
    SimulatedDetector det(parse_detector_profile("oracle"), 1);
    DetectorVerdict v = det.detect(ep, Pose{0.55, 1.55, 0.0}, plan);
    CHECK(v == DetectorVerdict{true, EmergencyKind::Fall, VerdictReason::InView});
}

TEST_CASE("oracle detector: human behind a wall") {
    Floorplan plan = fx::three_room_plan();
    // Source in the kitchen away from the doorway, agent in the office facing it.
    EpisodeSpec ep = with_source(plan, {3.55, 0.35}, true);
    SimulatedDetector det(parse_detector_profile("oracle"), 1);
    DetectorVerdict v = det.detect(ep, Pose{2.0, 0.35, 0.0}, plan);
    CHECK(v == DetectorVerdict{false, std::nullopt, VerdictReason::Occluded});
}

TEST_CASE("oracle detector: a fallen suitcase in view is not reported") {
    Floorplan plan = fx::three_room_plan();
    EpisodeSpec ep = with_source(plan, {2.55, 1.55}, false);
    SimulatedDetector det(parse_detector_profile("oracle"), 1);
    DetectorVerdict v = det.detect(ep, Pose{0.55, 1.55, 0.0}, plan);
    CHECK(v == DetectorVerdict{false, std::nullopt, VerdictReason::InView});
}

TEST_CASE("visibility: range and field of view") {
    Floorplan plan = fx::row_plan({80}, 30, 0, 0, {RoomLabel::LivingRoom});
    DetectorProfile p;
    const Point src{6.05, 1.55};
    CHECK(visibility(p, plan.grid(), Pose{1.55, 1.55, 0.0}, src) == VerdictReason::InView);      // 4.5 m
    CHECK(visibility(p, plan.grid(), Pose{0.95, 1.55, 0.0}, src) == VerdictReason::OutOfRange);  // 5.1 m
    CHECK(visibility(p, plan.grid(), Pose{1.55, 1.55, 44.0}, src) == VerdictReason::InView);
    CHECK(visibility(p, plan.grid(), Pose{1.55, 1.55, 46.0}, src) == VerdictReason::OutOfRange);
    CHECK(visibility(p, plan.grid(), Pose{1.55, 1.55, 180.0}, src) == VerdictReason::OutOfRange);
}

TEST_CASE("detector profiles") {
    CHECK(parse_detector_profile("oracle") == DetectorProfile{});
    DetectorProfile n = parse_detector_profile("noisy:0.2,0.05");
    CHECK(n.false_negative_rate == 0.2);
    CHECK(n.false_positive_rate == 0.05);
    CHECK_NOTHROW(parse_detector_profile("imperfect"));
    CHECK_THROWS_AS(parse_detector_profile("psychic"), ConfigError);
    CHECK_THROWS_AS(parse_detector_profile("noisy:1.5,0"), ConfigError);
    CHECK(parse_detector_profile(to_string(n)) == n);
}

TEST_CASE("noisy detector rates over many calls") {
    Floorplan plan = fx::three_room_plan();
    EpisodeSpec pos = with_source(plan, {2.55, 1.55}, true);
    EpisodeSpec neg = with_source(plan, {2.55, 1.55}, false);
    SimulatedDetector det(parse_detector_profile("noisy:0.25,0.1"), 99);
    int miss = 0, false_alarm = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        miss += !det.detect(pos, Pose{0.55, 1.55, 0.0}, plan).emergency;
        false_alarm += det.detect(neg, Pose{0.55, 1.55, 0.0}, plan).emergency;
    }
    CHECK(miss / double(n) == doctest::Approx(0.25).epsilon(0.05));
    CHECK(false_alarm / double(n) == doctest::Approx(0.1).epsilon(0.08));
}
