#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

#include "emsim/episodes.hpp"
#include "emsim/identify.hpp"
#include "emsim/io.hpp"

using namespace emsim;

namespace {

ActivitySchedule three_part_schedule() {
    return ActivitySchedule({{0.0, 17.0, "sleeping", {{RoomLabel::Bedroom, 1.0}}},
                             {17.0, 19.0, "cooking", {{RoomLabel::Kitchen, 1.0}}},
                             {19.0, 24.0, "dining", {{RoomLabel::Kitchen, 0.5}, {RoomLabel::DiningRoom, 0.5}}}});
}

}  // namespace

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(ActivitySchedule({{0.0, 12.0, "a", {{RoomLabel::Bedroom, 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(ActivitySchedule({{0.0, 24.0, "a", {{RoomLabel::Bedroom, 0.6}}}}), ConfigError);
    CHECK_NOTHROW(ActivitySchedule::default_schedule());
}

TEST_CASE("sample_human_room") {
    ActivitySchedule s = three_part_schedule();
    std::mt19937_64 rng(1);
    CHECK(s.at(18.0).activity == "cooking");
    CHECK(sample_human_room(s, 18.0, rng) == RoomLabel::Kitchen);
    ActivitySchedule office({{0.0, 24.0, "work", {{RoomLabel::Office, 1.0}}}});
    for (int i = 0; i < 50; ++i) CHECK(sample_human_room(office, 9.5, rng) == RoomLabel::Office);

    int kitchen = 0;
    const int n = 10000;
    std::mt19937_64 mc(77);
    for (int i = 0; i < n; ++i) kitchen += sample_human_room(s, 20.0, mc) == RoomLabel::Kitchen;
    CHECK(std::abs(kitchen / double(n) - 0.5) <= 0.03);
}

TEST_CASE("make_heatmap: sigma 0 is the schedule occupancy, fixed seeds reproduce") {
    Floorplan plan = generate_floorplan(7);
    std::mt19937_64 r0(1);
    Heatmap h0 = make_heatmap(ActivitySchedule::default_schedule(), plan, 0.0, r0);
    RoomDistribution occ = schedule_occupancy(ActivitySchedule::default_schedule(), plan);
    REQUIRE(h0.values.size() == occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i)
        CHECK(h0.values[RoomId{int(i)}] == doctest::Approx(occ[RoomId{int(i)}]).epsilon(1e-12));
    CHECK(fx::normalized(occ.values()));

    std::mt19937_64 a(5), b(5);
    CHECK(make_heatmap(ActivitySchedule::default_schedule(), plan, 0.05, a) ==
          make_heatmap(ActivitySchedule::default_schedule(), plan, 0.05, b));
}

TEST_CASE("heatmap noise sigma 1.0 flattens the base distribution") {
    RoomDistribution base(std::vector<double>{0.7, 0.2, 0.1});
    std::vector<double> mean(3, 0.0);
    const int n = 20000;
    for (int s = 0; s < n; ++s) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(s));
        Heatmap h = add_heatmap_noise(base, 1.0, rng);
        REQUIRE(fx::normalized(h.values.values()));
        for (int i = 0; i < 3; ++i) mean[i] += h.values[RoomId{i}] / n;
    }
    // Independent Monte Carlo (2e6 draws, clamp, renormalize, uniform on all-zero), frozen.
    const double oracle[3] = {0.4647, 0.2823, 0.2530};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - oracle[i]) <= 0.05);
}

TEST_CASE("heatmap noise: all entries clamped falls back to uniform") {
    RoomDistribution base(std::vector<double>{0.5, 0.5});
    bool saw_uniform = false;
    for (int s = 0; s < 500 && !saw_uniform; ++s) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(s));
        Heatmap h = add_heatmap_noise(base, 5.0, rng);
        saw_uniform = h.values.vec() == std::vector<double>{0.5, 0.5};
    }
    CHECK(saw_uniform);
}

TEST_CASE("fall positive: human in a schedule room, aperiodic thud at the human") {
    EpisodeSpec ep = generate_episode(1, EmergencyKind::Fall, Polarity::Positive, EpisodeParams{});
    REQUIRE(ep.truth.human);
    CHECK(ep.truth.emergency);
    CHECK(ep.truth.source_entity == "fallen_human");
    CHECK(ep.audio.true_class == AudioClass::Thud);
    CHECK(ep.audio.periodicity == Periodicity::Aperiodic);
    CHECK(ep.audio.source == ep.truth.source);
    CHECK(ep.truth.human->position() == ep.truth.source);
    Scene scene = generate_scene(ep.scene_seed, ep.floorplan_params);
    const RoomLabel label = scene.plan.rooms().label(ep.truth.source_room);
    // The label must carry mass in the schedule entry active at the episode time.
    const auto& rooms = ActivitySchedule::default_schedule().at(ep.time_of_day).rooms;
    CHECK(rooms.count(label) == 1);
}

TEST_CASE("fall negative: a box or suitcase, no emergency") {
    EpisodeSpec ep = generate_episode(2, EmergencyKind::Fall, Polarity::Negative, EpisodeParams{});
    CHECK_FALSE(ep.truth.emergency);
    CHECK_FALSE(ep.truth.human);
    CHECK((ep.truth.source_entity == "box" || ep.truth.source_entity == "suitcase"));
    CHECK(ep.audio.true_class == AudioClass::Thud);
}

TEST_CASE("fire positive: source on an object that can start a fire") {
    EpisodeParams params;
    EpisodeSpec ep = generate_episode(3, EmergencyKind::Fire, Polarity::Positive, params);
    CHECK(ep.truth.emergency);
    REQUIRE(ep.truth.source_object >= 0);
    Scene scene = generate_scene(ep.scene_seed, ep.floorplan_params);
    const PlacedObject& obj = scene.objects.at(static_cast<std::size_t>(ep.truth.source_object));
    CHECK(obj.label == ep.truth.source_entity);
    CHECK(default_trait_table().at(obj.label).at(kFireCause) > params.fire_source_threshold);
    CHECK(ep.audio.true_class == AudioClass::SmokeAlarm);
    CHECK(ep.audio.periodicity == Periodicity::Periodic);
}

TEST_CASE("fire negative: alarm without a fire") {
    EpisodeSpec ep = generate_episode(4, EmergencyKind::Fire, Polarity::Negative, EpisodeParams{});
    CHECK_FALSE(ep.truth.emergency);
    CHECK(ep.audio.true_class == AudioClass::SmokeAlarm);
}

TEST_CASE("spawns: outside the source room and not already looking at the source") {
    EpisodeParams params;
    for (std::uint64_t s = 0; s < 40; ++s) {
        const EmergencyKind k = s % 2 ? EmergencyKind::Fire : EmergencyKind::Fall;
        EpisodeSpec ep = generate_episode(s, k, s % 3 ? Polarity::Positive : Polarity::Negative, params);
        Scene scene = generate_scene(ep.scene_seed, ep.floorplan_params);
        CHECK(room_of(scene.plan.rooms(), ep.spawn.position()) != ep.truth.source_room);
        DetectorProfile oracle;
        CHECK(visibility(oracle, scene.plan.grid(), ep.spawn, ep.truth.source) != VerdictReason::InView);
        CHECK(fx::normalized(ep.heatmap.values.values()));
        CHECK(ep.heatmap.values.size() == scene.plan.room_count());
    }
}

TEST_CASE("episodes are a pure function of their seed") {
    EpisodeParams params;
    auto a = to_json(generate_episode(9, EmergencyKind::Fire, Polarity::Positive, params)).dump();
    auto b = to_json(generate_episode(9, EmergencyKind::Fire, Polarity::Positive, params)).dump();
    CHECK(a == b);
}

TEST_CASE("generate_batch: split and ids") {
    BatchRequest req;
    req.seed = 5;
    req.count = 16;
    auto eps = generate_batch(req, EpisodeParams{});
    REQUIRE(eps.size() == 16);
    std::map<std::string, int> tally;
    for (const EpisodeSpec& e : eps) ++tally[to_string(e.cls) + "/" + to_string(e.polarity)];
    CHECK(tally["fall/positive"] + tally["fall/negative"] == 8);
    CHECK(tally["fire/positive"] + tally["fire/negative"] == 8);
    CHECK(tally["fall/positive"] + tally["fire/positive"] == 8);
    CHECK(eps[0].id == "s5-e00000");
    CHECK(to_json(generate_batch(req, EpisodeParams{})[3]).dump() == to_json(eps[3]).dump());
}
