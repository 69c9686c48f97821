#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"

#include "emsim/io.hpp"
#include "emsim/world.hpp"

using namespace emsim;

TEST_CASE("generated plans: seed 7 has 5-9 rooms and a connected portal graph") {
    Floorplan plan = generate_floorplan(7);
    CHECK(plan.room_count() >= 5);
    CHECK(plan.room_count() <= 9);
    // Connectivity via BFS over portals, independent of the constructor's own check.
    std::set<int> seen{0};
    std::vector<int> todo{0};
    while (!todo.empty()) {
        int r = todo.back();
        todo.pop_back();
        for (const Portal& p : plan.portals()) {
            if (!p.touches(RoomId{r})) continue;
            int o = p.other(RoomId{r}).value;
            if (seen.insert(o).second) todo.push_back(o);
        }
    }
    CHECK(seen.size() == plan.room_count());
}

TEST_CASE("generated plans are a pure function of the seed") {
    CHECK(to_json(generate_floorplan(7)).dump() == to_json(generate_floorplan(7)).dump());
    CHECK(to_json(generate_floorplan(7)).dump() != to_json(generate_floorplan(8)).dump());
}

TEST_CASE("infeasible generation request fails") {
    GenerationParams p;
    p.min_rooms = p.max_rooms = 50;
    p.min_area = p.max_area = 10.0;
    CHECK_THROWS_AS(generate_floorplan(1, p), GenerationError);
}

TEST_CASE("generated rooms respect size limits over many seeds") {
    GenerationParams p;
    for (std::uint64_t s = 0; s < 40; ++s) {
        Floorplan plan = generate_floorplan(s, p);
        REQUIRE(plan.room_count() >= static_cast<std::size_t>(p.min_rooms));
        REQUIRE(plan.room_count() <= static_cast<std::size_t>(p.max_rooms));
        std::size_t free = 0;
        for (std::uint8_t o : plan.grid().data()) free += o == 0;
        const double area = free * p.resolution * p.resolution;
        CHECK(area <= p.max_area + 1e-9);
        CHECK(area >= p.min_area * 0.8);  // walls eat part of the footprint
    }
}

TEST_CASE("shortest_path basics") {
    const Floorplan plan = fx::three_room_plan();
    const auto& g = plan.grid();
    SUBCASE("from == to") {
        Point p = fx::cell_center({5, 5});
        PathResult r = shortest_path(g, p, p);
        CHECK(r.points.size() == 1);
        CHECK(r.length == 0.0);
    }
    SUBCASE("straight corridor of 10 cells is 0.9 m") {
        std::vector<std::uint8_t> occ(12 * 3, 1);
        for (int c = 1; c <= 10; ++c) occ[12 + c] = 0;
        OccupancyGrid corridor(12, 3, 0.1, occ);
        PathResult r = shortest_path(corridor, fx::cell_center({1, 1}), fx::cell_center({10, 1}));
        CHECK(std::abs(r.length - 0.9) < 1e-9);
        CHECK(r.points.size() == 10);
    }
    SUBCASE("wall endpoint") {
        CHECK_THROWS_AS(shortest_path(g, fx::cell_center({0, 0}), fx::cell_center({5, 5})), LocationError);
    }
    SUBCASE("disconnected goal") {
        std::vector<std::uint8_t> occ(7 * 3, 1);
        occ[7 + 1] = occ[7 + 2] = occ[7 + 4] = occ[7 + 5] = 0;
        OccupancyGrid split(7, 3, 0.1, occ);
        CHECK_THROWS_AS(shortest_path(split, fx::cell_center({1, 1}), fx::cell_center({5, 1})), NoPathError);
    }
}

TEST_CASE("shortest_path matches brute-force Dijkstra on random mazes") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        OccupancyGrid g = fx::random_grid(rng, 14, 11, 0.3);
        std::vector<Cell> free;
        for (std::size_t i = 0; i < g.cell_count(); ++i)
            if (g.is_free(g.cell_at(i))) free.push_back(g.cell_at(i));
        if (free.size() < 2) continue;
        std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
        Cell a = free[pick(rng)];
        std::vector<bool> reached;
        auto oracle = fx::brute_dijkstra(g, a, reached);
        for (Cell b : free) {
            const std::size_t i = g.index(b);
            if (!reached[i]) {
                CHECK_THROWS_AS(shortest_path(g, fx::cell_center(b), fx::cell_center(a)), NoPathError);
                continue;
            }
            PathResult r = shortest_path(g, fx::cell_center(b), fx::cell_center(a));
            REQUIRE(std::abs(r.length - oracle[i].value() * 0.1) < 1e-12);
        }
    }
}

TEST_CASE("line_of_sight") {
    std::vector<std::uint8_t> occ(5 * 3, 1);
    occ[5 + 1] = occ[5 + 3] = 0;
    occ[5 + 2] = 1;
    OccupancyGrid g(5, 3, 0.1, occ);
    CHECK_FALSE(line_of_sight(g, fx::cell_center({1, 1}), fx::cell_center({3, 1})));
    occ[5 + 2] = 0;
    OccupancyGrid open(5, 3, 0.1, occ);
    CHECK(line_of_sight(open, fx::cell_center({1, 1}), fx::cell_center({2, 1})));
    CHECK(line_of_sight(open, fx::cell_center({1, 1}), fx::cell_center({3, 1})));
}

TEST_CASE("line_of_sight: a corner touch counts as blocked") {
    // Free diagonal pair with both side cells walls: the segment passes exactly through a corner.
    std::vector<std::uint8_t> occ(4 * 4, 1);
    occ[1 * 4 + 1] = 0;
    occ[2 * 4 + 2] = 0;
    OccupancyGrid g(4, 4, 0.1, occ);
    CHECK_FALSE(line_of_sight(g, fx::cell_center({1, 1}), fx::cell_center({2, 2})));
}

TEST_CASE("line_of_sight agrees with exact and super-sampled oracles on random grids") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int sampled_blocks = 0;
    for (int trial = 0; trial < 300; ++trial) {
        OccupancyGrid g = fx::random_grid(rng, 16, 12, 0.15);
        for (int k = 0; k < 10; ++k) {
            Point a{0.1 + u(rng) * 1.4, 0.1 + u(rng) * 1.0};
            Point b{0.1 + u(rng) * 1.4, 0.1 + u(rng) * 1.0};
            const bool los = line_of_sight(g, a, b);
            REQUIRE(los == fx::exact_los(g, a, b));
            if (fx::sampled_blocked(g, a, b, 20000)) {
                ++sampled_blocks;
                REQUIRE_FALSE(los);
            }
        }
    }
    CHECK(sampled_blocks > 100);
}

TEST_CASE("room_of") {
    const Floorplan plan = fx::three_room_plan();
    CHECK(room_of(plan.rooms(), plan.centroid(RoomId{0})) == RoomId{0});
    CHECK(room_of(plan.rooms(), plan.centroid(RoomId{2})) == RoomId{2});
    // Doorway between rooms 1 and 2 is owned by room 1.
    const Portal& p = plan.portals()[1];
    CHECK(room_of(plan.rooms(), fx::cell_center(p.cells[0])) == RoomId{1});
    CHECK(p.owner() == RoomId{1});
    CHECK_THROWS_AS(room_of(plan.rooms(), fx::cell_center({0, 0})), LocationError);
}

TEST_CASE("floorplan rejects rooms touching outside a portal") {
    // Two rooms side by side with no wall and no portal.
    std::vector<std::uint8_t> occ(6 * 3, 1);
    std::vector<int> cells(6 * 3, -1);
    for (int c = 1; c <= 4; ++c) {
        occ[6 + c] = 0;
        cells[6 + c] = c <= 2 ? 0 : 1;
    }
    std::vector<RoomInfo> infos{{RoomId{0}, RoomLabel::Kitchen}, {RoomId{1}, RoomLabel::Office}};
    CHECK_THROWS_AS(Floorplan(OccupancyGrid(6, 3, 0.1, occ), RoomMap(6, 3, 0.1, cells, infos), {}), ConfigError);
}

TEST_CASE("inflation grows walls by the requested radius") {
    const Floorplan plan = fx::three_room_plan();
    OccupancyGrid inf = plan.grid().inflated(2);
    CHECK(inf.occupied({2, 15}));   // two cells from the outer wall
    CHECK(inf.is_free({3, 15}));
    CHECK(inf.is_free({31, 15}));   // doorway centre survives
}
