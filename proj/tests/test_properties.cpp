#include "doctest.h"
#include "suites.hpp"

TEST_CASE("posterior matches brute-force enumeration on random small scenes") {
    auto o = suites::posterior_vs_enumeration(150, 2024);
    INFO(o.detail);
    CHECK(o.pass);
    CHECK(o.cases > 300);
}

TEST_CASE("every produced distribution is normalized") {
    auto o = suites::normalization(2000, 31);
    INFO(o.detail);
    CHECK(o.pass);
    CHECK(o.worst <= 1e-9);
}

TEST_CASE("shortest paths match brute-force Dijkstra on random grids") {
    auto o = suites::pathfinding(80, 7);
    INFO(o.detail);
    CHECK(o.pass);
}
