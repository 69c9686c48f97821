#pragma once
// Randomized oracle suites shared by the property tests (small counts) and the acceptance
// binary (full counts).

#include <cstdio>
#include <random>
#include <string>

#include "fixtures.hpp"

#include "emsim/agent.hpp"
#include "emsim/inference.hpp"

namespace suites {

using namespace emsim;

struct Outcome {
    bool pass = true;
    long cases = 0;
    double worst = 0.0;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

// ---------------------------------------------------------------------------
// Posterior vs brute-force Bayes enumeration
// ---------------------------------------------------------------------------

struct SmallScene {
    std::vector<int> widths;
    int height = 0;
    Floorplan plan;
    std::vector<double> heat;  // normalized
    std::vector<PlacedObject> objects;
    TraitTable traits;
    std::vector<int> object_room;
};

inline SmallScene random_small_scene(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nrooms(1, 5), width(8, 20), height(8, 16);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SmallScene s;
    const int n = nrooms(rng);
    for (int i = 0; i < n; ++i) s.widths.push_back(width(rng));
    s.height = height(rng);
    const int door_lo = 1 + std::uniform_int_distribution<int>(0, s.height - 4)(rng);
    const int door_hi = door_lo + 3;
    std::vector<RoomLabel> labels;
    for (int i = 0; i < n; ++i) labels.push_back(kAllRoomLabels[rng() % 7]);
    s.plan = fx::row_plan(s.widths, s.height, door_lo, door_hi, labels);

    double z = 0;
    for (int i = 0; i < n; ++i) {
        s.heat.push_back(0.02 + u(rng));
        z += s.heat.back();
    }
    for (double& h : s.heat) h /= z;

    // Objects: a few categories with random fire traits, some rooms left empty.
    const int cats = 1 + static_cast<int>(rng() % 4);
    for (int c = 0; c < cats; ++c) {
        const double p = u(rng) < 0.2 ? 0.0 : u(rng);
        s.traits["cat" + std::to_string(c)] = {{kFireCause, p}};
    }
    const int nobj = static_cast<int>(rng() % 7);
    int x0 = 1;
    std::vector<int> room_x0;
    for (int w : s.widths) {
        room_x0.push_back(x0);
        x0 += w + 1;
    }
    for (int k = 0; k < nobj; ++k) {
        const int r = static_cast<int>(rng() % n);
        const int col = room_x0[r] + static_cast<int>(rng() % s.widths[r]);
        const int row = 1 + static_cast<int>(rng() % s.height);
        s.objects.push_back({k, "cat" + std::to_string(rng() % cats), fx::cell_center({col, row})});
        s.object_room.push_back(r);
    }
    return s;
}

// Independent label likelihood: heatmap for falls, per-room fire-trait sums for fires.
inline std::vector<double> oracle_label(const SmallScene& s, EmergencyKind k) {
    const std::size_t n = s.widths.size();
    if (k == EmergencyKind::Fall) return s.heat;
    std::vector<double> sum(n, 0.0);
    for (std::size_t i = 0; i < s.objects.size(); ++i)
        sum[static_cast<std::size_t>(s.object_room[i])] += s.traits.at(s.objects[i].label).at(kFireCause);
    double z = fx::sum(sum);
    if (z <= 0) return std::vector<double>(n, 1.0 / n);
    for (double& v : sum) v /= z;
    return sum;
}

// In a row of rooms the first doorway toward room r is the one on r's side of the agent's room.
inline std::vector<double> oracle_direction(const SmallScene& s, int agent_room, Point agent, double bearing) {
    const std::size_t n = s.widths.size();
    std::vector<double> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (static_cast<int>(r) == agent_room) {
            out[r] = 0.99;
            continue;
        }
        const int portal = static_cast<int>(r) > agent_room ? agent_room : agent_room - 1;
        const Portal& p = s.plan.portals()[static_cast<std::size_t>(portal)];
        double mx = 0, my = 0;
        for (Cell c : p.cells) {
            mx += (c.col + 0.5) * 0.1;
            my += (c.row + 0.5) * 0.1;
        }
        mx /= p.cells.size();
        my /= p.cells.size();
        double expected = std::atan2(my - agent.y, mx - agent.x) * 180.0 / kPi;
        double d = std::fmod(std::abs(bearing - expected), 360.0);
        if (d > 180.0) d = 360.0 - d;
        out[r] = d <= 30.0 ? 0.99 : 0.01;
    }
    return out;
}

inline Outcome posterior_vs_enumeration(int scenes, std::uint64_t seed) {
    Outcome o;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int sc = 0; sc < scenes; ++sc) {
        SmallScene s = random_small_scene(rng);
        const std::size_t n = s.widths.size();
        SceneGraph g = build_pdsg(s.plan, s.objects, Heatmap{RoomDistribution(s.heat), 0.0}, s.traits);
        RoomRoutes routes(s.plan);

        RoomPosterior engine = init_prior(n);
        std::vector<double> joint(n, 1.0 / n);  // unnormalized product of every factor so far
        const int len = 1 + static_cast<int>(rng() % 8);
        for (int e = 0; e < len; ++e) {
            if (u(rng) < 0.3) {
                const int r = static_cast<int>(rng() % n);
                engine = clear_room(engine, RoomId{r}, 0.01);
                joint[static_cast<std::size_t>(r)] *= 0.01;
            } else {
                const int room = static_cast<int>(rng() % n);
                int x0 = 1;
                for (int i = 0; i < room; ++i) x0 += s.widths[static_cast<std::size_t>(i)] + 1;
                const Point agent{(x0 + u(rng) * s.widths[static_cast<std::size_t>(room)]) * 0.1,
                                  (1 + u(rng) * s.height) * 0.1};
                const EmergencyKind kind = u(rng) < 0.5 ? EmergencyKind::Fall : EmergencyKind::Fire;
                const double bearing = u(rng) * 360.0;
                InferenceConfig cfg;
                cfg.use_label = u(rng) > 0.15;
                cfg.use_direction = u(rng) > 0.15;
                AudioObservation obs{kind == EmergencyKind::Fall ? AudioClass::Thud : AudioClass::SmokeAlarm, bearing, e};
                engine = reobserve(engine, obs, g, s.plan, Pose{agent.x, agent.y, 0.0}, cfg, &routes);
                const auto lab = oracle_label(s, kind);
                const auto dir = oracle_direction(s, room, agent, bearing);
                for (std::size_t r = 0; r < n; ++r) {
                    if (cfg.use_label) joint[r] *= lab[r];
                    if (cfg.use_direction) joint[r] *= dir[r];
                }
            }
            const double z = fx::sum(joint);
            for (std::size_t r = 0; r < n; ++r) {
                const double d = std::abs(engine[RoomId{static_cast<int>(r)}] - joint[r] / z);
                o.worst = std::max(o.worst, d);
                if (d > 1e-9) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "scene %d step %d room %zu: engine %.12f oracle %.12f", sc, e, r,
                                  engine[RoomId{static_cast<int>(r)}], joint[r] / z);
                    o.fail(buf);
                }
            }
            ++o.cases;
        }
    }
    return o;
}

// ---------------------------------------------------------------------------
// Normalization of every produced distribution
// ---------------------------------------------------------------------------

inline Outcome normalization(int per_kind, std::uint64_t seed) {
    Outcome o;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto check = [&](std::span<const double> v, const char* what) {
        ++o.cases;
        double s = 0;
        for (double x : v) s += x;
        o.worst = std::max(o.worst, std::abs(s - 1.0));
        if (!fx::normalized(v)) o.fail(what);
    };

    // Heatmaps: random bases and noise levels, including heavy noise.
    for (int i = 0; i < per_kind; ++i) {
        const std::size_t n = 1 + rng() % 9;
        std::vector<double> b(n);
        for (double& x : b) x = u(rng) < 0.2 ? 0.0 : u(rng);
        b[rng() % n] += 0.01;
        const double sigma = std::vector<double>{0.0, 0.05, 0.15, 1.0, 3.0}[rng() % 5];
        check(add_heatmap_noise(RoomDistribution::normalized(b), sigma, rng).values.values(), "heatmap");
    }

    // Posteriors from random evidence chains.
    for (int i = 0; i < per_kind / 8; ++i) {
        const std::size_t n = 1 + rng() % 9;
        RoomPosterior p = init_prior(n);
        check(p.values(), "prior");
        for (int k = 0; k < 8; ++k) {
            if (u(rng) < 0.3) {
                p = clear_room(p, RoomId{static_cast<int>(rng() % n)});
            } else {
                std::vector<double> lab(n), dir(n);
                for (std::size_t r = 0; r < n; ++r) {
                    lab[r] = u(rng) < 0.1 ? 0.0 : u(rng);
                    dir[r] = u(rng) < 0.5 ? 0.99 : 0.01;
                }
                p = posterior_update(p, lab, dir);
            }
            check(p.values(), "posterior");
        }
    }

    // Agent-node beliefs through build and belief updates.
    Floorplan plan = fx::row_plan({12, 12, 12, 12, 12}, 12, 3, 8,
                                  {RoomLabel::Kitchen, RoomLabel::Office, RoomLabel::Bedroom, RoomLabel::Bathroom,
                                   RoomLabel::Hallway});
    for (int i = 0; i < per_kind / 8; ++i) {
        std::vector<double> h(5);
        for (double& x : h) x = u(rng) < 0.2 ? 0.0 : u(rng);
        h[rng() % 5] += 0.01;
        SceneGraph g = build_pdsg(plan, {}, Heatmap{RoomDistribution(h), 0.0}, {});
        check(agent_room_distribution(g, kHumanAgent).values(), "agent belief");
        for (int k = 0; k < 7; ++k) {
            g = update_agent_belief(g, kHumanAgent, RoomId{static_cast<int>(rng() % 5)}, u(rng) < 0.1);
            check(agent_room_distribution(g, kHumanAgent).values(), "agent belief update");
        }
    }

    // Posteriors recorded by the policy on generated episodes.
    EpisodeParams params;
    const int episodes = std::max(4, per_kind / 1000);
    for (int i = 0; i < episodes; ++i) {
        const EmergencyKind k = i % 2 ? EmergencyKind::Fire : EmergencyKind::Fall;
        EpisodeSpec ep = generate_episode(seed + static_cast<std::uint64_t>(i), k,
                                          i % 4 < 2 ? Polarity::Positive : Polarity::Negative, params);
        check(ep.heatmap.values.values(), "episode heatmap");
        auto ctx = SceneCache::global().get(ep.scene_seed, ep.floorplan_params);
        SceneGraph g = episode_graph(ep, *ctx, default_trait_table());
        check(agent_room_distribution(g, kHumanAgent).values(), "episode graph belief");
        Trace t = ours_policy(ep, *ctx, g, AgentConfig{});
        for (const StepRecord& s : t.steps)
            if (s.posterior) check(*s.posterior, "trace posterior");
    }
    return o;
}

// ---------------------------------------------------------------------------
// Shortest paths vs brute-force Dijkstra
// ---------------------------------------------------------------------------

inline Outcome pathfinding(int grids, std::uint64_t seed) {
    Outcome o;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> wd(4, 22), hd(4, 16);
    std::uniform_real_distribution<double> dens(0.0, 0.45);
    for (int k = 0; k < grids; ++k) {
        OccupancyGrid g = fx::random_grid(rng, wd(rng), hd(rng), dens(rng));
        std::vector<Cell> free;
        for (std::size_t i = 0; i < g.cell_count(); ++i)
            if (g.is_free(g.cell_at(i))) free.push_back(g.cell_at(i));
        if (free.empty()) continue;
        const Cell src = free[rng() % free.size()];
        std::vector<bool> reached;
        const auto oracle = fx::brute_dijkstra(g, src, reached);
        for (Cell c : free) {
            ++o.cases;
            const std::size_t i = g.index(c);
            try {
                PathResult r = shortest_path(g, fx::cell_center(c), fx::cell_center(src));
                const double want = oracle[i].value() * g.resolution();
                if (!reached[i]) {
                    o.fail("path found where the oracle has none");
                    continue;
                }
                o.worst = std::max(o.worst, std::abs(r.length - want));
                if (std::abs(r.length - want) > 1e-12) o.fail("length mismatch on grid " + std::to_string(k));
                // The returned path must itself be a valid 8-connected walk of that length.
                double walked = 0;
                for (std::size_t p = 1; p < r.points.size(); ++p) {
                    const double d = distance(r.points[p - 1], r.points[p]);
                    if (d > 0.1 * std::sqrt(2.0) + 1e-9) o.fail("path jumps");
                    walked += d;
                }
                if (std::abs(walked - r.length) > 1e-9) o.fail("path length disagrees with its points");
            } catch (const NoPathError&) {
                if (reached[i]) o.fail("oracle path missed on grid " + std::to_string(k));
            }
        }
    }
    return o;
}

}  // namespace suites
