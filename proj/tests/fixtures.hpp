#pragma once
// Test-side builders and brute-force oracles. Nothing here calls into the code under test
// except to construct inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "emsim/agent.hpp"
#include "emsim/episodes.hpp"
#include "emsim/world.hpp"

namespace fx {

using namespace emsim;

// Rooms side by side along x, each `height` cells tall, separated by one-cell walls with a
// doorway of rows [door_lo, door_hi) owned by the left (smaller id) room.
inline Floorplan row_plan(const std::vector<int>& widths, int height, int door_lo, int door_hi,
                          const std::vector<RoomLabel>& labels, double res = 0.1) {
    const int n = static_cast<int>(widths.size());
    int w = 1;
    for (int x : widths) w += x + 1;
    const int h = height + 2;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h, 1);
    std::vector<int> cells(occ.size(), -1);
    std::vector<Portal> portals;
    int x0 = 1;
    for (int i = 0; i < n; ++i) {
        for (int r = 1; r <= height; ++r)
            for (int c = x0; c < x0 + widths[i]; ++c) {
                occ[static_cast<std::size_t>(r) * w + c] = 0;
                cells[static_cast<std::size_t>(r) * w + c] = i;
            }
        const int wall = x0 + widths[i];
        if (i + 1 < n) {
            Portal p;
            p.id = i;
            p.a = RoomId{i};
            p.b = RoomId{i + 1};
            double sx = 0, sy = 0;
            for (int r = door_lo; r < door_hi; ++r) {
                occ[static_cast<std::size_t>(r) * w + wall] = 0;
                cells[static_cast<std::size_t>(r) * w + wall] = i;
                p.cells.push_back({wall, r});
                sx += (wall + 0.5) * res;
                sy += (r + 0.5) * res;
            }
            p.midpoint = {sx / p.cells.size(), sy / p.cells.size()};
            portals.push_back(p);
        }
        x0 = wall + 1;
    }
    std::vector<RoomInfo> infos;
    for (int i = 0; i < n; ++i) infos.push_back({RoomId{i}, labels.at(static_cast<std::size_t>(i))});
    return Floorplan(OccupancyGrid(w, h, res, occ), RoomMap(w, h, res, cells, infos), portals);
}

// Rows listed bottom-up (index = grid row). '#' wall, '0'-'9' room cells, 'a'-'z' doorway cells;
// each letter is one doorway, owned by the smaller adjacent room id.
inline Floorplan ascii_plan(const std::vector<std::string>& rows, const std::vector<RoomLabel>& labels,
                            double res = 0.1) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.at(0).size());
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h, 1);
    std::vector<int> cells(occ.size(), -1);
    std::map<char, std::vector<Cell>> doors;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const char ch = rows[static_cast<std::size_t>(r)].at(static_cast<std::size_t>(c));
            if (ch >= '0' && ch <= '9') {
                occ[static_cast<std::size_t>(r) * w + c] = 0;
                cells[static_cast<std::size_t>(r) * w + c] = ch - '0';
            } else if (ch >= 'a' && ch <= 'z') {
                occ[static_cast<std::size_t>(r) * w + c] = 0;
                doors[ch].push_back({c, r});
            }
        }
    std::vector<Portal> portals;
    for (auto& [ch, list] : doors) {
        std::set<int> adj;
        for (Cell d : list)
            for (auto [dc, dr] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int nc = d.col + dc, nr = d.row + dr;
                if (nc < 0 || nr < 0 || nc >= w || nr >= h) continue;
                const char n = rows[static_cast<std::size_t>(nr)][static_cast<std::size_t>(nc)];
                if (n >= '0' && n <= '9') adj.insert(n - '0');
            }
        if (adj.size() != 2) throw std::runtime_error("doorway must touch exactly two rooms");
        Portal p;
        p.id = static_cast<int>(portals.size());
        p.a = RoomId{*adj.begin()};
        p.b = RoomId{*adj.rbegin()};
        double sx = 0, sy = 0;
        for (Cell d : list) {
            cells[static_cast<std::size_t>(d.row) * w + d.col] = p.a.value;
            sx += (d.col + 0.5) * res;
            sy += (d.row + 0.5) * res;
        }
        p.cells = list;
        p.midpoint = {sx / list.size(), sy / list.size()};
        portals.push_back(p);
    }
    std::vector<RoomInfo> infos;
    for (std::size_t i = 0; i < labels.size(); ++i) infos.push_back({RoomId{static_cast<int>(i)}, labels[i]});
    return Floorplan(OccupancyGrid(w, h, res, occ), RoomMap(w, h, res, cells, infos), portals);
}

// Rooms stacked along y (0 bottom), each `width` x `height` cells, 1 m-ish doorway centred in each wall.
inline Floorplan column_plan(int n, int width, int height, int door, const std::vector<RoomLabel>& labels) {
    std::vector<std::string> rows;
    const std::string wall(static_cast<std::size_t>(width) + 2, '#');
    rows.push_back(wall);
    const int lo = (width - door) / 2 + 1;
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < height; ++r) rows.push_back("#" + std::string(static_cast<std::size_t>(width), char('0' + i)) + "#");
        if (i + 1 < n) {
            std::string d = wall;
            for (int c = lo; c < lo + door; ++c) d[static_cast<std::size_t>(c)] = char('a' + i);
            rows.push_back(d);
        } else {
            rows.push_back(wall);
        }
    }
    return ascii_plan(rows, labels);
}

// Office | kitchen | bedroom, 3 m x 3 m each, 1 m doorways.
inline Floorplan three_room_plan() {
    return row_plan({30, 30, 30}, 30, 11, 21, {RoomLabel::Office, RoomLabel::Kitchen, RoomLabel::Bedroom});
}

inline Point cell_center(Cell c, double res = 0.1) { return {(c.col + 0.5) * res, (c.row + 0.5) * res}; }

// Random grid with a solid border and the given interior obstacle density.
inline OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution wall(density);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h, 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            bool border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
            occ[static_cast<std::size_t>(r) * w + c] = border || wall(rng) ? 1 : 0;
        }
    return OccupancyGrid(w, h, 0.1, occ);
}

// Exact step counts: (orthogonal, diagonal). Ordering by o + d*sqrt(2) is exact because
// sqrt(2) is irrational, so two different pairs never tie.
struct Steps {
    long o = 0;
    long d = 0;
    double value() const { return static_cast<double>(o) + static_cast<double>(d) * std::sqrt(2.0); }
};

// O(V^2) Dijkstra, no heap. Diagonal moves need at least one free orthogonal neighbor.
inline std::vector<Steps> brute_dijkstra(const OccupancyGrid& g, Cell src, std::vector<bool>& reached) {
    const int w = g.width(), h = g.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<Steps> dist(n);
    std::vector<bool> done(n, false);
    reached.assign(n, false);
    auto id = [&](int c, int r) { return static_cast<std::size_t>(r) * w + c; };
    auto free = [&](int c, int r) { return c >= 0 && r >= 0 && c < w && r < h && !g.occupied({c, r}); };
    if (!free(src.col, src.row)) return dist;
    reached[id(src.col, src.row)] = true;
    for (;;) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (reached[i] && !done[i] && (best == n || dist[i].value() < dist[best].value())) best = i;
        if (best == n) break;
        done[best] = true;
        const int c = static_cast<int>(best % w), r = static_cast<int>(best / w);
        for (int dc = -1; dc <= 1; ++dc)
            for (int dr = -1; dr <= 1; ++dr) {
                if (dc == 0 && dr == 0) continue;
                const int nc = c + dc, nr = r + dr;
                if (!free(nc, nr)) continue;
                const bool diag = dc != 0 && dr != 0;
                if (diag && !free(c + dc, r) && !free(c, r + dr)) continue;
                Steps s = dist[best];
                (diag ? s.d : s.o) += 1;
                const std::size_t j = id(nc, nr);
                if (!reached[j] || s.value() < dist[j].value()) {
                    reached[j] = true;
                    dist[j] = s;
                }
            }
    }
    return dist;
}

// Closed-box segment test over every occupied cell (slab clipping).
inline bool exact_los(const OccupancyGrid& g, Point a, Point b) {
    const double res = g.resolution();
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c) {
            if (!g.occupied({c, r})) continue;
            double t0 = 0.0, t1 = 1.0;
            const double lo[2] = {c * res, r * res}, hi[2] = {(c + 1) * res, (r + 1) * res};
            const double p[2] = {a.x, a.y}, d[2] = {b.x - a.x, b.y - a.y};
            bool hit = true;
            for (int k = 0; k < 2 && hit; ++k) {
                if (d[k] == 0.0) {
                    if (p[k] < lo[k] || p[k] > hi[k]) hit = false;
                    continue;
                }
                double u0 = (lo[k] - p[k]) / d[k], u1 = (hi[k] - p[k]) / d[k];
                if (u0 > u1) std::swap(u0, u1);
                t0 = std::max(t0, u0);
                t1 = std::min(t1, u1);
                if (t0 > t1) hit = false;
            }
            if (hit) return false;
        }
    return true;
}

// Dense point sampling; misses sub-sample corner clips, so it is only a one-sided check.
inline bool sampled_blocked(const OccupancyGrid& g, Point a, Point b, int samples) {
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        Cell c{static_cast<int>(std::floor(p.x / g.resolution())), static_cast<int>(std::floor(p.y / g.resolution()))};
        if (g.occupied(c)) return true;
    }
    return false;
}

inline double sum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

inline bool normalized(std::span<const double> v, double tol = 1e-9) {
    double s = 0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        s += x;
    }
    return !v.empty() && std::abs(s - 1.0) <= tol;
}

// Hand-built episode on an arbitrary plan, oracle-style: source, spawn, heatmap and audio set directly.
inline EpisodeSpec toy_episode(const Floorplan& plan, EmergencyKind cls, Polarity pol, Point source, Pose spawn,
                               std::vector<double> heat, AudioEvent audio) {
    EpisodeSpec ep;
    ep.id = "toy";
    ep.seed = 11;
    ep.cls = cls;
    ep.polarity = pol;
    ep.audio = audio;
    ep.truth.source = source;
    ep.truth.source_room = room_of(plan.rooms(), source);
    ep.truth.emergency = pol == Polarity::Positive;
    if (cls == EmergencyKind::Fall && pol == Polarity::Positive) {
        ep.truth.human = Pose{source.x, source.y, 0.0};
        ep.truth.source_entity = "fallen_human";
    } else if (cls == EmergencyKind::Fall) {
        ep.truth.source_entity = "box";
    } else {
        ep.truth.source_entity = pol == Polarity::Positive ? "stove" : "alarm";
    }
    ep.spawn = spawn;
    ep.heatmap.values = RoomDistribution(std::move(heat));
    return ep;
}

}  // namespace fx
