#include "emsim/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

namespace emsim {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

struct Offset {
    int dc;
    int dr;
};

constexpr std::array<Offset, 8> kNeighbors = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

}  // namespace

std::string to_string(RoomLabel l) {
    switch (l) {
        case RoomLabel::Kitchen: return "kitchen";
        case RoomLabel::Bedroom: return "bedroom";
        case RoomLabel::Office: return "office";
        case RoomLabel::LivingRoom: return "living_room";
        case RoomLabel::Bathroom: return "bathroom";
        case RoomLabel::Hallway: return "hallway";
        case RoomLabel::DiningRoom: return "dining_room";
    }
    return "?";
}

RoomLabel room_label_from_string(const std::string& s) {
    for (RoomLabel l : kAllRoomLabels)
        if (to_string(l) == s) return l;
    throw ConfigError("unknown room label: " + s);
}

// ---------------------------------------------------------------------------
// OccupancyGrid
// ---------------------------------------------------------------------------

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, std::vector<std::uint8_t> occupied)
    : width_(width), height_(height), resolution_(resolution), occupied_(std::move(occupied)) {
    if (!(resolution_ > 0.0)) throw ConfigError("grid resolution must be > 0");
    if (width_ <= 0 || height_ <= 0) throw ConfigError("grid must be non-empty");
    if (occupied_.size() != static_cast<std::size_t>(width_) * height_) throw ConfigError("grid size mismatch");
    for (int c = 0; c < width_; ++c)
        if (!occupied_[index({c, 0})] || !occupied_[index({c, height_ - 1})])
            throw ConfigError("grid boundary must be occupied");
    for (int r = 0; r < height_; ++r)
        if (!occupied_[index({0, r})] || !occupied_[index({width_ - 1, r})])
            throw ConfigError("grid boundary must be occupied");
}

bool OccupancyGrid::contains(Point p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x < width_ * resolution_ && p.y < height_ * resolution_;
}

Cell OccupancyGrid::cell_of(Point p) const {
    return {static_cast<int>(std::floor(p.x / resolution_)), static_cast<int>(std::floor(p.y / resolution_))};
}

OccupancyGrid OccupancyGrid::inflated(int radius_cells) const {
    if (radius_cells <= 0) return *this;
    std::vector<std::uint8_t> out = occupied_;
    const int r2 = radius_cells * radius_cells;
    for (int row = 0; row < height_; ++row) {
        for (int col = 0; col < width_; ++col) {
            if (!occupied_[index({col, row})]) continue;
            for (int dr = -radius_cells; dr <= radius_cells; ++dr) {
                for (int dc = -radius_cells; dc <= radius_cells; ++dc) {
                    if (dc * dc + dr * dr > r2) continue;
                    Cell n{col + dc, row + dr};
                    if (in_bounds(n)) out[index(n)] = 1;
                }
            }
        }
    }
    OccupancyGrid g;
    g.width_ = width_;
    g.height_ = height_;
    g.resolution_ = resolution_;
    g.occupied_ = std::move(out);
    return g;
}

// ---------------------------------------------------------------------------
// RoomMap / Floorplan
// ---------------------------------------------------------------------------

RoomMap::RoomMap(int width, int height, double resolution, std::vector<int> cells, std::vector<RoomInfo> rooms)
    : width_(width), height_(height), resolution_(resolution), cells_(std::move(cells)), rooms_(std::move(rooms)) {
    if (cells_.size() != static_cast<std::size_t>(width_) * height_) throw ConfigError("room map size mismatch");
    for (std::size_t i = 0; i < rooms_.size(); ++i)
        if (rooms_[i].id.value != static_cast<int>(i)) throw ConfigError("room ids must be 0..n-1 in order");
    for (int v : cells_)
        if (v < -1 || v >= static_cast<int>(rooms_.size())) throw ConfigError("room map references unknown room");
}

RoomId RoomMap::at(Cell c) const {
    if (c.col < 0 || c.row < 0 || c.col >= width_ || c.row >= height_) return RoomId{};
    return RoomId{cells_[static_cast<std::size_t>(c.row) * width_ + c.col]};
}

Floorplan::Floorplan(OccupancyGrid grid, RoomMap rooms, std::vector<Portal> portals)
    : grid_(std::move(grid)), rooms_(std::move(rooms)), portals_(std::move(portals)) {
    if (rooms_.width() != grid_.width() || rooms_.height() != grid_.height())
        throw ConfigError("room map and grid dimensions differ");
    if (rooms_.size() == 0) throw ConfigError("floorplan has no rooms");

    portal_cells_.assign(grid_.cell_count(), -1);
    for (std::size_t p = 0; p < portals_.size(); ++p) {
        const Portal& portal = portals_[p];
        if (portal.id != static_cast<int>(p)) throw ConfigError("portal ids must be 0..n-1 in order");
        if (!(portal.a < portal.b) || !portal.a.valid() || portal.b.index() >= rooms_.size())
            throw ConfigError("portal must link two distinct rooms");
        if (portal.cells.empty()) throw ConfigError("portal without cells");
        for (Cell c : portal.cells) {
            if (grid_.occupied(c)) throw ConfigError("portal cell is occupied");
            if (rooms_.at(c) != portal.owner()) throw ConfigError("portal cell not owned by smaller room id");
            portal_cells_[grid_.index(c)] = static_cast<int>(p);
        }
    }

    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        Cell c = grid_.cell_at(i);
        RoomId r = rooms_.at(c);
        if (grid_.is_free(c) != r.valid()) throw ConfigError("free cells must map to exactly one room");
    }

    // Distinct rooms may only touch where a portal cell is involved.
    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        Cell c = grid_.cell_at(i);
        RoomId r = rooms_.at(c);
        if (!r.valid()) continue;
        for (const Offset& o : kNeighbors) {
            Cell n{c.col + o.dc, c.row + o.dr};
            RoomId rn = rooms_.at(n);
            if (!rn.valid() || rn == r) continue;
            int pc = portal_cells_[i];
            int pn = grid_.in_bounds(n) ? portal_cells_[grid_.index(n)] : -1;
            int p = pc >= 0 ? pc : pn;
            if (p < 0 || !portals_[p].touches(r) || !portals_[p].touches(rn))
                throw ConfigError("rooms touch outside a portal");
        }
    }

    // Portal graph connectivity.
    std::vector<int> parent(rooms_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Portal& p : portals_) parent[find(p.a.value)] = find(p.b.value);
    for (std::size_t i = 0; i < rooms_.size(); ++i)
        if (find(static_cast<int>(i)) != find(0)) throw ConfigError("portal graph is disconnected");

    // Centroids over interior cells; anchors are the interior cells nearest the centroid.
    const std::size_t n = rooms_.size();
    std::vector<double> sx(n, 0.0), sy(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        Cell c = grid_.cell_at(i);
        RoomId r = rooms_.at(c);
        if (!r.valid() || portal_cells_[i] >= 0) continue;
        Point p = grid_.center(c);
        sx[r.index()] += p.x;
        sy[r.index()] += p.y;
        ++count[r.index()];
    }
    centroids_.resize(n);
    anchors_.resize(n);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < n; ++r) {
        if (count[r] == 0) throw ConfigError("room without interior cells");
        centroids_[r] = {sx[r] / count[r], sy[r] / count[r]};
    }
    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        Cell c = grid_.cell_at(i);
        RoomId r = rooms_.at(c);
        if (!r.valid() || portal_cells_[i] >= 0) continue;
        double d = distance(grid_.center(c), centroids_[r.index()]);
        if (d < best[r.index()]) {
            best[r.index()] = d;
            anchors_[r.index()] = c;
        }
    }
}

int Floorplan::portal_at(Cell c) const {
    if (!grid_.in_bounds(c)) return -1;
    return portal_cells_[grid_.index(c)];
}

std::vector<int> Floorplan::portals_of(RoomId r) const {
    std::vector<int> out;
    for (const Portal& p : portals_)
        if (p.touches(r)) out.push_back(p.id);
    return out;
}

std::vector<RoomId> Floorplan::neighbors(RoomId r) const {
    std::vector<RoomId> out;
    for (const Portal& p : portals_)
        if (p.touches(r) && std::find(out.begin(), out.end(), p.other(r)) == out.end()) out.push_back(p.other(r));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

struct Rect {
    int x0, y0, x1, y1;  // interior cells [x0, x1) x [y0, y1)
    int w() const { return x1 - x0; }
    int h() const { return y1 - y0; }
    long area() const { return static_cast<long>(w()) * h(); }
};

struct Door {
    int room_a;
    int room_b;
    bool vertical_wall;  // wall is a column
    int wall;            // column or row index of the wall line
    int lo, hi;          // shared span along the wall, [lo, hi)
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Labels for n rooms; index 0 goes to the largest room, the last to the smallest.
std::vector<RoomLabel> labels_for(int n) {
    std::vector<RoomLabel> extra = {RoomLabel::DiningRoom, RoomLabel::Bedroom, RoomLabel::Hallway, RoomLabel::Bedroom,
                                    RoomLabel::Office};
    std::vector<RoomLabel> out = {RoomLabel::LivingRoom, RoomLabel::Kitchen, RoomLabel::Bedroom, RoomLabel::Office};
    for (int i = 0; static_cast<int>(out.size()) < n - 1; ++i) out.push_back(extra[i % extra.size()]);
    out.push_back(RoomLabel::Bathroom);
    return out;
}

std::optional<Floorplan> try_generate(std::mt19937_64& rng, const GenerationParams& p) {
    const double res = p.resolution;
    const double area = uniform(rng, p.min_area, p.max_area);
    const double aspect = uniform(rng, 0.75, 1.35);
    const double w_m = std::sqrt(area * aspect);
    const double h_m = area / w_m;
    const int cols = std::max(1, static_cast<int>(std::lround(w_m / res)));
    const int rows = std::max(1, static_cast<int>(std::lround(h_m / res)));
    const int n_rooms = uniform_int(rng, p.min_rooms, p.max_rooms);
    const int min_side = std::max(1, static_cast<int>(std::ceil(p.min_room_side / res)));
    const int door = std::max(1, static_cast<int>(std::lround(p.door_width / res)));
    const int margin = 2;

    // Interior rectangles live in grid coordinates offset by the 1-cell outer wall.
    std::vector<Rect> rects = {{1, 1, 1 + cols, 1 + rows}};
    while (static_cast<int>(rects.size()) < n_rooms) {
        int pick = -1;
        for (int i = 0; i < static_cast<int>(rects.size()); ++i) {
            const Rect& r = rects[i];
            bool splittable = r.w() >= 2 * min_side + 1 || r.h() >= 2 * min_side + 1;
            if (splittable && (pick < 0 || r.area() > rects[pick].area())) pick = i;
        }
        if (pick < 0) return std::nullopt;
        Rect r = rects[pick];
        bool split_x = r.w() >= r.h();
        if (split_x && r.w() < 2 * min_side + 1) split_x = false;
        if (!split_x && r.h() < 2 * min_side + 1) split_x = true;
        const int lo = (split_x ? r.x0 : r.y0) + min_side;
        const int hi = (split_x ? r.x1 : r.y1) - min_side - 1;
        const int span = (split_x ? r.w() : r.h());
        const int base = split_x ? r.x0 : r.y0;
        int s = base + static_cast<int>(std::lround(span * uniform(rng, 0.35, 0.65)));
        s = std::clamp(s, lo, hi);
        Rect first = r, second = r;
        if (split_x) {
            first.x1 = s;
            second.x0 = s + 1;
        } else {
            first.y1 = s;
            second.y0 = s + 1;
        }
        rects[pick] = first;
        rects.push_back(second);
    }

    for (const Rect& r : rects)
        if (std::hypot(r.w() * res, r.h() * res) > p.max_room_diagonal) return std::nullopt;

    // Room ids by descending area so labels follow size.
    std::vector<int> order(rects.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rects[a].area() > rects[b].area(); });
    std::vector<Rect> sorted;
    for (int i : order) sorted.push_back(rects[i]);
    rects = std::move(sorted);

    std::vector<RoomLabel> labels = labels_for(n_rooms);
    // Living room stays largest and bathroom smallest; the rest vary between plans.
    if (labels.size() > 3) std::shuffle(labels.begin() + 1, labels.end() - 1, rng);

    // Candidate doors between rooms sharing a wall line.
    std::vector<Door> candidates;
    for (int i = 0; i < n_rooms; ++i) {
        for (int j = i + 1; j < n_rooms; ++j) {
            const Rect& a = rects[i];
            const Rect& b = rects[j];
            auto add = [&](bool vertical, int wall, int lo, int hi) {
                if (hi - lo >= door + 2 * margin) candidates.push_back({i, j, vertical, wall, lo, hi});
            };
            if (a.x1 + 1 == b.x0 || b.x1 + 1 == a.x0)
                add(true, a.x1 + 1 == b.x0 ? a.x1 : b.x1, std::max(a.y0, b.y0), std::min(a.y1, b.y1));
            if (a.y1 + 1 == b.y0 || b.y1 + 1 == a.y0)
                add(false, a.y1 + 1 == b.y0 ? a.y1 : b.y1, std::max(a.x0, b.x0), std::min(a.x1, b.x1));
        }
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);

    std::vector<int> parent(n_rooms);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<Door> doors;
    std::vector<Door> rest;
    for (const Door& d : candidates) {
        int ra = find(d.room_a), rb = find(d.room_b);
        if (ra != rb) {
            parent[ra] = rb;
            doors.push_back(d);
        } else {
            rest.push_back(d);
        }
    }
    for (int i = 0; i < n_rooms; ++i)
        if (find(i) != find(0)) return std::nullopt;
    for (const Door& d : rest) {
        bool duplicate = false;
        for (const Door& e : doors) duplicate |= (e.room_a == d.room_a && e.room_b == d.room_b);
        if (!duplicate && uniform(rng, 0.0, 1.0) < p.extra_door_probability) doors.push_back(d);
    }

    const int width = cols + 2;
    const int height = rows + 2;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(width) * height, 1);
    std::vector<int> room_cells(occ.size(), -1);
    auto idx = [&](int c, int r) { return static_cast<std::size_t>(r) * width + c; };
    for (int i = 0; i < n_rooms; ++i) {
        const Rect& r = rects[i];
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x) {
                occ[idx(x, y)] = 0;
                room_cells[idx(x, y)] = i;
            }
    }

    std::sort(doors.begin(), doors.end(), [](const Door& a, const Door& b) {
        return std::tie(a.room_a, a.room_b, a.wall, a.lo) < std::tie(b.room_a, b.room_b, b.wall, b.lo);
    });
    std::vector<Portal> portals;
    for (const Door& d : doors) {
        const int start = uniform_int(rng, d.lo + margin, d.hi - margin - door);
        Portal portal;
        portal.id = static_cast<int>(portals.size());
        portal.a = RoomId{d.room_a};
        portal.b = RoomId{d.room_b};
        for (int k = start; k < start + door; ++k) {
            Cell c = d.vertical_wall ? Cell{d.wall, k} : Cell{k, d.wall};
            occ[idx(c.col, c.row)] = 0;
            room_cells[idx(c.col, c.row)] = d.room_a;
            portal.cells.push_back(c);
        }
        const double mid = (start + door * 0.5) * res;
        const double wall_center = (d.wall + 0.5) * res;
        portal.midpoint = d.vertical_wall ? Point{wall_center, mid} : Point{mid, wall_center};
        portals.push_back(std::move(portal));
    }

    std::vector<RoomInfo> infos;
    for (int i = 0; i < n_rooms; ++i) infos.push_back({RoomId{i}, labels[i]});

    OccupancyGrid grid(width, height, res, std::move(occ));
    RoomMap rooms(width, height, res, std::move(room_cells), std::move(infos));
    return Floorplan(std::move(grid), std::move(rooms), std::move(portals));
}

}  // namespace

Floorplan generate_floorplan(std::uint64_t seed, const GenerationParams& params) {
    if (params.min_rooms < 1 || params.max_rooms < params.min_rooms) throw GenerationError("invalid room-count range");
    if (!(params.min_area > 0.0) || params.max_area < params.min_area) throw GenerationError("invalid area range");
    if (!(params.resolution > 0.0)) throw GenerationError("resolution must be > 0");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        if (auto plan = try_generate(rng, params)) return std::move(*plan);
    }
    throw GenerationError("no feasible floorplan after " + std::to_string(params.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Pathfinding
// ---------------------------------------------------------------------------

DistanceField::DistanceField(const OccupancyGrid& grid, Cell source)
    : width_(grid.width()), height_(grid.height()), resolution_(grid.resolution()), source_(source) {
    const std::size_t n = grid.cell_count();
    orth_.assign(n, -1);
    diag_.assign(n, -1);
    parent_.assign(n, -1);
    if (grid.occupied(source)) return;

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::vector<std::uint8_t> done(n, 0);
    const std::size_t s = index(source);
    orth_[s] = 0;
    diag_[s] = 0;
    parent_[s] = static_cast<std::int32_t>(s);
    open.push({0.0, s});
    while (!open.empty()) {
        auto [key, u] = open.top();
        open.pop();
        if (done[u]) continue;
        done[u] = 1;
        const Cell cu = grid.cell_at(u);
        for (const Offset& o : kNeighbors) {
            Cell cv{cu.col + o.dc, cu.row + o.dr};
            if (grid.occupied(cv)) continue;
            const bool diagonal = o.dc != 0 && o.dr != 0;
            if (diagonal && grid.occupied({cu.col + o.dc, cu.row}) && grid.occupied({cu.col, cu.row + o.dr})) continue;
            const std::size_t v = index(cv);
            if (done[v]) continue;
            const std::int32_t no = orth_[u] + (diagonal ? 0 : 1);
            const std::int32_t nd = diag_[u] + (diagonal ? 1 : 0);
            const double cand = no + nd * kSqrt2;
            if (orth_[v] < 0 || cand < orth_[v] + diag_[v] * kSqrt2) {
                orth_[v] = no;
                diag_[v] = nd;
                parent_[v] = static_cast<std::int32_t>(u);
                open.push({cand, v});
            }
        }
    }
}

bool DistanceField::reachable(Cell c) const {
    if (c.col < 0 || c.row < 0 || c.col >= width_ || c.row >= height_) return false;
    return orth_[index(c)] >= 0;
}

double DistanceField::cells(Cell c) const {
    if (!reachable(c)) return std::numeric_limits<double>::infinity();
    const std::size_t i = index(c);
    return orth_[i] + diag_[i] * kSqrt2;
}

double DistanceField::meters(Cell c) const {
    if (!reachable(c)) return std::numeric_limits<double>::infinity();
    const std::size_t i = index(c);
    return (orth_[i] + diag_[i] * kSqrt2) * resolution_;
}

std::vector<Cell> DistanceField::path_to_source(Cell from) const {
    std::vector<Cell> out;
    if (!reachable(from)) return out;
    std::size_t i = index(from);
    while (true) {
        out.push_back({static_cast<int>(i % width_), static_cast<int>(i / width_)});
        if (static_cast<std::size_t>(parent_[i]) == i) break;
        i = static_cast<std::size_t>(parent_[i]);
    }
    return out;
}

PathResult shortest_path(const OccupancyGrid& grid, Point from, Point to) {
    if (!grid.contains(from) || grid.occupied(grid.cell_of(from))) throw LocationError("path start is not free");
    if (!grid.contains(to) || grid.occupied(grid.cell_of(to))) throw LocationError("path goal is not free");
    const Cell goal = grid.cell_of(to);
    DistanceField field(grid, goal);
    const Cell start = grid.cell_of(from);
    if (!field.reachable(start)) throw NoPathError("goal unreachable");
    PathResult out;
    for (Cell c : field.path_to_source(start)) out.points.push_back(grid.center(c));
    out.length = field.meters(start);
    return out;
}

bool line_of_sight(const OccupancyGrid& grid, Point from, Point to) {
    if (!grid.contains(from) || !grid.contains(to)) return false;
    const double res = grid.resolution();
    const double u0 = from.x / res, v0 = from.y / res;
    const double u1 = to.x / res, v1 = to.y / res;
    int cx = static_cast<int>(std::floor(u0));
    int cy = static_cast<int>(std::floor(v0));
    const int ex = static_cast<int>(std::floor(u1));
    const int ey = static_cast<int>(std::floor(v1));
    if (grid.occupied({cx, cy})) return false;

    const double du = u1 - u0, dv = v1 - v0;
    const int sx = du > 0 ? 1 : (du < 0 ? -1 : 0);
    const int sy = dv > 0 ? 1 : (dv < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    double tmx = sx == 0 ? inf : (sx > 0 ? (cx + 1 - u0) : (u0 - cx)) / std::abs(du);
    double tmy = sy == 0 ? inf : (sy > 0 ? (cy + 1 - v0) : (v0 - cy)) / std::abs(dv);
    const double tdx = sx == 0 ? inf : 1.0 / std::abs(du);
    const double tdy = sy == 0 ? inf : 1.0 / std::abs(dv);

    int remaining = std::abs(ex - cx) + std::abs(ey - cy);
    while (remaining > 0) {
        if (tmx < tmy) {
            cx += sx;
            tmx += tdx;
            --remaining;
        } else if (tmy < tmx) {
            cy += sy;
            tmy += tdy;
            --remaining;
        } else {
            // Exact corner crossing: both side cells are touched.
            if (grid.occupied({cx + sx, cy}) || grid.occupied({cx, cy + sy})) return false;
            cx += sx;
            cy += sy;
            tmx += tdx;
            tmy += tdy;
            remaining -= 2;
        }
        if (grid.occupied({cx, cy})) return false;
    }
    return true;
}

RoomId room_of(const RoomMap& rooms, Point p) {
    const double res = rooms.resolution();
    if (p.x < 0.0 || p.y < 0.0) throw LocationError("point outside the map");
    Cell c{static_cast<int>(std::floor(p.x / res)), static_cast<int>(std::floor(p.y / res))};
    if (c.col >= rooms.width() || c.row >= rooms.height()) throw LocationError("point outside the map");
    RoomId r = rooms.at(c);
    if (!r.valid()) throw LocationError("point is in a wall");
    return r;
}

}  // namespace emsim
