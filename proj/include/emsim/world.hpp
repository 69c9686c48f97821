#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emsim/common.hpp"

namespace emsim {

enum class RoomLabel { Kitchen, Bedroom, Office, LivingRoom, Bathroom, Hallway, DiningRoom };

inline constexpr RoomLabel kAllRoomLabels[] = {RoomLabel::Kitchen,  RoomLabel::Bedroom,    RoomLabel::Office,
                                               RoomLabel::LivingRoom, RoomLabel::Bathroom, RoomLabel::Hallway,
                                               RoomLabel::DiningRoom};

std::string to_string(RoomLabel l);
RoomLabel room_label_from_string(const std::string& s);

struct Cell {
    int col = 0;
    int row = 0;

    bool operator==(const Cell&) const = default;
};

// Row-major grid of free/occupied flags. World coordinates: x = col * resolution,
// y = row * resolution; cell (c, r) spans [c*res, (c+1)*res) x [r*res, (r+1)*res).
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    // Throws ConfigError unless resolution > 0, sizes match and every boundary cell is occupied.
    OccupancyGrid(int width, int height, double resolution, std::vector<std::uint8_t> occupied);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    std::size_t cell_count() const { return occupied_.size(); }

    bool in_bounds(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
    bool contains(Point p) const;
    // Out-of-bounds cells count as occupied.
    bool occupied(Cell c) const { return !in_bounds(c) || occupied_[index(c)] != 0; }
    bool is_free(Cell c) const { return !occupied(c); }

    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }
    Cell cell_at(std::size_t idx) const { return {static_cast<int>(idx % width_), static_cast<int>(idx / width_)}; }
    Cell cell_of(Point p) const;
    Point center(Cell c) const { return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_}; }

    const std::vector<std::uint8_t>& data() const { return occupied_; }

    // Every cell within `radius_cells` (Euclidean, center to center) of an occupied cell becomes occupied.
    OccupancyGrid inflated(int radius_cells) const;

    bool operator==(const OccupancyGrid&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.1;
    std::vector<std::uint8_t> occupied_;
};

struct RoomInfo {
    RoomId id;
    RoomLabel label = RoomLabel::LivingRoom;

    bool operator==(const RoomInfo&) const = default;
};

class RoomMap {
public:
    RoomMap() = default;
    // `cells` holds a room index per cell, -1 for walls.
    RoomMap(int width, int height, double resolution, std::vector<int> cells, std::vector<RoomInfo> rooms);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }

    RoomId at(Cell c) const;
    const std::vector<int>& cells() const { return cells_; }
    const std::vector<RoomInfo>& rooms() const { return rooms_; }
    std::size_t size() const { return rooms_.size(); }
    RoomLabel label(RoomId r) const { return rooms_.at(r.index()).label; }

    bool operator==(const RoomMap&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.1;
    std::vector<int> cells_;
    std::vector<RoomInfo> rooms_;
};

// Doorway between exactly two rooms. Its cells belong to the smaller room id.
struct Portal {
    int id = 0;
    RoomId a;  // a < b
    RoomId b;
    std::vector<Cell> cells;
    Point midpoint;

    RoomId owner() const { return a < b ? a : b; }
    bool touches(RoomId r) const { return r == a || r == b; }
    RoomId other(RoomId r) const { return r == a ? b : a; }

    bool operator==(const Portal&) const = default;
};

class Floorplan {
public:
    Floorplan() = default;
    // Throws ConfigError if any free cell lacks a room, a portal is malformed,
    // two rooms touch outside a portal, or the portal graph is disconnected.
    Floorplan(OccupancyGrid grid, RoomMap rooms, std::vector<Portal> portals);

    const OccupancyGrid& grid() const { return grid_; }
    const RoomMap& rooms() const { return rooms_; }
    const std::vector<Portal>& portals() const { return portals_; }
    std::size_t room_count() const { return rooms_.size(); }

    // Portal index at a cell, or -1.
    int portal_at(Cell c) const;
    std::vector<int> portals_of(RoomId r) const;
    std::vector<RoomId> neighbors(RoomId r) const;

    Point centroid(RoomId r) const { return centroids_.at(r.index()); }
    // Interior (non-portal) room cell nearest the centroid; the navigation goal for a room.
    Cell anchor(RoomId r) const { return anchors_.at(r.index()); }
    Point anchor_point(RoomId r) const { return grid_.center(anchor(r)); }

    bool operator==(const Floorplan& o) const {
        return grid_ == o.grid_ && rooms_ == o.rooms_ && portals_ == o.portals_;
    }

private:
    OccupancyGrid grid_;
    RoomMap rooms_;
    std::vector<Portal> portals_;
    std::vector<int> portal_cells_;
    std::vector<Point> centroids_;
    std::vector<Cell> anchors_;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // degrees in [0, 360)

    Point position() const { return {x, y}; }
    bool operator==(const Pose&) const = default;
};

// ---------------------------------------------------------------------------
// Procedural generation
// ---------------------------------------------------------------------------

struct GenerationParams {
    int min_rooms = 5;
    int max_rooms = 9;
    double min_area = 93.0;   // m^2, 1000 sq ft
    double max_area = 140.0;  // m^2, 1500 sq ft
    double resolution = 0.1;
    double min_room_side = 2.0;
    double max_room_diagonal = 9.5;
    double door_width = 1.0;
    double extra_door_probability = 0.35;
    int max_attempts = 64;
};

// Recursive rectangular subdivision with door insertion. Pure function of (seed, params).
// Throws GenerationError when no valid plan is found within params.max_attempts.
Floorplan generate_floorplan(std::uint64_t seed, const GenerationParams& params = {});

// ---------------------------------------------------------------------------
// Pathfinding and visibility
// ---------------------------------------------------------------------------

// Single-source Dijkstra over the 8-connected grid. Orthogonal steps cost 1 cell,
// diagonal steps sqrt(2); a diagonal is blocked when both orthogonal neighbors are occupied.
// Lengths are kept as exact (orthogonal, diagonal) step counts.
class DistanceField {
public:
    DistanceField() = default;
    DistanceField(const OccupancyGrid& grid, Cell source);

    Cell source() const { return source_; }
    bool reachable(Cell c) const;
    // Path length in meters; +inf if unreachable.
    double meters(Cell c) const;
    double cells(Cell c) const;
    // Cells from `from` back to the source (both included). Empty if unreachable.
    std::vector<Cell> path_to_source(Cell from) const;

private:
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.1;
    Cell source_;
    std::vector<std::int32_t> orth_;
    std::vector<std::int32_t> diag_;
    std::vector<std::int32_t> parent_;
};

struct PathResult {
    std::vector<Point> points;  // cell centers, from -> to
    double length = 0.0;        // meters
};

// Throws LocationError if an endpoint is not free, NoPathError if unreachable.
PathResult shortest_path(const OccupancyGrid& grid, Point from, Point to);

// True iff the segment crosses no occupied cell. Cells touched only at a corner count as crossed.
bool line_of_sight(const OccupancyGrid& grid, Point from, Point to);

// Throws LocationError for wall or out-of-bounds points.
RoomId room_of(const RoomMap& rooms, Point p);

}  // namespace emsim
