#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qpath/geometry.hpp"

namespace qpath {

/// Dense row-major boolean raster. `true` means blocked.
class BoolGrid {
public:
    BoolGrid() = default;
    BoolGrid(int width, int height, bool fill = false)
        : width_(width), height_(height),
          cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }

    bool in_bounds(Cell c) const noexcept {
        return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
    }
    std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.x);
    }
    Cell cell(std::size_t index) const noexcept {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
                static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    bool at(Cell c) const noexcept { return cells_[index(c)] != 0; }
    /// Out-of-grid cells read as blocked.
    bool blocked(Cell c) const noexcept { return !in_bounds(c) || at(c); }
    void set(Cell c, bool v) noexcept { cells_[index(c)] = v ? 1 : 0; }

    std::size_t count() const noexcept;

    std::span<const std::uint8_t> raw() const noexcept { return cells_; }
    std::span<std::uint8_t> raw() noexcept { return cells_; }

    friend bool operator==(const BoolGrid&, const BoolGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
};

enum class ObstacleKind { Static, Dynamic, Moving };

std::string_view to_string(ObstacleKind kind) noexcept;
std::optional<ObstacleKind> parse_obstacle_kind(std::string_view text) noexcept;

/// Positive rational number of cells per tick.
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Waypoint schedule. At each waypoint the obstacle first waits its dwell,
/// then travels to the next waypoint along a straight line at `speed`, with
/// positions rounded to the nearest cell. Segment length is the Chebyshev
/// distance, so one cell per tick is one 8-connected step. A looping schedule
/// returns from the last waypoint to the first; otherwise it holds at the last.
struct MotionSchedule {
    std::vector<Cell> waypoints;
    std::vector<std::int64_t> dwell_ticks;
    Rational speed;
    bool loop = false;

    Cell position_at(std::int64_t elapsed_ticks) const;
    /// Largest per-tick displacement in cells (Chebyshev).
    int max_step() const noexcept;

    friend bool operator==(const MotionSchedule&, const MotionSchedule&) = default;
};

/// For Static obstacles the footprint holds absolute cells. For Dynamic and
/// Moving obstacles it holds offsets from the schedule position, and the
/// schedule clock starts at `start_tick`.
struct Obstacle {
    std::uint32_t id = 0;
    ObstacleKind kind = ObstacleKind::Static;
    std::vector<Cell> footprint;
    MotionSchedule schedule;
    std::int64_t start_tick = 0;

    Cell anchor_at(std::int64_t tick) const;
    /// Appends the cells covered at `tick`.
    void cells_at(std::int64_t tick, std::vector<Cell>& out) const;
    std::vector<Cell> cells_at(std::int64_t tick) const;

    friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Throws Error(ValidationError / OutOfBounds) when the obstacle violates its
/// kind's schedule rules or leaves the grid at any scheduled position.
void validate_obstacle(const Obstacle& obstacle, int width, int height);

/// Grid environment with static terrain and scheduled obstacles. Occupancy is
/// a pure function of (terrain, obstacles, tick).
class OccupancyWorld {
public:
    OccupancyWorld() = default;
    OccupancyWorld(BoolGrid terrain, std::vector<Obstacle> obstacles, std::int64_t tick = 0);

    int width() const noexcept { return static_mask_.width(); }
    int height() const noexcept { return static_mask_.height(); }
    std::int64_t tick() const noexcept { return tick_; }
    bool in_bounds(Cell c) const noexcept { return static_mask_.in_bounds(c); }

    /// Terrain from the grid source, without obstacles.
    const BoolGrid& terrain() const noexcept { return terrain_; }
    /// Terrain plus every Static obstacle footprint.
    const BoolGrid& static_mask() const noexcept { return static_mask_; }
    std::span<const Obstacle> obstacles() const noexcept { return obstacles_; }
    const Obstacle* find_obstacle(std::uint32_t id) const noexcept;

    bool occupied(Cell c) const { return occupied(c, tick_); }
    bool occupied(Cell c, std::int64_t tick) const;

    /// Full occupancy raster at the current tick / at an arbitrary tick.
    BoolGrid snapshot() const { return snapshot_at(tick_); }
    BoolGrid snapshot_at(std::int64_t tick) const;

    std::size_t free_static_cells() const noexcept {
        return static_mask_.size() - static_mask_.count();
    }

    void step() noexcept { ++tick_; }

    /// Runtime edits (user interventions). add_obstacle validates and assigns
    /// a fresh id when `obstacle.id == 0`; returns the id used.
    std::uint32_t add_obstacle(Obstacle obstacle);
    bool remove_obstacle(std::uint32_t id);

private:
    void rebuild_static_mask();

    BoolGrid terrain_;
    BoolGrid static_mask_;
    std::vector<Obstacle> obstacles_;
    std::int64_t tick_ = 0;
};

/// Returns a copy advanced by one tick.
OccupancyWorld step_obstacles(OccupancyWorld world);

/// Target of action `a` from `s`, or nullopt when it leaves the grid or lands
/// on a blocked cell.
std::optional<Cell> next_state(const BoolGrid& occupancy, Cell s, int action);

/// Fraction of the (2w+1)^2 window around `s` (centre excluded, clipped at
/// the borders) that is blocked in `occupancy`.
double turn_feature(const BoolGrid& occupancy, Cell s, int window_radius);

}  // namespace qpath
