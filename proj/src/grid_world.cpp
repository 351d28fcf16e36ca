#include "qpath/grid_world.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "qpath/error.hpp"

namespace qpath {

std::size_t BoolGrid::count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::string_view to_string(ObstacleKind kind) noexcept {
    switch (kind) {
        case ObstacleKind::Static: return "static";
        case ObstacleKind::Dynamic: return "dynamic";
        case ObstacleKind::Moving: return "moving";
    }
    return "static";
}

std::optional<ObstacleKind> parse_obstacle_kind(std::string_view text) noexcept {
    if (text == "static") return ObstacleKind::Static;
    if (text == "dynamic") return ObstacleKind::Dynamic;
    if (text == "moving") return ObstacleKind::Moving;
    return std::nullopt;
}

namespace {

// round(n / d) with halves away from zero; d > 0
std::int64_t round_div(std::int64_t n, std::int64_t d) {
    if (n >= 0) return (2 * n + d) / (2 * d);
    return -((-2 * n + d) / (2 * d));
}

Cell interpolate(Cell from, Cell to, std::int64_t progress, std::int64_t total) {
    return {from.x + static_cast<int>(round_div((to.x - from.x) * progress, total)),
            from.y + static_cast<int>(round_div((to.y - from.y) * progress, total))};
}

}  // namespace

// Time is measured in units of 1/num ticks so every phase boundary is an
// integer: a dwell of d ticks lasts d*num units, a segment of Chebyshev
// length L lasts L*den units.
Cell MotionSchedule::position_at(std::int64_t elapsed_ticks) const {
    if (waypoints.empty()) return {};
    const std::size_t n = waypoints.size();
    auto dwell = [&](std::size_t i) -> std::int64_t {
        return i < dwell_ticks.size() ? dwell_ticks[i] : 0;
    };
    const std::size_t segments = loop ? n : n - 1;

    std::int64_t u = std::max<std::int64_t>(elapsed_ticks, 0) * speed.num;
    if (loop) {
        std::int64_t cycle = 0;
        for (std::size_t i = 0; i < n; ++i)
            cycle += dwell(i) * speed.num +
                     chebyshev_distance(waypoints[i], waypoints[(i + 1) % n]) * speed.den;
        if (cycle == 0) return waypoints.front();
        u %= cycle;
    }
    for (std::size_t i = 0; i < segments; ++i) {
        const std::int64_t d = dwell(i) * speed.num;
        if (u < d) return waypoints[i];
        u -= d;
        const Cell from = waypoints[i];
        const Cell to = waypoints[(i + 1) % n];
        const std::int64_t travel = chebyshev_distance(from, to) * speed.den;
        if (u < travel) return interpolate(from, to, u, travel);
        u -= travel;
    }
    return loop ? waypoints.front() : waypoints.back();
}

int MotionSchedule::max_step() const noexcept {
    if (speed.den <= 0) return 1;
    return static_cast<int>((speed.num + speed.den - 1) / speed.den);
}

Cell Obstacle::anchor_at(std::int64_t tick) const {
    if (kind == ObstacleKind::Static) return {0, 0};
    return schedule.position_at(tick - start_tick);
}

void Obstacle::cells_at(std::int64_t tick, std::vector<Cell>& out) const {
    const Cell anchor = anchor_at(tick);
    for (const Cell& f : footprint) out.push_back({anchor.x + f.x, anchor.y + f.y});
}

std::vector<Cell> Obstacle::cells_at(std::int64_t tick) const {
    std::vector<Cell> out;
    out.reserve(footprint.size());
    cells_at(tick, out);
    return out;
}

void validate_obstacle(const Obstacle& o, int width, int height) {
    const std::string who = "obstacle " + std::to_string(o.id);
    if (o.footprint.empty()) throw Error(ErrorCode::ValidationError, who + ": empty footprint");
    auto in_grid = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };
    auto check_at = [&](Cell anchor) {
        for (const Cell& f : o.footprint) {
            const Cell c{anchor.x + f.x, anchor.y + f.y};
            if (!in_grid(c))
                throw Error(ErrorCode::OutOfBounds, who + ": footprint cell (" + std::to_string(c.x) +
                                                        "," + std::to_string(c.y) + ") outside grid");
        }
    };
    const MotionSchedule& s = o.schedule;
    if (o.kind == ObstacleKind::Static) {
        if (!s.waypoints.empty())
            throw Error(ErrorCode::ValidationError, who + ": static obstacles have no schedule");
        check_at({0, 0});
        return;
    }
    if (s.waypoints.empty())
        throw Error(ErrorCode::ValidationError, who + ": schedule needs at least one waypoint");
    if (!s.dwell_ticks.empty() && s.dwell_ticks.size() != s.waypoints.size())
        throw Error(ErrorCode::ValidationError, who + ": dwell_ticks length must match waypoints");
    if (s.speed.num <= 0 || s.speed.den <= 0)
        throw Error(ErrorCode::ValidationError, who + ": speed must be a positive rational");
    for (std::int64_t d : s.dwell_ticks) {
        if (d < 0) throw Error(ErrorCode::ValidationError, who + ": negative dwell");
        if (o.kind == ObstacleKind::Moving && d != 0)
            throw Error(ErrorCode::ValidationError, who + ": moving obstacles cannot dwell");
    }
    if (o.start_tick < 0) throw Error(ErrorCode::ValidationError, who + ": negative start_tick");
    // Rounded interpolants stay inside the bounding box of their segment, so
    // checking the waypoints covers every scheduled position.
    for (const Cell& w : s.waypoints) check_at(w);
}

OccupancyWorld::OccupancyWorld(BoolGrid terrain, std::vector<Obstacle> obstacles, std::int64_t tick)
    : terrain_(std::move(terrain)), obstacles_(std::move(obstacles)), tick_(tick) {
    if (terrain_.width() < 1 || terrain_.height() < 1)
        throw Error(ErrorCode::DegenerateDims, "grid must be at least 1x1");
    for (const Obstacle& o : obstacles_) validate_obstacle(o, terrain_.width(), terrain_.height());
    for (std::size_t i = 0; i < obstacles_.size(); ++i)
        for (std::size_t j = i + 1; j < obstacles_.size(); ++j)
            if (obstacles_[i].id == obstacles_[j].id)
                throw Error(ErrorCode::ValidationError,
                            "duplicate obstacle id " + std::to_string(obstacles_[i].id));
    rebuild_static_mask();
}

void OccupancyWorld::rebuild_static_mask() {
    static_mask_ = terrain_;
    for (const Obstacle& o : obstacles_)
        if (o.kind == ObstacleKind::Static)
            for (const Cell& c : o.footprint) static_mask_.set(c, true);
}

const Obstacle* OccupancyWorld::find_obstacle(std::uint32_t id) const noexcept {
    for (const Obstacle& o : obstacles_)
        if (o.id == id) return &o;
    return nullptr;
}

bool OccupancyWorld::occupied(Cell c, std::int64_t tick) const {
    if (static_mask_.at(c)) return true;
    for (const Obstacle& o : obstacles_) {
        if (o.kind == ObstacleKind::Static) continue;
        const Cell anchor = o.anchor_at(tick);
        for (const Cell& f : o.footprint)
            if (anchor.x + f.x == c.x && anchor.y + f.y == c.y) return true;
    }
    return false;
}

BoolGrid OccupancyWorld::snapshot_at(std::int64_t tick) const {
    BoolGrid grid = static_mask_;
    for (const Obstacle& o : obstacles_) {
        if (o.kind == ObstacleKind::Static) continue;
        const Cell anchor = o.anchor_at(tick);
        for (const Cell& f : o.footprint) grid.set({anchor.x + f.x, anchor.y + f.y}, true);
    }
    return grid;
}

std::uint32_t OccupancyWorld::add_obstacle(Obstacle obstacle) {
    if (obstacle.id == 0) {
        std::uint32_t next = 1;
        for (const Obstacle& o : obstacles_) next = std::max(next, o.id + 1);
        obstacle.id = next;
    } else if (find_obstacle(obstacle.id) != nullptr) {
        throw Error(ErrorCode::ValidationError, "duplicate obstacle id " + std::to_string(obstacle.id));
    }
    validate_obstacle(obstacle, width(), height());
    const std::uint32_t id = obstacle.id;
    const bool is_static = obstacle.kind == ObstacleKind::Static;
    obstacles_.push_back(std::move(obstacle));
    if (is_static)
        for (const Cell& c : obstacles_.back().footprint) static_mask_.set(c, true);
    return id;
}

bool OccupancyWorld::remove_obstacle(std::uint32_t id) {
    auto it = std::find_if(obstacles_.begin(), obstacles_.end(),
                           [id](const Obstacle& o) { return o.id == id; });
    if (it == obstacles_.end()) return false;
    const bool was_static = it->kind == ObstacleKind::Static;
    obstacles_.erase(it);
    if (was_static) rebuild_static_mask();
    return true;
}

OccupancyWorld step_obstacles(OccupancyWorld world) {
    world.step();
    return world;
}

std::optional<Cell> next_state(const BoolGrid& occupancy, Cell s, int action) {
    if (action < 0 || action >= kNumActions) return std::nullopt;
    const Cell t = apply_offset(s, action);
    if (occupancy.blocked(t)) return std::nullopt;
    return t;
}

double turn_feature(const BoolGrid& occupancy, Cell s, int window_radius) {
    int total = 0;
    int blocked = 0;
    const int y0 = std::max(0, s.y - window_radius);
    const int y1 = std::min(occupancy.height() - 1, s.y + window_radius);
    const int x0 = std::max(0, s.x - window_radius);
    const int x1 = std::min(occupancy.width() - 1, s.x + window_radius);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (x == s.x && y == s.y) continue;
            ++total;
            if (occupancy.at({x, y})) ++blocked;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(blocked) / static_cast<double>(total);
}

}  // namespace qpath
