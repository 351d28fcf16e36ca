#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpath/grid_world.hpp"
#include "qpath/planner.hpp"

namespace qpath {

struct Mission {
    Cell source{};
    Cell destination{};
    std::vector<Cell> survivors;
    double safety_radius = 3.0;
    std::int64_t wait_timeout = 5;
    std::int64_t max_ticks = 1000;

    /// Throws ValidationError / OutOfBounds / EndpointBlocked.
    void validate(const OccupancyWorld& world) const;
};

enum class EventKind { Pause, Resume, Replan, SurvivorReached, Collision, Success, Timeout };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct MissionEvent {
    std::int64_t tick = 0;
    EventKind kind = EventKind::Pause;
    Cell cell{};         // agent cell when the event fired
    std::string detail;  // cause or reason, may be empty

    friend bool operator==(const MissionEvent&, const MissionEvent&) = default;
};

enum class Outcome { Running, Success, Collision, Timeout };

std::string_view to_string(Outcome outcome) noexcept;

struct MissionLog {
    std::vector<Cell> trajectory;  // agent cell at every tick, trajectory[t] at tick t
    std::vector<MissionEvent> events;
    Outcome outcome = Outcome::Running;
    int replan_count = 0;
    int pause_count = 0;
    StepCounts steps;
    double distance = 0.0;
    int turn_count = 0;

    std::int64_t ticks() const noexcept {
        return trajectory.empty() ? 0 : static_cast<std::int64_t>(trajectory.size()) - 1;
    }
    bool has_event(EventKind kind) const noexcept;
    std::size_t count(EventKind kind) const noexcept;

    friend bool operator==(const MissionLog&, const MissionLog&) = default;
};

/// One JSON object per line: a header, one "tick" record per tick followed by
/// that tick's "event" records, and a closing "summary".
void write_mission_log(const MissionLog& log, std::ostream& out);
std::string mission_log_to_string(const MissionLog& log);
/// Throws Error(ParseError).
MissionLog read_mission_log(std::istream& in);

/// Leg planner: path from `from` to `to` on `occupancy`. `visited` flags cells
/// already traversed. Throws Error(NoPath).
using LegPlanner = std::function<Path(const BoolGrid& occupancy, Cell from, Cell to, const BoolGrid& visited)>;

enum class ExecutionMode {
    /// Pause on conflicts, resume when clear, replan after wait_timeout.
    Reactive,
    /// Plan every leg on the tick-0 snapshot and follow it without reacting.
    StaticReplay,
};

/// Steps a mission one tick at a time. Per tick: obstacles advance; if the
/// agent's cell is occupied the mission ends in Collision; otherwise the
/// agent checks the next ceil(safety_radius) cells of its plan. A conflict is
/// an occupied plan cell within safety_radius of the agent, or a next cell an
/// obstacle could enter this tick. A conflict pauses the agent in place
/// (side-stepping only if its own cell could be entered next tick); clearing
/// resumes the old plan; a pause lasting wait_timeout ticks replans from the
/// current cell on the current occupancy.
class MissionRunner {
public:
    MissionRunner(OccupancyWorld world, Mission mission, LegPlanner planner,
                  ExecutionMode mode = ExecutionMode::Reactive);

    bool finished() const noexcept { return log_.outcome != Outcome::Running; }
    void step();
    /// Steps until finished.
    void run();

    const MissionLog& log() const noexcept { return log_; }
    const OccupancyWorld& world() const noexcept { return world_; }
    const Mission& mission() const noexcept { return mission_; }
    std::int64_t tick() const noexcept { return world_.tick(); }
    Cell agent() const noexcept { return agent_; }
    bool paused() const noexcept { return paused_; }
    Cell current_target() const noexcept { return target_; }
    /// Remaining plan including the agent's current cell.
    std::vector<Cell> planned_path() const;

    /// User interventions, applied between ticks.
    std::uint32_t add_obstacle(Obstacle obstacle) { return world_.add_obstacle(std::move(obstacle)); }
    bool remove_obstacle(std::uint32_t id) { return world_.remove_obstacle(id); }
    /// New destination (and planner trained for it); replans immediately.
    void retarget(Cell destination, LegPlanner planner);

private:
    void begin_leg();
    bool plan_leg(const BoolGrid& occupancy);
    void choose_target();
    bool conflict(const BoolGrid& occupancy) const;
    bool in_danger(Cell c) const;
    bool predicted_hit(Cell c) const;
    BoolGrid hazard_grid(const BoolGrid& occupancy) const;
    void hold(const BoolGrid& occupancy);
    void emit(EventKind kind, std::string detail = {});
    void finish(Outcome outcome, EventKind kind, std::string detail = {});
    void advance_agent();
    void handle_arrival(const BoolGrid& occupancy);
    void finalize_metrics();

    OccupancyWorld world_;
    Mission mission_;
    LegPlanner planner_;
    ExecutionMode mode_;

    Cell agent_{};
    Cell target_{};
    std::vector<Cell> pending_survivors_;
    bool target_is_survivor_ = false;
    std::vector<Cell> path_;
    std::size_t path_pos_ = 0;
    bool paused_ = false;
    std::int64_t pause_tick_ = 0;
    BoolGrid visited_;
    MissionLog log_;
};

/// Runs a mission to completion.
MissionLog execute_mission(OccupancyWorld world, const Mission& mission, const LegPlanner& planner,
                           ExecutionMode mode = ExecutionMode::Reactive);

/// Leg planners for the built-in planners.
LegPlanner hybrid_leg_planner(std::shared_ptr<const qrl::QTables> tables, PlannerConfig config);
LegPlanner astar_leg_planner();

}  // namespace qpath
