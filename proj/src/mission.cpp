#include "qpath/mission.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qpath/error.hpp"
#include "qpath/metrics.hpp"

namespace qpath {
namespace {

std::string cell_text(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

nlohmann::json cell_json(Cell c) { return nlohmann::json::array({c.x, c.y}); }

Cell cell_from(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw Error(ErrorCode::ParseError, std::string("field '") + what + "': expected [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

std::optional<Outcome> parse_outcome(std::string_view text) {
    for (Outcome o : {Outcome::Running, Outcome::Success, Outcome::Collision, Outcome::Timeout})
        if (to_string(o) == text) return o;
    return std::nullopt;
}

bool recoverable(const Error& e) {
    return e.code() == ErrorCode::NoPath || e.code() == ErrorCode::EndpointBlocked;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::Pause: return "Pause";
        case EventKind::Resume: return "Resume";
        case EventKind::Replan: return "Replan";
        case EventKind::SurvivorReached: return "SurvivorReached";
        case EventKind::Collision: return "Collision";
        case EventKind::Success: return "Success";
        case EventKind::Timeout: return "Timeout";
    }
    return "Unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
    for (EventKind k : {EventKind::Pause, EventKind::Resume, EventKind::Replan, EventKind::SurvivorReached,
                        EventKind::Collision, EventKind::Success, EventKind::Timeout})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::string_view to_string(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Running: return "Running";
        case Outcome::Success: return "Success";
        case Outcome::Collision: return "Collision";
        case Outcome::Timeout: return "Timeout";
    }
    return "Unknown";
}

bool MissionLog::has_event(EventKind kind) const noexcept { return count(kind) > 0; }

std::size_t MissionLog::count(EventKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const MissionEvent& e) { return e.kind == kind; }));
}

void Mission::validate(const OccupancyWorld& world) const {
    if (!(safety_radius >= 1.0) || !std::isfinite(safety_radius))
        throw Error(ErrorCode::ValidationError, "safety_radius must be >= 1");
    if (wait_timeout < 1) throw Error(ErrorCode::ValidationError, "wait_timeout must be >= 1");
    if (max_ticks < 1) throw Error(ErrorCode::ValidationError, "max_ticks must be >= 1");
    auto check = [&](Cell c, const std::string& what) {
        if (!world.in_bounds(c)) throw Error(ErrorCode::OutOfBounds, what + " " + cell_text(c) + " outside grid");
        if (world.occupied(c)) throw Error(ErrorCode::EndpointBlocked, what + " " + cell_text(c) + " is occupied");
    };
    check(source, "source");
    check(destination, "destination");
    for (std::size_t i = 0; i < survivors.size(); ++i) check(survivors[i], "survivor " + std::to_string(i));
}

// ---------------------------------------------------------------------------

MissionRunner::MissionRunner(OccupancyWorld world, Mission mission, LegPlanner planner, ExecutionMode mode)
    : world_(std::move(world)), mission_(std::move(mission)), planner_(std::move(planner)), mode_(mode) {
    mission_.validate(world_);
    agent_ = mission_.source;
    visited_ = BoolGrid(world_.width(), world_.height());
    visited_.set(agent_, true);
    log_.trajectory.push_back(agent_);
    for (Cell s : mission_.survivors)
        if (std::find(pending_survivors_.begin(), pending_survivors_.end(), s) == pending_survivors_.end())
            pending_survivors_.push_back(s);

    const BoolGrid occ = world_.snapshot();
    if (mode_ == ExecutionMode::StaticReplay) {
        // One route over every leg, planned on the tick-0 snapshot.
        std::vector<Cell> pending = pending_survivors_;
        Cell at = agent_;
        std::vector<Cell> route{at};
        auto drop_visited = [&](std::span<const Cell> cells) {
            for (Cell c : cells) std::erase(pending, c);
        };
        drop_visited(route);
        for (;;) {
            Cell goal = mission_.destination;
            if (!pending.empty()) {
                goal = *std::min_element(pending.begin(), pending.end(), [&](Cell a, Cell b) {
                    return octile_distance(at, a) < octile_distance(at, b);
                });
            } else if (at == mission_.destination) {
                break;
            }
            Path leg;
            try {
                leg = planner_(occ, at, goal, visited_);
            } catch (const Error& e) {
                if (!recoverable(e)) throw;
                finish(Outcome::Timeout, EventKind::Timeout, "NoPath");
                return;
            }
            route.insert(route.end(), leg.cells.begin() + 1, leg.cells.end());
            drop_visited(leg.cells);
            at = goal;
        }
        path_ = std::move(route);
        path_pos_ = 0;
        target_ = mission_.destination;
        handle_arrival(occ);
        return;
    }

    handle_arrival(occ);
    if (finished() || !path_.empty()) return;
    choose_target();
    if (!plan_leg(occ)) finish(Outcome::Timeout, EventKind::Timeout, "NoPath");
}

std::vector<Cell> MissionRunner::planned_path() const {
    if (path_pos_ >= path_.size()) return {agent_};
    return {path_.begin() + static_cast<std::ptrdiff_t>(path_pos_), path_.end()};
}

void MissionRunner::choose_target() {
    if (pending_survivors_.empty()) {
        target_ = mission_.destination;
        target_is_survivor_ = false;
        return;
    }
    // Nearest by octile distance; list order breaks ties.
    target_ = *std::min_element(pending_survivors_.begin(), pending_survivors_.end(), [&](Cell a, Cell b) {
        return octile_distance(agent_, a) < octile_distance(agent_, b);
    });
    target_is_survivor_ = true;
}

bool MissionRunner::plan_leg(const BoolGrid& occupancy) {
    // Try the live occupancy first, then the static terrain: a leg that only
    // exists through currently occupied cells is still followed, and the
    // conflict check holds the agent until those cells clear.
    for (const BoolGrid* grid : {&occupancy, &world_.static_mask()}) {
        try {
            Path p = planner_(*grid, agent_, target_, visited_);
            path_ = std::move(p.cells);
            path_pos_ = 0;
            return true;
        } catch (const Error& e) {
            if (!recoverable(e)) throw;
        }
    }
    return false;
}

BoolGrid MissionRunner::hazard_grid(const BoolGrid& occupancy) const {
    BoolGrid grid = occupancy;
    std::vector<Cell> cells;
    for (const Obstacle& o : world_.obstacles()) {
        if (o.kind == ObstacleKind::Static) continue;
        const std::int64_t t = world_.tick();
        if (o.kind == ObstacleKind::Dynamic && (t == 0 || o.anchor_at(t) == o.anchor_at(t - 1))) continue;
        const int r = o.schedule.max_step();
        cells.clear();
        o.cells_at(world_.tick(), cells);
        for (Cell c : cells)
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const Cell n{c.x + dx, c.y + dy};
                    if (grid.in_bounds(n)) grid.set(n, true);
                }
    }
    grid.set(agent_, false);
    if (grid.in_bounds(target_)) grid.set(target_, occupancy.at(target_));
    return grid;
}

bool MissionRunner::conflict(const BoolGrid& occupancy) const {
    if (path_pos_ + 1 >= path_.size()) return false;
    const double r = mission_.safety_radius;
    const auto lookahead = static_cast<std::size_t>(std::max(1.0, std::ceil(r)));
    for (std::size_t k = 1; k <= lookahead && path_pos_ + k < path_.size(); ++k) {
        const Cell c = path_[path_pos_ + k];
        if (occupancy.at(c) && euclidean_distance(agent_, c) <= r) return true;
    }
    // Hazard guard: the next cell is also a conflict when a moving obstacle
    // could enter it during the next tick.
    const Cell next = path_[path_pos_ + 1];
    return occupancy.at(next) || in_danger(next);
}

bool MissionRunner::in_danger(Cell c) const {
    const std::int64_t t = world_.tick();
    std::vector<Cell> cells;
    for (const Obstacle& o : world_.obstacles()) {
        if (o.kind == ObstacleKind::Static) continue;
        // Moving obstacles never stop; dynamic ones count while seen moving.
        if (o.kind == ObstacleKind::Dynamic && (t == 0 || o.anchor_at(t) == o.anchor_at(t - 1))) continue;
        const int reach = o.schedule.max_step();
        cells.clear();
        o.cells_at(t, cells);
        for (Cell oc : cells)
            if (chebyshev_distance(oc, c) <= reach) return true;
    }
    return false;
}

bool MissionRunner::predicted_hit(Cell c) const {
    // Constant-velocity guess from the last tick's displacement.
    const std::int64_t t = world_.tick();
    for (const Obstacle& o : world_.obstacles()) {
        if (o.kind == ObstacleKind::Static) continue;
        const Cell now = o.anchor_at(t);
        const Cell before = t > 0 ? o.anchor_at(t - 1) : now;
        const Cell ahead{2 * now.x - before.x, 2 * now.y - before.y};
        for (const Cell& f : o.footprint)
            if (ahead.x + f.x == c.x && ahead.y + f.y == c.y) return true;
    }
    return false;
}

void MissionRunner::hold(const BoolGrid& occupancy) {
    if (!in_danger(agent_)) return;
    // Holding here could be fatal: side-step to a safe neighbour and come
    // back onto the plan afterwards. The next plan cell is preferred. When
    // no neighbour is out of reach, settle for one off the predicted track.
    auto try_step = [&](auto unsafe) {
        if (path_pos_ + 1 < path_.size()) {
            const Cell next = path_[path_pos_ + 1];
            if (!occupancy.at(next) && !unsafe(next)) {
                advance_agent();
                return true;
            }
        }
        for (int a = 0; a < kNumActions; ++a) {
            const auto n = next_state(occupancy, agent_, a);
            if (!n || unsafe(*n)) continue;
            const auto at = path_.begin() + static_cast<std::ptrdiff_t>(path_pos_) + 1;
            path_.insert(at, {*n, agent_});
            advance_agent();
            return true;
        }
        return false;
    };
    if (try_step([this](Cell c) { return in_danger(c); })) return;
    if (predicted_hit(agent_)) try_step([this](Cell c) { return predicted_hit(c); });
}

void MissionRunner::emit(EventKind kind, std::string detail) {
    log_.events.push_back({world_.tick(), kind, agent_, std::move(detail)});
    if (kind == EventKind::Pause) ++log_.pause_count;
    if (kind == EventKind::Replan) ++log_.replan_count;
}

void MissionRunner::finish(Outcome outcome, EventKind kind, std::string detail) {
    if (finished()) return;
    emit(kind, std::move(detail));
    log_.outcome = outcome;
    paused_ = false;
    finalize_metrics();
}

void MissionRunner::finalize_metrics() {
    log_.steps = step_counts(log_.trajectory);
    log_.distance = log_.steps.length();
    log_.turn_count = smoothness(log_.trajectory);
}

void MissionRunner::advance_agent() {
    if (path_pos_ + 1 >= path_.size()) return;
    ++path_pos_;
    agent_ = path_[path_pos_];
    visited_.set(agent_, true);
}

void MissionRunner::handle_arrival(const BoolGrid& occupancy) {
    if (finished()) return;
    if (auto it = std::find(pending_survivors_.begin(), pending_survivors_.end(), agent_);
        it != pending_survivors_.end()) {
        pending_survivors_.erase(it);
        emit(EventKind::SurvivorReached);
    }
    if (pending_survivors_.empty() && agent_ == mission_.destination) {
        finish(Outcome::Success, EventKind::Success);
        return;
    }
    if (mode_ == ExecutionMode::StaticReplay || path_.empty()) return;
    const bool target_done =
        agent_ == target_ ||
        (target_is_survivor_ &&
         std::find(pending_survivors_.begin(), pending_survivors_.end(), target_) == pending_survivors_.end());
    if (!target_done) return;
    choose_target();
    if (!plan_leg(occupancy)) finish(Outcome::Timeout, EventKind::Timeout, "NoPath");
}

void MissionRunner::step() {
    if (finished()) return;
    world_.step();
    const std::int64_t t = world_.tick();
    const BoolGrid occ = world_.snapshot();

    auto record = [&] { log_.trajectory.push_back(agent_); };

    if (occ.at(agent_)) {
        record();
        finish(Outcome::Collision, EventKind::Collision, "struck at " + cell_text(agent_));
        return;
    }

    if (mode_ == ExecutionMode::StaticReplay) {
        advance_agent();
    } else if (paused_) {
        if (!conflict(occ)) {
            paused_ = false;
            emit(EventKind::Resume);
            advance_agent();
        } else if (t - pause_tick_ >= mission_.wait_timeout) {
            emit(EventKind::Replan, "Timeout");
            const BoolGrid hazard = hazard_grid(occ);
            bool ok = false;
            try {
                Path p = planner_(hazard, agent_, target_, visited_);
                path_ = std::move(p.cells);
                path_pos_ = 0;
                ok = true;
            } catch (const Error& e) {
                if (!recoverable(e)) throw;
            }
            if (!ok && !plan_leg(occ)) {
                record();
                finish(Outcome::Timeout, EventKind::Timeout, "NoPath");
                return;
            }
            if (conflict(occ)) {
                pause_tick_ = t;
                emit(EventKind::Pause, "Conflict");
                hold(occ);
            } else {
                paused_ = false;
                advance_agent();
            }
        } else {
            hold(occ);
        }
    } else if (conflict(occ)) {
        paused_ = true;
        pause_tick_ = t;
        emit(EventKind::Pause, "Conflict");
        hold(occ);
    } else {
        advance_agent();
    }

    record();
    if (occ.at(agent_)) {
        finish(Outcome::Collision, EventKind::Collision, "entered " + cell_text(agent_));
        return;
    }
    handle_arrival(occ);
    if (!finished() && t >= mission_.max_ticks) finish(Outcome::Timeout, EventKind::Timeout, "TickBudget");
}

void MissionRunner::run() {
    while (!finished()) step();
}

void MissionRunner::retarget(Cell destination, LegPlanner planner) {
    if (finished()) throw Error(ErrorCode::ValidationError, "mission already finished");
    if (!world_.in_bounds(destination))
        throw Error(ErrorCode::OutOfBounds, "destination " + cell_text(destination) + " outside grid");
    if (world_.static_mask().at(destination))
        throw Error(ErrorCode::EndpointBlocked, "destination " + cell_text(destination) + " is blocked");
    mission_.destination = destination;
    planner_ = std::move(planner);
    const BoolGrid occ = world_.snapshot();
    if (pending_survivors_.empty() && agent_ == destination) {
        finish(Outcome::Success, EventKind::Success);
        return;
    }
    emit(EventKind::Replan, "DestinationMoved");
    choose_target();
    if (!plan_leg(occ)) finish(Outcome::Timeout, EventKind::Timeout, "NoPath");
}

MissionLog execute_mission(OccupancyWorld world, const Mission& mission, const LegPlanner& planner,
                           ExecutionMode mode) {
    MissionRunner runner(std::move(world), mission, planner, mode);
    runner.run();
    return runner.log();
}

LegPlanner hybrid_leg_planner(std::shared_ptr<const qrl::QTables> tables, PlannerConfig config) {
    return [tables = std::move(tables), config](const BoolGrid& occ, Cell from, Cell to, const BoolGrid& visited) {
        return plan_hybrid(occ, *tables, from, to, config, &visited);
    };
}

LegPlanner astar_leg_planner() {
    return [](const BoolGrid& occ, Cell from, Cell to, const BoolGrid&) { return plan_astar(occ, from, to); };
}

// ---------------------------------------------------------------------------

void write_mission_log(const MissionLog& log, std::ostream& out) {
    out << nlohmann::json{{"type", "header"}, {"format", "qpath-mission-log"}, {"version", 1}}.dump() << '\n';
    std::size_t e = 0;
    for (std::size_t t = 0; t < log.trajectory.size(); ++t) {
        out << nlohmann::json{{"type", "tick"}, {"tick", t}, {"agent", cell_json(log.trajectory[t])}}.dump()
            << '\n';
        for (; e < log.events.size() && log.events[e].tick <= static_cast<std::int64_t>(t); ++e) {
            const MissionEvent& ev = log.events[e];
            out << nlohmann::json{{"type", "event"},
                                  {"tick", ev.tick},
                                  {"event", to_string(ev.kind)},
                                  {"cell", cell_json(ev.cell)},
                                  {"detail", ev.detail}}
                       .dump()
                << '\n';
        }
    }
    for (; e < log.events.size(); ++e) {
        const MissionEvent& ev = log.events[e];
        out << nlohmann::json{{"type", "event"},
                              {"tick", ev.tick},
                              {"event", to_string(ev.kind)},
                              {"cell", cell_json(ev.cell)},
                              {"detail", ev.detail}}
                   .dump()
            << '\n';
    }
    out << nlohmann::json{{"type", "summary"},
                          {"outcome", to_string(log.outcome)},
                          {"ticks", log.ticks()},
                          {"replans", log.replan_count},
                          {"pauses", log.pause_count},
                          {"distance", log.distance},
                          {"cardinal_steps", log.steps.cardinal},
                          {"diagonal_steps", log.steps.diagonal},
                          {"turns", log.turn_count}}
               .dump()
        << '\n';
}

std::string mission_log_to_string(const MissionLog& log) {
    std::ostringstream out;
    write_mission_log(log, out);
    return out.str();
}

MissionLog read_mission_log(std::istream& in) {
    MissionLog log;
    std::string line;
    int lineno = 0;
    bool header = false;
    bool summary = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw Error(ErrorCode::ParseError, "malformed JSON at " + where);
        }
        try {
            const std::string type = j.at("type").get<std::string>();
            if (!header) {
                if (type != "header" || j.at("format") != "qpath-mission-log" || j.at("version") != 1)
                    throw Error(ErrorCode::ParseError, where + ": expected mission log header");
                header = true;
            } else if (summary) {
                throw Error(ErrorCode::ParseError, where + ": record after summary");
            } else if (type == "tick") {
                if (j.at("tick").get<std::int64_t>() != static_cast<std::int64_t>(log.trajectory.size()))
                    throw Error(ErrorCode::ParseError, where + ": tick out of sequence");
                log.trajectory.push_back(cell_from(j.at("agent"), "agent"));
            } else if (type == "event") {
                MissionEvent ev;
                ev.tick = j.at("tick").get<std::int64_t>();
                const auto kind = parse_event_kind(j.at("event").get<std::string>());
                if (!kind) throw Error(ErrorCode::ParseError, where + ": unknown event");
                ev.kind = *kind;
                ev.cell = cell_from(j.at("cell"), "cell");
                ev.detail = j.at("detail").get<std::string>();
                log.events.push_back(std::move(ev));
            } else if (type == "summary") {
                const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
                if (!outcome) throw Error(ErrorCode::ParseError, where + ": unknown outcome");
                log.outcome = *outcome;
                log.replan_count = j.at("replans").get<int>();
                log.pause_count = j.at("pauses").get<int>();
                log.distance = j.at("distance").get<double>();
                log.steps.cardinal = j.at("cardinal_steps").get<std::int64_t>();
                log.steps.diagonal = j.at("diagonal_steps").get<std::int64_t>();
                log.turn_count = j.at("turns").get<int>();
                if (j.at("ticks").get<std::int64_t>() != log.ticks())
                    throw Error(ErrorCode::ParseError, where + ": tick count does not match the records");
                summary = true;
            } else {
                throw Error(ErrorCode::ParseError, where + ": unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, where + ": " + e.what());
        }
    }
    if (!header) throw Error(ErrorCode::ParseError, "empty mission log");
    if (!summary) throw Error(ErrorCode::ParseError, "mission log has no summary");
    return log;
}

}  // namespace qpath
