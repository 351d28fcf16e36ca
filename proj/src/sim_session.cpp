#include "qpath/sim_session.hpp"

#include <cmath>

#include "qpath/batch.hpp"
#include "qpath/error.hpp"

namespace qpath::service {
namespace {

using nlohmann::json;

json cell_json(Cell c) { return json::array({c.x, c.y}); }

json cells_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (Cell c : cells) out.push_back(cell_json(c));
    return out;
}

struct BadPayload {
    std::string what;
};

Cell payload_cell(const json& payload, const char* key) {
    if (!payload.contains(key)) throw BadPayload{std::string("missing '") + key + "'"};
    const json& j = payload[key];
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw BadPayload{std::string("'") + key + "' must be [x, y]"};
    return {j[0].get<int>(), j[1].get<int>()};
}

std::string_view error_reason(const Error& e) { return to_string(e.code()); }

}  // namespace

std::variant<Command, FrameError> parse_command(const std::string& text) {
    json frame;
    try {
        frame = json::parse(text);
    } catch (const json::parse_error&) {
        throw Error(ErrorCode::ParseError, "frame is not valid JSON");
    }
    if (!frame.is_object() || !frame.contains("v") || !frame.contains("type") || !frame.contains("seq") ||
        !frame["type"].is_string() || !frame["seq"].is_number_unsigned())
        throw Error(ErrorCode::ParseError, "frame needs v, type and seq");
    const auto seq = frame["seq"].get<std::uint64_t>();
    if (frame["v"] != kProtocolVersion) return FrameError{"UnsupportedVersion", seq};
    const std::string type = frame["type"].get<std::string>();
    const json payload = frame.contains("payload") ? frame["payload"] : json::object();
    if (!payload.is_object()) return FrameError{"BadPayload", seq};

    Command cmd;
    cmd.id = seq;
    try {
        if (type == "PlaceObstacle") {
            PlaceObstacle p;
            p.cell = payload_cell(payload, "cell");
            if (payload.contains("kind")) {
                if (!payload["kind"].is_string()) throw BadPayload{"'kind' must be a string"};
                const auto kind = parse_obstacle_kind(payload["kind"].get<std::string>());
                if (!kind) throw BadPayload{"unknown obstacle kind"};
                p.kind = *kind;
            }
            if (payload.contains("route")) {
                const json& r = payload["route"];
                if (!r.is_array()) throw BadPayload{"'route' must be an array"};
                for (std::size_t i = 0; i < r.size(); ++i) p.route.push_back(payload_cell(json{{"c", r[i]}}, "c"));
                if (p.kind == ObstacleKind::Static && !p.route.empty())
                    throw BadPayload{"static obstacles have no route"};
            }
            cmd.body = p;
        } else if (type == "RemoveObstacle") {
            if (!payload.contains("id") || !payload["id"].is_number_unsigned()) throw BadPayload{"'id' required"};
            cmd.body = RemoveObstacle{payload["id"].get<std::uint32_t>()};
        } else if (type == "MoveDestination") {
            cmd.body = MoveDestination{payload_cell(payload, "cell")};
        } else if (type == "Start") {
            cmd.body = Start{};
        } else if (type == "Pause") {
            cmd.body = Pause{};
        } else if (type == "Resume") {
            cmd.body = Resume{};
        } else if (type == "Reset") {
            Reset r;
            if (payload.contains("seed")) {
                if (!payload["seed"].is_number_unsigned()) throw BadPayload{"'seed' must be a non-negative integer"};
                r.seed = payload["seed"].get<std::uint64_t>();
            }
            cmd.body = r;
        } else if (type == "SetSpeed") {
            if (!payload.contains("ticks_per_sec") || !payload["ticks_per_sec"].is_number())
                throw BadPayload{"'ticks_per_sec' required"};
            cmd.body = SetSpeed{payload["ticks_per_sec"].get<double>()};
        } else {
            return FrameError{"UnknownCommand", seq};
        }
    } catch (const BadPayload&) {
        return FrameError{"BadPayload", seq};
    }
    return cmd;
}

std::string encode_frame(const Event& event, std::uint64_t seq) {
    return json{{"v", kProtocolVersion}, {"type", event.type}, {"seq", seq}, {"payload", event.payload}}.dump();
}

std::string encode_command(const Command& command) {
    json payload = json::object();
    std::string type;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PlaceObstacle>) {
                type = "PlaceObstacle";
                payload = {{"cell", cell_json(c.cell)}, {"kind", to_string(c.kind)}};
                if (!c.route.empty()) payload["route"] = cells_json(c.route);
            } else if constexpr (std::is_same_v<T, RemoveObstacle>) {
                type = "RemoveObstacle";
                payload = {{"id", c.id}};
            } else if constexpr (std::is_same_v<T, MoveDestination>) {
                type = "MoveDestination";
                payload = {{"cell", cell_json(c.cell)}};
            } else if constexpr (std::is_same_v<T, Start>) {
                type = "Start";
            } else if constexpr (std::is_same_v<T, Pause>) {
                type = "Pause";
            } else if constexpr (std::is_same_v<T, Resume>) {
                type = "Resume";
            } else if constexpr (std::is_same_v<T, Reset>) {
                type = "Reset";
                if (c.seed) payload = {{"seed", *c.seed}};
            } else {
                type = "SetSpeed";
                payload = {{"ticks_per_sec", c.ticks_per_sec}};
            }
        },
        command.body);
    return json{{"v", kProtocolVersion}, {"type", type}, {"seq", command.id}, {"payload", payload}}.dump();
}

SimSession::SimSession(ScenarioSpec spec, std::filesystem::path base_dir)
    : spec_(std::move(spec)), base_dir_(std::move(base_dir)) {
    terrain_ = resolve_grid(spec_, base_dir_);
    rebuild();
}

void SimSession::rebuild() {
    OccupancyWorld world = build_world(spec_, terrain_);
    const Mission mission = mission_for(spec_, world);
    auto tables = train_hybrid(spec_, world.static_mask(), spec_.destination);
    runner_ = std::make_unique<MissionRunner>(std::move(world), mission,
                                              hybrid_leg_planner(std::move(tables), spec_.hyper.planner));
    events_seen_ = 0;
    running_ = false;
}

Event SimSession::error(std::uint64_t id, std::string reason) const {
    return {"Error", json{{"command_id", id}, {"reason", std::move(reason)}}};
}

std::vector<Event> SimSession::drain_mission_events() {
    std::vector<Event> out;
    const auto& events = runner_->log().events;
    for (; events_seen_ < events.size(); ++events_seen_) {
        const MissionEvent& e = events[events_seen_];
        switch (e.kind) {
            case EventKind::Pause:
                out.push_back({"Paused", json{{"tick", e.tick}, {"cause", e.detail}}});
                break;
            case EventKind::Resume:
                out.push_back({"Resumed", json{{"tick", e.tick}}});
                break;
            case EventKind::Replan:
                out.push_back({"Replan", json{{"tick", e.tick}, {"reason", e.detail}}});
                break;
            case EventKind::SurvivorReached:
                out.push_back({"SurvivorReached", json{{"tick", e.tick}, {"cell", cell_json(e.cell)}}});
                break;
            case EventKind::Collision:
            case EventKind::Success:
            case EventKind::Timeout:
                out.push_back({"Terminal", json{{"tick", e.tick},
                                                {"outcome", to_string(runner_->log().outcome)},
                                                {"reason", e.detail}}});
                break;
        }
    }
    if (runner_->finished()) running_ = false;
    return out;
}

std::vector<Event> SimSession::apply(const Command& command) {
    const std::uint64_t id = command.id;
    std::vector<Event> out;
    auto ack = [&](json extra = json::object()) {
        extra["command_id"] = id;
        out.push_back({"Ack", std::move(extra)});
    };
    try {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                const OccupancyWorld& world = runner_->world();
                if constexpr (std::is_same_v<T, PlaceObstacle>) {
                    if (!world.in_bounds(c.cell)) return out.push_back(error(id, "OutOfBounds"));
                    if (c.cell == runner_->agent()) return out.push_back(error(id, "OccupiedByAgent"));
                    if (c.kind == ObstacleKind::Static && c.cell == runner_->mission().destination)
                        return out.push_back(error(id, "EndpointBlocked"));
                    Obstacle o;
                    o.kind = c.kind;
                    if (c.kind == ObstacleKind::Static) {
                        o.footprint = {c.cell};
                    } else {
                        o.footprint = {{0, 0}};
                        o.schedule.waypoints = {c.cell};
                        o.schedule.waypoints.insert(o.schedule.waypoints.end(), c.route.begin(), c.route.end());
                        o.schedule.loop = !c.route.empty();
                        o.start_tick = world.tick();
                    }
                    const std::uint32_t oid = runner_->add_obstacle(std::move(o));
                    ack({{"obstacle_id", oid}});
                } else if constexpr (std::is_same_v<T, RemoveObstacle>) {
                    if (!runner_->remove_obstacle(c.id)) return out.push_back(error(id, "UnknownObstacle"));
                    ack();
                } else if constexpr (std::is_same_v<T, MoveDestination>) {
                    if (!world.in_bounds(c.cell)) return out.push_back(error(id, "OutOfBounds"));
                    if (world.static_mask().at(c.cell)) return out.push_back(error(id, "EndpointBlocked"));
                    if (runner_->finished()) return out.push_back(error(id, "MissionFinished"));
                    // A new goal needs new tables: one-shot retrain on the current terrain.
                    auto tables = train_hybrid(spec_, world.static_mask(), c.cell);
                    runner_->retarget(c.cell, hybrid_leg_planner(std::move(tables), spec_.hyper.planner));
                    ack();
                } else if constexpr (std::is_same_v<T, Start> || std::is_same_v<T, Resume>) {
                    if (runner_->finished()) return out.push_back(error(id, "MissionFinished"));
                    running_ = true;
                    ack();
                } else if constexpr (std::is_same_v<T, Pause>) {
                    running_ = false;
                    ack();
                } else if constexpr (std::is_same_v<T, Reset>) {
                    if (c.seed) spec_.seed = *c.seed;
                    rebuild();
                    ack();
                    out.push_back({"TickState", tick_state()});
                } else {
                    if (!std::isfinite(c.ticks_per_sec) || c.ticks_per_sec <= 0.0 || c.ticks_per_sec > 1000.0)
                        return out.push_back(error(id, "ValidationError"));
                    ticks_per_sec_ = c.ticks_per_sec;
                    ack();
                }
            },
            command.body);
    } catch (const Error& e) {
        out.push_back(error(id, std::string(error_reason(e))));
    }
    for (Event& e : drain_mission_events()) out.push_back(std::move(e));
    return out;
}

std::vector<Event> SimSession::tick() {
    if (!running_ || runner_->finished()) return {};
    runner_->step();
    std::vector<Event> out{{"TickState", tick_state()}};
    for (Event& e : drain_mission_events()) out.push_back(std::move(e));
    return out;
}

json SimSession::tick_state() const {
    const OccupancyWorld& world = runner_->world();
    json obstacles = json::array();
    for (const Obstacle& o : world.obstacles())
        obstacles.push_back({{"id", o.id}, {"kind", to_string(o.kind)}, {"cells", cells_json(o.cells_at(world.tick()))}});
    std::vector<Cell> traversed;
    for (Cell c : runner_->log().trajectory)
        if (traversed.empty() || traversed.back() != c) traversed.push_back(c);
    return {{"tick", world.tick()},
            {"agent", cell_json(runner_->agent())},
            {"obstacles", std::move(obstacles)},
            {"planned_path", cells_json(runner_->planned_path())},
            {"traversed_path", cells_json(traversed)}};
}

json SimSession::snapshot() const {
    json s = tick_state();
    const BoolGrid& terrain = runner_->world().terrain();
    json rows = json::array();
    for (int y = 0; y < terrain.height(); ++y) {
        std::string row(static_cast<std::size_t>(terrain.width()), '.');
        for (int x = 0; x < terrain.width(); ++x)
            if (terrain.at({x, y})) row[static_cast<std::size_t>(x)] = '#';
        rows.push_back(std::move(row));
    }
    const Mission& m = runner_->mission();
    s["v"] = kProtocolVersion;
    s["grid"] = {{"width", terrain.width()}, {"height", terrain.height()}, {"rows", std::move(rows)}};
    s["source"] = cell_json(m.source);
    s["destination"] = cell_json(m.destination);
    s["survivors"] = cells_json(m.survivors);
    s["safety_radius"] = m.safety_radius;
    s["wait_timeout"] = m.wait_timeout;
    s["running"] = running_;
    s["paused"] = runner_->paused();
    s["ticks_per_sec"] = ticks_per_sec_;
    s["outcome"] = to_string(runner_->log().outcome);
    return s;
}

}  // namespace qpath::service
