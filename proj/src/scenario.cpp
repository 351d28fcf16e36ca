#include "qpath/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string_view>

#include "qpath/error.hpp"
#include "qpath/map_image.hpp"
#include "qpath/rng.hpp"

namespace qpath {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTrainStream = 11;
constexpr std::uint64_t kCircuitStream = 12;

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) parse_fail(where.empty() ? "<root>" : where, "expected an object");
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(ErrorCode::ParseError, "unknown field '" + join(where, key) + "'");
    }
}

const json& require(const json& obj, std::string_view key, const std::string& where) {
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw Error(ErrorCode::ParseError, "missing field '" + join(where, key) + "'");
    return *it;
}

std::int64_t as_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) parse_fail(field, "expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_u64(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    parse_fail(field, "expected a non-negative integer");
}

double as_double(const json& v, const std::string& field) {
    if (!v.is_number()) parse_fail(field, "expected a number");
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& field) {
    if (!v.is_boolean()) parse_fail(field, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& field) {
    if (!v.is_string()) parse_fail(field, "expected a string");
    return v.get<std::string>();
}

int as_i32(const json& v, const std::string& field) {
    const std::int64_t x = as_int(v, field);
    if (x < INT32_MIN || x > INT32_MAX) parse_fail(field, "integer out of range");
    return static_cast<int>(x);
}

Cell as_cell(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 2) parse_fail(field, "expected a cell [x, y]");
    return {as_i32(v[0], field + "[0]"), as_i32(v[1], field + "[1]")};
}

std::vector<Cell> as_cells(const json& v, const std::string& field) {
    if (!v.is_array()) parse_fail(field, "expected an array of cells");
    std::vector<Cell> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_cell(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

json cell_json(Cell c) { return json::array({c.x, c.y}); }

json cells_json(const std::vector<Cell>& cells) {
    json a = json::array();
    for (const Cell& c : cells) a.push_back(cell_json(c));
    return a;
}

GridSource parse_grid(const json& j) {
    const std::string where = "grid";
    expect_object(j, where);
    reject_unknown(j, {"inline", "image"}, where);
    const bool has_inline = j.contains("inline");
    const bool has_image = j.contains("image");
    if (has_inline == has_image) parse_fail(where, "exactly one of 'inline' or 'image' is required");
    if (has_inline) {
        const json& g = j.at("inline");
        const std::string w = "grid.inline";
        expect_object(g, w);
        reject_unknown(g, {"width", "height", "rows"}, w);
        const int width = as_i32(require(g, "width", w), w + ".width");
        const int height = as_i32(require(g, "height", w), w + ".height");
        if (width < 1 || height < 1) throw Error(ErrorCode::ValidationError, "grid.inline dims must be >= 1");
        BoolGrid mask(width, height);
        if (g.contains("rows")) {
            const json& rows = g.at("rows");
            if (!rows.is_array() || rows.size() != static_cast<std::size_t>(height))
                parse_fail(w + ".rows", "expected " + std::to_string(height) + " row strings");
            for (int y = 0; y < height; ++y) {
                const std::string field = w + ".rows[" + std::to_string(y) + "]";
                const std::string row = as_string(rows[static_cast<std::size_t>(y)], field);
                if (row.size() != static_cast<std::size_t>(width))
                    parse_fail(field, "expected " + std::to_string(width) + " characters");
                for (int x = 0; x < width; ++x) {
                    const char ch = row[static_cast<std::size_t>(x)];
                    if (ch != '.' && ch != '#') parse_fail(field, "cells must be '.' or '#'");
                    mask.set({x, y}, ch == '#');
                }
            }
        }
        return InlineGrid{std::move(mask)};
    }
    const json& g = j.at("image");
    const std::string w = "grid.image";
    expect_object(g, w);
    reject_unknown(g, {"path", "threshold", "dims"}, w);
    ImageGrid img;
    img.path = as_string(require(g, "path", w), w + ".path");
    if (g.contains("threshold")) img.threshold = as_i32(g.at("threshold"), w + ".threshold");
    if (img.threshold < 0 || img.threshold > 255)
        throw Error(ErrorCode::ValidationError, "grid.image.threshold must be in 0..255");
    const Cell dims = as_cell(require(g, "dims", w), w + ".dims");
    img.width = dims.x;
    img.height = dims.y;
    if (img.width < 1 || img.height < 1) throw Error(ErrorCode::DegenerateDims, "grid.image.dims must be >= 1");
    return img;
}

Rational parse_speed(const json& v, const std::string& field) {
    if (v.is_number_integer()) return {as_int(v, field), 1};
    if (!v.is_object()) parse_fail(field, "expected an integer or {num, den}");
    reject_unknown(v, {"num", "den"}, field);
    return {as_int(require(v, "num", field), field + ".num"), as_int(require(v, "den", field), field + ".den")};
}

Obstacle parse_obstacle(const json& j, const std::string& where) {
    expect_object(j, where);
    reject_unknown(j, {"id", "kind", "footprint", "schedule", "start_tick"}, where);
    Obstacle o;
    const std::uint64_t id = as_u64(require(j, "id", where), where + ".id");
    if (id == 0 || id > UINT32_MAX) throw Error(ErrorCode::ValidationError, where + ".id must be in 1..2^32-1");
    o.id = static_cast<std::uint32_t>(id);
    const std::string kind = as_string(require(j, "kind", where), where + ".kind");
    const auto k = parse_obstacle_kind(kind);
    if (!k) parse_fail(where + ".kind", "expected static, dynamic or moving");
    o.kind = *k;
    if (j.contains("footprint"))
        o.footprint = as_cells(j.at("footprint"), where + ".footprint");
    else if (o.kind != ObstacleKind::Static)
        o.footprint = {{0, 0}};
    else
        throw Error(ErrorCode::ParseError, "missing field '" + where + ".footprint'");
    if (j.contains("start_tick")) o.start_tick = as_int(j.at("start_tick"), where + ".start_tick");
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        const std::string w = where + ".schedule";
        expect_object(s, w);
        reject_unknown(s, {"waypoints", "dwell_ticks", "speed", "loop"}, w);
        o.schedule.waypoints = as_cells(require(s, "waypoints", w), w + ".waypoints");
        if (s.contains("dwell_ticks")) {
            const json& d = s.at("dwell_ticks");
            if (!d.is_array()) parse_fail(w + ".dwell_ticks", "expected an array of integers");
            for (std::size_t i = 0; i < d.size(); ++i)
                o.schedule.dwell_ticks.push_back(as_int(d[i], w + ".dwell_ticks[" + std::to_string(i) + "]"));
        }
        if (s.contains("speed")) o.schedule.speed = parse_speed(s.at("speed"), w + ".speed");
        if (s.contains("loop")) o.schedule.loop = as_bool(s.at("loop"), w + ".loop");
    } else if (o.kind != ObstacleKind::Static) {
        throw Error(ErrorCode::ParseError, "missing field '" + where + ".schedule'");
    }
    return o;
}

Hyperparams parse_hyper(const json& j) {
    const std::string w = "hyperparams";
    expect_object(j, w);
    reject_unknown(j,
                   {"alpha_initial", "beta_density", "beta_smooth", "epsilon", "smooth_radius", "episodes",
                    "init_scale", "turn_window", "train_mode", "max_trajectory_steps", "layers", "circuit_seed",
                    "q_weight", "heuristic_weight", "visited_penalty", "wait_timeout", "max_ticks",
                    "classical_episodes", "classical_alpha", "classical_gamma", "classical_epsilon",
                    "classical_reward_goal", "classical_penalty_collision", "classical_max_steps"},
                   w);
    Hyperparams h;
    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) out = as_double(j.at(key), join(w, key));
    };
    auto i32 = [&](const char* key, int& out) {
        if (j.contains(key)) out = as_i32(j.at(key), join(w, key));
    };
    auto i64 = [&](const char* key, std::int64_t& out) {
        if (j.contains(key)) out = as_int(j.at(key), join(w, key));
    };
    num("alpha_initial", h.train.alpha_initial);
    num("beta_density", h.train.beta_density);
    num("beta_smooth", h.train.beta_smooth);
    num("epsilon", h.train.epsilon);
    num("smooth_radius", h.train.smooth_radius);
    i32("episodes", h.train.episodes);
    num("init_scale", h.train.init_scale);
    i32("turn_window", h.train.turn_window);
    if (j.contains("train_mode")) {
        const std::string mode = as_string(j.at("train_mode"), "hyperparams.train_mode");
        if (mode == "sweep")
            h.train.mode = qrl::TrainMode::Sweep;
        else if (mode == "trajectory")
            h.train.mode = qrl::TrainMode::Trajectory;
        else
            parse_fail("hyperparams.train_mode", "expected sweep or trajectory");
    }
    i32("max_trajectory_steps", h.train.max_trajectory_steps);
    i32("layers", h.layers);
    if (j.contains("circuit_seed") && !j.at("circuit_seed").is_null())
        h.circuit_seed = as_u64(j.at("circuit_seed"), "hyperparams.circuit_seed");
    num("q_weight", h.planner.q_weight);
    num("heuristic_weight", h.planner.heuristic_weight);
    num("visited_penalty", h.planner.visited_penalty);
    i64("wait_timeout", h.wait_timeout);
    i64("max_ticks", h.max_ticks);
    i32("classical_episodes", h.classical.episodes);
    num("classical_alpha", h.classical.alpha);
    num("classical_gamma", h.classical.gamma);
    num("classical_epsilon", h.classical.epsilon);
    num("classical_reward_goal", h.classical.reward_goal);
    num("classical_penalty_collision", h.classical.penalty_collision);
    i32("classical_max_steps", h.classical.max_steps);
    return h;
}

json hyper_json(const Hyperparams& h) {
    json j = {
        {"alpha_initial", h.train.alpha_initial},
        {"beta_density", h.train.beta_density},
        {"beta_smooth", h.train.beta_smooth},
        {"epsilon", h.train.epsilon},
        {"smooth_radius", h.train.smooth_radius},
        {"episodes", h.train.episodes},
        {"init_scale", h.train.init_scale},
        {"turn_window", h.train.turn_window},
        {"train_mode", h.train.mode == qrl::TrainMode::Sweep ? "sweep" : "trajectory"},
        {"max_trajectory_steps", h.train.max_trajectory_steps},
        {"layers", h.layers},
        {"q_weight", h.planner.q_weight},
        {"heuristic_weight", h.planner.heuristic_weight},
        {"visited_penalty", h.planner.visited_penalty},
        {"wait_timeout", h.wait_timeout},
        {"max_ticks", h.max_ticks},
        {"classical_episodes", h.classical.episodes},
        {"classical_alpha", h.classical.alpha},
        {"classical_gamma", h.classical.gamma},
        {"classical_epsilon", h.classical.epsilon},
        {"classical_reward_goal", h.classical.reward_goal},
        {"classical_penalty_collision", h.classical.penalty_collision},
        {"classical_max_steps", h.classical.max_steps},
    };
    if (h.circuit_seed) j["circuit_seed"] = *h.circuit_seed;
    return j;
}

void validate_hyper(const Hyperparams& h) {
    qrl::TrainConfig t = h.train;
    t.validate();
    h.planner.validate();
    h.classical.validate();
    if (h.layers < 0 || h.layers > 64) throw Error(ErrorCode::ValidationError, "hyperparams.layers must be in 0..64");
    if (h.wait_timeout < 1) throw Error(ErrorCode::ValidationError, "hyperparams.wait_timeout must be >= 1");
    if (h.max_ticks < 0) throw Error(ErrorCode::ValidationError, "hyperparams.max_ticks must be >= 0");
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

void ClassicalConfig::validate() const {
    if (episodes < 0) throw Error(ErrorCode::ValidationError, "hyperparams.classical_episodes must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::ValidationError, "hyperparams.classical_alpha must be in (0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorCode::ValidationError, "hyperparams.classical_gamma must be in [0,1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw Error(ErrorCode::ValidationError, "hyperparams.classical_epsilon must be in [0,1]");
    if (!std::isfinite(reward_goal) || !std::isfinite(penalty_collision))
        throw Error(ErrorCode::ValidationError, "classical rewards must be finite");
    if (max_steps < 0) throw Error(ErrorCode::ValidationError, "hyperparams.classical_max_steps must be >= 0");
}

ScenarioSpec scenario_from_json(const json& doc) {
    expect_object(doc, "");
    reject_unknown(doc, {"grid", "obstacles", "source", "destination", "survivors", "safety_radius", "seed", "hyperparams"},
                   "");
    ScenarioSpec spec;
    spec.grid = parse_grid(require(doc, "grid", ""));
    if (doc.contains("obstacles")) {
        const json& obs = doc.at("obstacles");
        if (!obs.is_array()) parse_fail("obstacles", "expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i)
            spec.obstacles.push_back(parse_obstacle(obs[i], "obstacles[" + std::to_string(i) + "]"));
    }
    spec.source = as_cell(require(doc, "source", ""), "source");
    spec.destination = as_cell(require(doc, "destination", ""), "destination");
    if (doc.contains("survivors")) spec.survivors = as_cells(doc.at("survivors"), "survivors");
    if (doc.contains("safety_radius")) spec.safety_radius = as_double(doc.at("safety_radius"), "safety_radius");
    if (!(spec.safety_radius >= 1.0) || !std::isfinite(spec.safety_radius))
        throw Error(ErrorCode::ValidationError, "safety_radius must be >= 1");
    spec.seed = as_u64(require(doc, "seed", ""), "seed");
    if (doc.contains("hyperparams")) spec.hyper = parse_hyper(doc.at("hyperparams"));
    validate_hyper(spec.hyper);
    return spec;
}

ScenarioSpec parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, "malformed JSON at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    return scenario_from_json(doc);
}

json scenario_to_json(const ScenarioSpec& spec) {
    json grid;
    if (const auto* g = std::get_if<InlineGrid>(&spec.grid)) {
        json rows = json::array();
        for (int y = 0; y < g->mask.height(); ++y) {
            std::string row(static_cast<std::size_t>(g->mask.width()), '.');
            for (int x = 0; x < g->mask.width(); ++x)
                if (g->mask.at({x, y})) row[static_cast<std::size_t>(x)] = '#';
            rows.push_back(std::move(row));
        }
        grid["inline"] = {{"width", g->mask.width()}, {"height", g->mask.height()}, {"rows", std::move(rows)}};
    } else {
        const auto& img = std::get<ImageGrid>(spec.grid);
        grid["image"] = {{"path", img.path}, {"threshold", img.threshold}, {"dims", {img.width, img.height}}};
    }
    json obstacles = json::array();
    for (const Obstacle& o : spec.obstacles) {
        json jo = {{"id", o.id}, {"kind", std::string(to_string(o.kind))}, {"footprint", cells_json(o.footprint)}};
        if (o.kind != ObstacleKind::Static || !o.schedule.waypoints.empty()) {
            jo["start_tick"] = o.start_tick;
            jo["schedule"] = {{"waypoints", cells_json(o.schedule.waypoints)},
                              {"dwell_ticks", o.schedule.dwell_ticks},
                              {"speed", {{"num", o.schedule.speed.num}, {"den", o.schedule.speed.den}}},
                              {"loop", o.schedule.loop}};
        }
        obstacles.push_back(std::move(jo));
    }
    return {{"grid", std::move(grid)},
            {"obstacles", std::move(obstacles)},
            {"source", cell_json(spec.source)},
            {"destination", cell_json(spec.destination)},
            {"survivors", cells_json(spec.survivors)},
            {"safety_radius", spec.safety_radius},
            {"seed", spec.seed},
            {"hyperparams", hyper_json(spec.hyper)}};
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario " + path.string());
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return parse_scenario(text);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
    }
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << scenario_to_json(spec).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BoolGrid resolve_grid(const ScenarioSpec& spec, const std::filesystem::path& base_dir) {
    if (const auto* g = std::get_if<InlineGrid>(&spec.grid)) return g->mask;
    const auto& img = std::get<ImageGrid>(spec.grid);
    std::filesystem::path p = img.path;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return ingest_map_image(read_gray_image(p), img.threshold, img.width, img.height);
}

OccupancyWorld build_world(const ScenarioSpec& spec, const std::filesystem::path& base_dir) {
    return build_world(spec, resolve_grid(spec, base_dir));
}

OccupancyWorld build_world(const ScenarioSpec& spec, BoolGrid terrain) {
    validate_hyper(spec.hyper);
    if (!(spec.safety_radius >= 1.0)) throw Error(ErrorCode::ValidationError, "safety_radius must be >= 1");
    OccupancyWorld world(std::move(terrain), spec.obstacles, 0);
    if (world.free_static_cells() == 0) throw Error(ErrorCode::ValidationError, "grid has no free cells");
    auto check = [&](Cell c, const std::string& what) {
        if (!world.in_bounds(c))
            throw Error(ErrorCode::OutOfBounds, what + " (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                                                    ") outside the grid");
        if (world.occupied(c, 0))
            throw Error(ErrorCode::EndpointBlocked, what + " (" + std::to_string(c.x) + "," +
                                                        std::to_string(c.y) + ") is occupied at tick 0");
    };
    check(spec.source, "source");
    check(spec.destination, "destination");
    for (std::size_t i = 0; i < spec.survivors.size(); ++i)
        check(spec.survivors[i], "survivor " + std::to_string(i));
    return world;
}

qrl::TrainConfig train_config(const ScenarioSpec& spec) {
    qrl::TrainConfig t = spec.hyper.train;
    t.seed = splitmix64(spec.seed ^ splitmix64(kTrainStream));
    return t;
}

qsim::CircuitParams circuit_params(const ScenarioSpec& spec) {
    const std::uint64_t seed =
        spec.hyper.circuit_seed ? *spec.hyper.circuit_seed : splitmix64(spec.seed ^ splitmix64(kCircuitStream));
    return qsim::CircuitParams::random(spec.hyper.layers, seed);
}

std::int64_t effective_max_ticks(const ScenarioSpec& spec, int width, int height) {
    if (spec.hyper.max_ticks > 0) return spec.hyper.max_ticks;
    return 20 * static_cast<std::int64_t>(width + height);
}

}  // namespace qpath
