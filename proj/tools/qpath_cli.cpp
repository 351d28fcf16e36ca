// qpath command-line entry point.
//
// Exit codes: 0 success, 2 bad input (validation, parse, missing file),
// 3 runtime failure (no path, bind failure, write failure).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qpath/batch.hpp"
#include "qpath/error.hpp"
#include "qpath/map_image.hpp"
#include "qpath/metrics.hpp"
#include "qpath/mission.hpp"
#include "qpath/planner.hpp"
#include "qpath/qrl.hpp"
#include "qpath/scenario.hpp"
#include "qpath/suite.hpp"
#ifdef QPATH_HAVE_SERVICE
#include "qpath/sim_server.hpp"
#endif

namespace fs = std::filesystem;
using namespace qpath;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfBounds:
        case ErrorCode::EndpointBlocked:
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::UnreadableImage:
        case ErrorCode::DegenerateDims:
            return kExitInput;
        default:
            return kExitRuntime;
    }
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> q_weight;
    std::optional<double> epsilon;
    std::optional<int> episodes;
    std::optional<std::int64_t> max_ticks;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool planning) {
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
    cmd->add_option("--epsilon", o.epsilon, "Exploration rate for training, in [0,1]");
    cmd->add_option("--episodes", o.episodes, "Training episodes (1 = one-shot sweep)");
    if (planning) {
        cmd->add_option("--q-weight", o.q_weight, "Weight of the turn-density term (>= 0)");
        cmd->add_option("--max-ticks", o.max_ticks, "Mission tick budget (>= 1)");
    }
}

ScenarioSpec load_with_overrides(const fs::path& path, const Overrides& o) {
    ScenarioSpec spec = load_scenario(path);
    if (o.seed) spec.seed = *o.seed;
    if (o.q_weight) spec.hyper.planner.q_weight = *o.q_weight;
    if (o.epsilon) spec.hyper.train.epsilon = *o.epsilon;
    if (o.episodes) spec.hyper.train.episodes = *o.episodes;
    if (o.max_ticks) {
        if (*o.max_ticks < 1) throw Error(ErrorCode::ValidationError, "--max-ticks must be >= 1");
        spec.hyper.max_ticks = *o.max_ticks;
    }
    spec.hyper.train.validate();
    spec.hyper.planner.validate();
    return spec;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

json cells_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (Cell c : cells) out.push_back({c.x, c.y});
    return out;
}

// Tables for the scenario: loaded from --tables when they fit, else trained.
std::shared_ptr<const qrl::QTables> tables_for(const ScenarioSpec& spec, const BoolGrid& static_mask,
                                               const std::string& tables_path) {
    if (!tables_path.empty()) {
        auto tables = std::make_shared<const qrl::QTables>(qrl::load_tables(tables_path));
        if (tables->goal() == spec.destination && tables->matches(static_mask)) return tables;
        spdlog::warn("tables in {} were trained for goal ({},{}) on another map; retraining", tables_path,
                     tables->goal().x, tables->goal().y);
    }
    return train_hybrid(spec, static_mask, spec.destination);
}

int cmd_train(const std::string& scenario, const std::string& out, const Overrides& o) {
    const ScenarioSpec spec = load_with_overrides(scenario, o);
    const OccupancyWorld world = build_world(spec, fs::path(scenario).parent_path());
    qrl::TrainStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const qrl::QTables tables =
        qrl::train(world.static_mask(), spec.destination, train_config(spec), circuit_params(spec), &stats);
    const double ms = ms_since(t0);
    qrl::save_tables(tables, out);
    std::printf("trained %zu cells (%llu updates) in %.1f ms -> %s\n", tables.rows(),
                static_cast<unsigned long long>(stats.cell_updates), ms, out.c_str());
    return 0;
}

int cmd_plan(const std::string& scenario, const std::string& tables_path, const std::string& out,
             const std::string& planner, const Overrides& o) {
    const ScenarioSpec spec = load_with_overrides(scenario, o);
    const OccupancyWorld world = build_world(spec, fs::path(scenario).parent_path());
    const BoolGrid occupancy = world.snapshot();
    std::vector<Cell> stops = spec.survivors;
    stops.push_back(spec.destination);

    std::shared_ptr<const qrl::QTables> tables;
    if (planner == "hybrid") tables = tables_for(spec, world.static_mask(), tables_path);
    std::vector<Cell> cells{spec.source};
    for (Cell stop : stops) {
        const Path leg = planner == "hybrid" ? plan_hybrid(occupancy, *tables, cells.back(), stop, spec.hyper.planner)
                                             : plan_astar(occupancy, cells.back(), stop);
        cells.insert(cells.end(), leg.cells.begin() + 1, leg.cells.end());
    }
    const double length = path_length(cells);
    const int turns = smoothness(cells);
    json doc{{"planner", planner}, {"length", length}, {"turns", turns}, {"cells", cells_json(cells)}};
    if (!out.empty()) write_text(out, doc.dump(2) + "\n");
    std::printf("%s path: %zu cells, length %.3f, %d turns\n", planner.c_str(), cells.size(), length, turns);
    return 0;
}

int cmd_run(const std::string& scenario, const std::string& tables_path, const std::string& out, const Overrides& o) {
    const ScenarioSpec spec = load_with_overrides(scenario, o);
    OccupancyWorld world = build_world(spec, fs::path(scenario).parent_path());
    const Mission mission = mission_for(spec, world);
    auto tables = tables_for(spec, world.static_mask(), tables_path);
    const MissionLog log =
        execute_mission(std::move(world), mission, hybrid_leg_planner(std::move(tables), spec.hyper.planner));
    if (!out.empty()) write_text(out, mission_log_to_string(log));
    std::printf("outcome=%s ticks=%lld distance=%.3f turns=%d replans=%d pauses=%d\n",
                std::string(to_string(log.outcome)).c_str(), static_cast<long long>(log.ticks()), log.steps.length(),
                log.turn_count, log.replan_count, log.pause_count);
    return 0;
}

int cmd_bench(const std::string& suite_path, const std::string& out, const std::string& logs_dir, bool wall_clock,
              int threads) {
    const Suite suite = load_suite(suite_path);
    std::vector<PlannerKind> planners;
    for (const std::string& id : suite.planners) {
        const auto kind = parse_planner_kind(id);
        if (!kind) throw Error(ErrorCode::ValidationError, "unknown planner '" + id + "'");
        planners.push_back(*kind);
    }
    std::vector<BatchScenario> scenarios;
    std::vector<MissionResult> broken;
    for (const fs::path& p : suite.scenarios) {
        try {
            scenarios.push_back({p.stem().string(), load_scenario(p), p.parent_path()});
        } catch (const Error& e) {
            spdlog::warn("skipping scenario: {}", e.what());
            broken.push_back({false, e.what(), {}, 0.0, 0});
        }
    }
    if (scenarios.empty()) {
        spdlog::error("no scenario in {} could be loaded", suite_path);
        return kExitRuntime;
    }
    BatchOptions options;
    options.wall_clock = wall_clock;
    options.threads = threads;
    BatchResult batch = run_batch(scenarios, planners, options);

    std::size_t completed = 0;
    for (std::size_t p = 0; p < planners.size(); ++p) {
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            const MissionResult& r = batch.results[p][s];
            if (!r.completed) {
                spdlog::warn("{} on {}: {}", to_string(planners[p]), scenarios[s].name, r.error);
                continue;
            }
            ++completed;
            if (!logs_dir.empty())
                write_text(fs::path(logs_dir) / std::string(to_string(planners[p])) / (scenarios[s].name + ".jsonl"),
                           mission_log_to_string(r.log));
        }
        if (!broken.empty()) {
            // Unloadable scenarios still count in the success-rate denominator.
            std::vector<MissionResult> all = batch.results[p];
            all.insert(all.end(), broken.begin(), broken.end());
            batch.rows[p] = aggregate(to_string(planners[p]), all);
        }
    }
    if (completed == 0) {
        spdlog::error("no mission completed");
        return kExitRuntime;
    }
    write_report(batch.rows, out);
    std::cout << format_table(batch.rows);
    return 0;
}

std::pair<int, int> parse_dims(const std::string& text) {
    int w = 0, h = 0;
    char x = 0, extra = 0;
    if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X'))
        throw Error(ErrorCode::ValidationError, "--dims must look like WxH, got '" + text + "'");
    return {w, h};
}

int cmd_ingest(const std::string& image, int threshold, const std::string& dims, const std::string& out) {
    const GrayImage gray = read_gray_image(image);
    auto [w, h] = dims.empty() ? std::pair{gray.width, gray.height} : parse_dims(dims);
    ScenarioSpec spec;
    spec.grid = InlineGrid{ingest_map_image(gray, threshold, w, h)};
    save_scenario(spec, out);
    std::printf("ingested %s (%dx%d) -> %dx%d grid, %zu blocked cells -> %s\n", image.c_str(), gray.width,
                gray.height, w, h, std::get<InlineGrid>(spec.grid).mask.count(), out.c_str());
    return 0;
}

int cmd_gen_suite(const std::string& kind, int count, std::uint64_t seed, const std::string& out_dir,
                  const std::vector<std::string>& planners) {
    if (count < 1) throw Error(ErrorCode::ValidationError, "--count must be >= 1");
    for (const std::string& id : planners)
        if (!parse_planner_kind(id)) throw Error(ErrorCode::ValidationError, "unknown planner '" + id + "'");
    std::vector<ScenarioSpec> specs;
    if (kind == "static")
        specs = static_suite(count, seed);
    else if (kind == "dynamic")
        specs = dynamic_suite(count, seed);
    else
        throw Error(ErrorCode::ValidationError, "--kind must be static or dynamic");
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    Suite suite;
    suite.planners = planners;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%s_%03zu.json", kind.c_str(), i);
        save_scenario(specs[i], dir / name);
        suite.scenarios.push_back(name);
    }
    save_suite(suite, dir / "suite.json");
    std::printf("wrote %d %s scenarios -> %s\n", count, kind.c_str(), (dir / "suite.json").c_str());
    return 0;
}

#ifdef QPATH_HAVE_SERVICE
int cmd_serve(const std::string& scenario, const std::string& address, int port, int tick_ms, const Overrides& o) {
    if (port < 0 || port > 65535) throw Error(ErrorCode::ValidationError, "--port must be in [0, 65535]");
    const ScenarioSpec spec = load_with_overrides(scenario, o);
    service::SimServer server(service::SimSession(spec, fs::path(scenario).parent_path()),
                              {address, static_cast<std::uint16_t>(port), tick_ms});
    std::printf("listening on http://%s:%u (WebSocket /session)\n", address.c_str(), server.port());
    std::fflush(stdout);
    server.run();
    return 0;
}
#endif

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("qpath");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("QPATH_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only honour real names.
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Hybrid quantum-classical grid path planner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qpath 0.1.0");

    std::string scenario, tables, out, suite, logs_dir, image, dims, planner = "hybrid", kind = "static";
    std::string address = "127.0.0.1";
    int threshold = 128, port = 8080, tick_ms = 100, threads = 0, count = 100;
    std::uint64_t suite_seed = 2024;
    std::vector<std::string> planners{"hybrid", "astar_static", "astar_replan", "classical_q"};
    bool wall_clock = false;
    Overrides o;

    auto* train = app.add_subcommand("train", "Train the per-cell tables for a scenario and save them");
    train->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out, "Output tables JSON")->required();
    add_overrides(train, o, false);

    auto* plan = app.add_subcommand("plan", "Plan a path on the tick-0 map without executing it");
    plan->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    plan->add_option("--tables", tables, "Trained tables (hybrid planner)")->check(CLI::ExistingFile);
    plan->add_option("--out", out, "Write the path as JSON");
    plan->add_option("--planner", planner, "hybrid or astar")->check(CLI::IsMember({"hybrid", "astar"}));
    add_overrides(plan, o, true);

    auto* run = app.add_subcommand("run", "Execute a mission and write its event log (JSONL)");
    run->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--tables", tables, "Trained tables; retrained when they do not fit")->check(CLI::ExistingFile);
    run->add_option("--out", out, "Mission log output (JSONL)");
    add_overrides(run, o, true);

    auto* bench = app.add_subcommand("bench", "Run every suite planner on every suite scenario and write the report");
    bench->add_option("--scenario,--suite", suite, "Suite JSON file")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", out, "Report CSV path; the text table goes next to it as .txt")->required();
    bench->add_option("--logs", logs_dir, "Directory for per-mission logs (<planner>/<scenario>.jsonl)");
    bench->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    bench->add_flag("--wall-clock", wall_clock, "Report measured training time (makes the report non-reproducible)");

    auto* ingest = app.add_subcommand("ingest", "Convert a map image into a scenario skeleton");
    ingest->add_option("--image", image, "PNG or PGM image")->required()->check(CLI::ExistingFile);
    ingest->add_option("--threshold", threshold, "Gray level below which a pixel is dark")->check(CLI::Range(0, 255));
    ingest->add_option("--dims", dims, "Output grid size WxH (default: image size)");
    ingest->add_option("--out", out, "Scenario JSON output")->required();

    auto* gen = app.add_subcommand("gen-suite", "Generate a seeded benchmark suite");
    gen->add_option("--kind", kind, "static or dynamic")->check(CLI::IsMember({"static", "dynamic"}));
    gen->add_option("--count", count, "Number of scenarios");
    gen->add_option("--seed", suite_seed, "Suite seed");
    gen->add_option("--planners", planners, "Planner ids listed in the suite");
    gen->add_option("--out", out, "Output directory")->required();

#ifdef QPATH_HAVE_SERVICE
    auto* serve = app.add_subcommand("serve", "Serve a live mission over WebSocket");
    serve->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    serve->add_option("--address", address, "Listen address");
    serve->add_option("--port", port, "Listen port (0 = any free port)");
    serve->add_option("--tick-ms", tick_ms, "Tick period in milliseconds")->check(CLI::PositiveNumber);
    add_overrides(serve, o, true);
#endif

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*train) return cmd_train(scenario, out, o);
        if (*plan) return cmd_plan(scenario, tables, out, planner, o);
        if (*run) return cmd_run(scenario, tables, out, o);
        if (*bench) return cmd_bench(suite, out, logs_dir, wall_clock, threads);
        if (*ingest) return cmd_ingest(image, threshold, dims, out);
        if (*gen) return cmd_gen_suite(kind, count, suite_seed, out, planners);
#ifdef QPATH_HAVE_SERVICE
        if (*serve) return cmd_serve(scenario, address, port, tick_ms, o);
#endif
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    }
    return 0;
}
