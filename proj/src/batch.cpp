#include "qpath/batch.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "qpath/classical_q.hpp"
#include "qpath/error.hpp"
#include "qpath/qrl.hpp"

namespace qpath {
namespace {

std::string number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

LegPlanner classical_leg_planner(std::shared_ptr<const ClassicalQ> q) {
    return [q = std::move(q)](const BoolGrid& occ, Cell from, Cell to, const BoolGrid&) -> Path {
        if (to != q->goal()) throw Error(ErrorCode::NoPath, "classical table was trained for another goal");
        auto path = greedy_rollout(*q, occ, from, occ.width() * occ.height());
        if (!path) throw Error(ErrorCode::NoPath, "greedy policy does not reach the goal");
        return std::move(*path);
    };
}

}  // namespace

std::string_view to_string(PlannerKind kind) noexcept {
    switch (kind) {
        case PlannerKind::Hybrid: return "hybrid";
        case PlannerKind::AstarStatic: return "astar_static";
        case PlannerKind::AstarReplan: return "astar_replan";
        case PlannerKind::ClassicalQ: return "classical_q";
    }
    return "unknown";
}

std::optional<PlannerKind> parse_planner_kind(std::string_view text) noexcept {
    for (PlannerKind k : {PlannerKind::Hybrid, PlannerKind::AstarStatic, PlannerKind::AstarReplan, PlannerKind::ClassicalQ})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

Mission mission_for(const ScenarioSpec& spec, const OccupancyWorld& world) {
    Mission mission;
    mission.source = spec.source;
    mission.destination = spec.destination;
    mission.survivors = spec.survivors;
    mission.safety_radius = spec.safety_radius;
    mission.wait_timeout = spec.hyper.wait_timeout;
    mission.max_ticks = effective_max_ticks(spec, world.width(), world.height());
    return mission;
}

std::shared_ptr<const qrl::QTables> train_hybrid(const ScenarioSpec& spec, const BoolGrid& static_mask, Cell goal,
                                                 qrl::TrainStats* stats) {
    return std::make_shared<const qrl::QTables>(
        qrl::train(static_mask, goal, train_config(spec), circuit_params(spec), stats));
}

MissionResult run_planner(const BatchScenario& scenario, PlannerKind planner, bool wall_clock) {
    MissionResult result;
    try {
        const ScenarioSpec& spec = scenario.spec;
        OccupancyWorld world = build_world(spec, scenario.base_dir);
        const Mission mission = mission_for(spec, world);

        LegPlanner legs;
        ExecutionMode mode = ExecutionMode::Reactive;
        const auto t0 = std::chrono::steady_clock::now();
        switch (planner) {
            case PlannerKind::Hybrid: {
                qrl::TrainStats stats;
                auto tables = train_hybrid(spec, world.static_mask(), spec.destination, &stats);
                result.train_updates = stats.cell_updates;
                legs = hybrid_leg_planner(std::move(tables), spec.hyper.planner);
                break;
            }
            case PlannerKind::AstarStatic:
                legs = astar_leg_planner();
                mode = ExecutionMode::StaticReplay;
                break;
            case PlannerKind::AstarReplan:
                legs = astar_leg_planner();
                break;
            case PlannerKind::ClassicalQ: {
                auto q = std::make_shared<const ClassicalQ>(train_classical_q(
                    world.static_mask(), spec.destination, spec.hyper.classical, splitmix64(spec.seed ^ splitmix64(13))));
                result.train_updates = q->updates();
                legs = classical_leg_planner(std::move(q));
                mode = ExecutionMode::StaticReplay;
                break;
            }
        }
        if (wall_clock && planner != PlannerKind::AstarStatic && planner != PlannerKind::AstarReplan)
            result.train_time_ms = elapsed_ms(t0);
        result.log = execute_mission(std::move(world), mission, legs, mode);
        result.completed = true;
    } catch (const std::exception& e) {
        result.completed = false;
        result.error = e.what();
    }
    return result;
}

MetricsRow aggregate(std::string_view planner, std::span<const MissionResult> results) {
    MetricsRow row;
    row.planner = std::string(planner);
    if (results.empty()) return row;
    std::int64_t successes = 0, completed = 0, turns = 0, ticks = 0, replans = 0;
    StepCounts steps;
    std::vector<double> times;
    for (const MissionResult& r : results) {
        if (!r.completed) continue;
        ++completed;
        replans += r.log.replan_count;
        times.push_back(r.train_time_ms);
        if (r.log.outcome != Outcome::Success) continue;
        ++successes;
        steps += r.log.steps;
        turns += r.log.turn_count;
        ticks += r.log.ticks();
    }
    row.success_rate = static_cast<double>(successes) / static_cast<double>(results.size());
    if (successes > 0) {
        const auto n = static_cast<double>(successes);
        row.mean_distance = steps.length() / n;
        row.mean_turn_count = static_cast<double>(turns) / n;
        row.mean_exec_ticks = static_cast<double>(ticks) / n;
    }
    if (completed > 0) {
        row.mean_replans = static_cast<double>(replans) / static_cast<double>(completed);
        std::sort(times.begin(), times.end());
        double sum = 0.0;
        for (double t : times) sum += t;
        row.train_time_ms = sum / static_cast<double>(completed);
    }
    return row;
}

namespace {

BatchResult finish_batch(std::span<const PlannerKind> planners, std::vector<std::vector<MissionResult>> results) {
    BatchResult out;
    for (std::size_t p = 0; p < planners.size(); ++p) out.rows.push_back(aggregate(to_string(planners[p]), results[p]));
    out.results = std::move(results);
    return out;
}

void check_inputs(std::span<const BatchScenario> scenarios, std::span<const PlannerKind> planners) {
    if (scenarios.empty()) throw Error(ErrorCode::ValidationError, "batch needs at least one scenario");
    if (planners.empty()) throw Error(ErrorCode::ValidationError, "batch needs at least one planner");
}

}  // namespace

BatchResult run_batch(std::span<const BatchScenario> scenarios, std::span<const PlannerKind> planners,
                      const BatchOptions& options) {
    check_inputs(scenarios, planners);
    const std::size_t ns = scenarios.size();
    const std::size_t total = planners.size() * ns;
    std::vector<std::vector<MissionResult>> results(planners.size(), std::vector<MissionResult>(ns));
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t job = 0; job < total; ++job) {
        const std::size_t p = job / ns;
        const std::size_t s = job % ns;
        results[p][s] = run_planner(scenarios[s], planners[p], options.wall_clock);
    }
    return finish_batch(planners, std::move(results));
}

BatchResult run_batch_serial(std::span<const BatchScenario> scenarios, std::span<const PlannerKind> planners,
                             const BatchOptions& options) {
    check_inputs(scenarios, planners);
    std::vector<std::vector<MissionResult>> results(planners.size());
    for (std::size_t p = 0; p < planners.size(); ++p)
        for (const BatchScenario& s : scenarios) results[p].push_back(run_planner(s, planners[p], options.wall_clock));
    return finish_batch(planners, std::move(results));
}

std::string format_csv(std::span<const MetricsRow> rows) {
    std::string out(kReportColumns);
    out += '\n';
    for (const MetricsRow& r : rows) {
        out += r.planner;
        for (double v : {r.success_rate, r.mean_distance, r.mean_turn_count, r.mean_replans, r.train_time_ms,
                         r.mean_exec_ticks}) {
            out += ',';
            out += number(v);
        }
        out += '\n';
    }
    return out;
}

std::string format_table(std::span<const MetricsRow> rows) {
    // One column per planner, one line per metric.
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"metric"});
    for (const MetricsRow& r : rows) cells[0].push_back(r.planner);
    auto line = [&](const char* name, auto get, const char* fmt) {
        std::vector<std::string> l{name};
        for (const MetricsRow& r : rows) {
            char buf[64];
            std::snprintf(buf, sizeof buf, fmt, get(r));
            l.emplace_back(buf);
        }
        cells.push_back(std::move(l));
    };
    line("success_rate", [](const MetricsRow& r) { return r.success_rate; }, "%.3f");
    line("mean_distance", [](const MetricsRow& r) { return r.mean_distance; }, "%.2f");
    line("mean_turn_count", [](const MetricsRow& r) { return r.mean_turn_count; }, "%.2f");
    line("mean_replans", [](const MetricsRow& r) { return r.mean_replans; }, "%.2f");
    line("train_time_ms", [](const MetricsRow& r) { return r.train_time_ms; }, "%.1f");
    line("mean_exec_ticks", [](const MetricsRow& r) { return r.mean_exec_ticks; }, "%.1f");

    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& l : cells)
        for (std::size_t c = 0; c < l.size(); ++c) width[c] = std::max(width[c], l[c].size());
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& l = cells[i];
        for (std::size_t c = 0; c < l.size(); ++c) {
            if (c > 0) out += "  ";
            const std::string pad(width[c] - l[c].size(), ' ');
            out += c == 0 ? l[c] + pad : pad + l[c];
        }
        out += '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
            out += std::string(total, '-') + '\n';
        }
    }
    return out;
}

std::vector<MetricsRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportColumns)
        throw Error(ErrorCode::ParseError, "report header does not match the expected columns");
    std::vector<MetricsRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 7)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 7 fields");
        MetricsRow r;
        r.planner = fields[0];
        double* dst[] = {&r.success_rate, &r.mean_distance, &r.mean_turn_count, &r.mean_replans, &r.train_time_ms,
                         &r.mean_exec_ticks};
        for (std::size_t i = 0; i < 6; ++i) {
            const std::string& f = fields[i + 1];
            const auto res = std::from_chars(f.data(), f.data() + f.size(), *dst[i]);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number '" + f + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_report(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
    if (rows.empty()) throw Error(ErrorCode::ValidationError, "report needs at least one row");
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
        out << text;
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
    };
    write(path, format_csv(rows));
    std::filesystem::path table = path;
    table.replace_extension(".txt");
    write(table, format_table(rows));
}

}  // namespace qpath
