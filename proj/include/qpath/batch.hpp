#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpath/mission.hpp"
#include "qpath/qrl.hpp"
#include "qpath/scenario.hpp"

namespace qpath {

enum class PlannerKind {
    Hybrid,       // trained tables + hybrid search, reactive execution
    AstarStatic,  // A* on the tick-0 snapshot, followed blindly
    AstarReplan,  // A* legs with reactive execution
    ClassicalQ,   // tabular Q-learning greedy rollout, followed blindly
};

std::string_view to_string(PlannerKind kind) noexcept;
std::optional<PlannerKind> parse_planner_kind(std::string_view text) noexcept;

/// Aggregate row of the comparison table.
struct MetricsRow {
    std::string planner;
    double success_rate = 0.0;
    double mean_distance = 0.0;
    double mean_turn_count = 0.0;
    double mean_replans = 0.0;
    double train_time_ms = 0.0;
    double mean_exec_ticks = 0.0;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct BatchScenario {
    std::string name;
    ScenarioSpec spec;
    std::filesystem::path base_dir;  // for image grids
};

struct MissionResult {
    bool completed = false;  // false when the scenario could not be built or trained
    std::string error;
    MissionLog log;
    double train_time_ms = 0.0;
    std::uint64_t train_updates = 0;
};

struct BatchOptions {
    /// Measure training wall time. Off by default so reports are byte-stable.
    bool wall_clock = false;
    /// OpenMP thread count; 0 keeps the runtime default.
    int threads = 0;
};

struct BatchResult {
    std::vector<MetricsRow> rows;                     // one per planner, in input order
    std::vector<std::vector<MissionResult>> results;  // [planner][scenario]
};

/// Mission parameters of a scenario on its built world.
Mission mission_for(const ScenarioSpec& spec, const OccupancyWorld& world);
/// Hybrid tables for `goal` on `static_mask`, trained with the scenario's settings.
std::shared_ptr<const qrl::QTables> train_hybrid(const ScenarioSpec& spec, const BoolGrid& static_mask, Cell goal,
                                                 qrl::TrainStats* stats = nullptr);

/// One planner on one scenario. Never throws: failures land in `error`.
MissionResult run_planner(const BatchScenario& scenario, PlannerKind planner, bool wall_clock = false);

/// Means over successful missions for distance, turns and ticks; mean
/// replans over completed missions; success_rate over all. Sums are formed
/// from exact integer counts so permuting `results` gives identical rows.
MetricsRow aggregate(std::string_view planner, std::span<const MissionResult> results);

/// Runs every planner on every scenario, missions spread over OpenMP threads.
/// Throws Error(ValidationError) when `scenarios` is empty.
BatchResult run_batch(std::span<const BatchScenario> scenarios, std::span<const PlannerKind> planners,
                      const BatchOptions& options = {});
/// Single-threaded reference with identical output.
BatchResult run_batch_serial(std::span<const BatchScenario> scenarios, std::span<const PlannerKind> planners,
                             const BatchOptions& options = {});

inline constexpr std::string_view kReportColumns =
    "planner,success_rate,mean_distance,mean_turn_count,mean_replans,train_time_ms,mean_exec_ticks";

std::string format_csv(std::span<const MetricsRow> rows);
std::string format_table(std::span<const MetricsRow> rows);
/// Throws Error(ParseError).
std::vector<MetricsRow> parse_csv(const std::string& text);
/// Writes `path` (CSV) and `path` with extension .txt (aligned table).
/// Throws ValidationError for empty rows, IoError on write failure.
void write_report(std::span<const MetricsRow> rows, const std::filesystem::path& path);

}  // namespace qpath
