#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpath/grid_world.hpp"
#include "qpath/planner.hpp"
#include "qpath/qrl.hpp"
#include "qpath/qsim.hpp"

namespace qpath {

struct InlineGrid {
    BoolGrid mask;
    friend bool operator==(const InlineGrid&, const InlineGrid&) = default;
};

struct ImageGrid {
    std::string path;  // relative paths resolve against the scenario file's directory
    int threshold = 128;
    int width = 0;
    int height = 0;
    friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

using GridSource = std::variant<InlineGrid, ImageGrid>;

/// Tabular Q-learning baseline settings.
struct ClassicalConfig {
    int episodes = 2000;
    double alpha = 0.1;
    double gamma = 0.95;
    double epsilon = 0.2;
    double reward_goal = 100.0;
    double penalty_collision = 10.0;
    int max_steps = 0;  // 0: 4 * (width + height)

    void validate() const;
    friend bool operator==(const ClassicalConfig&, const ClassicalConfig&) = default;
};

struct Hyperparams {
    qrl::TrainConfig train;  // train.seed is derived from the scenario seed
    int layers = 2;
    std::optional<std::uint64_t> circuit_seed;
    PlannerConfig planner;
    ClassicalConfig classical;
    std::int64_t wait_timeout = 5;
    std::int64_t max_ticks = 0;  // 0: 20 * (width + height)

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct ScenarioSpec {
    GridSource grid = InlineGrid{};
    std::vector<Obstacle> obstacles;
    Cell source{};
    Cell destination{};
    std::vector<Cell> survivors;
    double safety_radius = 3.0;
    std::uint64_t seed = 0;
    Hyperparams hyper;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Throws Error(ParseError) naming the field (or line/column for malformed
/// JSON) and Error(ValidationError) for out-of-range values.
ScenarioSpec scenario_from_json(const nlohmann::json& doc);
ScenarioSpec parse_scenario(const std::string& text);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

ScenarioSpec load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

/// Terrain raster for the scenario's grid source. Image paths resolve against `base_dir`.
BoolGrid resolve_grid(const ScenarioSpec& spec, const std::filesystem::path& base_dir = {});

/// World at tick 0. Throws OutOfBounds, EndpointBlocked or ValidationError.
OccupancyWorld build_world(const ScenarioSpec& spec, const std::filesystem::path& base_dir = {});
/// Same, on an already resolved terrain raster.
OccupancyWorld build_world(const ScenarioSpec& spec, BoolGrid terrain);

/// Training settings with the seed derived from the scenario seed.
qrl::TrainConfig train_config(const ScenarioSpec& spec);
qsim::CircuitParams circuit_params(const ScenarioSpec& spec);

std::int64_t effective_max_ticks(const ScenarioSpec& spec, int width, int height);

}  // namespace qpath
