#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qpath/scenario.hpp"

namespace qpath {

/// Benchmark suite file: scenario paths (relative to the suite file) and
/// the planner ids to run on each.
struct Suite {
    std::vector<std::filesystem::path> scenarios;
    std::vector<std::string> planners;
};

/// Throws Error(ParseError / IoError).
Suite parse_suite(const std::string& text);
Suite load_suite(const std::filesystem::path& path);
void save_suite(const Suite& suite, const std::filesystem::path& path);

/// 8-connected component labels of free cells (-1 for blocked).
std::vector<int> free_components(const BoolGrid& mask);

struct StaticSuiteConfig {
    int width = 50;
    int height = 50;
    double density = 0.25;
    /// Minimum octile distance between source and destination, as a
    /// fraction of max(width, height).
    double min_separation = 0.6;
};

/// Random blocked cells with probability `density`; source and destination
/// are connected free cells at least min_separation apart.
ScenarioSpec random_static_scenario(const StaticSuiteConfig& config, std::uint64_t seed);
std::vector<ScenarioSpec> static_suite(int count, std::uint64_t seed, const StaticSuiteConfig& config = {});

struct DynamicSuiteConfig {
    int width = 32;
    int height = 32;
    double density = 0.12;
    double min_separation = 0.6;
    /// Moving obstacles patrolling across the static A* route.
    int movers = 3;
    int patrol_half_length = 4;
    /// Adds a multi-cell dynamic obstacle that drives onto the route and parks.
    bool parked_obstacle = true;
};

/// Static map as above plus obstacles whose schedules cross the route
/// between source and destination.
ScenarioSpec random_dynamic_scenario(const DynamicSuiteConfig& config, std::uint64_t seed);
std::vector<ScenarioSpec> dynamic_suite(int count, std::uint64_t seed, const DynamicSuiteConfig& config = {});

}  // namespace qpath
