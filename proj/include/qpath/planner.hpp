#pragma once

#include <optional>
#include <vector>

#include "qpath/geometry.hpp"
#include "qpath/grid_world.hpp"
#include "qpath/qrl.hpp"

namespace qpath {

/// 8-connected cell sequence. `cost` is the geometric length, computed from
/// the step counts so equal-length paths compare exactly equal.
struct Path {
    std::vector<Cell> cells;
    StepCounts steps;
    double cost = 0.0;

    bool empty() const noexcept { return cells.empty(); }
    std::size_t size() const noexcept { return cells.size(); }

    /// Throws Error(ValidationError) when consecutive cells are not 8-adjacent.
    static Path from_cells(std::vector<Cell> cells);
};

struct PlannerConfig {
    /// Weight of the turn-density value subtracted from the step cost.
    double q_weight = 1.0;
    /// Weight of the octile goal term in the search priority. 0 leaves the
    /// priority as the bare cost + movecost - q_weight * qval.
    double heuristic_weight = 1.0;
    /// Extra cost for stepping onto a cell already traversed in the mission.
    double visited_penalty = 0.0;

    void validate() const;
    friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

/// Turn-density value of taking `action` from `s`: the straight entry of the
/// target row when `action` keeps `prev_heading` (or there is no heading yet),
/// else the turn entry. Throws Error(Blocked) if the target is not free.
double qval(const qrl::QTables& tables, const BoolGrid& occupancy, Cell s, int action,
            std::optional<int> prev_heading);

/// cost + movecost - q_weight * qval
constexpr double total_cost(double g, double movecost, double qv, const PlannerConfig& config) noexcept {
    return g + movecost - config.q_weight * qv;
}

struct SearchTrace {
    std::vector<Cell> expansions;
};

/// Best-first search ranking frontier nodes by total_cost plus the weighted
/// octile distance to `dst`. Each expansion pushes successors in descending
/// Q-action order; a closed set prevents re-expansion. `visited` marks cells
/// already traversed (for visited_penalty) and may be null.
/// Throws Error(NoPath).
Path plan_hybrid(const BoolGrid& occupancy, const qrl::QTables& tables, Cell src, Cell dst,
                 const PlannerConfig& config, const BoolGrid* visited = nullptr,
                 SearchTrace* trace = nullptr);

/// Optimal 8-connected A* with the octile heuristic; frontier ties resolve
/// in insertion order. Throws Error(NoPath).
Path plan_astar(const BoolGrid& occupancy, Cell src, Cell dst);

}  // namespace qpath
