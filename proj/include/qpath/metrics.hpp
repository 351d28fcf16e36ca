#pragma once

#include <span>

#include "qpath/geometry.hpp"
#include "qpath/planner.hpp"

namespace qpath {

/// Step counts of an 8-connected cell sequence; repeated cells (holds) are
/// zero-length steps.
StepCounts step_counts(std::span<const Cell> cells);

/// Sum of step costs (1 or sqrt(2)).
double path_length(std::span<const Cell> cells);
inline double path_length(const Path& path) { return path_length(path.cells); }

/// Number of consecutive step pairs whose headings differ. Holds are
/// skipped, so pausing never counts as a turn.
int smoothness(std::span<const Cell> cells);
inline int smoothness(const Path& path) { return smoothness(path.cells); }

}  // namespace qpath
