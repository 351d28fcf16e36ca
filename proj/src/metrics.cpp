#include "qpath/metrics.hpp"

#include <string>

#include "qpath/error.hpp"

namespace qpath {

StepCounts step_counts(std::span<const Cell> cells) {
    StepCounts s;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i] == cells[i - 1]) continue;
        const int a = action_between(cells[i - 1], cells[i]);
        if (a < 0) throw Error(ErrorCode::ValidationError, "non-adjacent cells at index " + std::to_string(i));
        if (is_diagonal(a))
            ++s.diagonal;
        else
            ++s.cardinal;
    }
    return s;
}

double path_length(std::span<const Cell> cells) { return step_counts(cells).length(); }

int smoothness(std::span<const Cell> cells) {
    int turns = 0;
    int prev = -1;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i] == cells[i - 1]) continue;
        const int a = action_between(cells[i - 1], cells[i]);
        if (a < 0) throw Error(ErrorCode::ValidationError, "non-adjacent cells at index " + std::to_string(i));
        if (prev >= 0 && a != prev) ++turns;
        prev = a;
    }
    return turns;
}

}  // namespace qpath
