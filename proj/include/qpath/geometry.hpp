#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>

namespace qpath {

inline constexpr double kSqrt2 = 1.4142135623730950488;

struct Cell {
    int x = 0;  // column
    int y = 0;  // row, 0 at the top

    friend constexpr bool operator==(Cell, Cell) = default;
    friend constexpr auto operator<=>(Cell a, Cell b) {
        // row-major order
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

inline constexpr int kNumActions = 8;

struct Offset {
    int dx;
    int dy;
};

/// Action index -> grid offset. Order is E, NE, N, NW, W, SW, S, SE; "north"
/// is decreasing y. The qrl bitplane expansion depends on these indices.
inline constexpr std::array<Offset, kNumActions> kActionOffsets{{
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

constexpr bool is_diagonal(int action) noexcept { return (action & 1) != 0; }

/// Geometric step cost: 1 for cardinal moves, sqrt(2) for diagonals.
constexpr double move_cost(int action) noexcept { return is_diagonal(action) ? kSqrt2 : 1.0; }

constexpr Cell apply_offset(Cell c, int action) noexcept {
    return {c.x + kActionOffsets[action].dx, c.y + kActionOffsets[action].dy};
}

/// Action taking `from` to the 8-adjacent `to`, or -1.
constexpr int action_between(Cell from, Cell to) noexcept {
    const int dx = to.x - from.x;
    const int dy = to.y - from.y;
    for (int a = 0; a < kNumActions; ++a)
        if (kActionOffsets[a].dx == dx && kActionOffsets[a].dy == dy) return a;
    return -1;
}

inline double octile_distance(Cell a, Cell b) noexcept {
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

inline double euclidean_distance(Cell a, Cell b) noexcept {
    return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

constexpr int chebyshev_distance(Cell a, Cell b) noexcept {
    const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx > dy ? dx : dy;
}

/// Step-count representation of an 8-connected path length. Two paths have
/// equal length iff their counts are equal (sqrt(2) is irrational), which lets
/// optimality checks compare exactly.
struct StepCounts {
    std::int64_t cardinal = 0;
    std::int64_t diagonal = 0;

    double length() const noexcept {
        return static_cast<double>(cardinal) + static_cast<double>(diagonal) * kSqrt2;
    }
    StepCounts& operator+=(const StepCounts& o) noexcept {
        cardinal += o.cardinal;
        diagonal += o.diagonal;
        return *this;
    }
    friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

}  // namespace qpath
