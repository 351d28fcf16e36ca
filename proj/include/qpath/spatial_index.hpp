#pragma once

#include <cstdint>
#include <vector>

#include "qpath/geometry.hpp"
#include "qpath/grid_world.hpp"

namespace qpath {

/// 2-d tree over the free cells of a static grid, used for the fixed-radius
/// neighbour queries of the Q-table smoothing step.
class SpatialIndex {
public:
    SpatialIndex() = default;
    /// Indexes every cell where `blocked` is false.
    explicit SpatialIndex(const BoolGrid& blocked);
    explicit SpatialIndex(std::vector<Cell> points);

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Indexed cells c != s with euclidean(c, s) <= r, in row-major order.
    std::vector<Cell> neighbors_within(Cell s, double r) const;

private:
    struct Node {
        Cell point;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t axis = 0;
    };

    std::int32_t build(std::vector<Cell>& pts, std::size_t lo, std::size_t hi, int depth);
    void query(std::int32_t node, Cell s, std::int64_t r2, std::vector<Cell>& out) const;

    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace qpath
