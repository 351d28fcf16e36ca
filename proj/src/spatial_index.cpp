#include "qpath/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace qpath {

SpatialIndex::SpatialIndex(const BoolGrid& blocked) {
    std::vector<Cell> pts;
    pts.reserve(blocked.size() - blocked.count());
    for (int y = 0; y < blocked.height(); ++y)
        for (int x = 0; x < blocked.width(); ++x)
            if (!blocked.at({x, y})) pts.push_back({x, y});
    nodes_.reserve(pts.size());
    root_ = build(pts, 0, pts.size(), 0);
}

SpatialIndex::SpatialIndex(std::vector<Cell> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    nodes_.reserve(points.size());
    root_ = build(points, 0, points.size(), 0);
}

std::int32_t SpatialIndex::build(std::vector<Cell>& pts, std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth & 1;
    const std::size_t mid = lo + (hi - lo) / 2;
    auto key = [axis](const Cell& c) { return axis == 0 ? std::pair{c.x, c.y} : std::pair{c.y, c.x}; };
    std::nth_element(pts.begin() + static_cast<std::ptrdiff_t>(lo),
                     pts.begin() + static_cast<std::ptrdiff_t>(mid),
                     pts.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](const Cell& a, const Cell& b) { return key(a) < key(b); });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({pts[mid], -1, -1, static_cast<std::uint8_t>(axis)});
    const std::int32_t left = build(pts, lo, mid, depth + 1);
    const std::int32_t right = build(pts, mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void SpatialIndex::query(std::int32_t id, Cell s, std::int64_t r2, std::vector<Cell>& out) const {
    while (id >= 0) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const std::int64_t dx = n.point.x - s.x;
        const std::int64_t dy = n.point.y - s.y;
        if (dx * dx + dy * dy <= r2 && n.point != s) out.push_back(n.point);
        // Points equal on the split axis may sit on either side.
        const std::int64_t diff = n.axis == 0 ? dx : dy;
        const std::int32_t near = diff > 0 ? n.left : n.right;
        const std::int32_t far = diff > 0 ? n.right : n.left;
        if (diff * diff <= r2) query(far, s, r2, out);
        id = near;
    }
}

std::vector<Cell> SpatialIndex::neighbors_within(Cell s, double r) const {
    std::vector<Cell> out;
    if (root_ < 0 || !(r > 0.0)) return out;
    // Integer coordinates: d^2 <= r^2 iff d^2 <= floor(r^2) (with a guard
    // against r^2 landing just below an integer).
    const auto r2 = static_cast<std::int64_t>(std::floor(r * r + 1e-9));
    query(root_, s, r2, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qpath
