#include "qpath/kernels.hpp"

#include <algorithm>
#include <cstdint>

namespace qpath::kernels {

std::vector<double> density_field(const BoolGrid& occ, int w) {
    const int W = occ.width();
    const int H = occ.height();
    // sat[(y+1)*(W+1) + (x+1)] = blocked count in [0,x] x [0,y]
    std::vector<std::int32_t> sat(static_cast<std::size_t>(W + 1) * static_cast<std::size_t>(H + 1), 0);
    for (int y = 0; y < H; ++y) {
        std::int32_t row = 0;
        for (int x = 0; x < W; ++x) {
            row += occ.at({x, y}) ? 1 : 0;
            sat[static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(W + 1) + static_cast<std::size_t>(x + 1)] =
                sat[static_cast<std::size_t>(y) * static_cast<std::size_t>(W + 1) + static_cast<std::size_t>(x + 1)] + row;
        }
    }
    auto at = [&](int x, int y) {
        return sat[static_cast<std::size_t>(y) * static_cast<std::size_t>(W + 1) + static_cast<std::size_t>(x)];
    };

    std::vector<double> out(occ.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        const int y0 = std::max(0, y - w);
        const int y1 = std::min(H - 1, y + w);
        for (int x = 0; x < W; ++x) {
            const int x0 = std::max(0, x - w);
            const int x1 = std::min(W - 1, x + w);
            std::int32_t blocked = at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
            if (occ.at({x, y})) --blocked;
            const int total = (x1 - x0 + 1) * (y1 - y0 + 1) - 1;
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(W) + static_cast<std::size_t>(x)] =
                total == 0 ? 0.0 : static_cast<double>(blocked) / static_cast<double>(total);
        }
    }
    return out;
}

std::vector<double> density_field_serial(const BoolGrid& occ, int w) {
    std::vector<double> out(occ.size(), 0.0);
    for (int y = 0; y < occ.height(); ++y)
        for (int x = 0; x < occ.width(); ++x) out[occ.index({x, y})] = turn_feature(occ, {x, y}, w);
    return out;
}

}  // namespace qpath::kernels
