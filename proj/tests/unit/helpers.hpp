#pragma once

#include <string>
#include <vector>

#include "qpath/grid_world.hpp"
#include "qpath/rng.hpp"

namespace testing {

// Rows of '.' (free) and '#' (blocked).
inline qpath::BoolGrid grid_from(const std::vector<std::string>& rows) {
    qpath::BoolGrid g(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) g.set({x, y}, rows[y][x] == '#');
    return g;
}

inline qpath::BoolGrid random_grid(int w, int h, double density, std::uint64_t seed) {
    qpath::Rng rng(seed);
    qpath::BoolGrid g(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) g.set({x, y}, rng.bernoulli(density));
    return g;
}

inline std::vector<bool> to_bools(const qpath::BoolGrid& g) {
    std::vector<bool> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g.raw()[i] != 0;
    return out;
}

}  // namespace testing
