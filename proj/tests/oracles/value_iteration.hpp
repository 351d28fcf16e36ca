#pragma once

// Value iteration for the classical Q-learning reward model on a straight
// 1 x n corridor with the goal at the east end. Only E and W moves stay in
// the corridor; every other action bumps a wall.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

struct CorridorModel {
    int n = 8;
    double gamma = 0.95;
    double reward_goal = 100.0;
    double penalty_collision = 10.0;
};

// Q*(x, a) for actions 0..7 in E, NE, N, NW, W, SW, S, SE order.
inline std::vector<std::array<double, 8>> corridor_q(const CorridorModel& m, int iterations = 2000) {
    std::vector<std::array<double, 8>> q(m.n, std::array<double, 8>{});
    auto vmax = [&](int x) { return *std::max_element(q[x].begin(), q[x].end()); };
    for (int it = 0; it < iterations; ++it) {
        auto next = q;
        for (int x = 0; x < m.n - 1; ++x) {
            for (int a = 0; a < 8; ++a) {
                int to = -1;
                if (a == 0) to = x + 1;
                if (a == 4 && x > 0) to = x - 1;
                if (to < 0)
                    next[x][a] = -m.penalty_collision + m.gamma * vmax(x);
                else if (to == m.n - 1)
                    next[x][a] = m.reward_goal;
                else
                    next[x][a] = -1.0 + m.gamma * vmax(to);
            }
        }
        q = next;
    }
    return q;
}

}  // namespace oracle
