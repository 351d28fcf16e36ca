#include "qpath/classical_q.hpp"

#include <algorithm>

#include "qpath/error.hpp"

namespace qpath {
namespace {

int greedy(const qrl::ActionRow& row, const BoolGrid& occ, Cell s) {
    int best = -1;
    for (int a = 0; a < kNumActions; ++a) {
        if (!next_state(occ, s, a)) continue;
        if (best < 0 || row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
    }
    return best;
}

}  // namespace

ClassicalQ::ClassicalQ(const BoolGrid& static_mask, Cell goal)
    : mask_(static_mask), goal_(goal), q_(static_mask.size(), qrl::ActionRow{}) {
    if (!mask_.in_bounds(goal)) throw Error(ErrorCode::OutOfBounds, "goal outside grid");
    if (mask_.at(goal)) throw Error(ErrorCode::EndpointBlocked, "goal is blocked");
}

void ClassicalQ::train(int episodes, const ClassicalConfig& config, Rng& rng) {
    config.validate();
    std::vector<Cell> starts;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        const Cell c = mask_.cell(i);
        if (!mask_.at(c) && c != goal_) starts.push_back(c);
    }
    if (starts.empty()) return;
    const int max_steps = config.max_steps > 0 ? config.max_steps : 4 * (width() + height());

    for (int e = 0; e < episodes; ++e, ++episodes_) {
        Cell s = starts[rng.below(starts.size())];
        for (int step = 0; step < max_steps; ++step) {
            int a;
            if (rng.bernoulli(config.epsilon))
                a = static_cast<int>(rng.below(kNumActions));
            else {
                const qrl::ActionRow& r = row(s);
                a = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
            }
            double& q = row(s)[static_cast<std::size_t>(a)];
            const auto next = next_state(mask_, s, a);
            ++updates_;
            if (!next) {
                // Bumping into a wall: penalised, agent stays put.
                const qrl::ActionRow& r = row(s);
                const double target = -config.penalty_collision + config.gamma * *std::max_element(r.begin(), r.end());
                q += config.alpha * (target - q);
                continue;
            }
            if (*next == goal_) {
                q += config.alpha * (config.reward_goal - q);
                break;
            }
            const qrl::ActionRow& r = row(*next);
            const double target = -move_cost(a) + config.gamma * *std::max_element(r.begin(), r.end());
            q += config.alpha * (target - q);
            s = *next;
        }
    }
}

ClassicalQ train_classical_q(const BoolGrid& static_mask, Cell goal, const ClassicalConfig& config,
                             std::uint64_t seed) {
    ClassicalQ q(static_mask, goal);
    Rng rng = Rng::derive(seed, 21);
    q.train(config.episodes, config, rng);
    return q;
}

std::optional<Path> greedy_rollout(const ClassicalQ& q, const BoolGrid& occ, Cell src, int max_steps) {
    if (!occ.in_bounds(src) || occ.at(src)) return std::nullopt;
    BoolGrid seen(occ.width(), occ.height());
    std::vector<Cell> cells{src};
    seen.set(src, true);
    Cell s = src;
    for (int step = 0; step < max_steps && s != q.goal(); ++step) {
        const int a = greedy(q.row(s), occ, s);
        if (a < 0) return std::nullopt;
        s = apply_offset(s, a);
        if (seen.at(s)) return std::nullopt;  // greedy loop
        seen.set(s, true);
        cells.push_back(s);
    }
    if (s != q.goal()) return std::nullopt;
    return Path::from_cells(std::move(cells));
}

}  // namespace qpath
