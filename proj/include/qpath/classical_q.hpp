#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qpath/grid_world.hpp"
#include "qpath/planner.hpp"
#include "qpath/qrl.hpp"
#include "qpath/rng.hpp"
#include "qpath/scenario.hpp"

namespace qpath {

/// Tabular Q-learning baseline: one action row per grid cell.
class ClassicalQ {
public:
    ClassicalQ() = default;
    /// Zero-initialised table. Throws Error(EndpointBlocked) if `goal` is blocked.
    ClassicalQ(const BoolGrid& static_mask, Cell goal);

    int width() const noexcept { return mask_.width(); }
    int height() const noexcept { return mask_.height(); }
    Cell goal() const noexcept { return goal_; }
    const BoolGrid& mask() const noexcept { return mask_; }

    qrl::ActionRow& row(Cell c) { return q_[mask_.index(c)]; }
    const qrl::ActionRow& row(Cell c) const { return q_[mask_.index(c)]; }

    /// Total number of single-entry Q updates applied so far.
    std::uint64_t updates() const noexcept { return updates_; }
    std::uint64_t episodes() const noexcept { return episodes_; }

    /// Runs `episodes` more epsilon-greedy episodes, continuing from the
    /// current table and generator state.
    void train(int episodes, const ClassicalConfig& config, Rng& rng);

    friend bool operator==(const ClassicalQ&, const ClassicalQ&) = default;

private:
    BoolGrid mask_;
    Cell goal_{};
    std::vector<qrl::ActionRow> q_;
    std::uint64_t updates_ = 0;
    std::uint64_t episodes_ = 0;
};

/// Trains a fresh table for `config.episodes` episodes.
ClassicalQ train_classical_q(const BoolGrid& static_mask, Cell goal, const ClassicalConfig& config,
                             std::uint64_t seed);

/// Follows the greedy policy from `src` over cells free in `occupancy`.
/// Returns nullopt when the walk revisits a cell or exceeds `max_steps`.
std::optional<Path> greedy_rollout(const ClassicalQ& q, const BoolGrid& occupancy, Cell src, int max_steps);

}  // namespace qpath
