#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpath/grid_world.hpp"
#include "qpath/qsim.hpp"
#include "qpath/rng.hpp"
#include "qpath/spatial_index.hpp"

namespace qpath::qrl {

/// Value stored for actions that leave the grid or hit a static obstacle.
inline constexpr double kBlockedSentinel = -1e6;

constexpr bool is_sentinel(double v) noexcept { return v <= kBlockedSentinel; }

using ActionRow = std::array<double, kNumActions>;
/// [straight_value, turn_value]
using DensityRow = std::array<double, 2>;

enum class TrainMode {
    /// One episode is a row-major pass over every free cell.
    Sweep,
    /// One episode is an epsilon-greedy agent trajectory from a random free
    /// cell, updating the cells it visits.
    Trajectory,
};

struct TrainConfig {
    double alpha_initial = 0.1;
    double beta_density = 0.05;
    double beta_smooth = 0.3;
    double epsilon = 0.2;
    double smooth_radius = 2.0;
    int episodes = 1;
    double init_scale = 0.1;
    int turn_window = 2;
    TrainMode mode = TrainMode::Sweep;
    /// Step cap per episode in trajectory mode.
    int max_trajectory_steps = 500;
    std::uint64_t seed = 0;

    /// Throws Error(ValidationError) naming the offending field.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct QuantumDelta {
    ActionRow action{};
    DensityRow density{};
};

/// Per-free-cell action and turn-density tables trained toward one goal.
class QTables {
public:
    QTables() = default;
    /// Rows (zero-filled) for every free cell of `static_mask`.
    QTables(const BoolGrid& static_mask, Cell goal);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Cell goal() const noexcept { return goal_; }
    std::size_t rows() const noexcept { return cells_.size(); }
    /// Free cells in row-major order; row i belongs to cells()[i].
    std::span<const Cell> cells() const noexcept { return cells_; }

    bool has_row(Cell c) const noexcept;
    std::int32_t row_index(Cell c) const noexcept;

    ActionRow& action(Cell c) { return q_action_[checked_row(c)]; }
    const ActionRow& action(Cell c) const { return q_action_[checked_row(c)]; }
    DensityRow& density(Cell c) { return q_density_[checked_row(c)]; }
    const DensityRow& density(Cell c) const { return q_density_[checked_row(c)]; }

    std::span<ActionRow> action_rows() noexcept { return q_action_; }
    std::span<const ActionRow> action_rows() const noexcept { return q_action_; }
    std::span<DensityRow> density_rows() noexcept { return q_density_; }
    std::span<const DensityRow> density_rows() const noexcept { return q_density_; }

    /// Number of apply_update calls per row.
    std::span<const std::uint32_t> update_counts() const noexcept { return updates_; }
    std::uint32_t update_count(Cell c) const { return updates_[checked_row(c)]; }

    const SpatialIndex& index() const noexcept { return *index_; }

    /// True when rows exist exactly for the free cells of `static_mask`.
    bool matches(const BoolGrid& static_mask) const;

    friend bool operator==(const QTables& a, const QTables& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.goal_ == b.goal_ &&
               a.cells_ == b.cells_ && a.q_action_ == b.q_action_ && a.q_density_ == b.q_density_ &&
               a.updates_ == b.updates_;
    }

private:
    friend void apply_update(QTables&, Cell, const QuantumDelta&);
    friend QTables tables_from_json(const nlohmann::json&);

    std::size_t checked_row(Cell c) const;

    int width_ = 0;
    int height_ = 0;
    Cell goal_{};
    std::vector<std::int32_t> row_of_;
    std::vector<Cell> cells_;
    std::vector<ActionRow> q_action_;
    std::vector<DensityRow> q_density_;
    std::vector<std::uint32_t> updates_;
    std::shared_ptr<const SpatialIndex> index_ = std::make_shared<SpatialIndex>();
};

/// Random init plus an octile goal potential on each action's target;
/// blocked actions get kBlockedSentinel. Throws Error(EndpointBlocked) when
/// `goal` is not free.
QTables init_tables(const BoolGrid& static_mask, Cell goal, const TrainConfig& config);

/// Bitplane expansion of <Z_0..2> onto the 8 actions, and the scaled
/// <Z_3>, <Z_4> density deltas. Bit i of an action index is the bit that
/// qubit i holds when the action's value is amplitude-encoded on wires
/// {0,1,2}, i.e. (a >> (2 - i)) & 1.
QuantumDelta quantum_delta(const qsim::Measurements& m, const TrainConfig& config);

/// Row-wise addition at `s`; sentinel entries are left untouched.
void apply_update(QTables& tables, Cell s, const QuantumDelta& delta);

/// Epsilon-greedy over non-sentinel actions; greedy ties go to the lowest
/// index. Throws Error(DeadEnd) when every action is blocked.
int select_action(const QTables& tables, Cell s, double epsilon, Rng& rng);

/// Blends each neighbour's non-sentinel entries toward the row at `s`.
/// Entries that are blocked at `s` are skipped on the neighbour as well.
void smooth_neighbors(QTables& tables, Cell s, const TrainConfig& config);

/// Min-max normalised encoder inputs for a cell.
std::array<double, kNumActions> normalized_action_row(const ActionRow& row);
DensityRow normalized_density_row(const DensityRow& row);

struct TrainStats {
    std::uint64_t cell_updates = 0;
    std::uint64_t critic_evaluations = 0;
    std::uint64_t trajectory_steps = 0;
};

/// Quantum-assisted training toward `goal` on the static obstacles of
/// `static_mask` (dynamic obstacles are handled at execution time).
QTables train(const BoolGrid& static_mask, Cell goal, const TrainConfig& config,
              const qsim::CircuitParams& params, TrainStats* stats = nullptr);

nlohmann::json tables_to_json(const QTables& tables);
QTables tables_from_json(const nlohmann::json& doc);
void save_tables(const QTables& tables, const std::filesystem::path& path);
QTables load_tables(const std::filesystem::path& path);

}  // namespace qpath::qrl
