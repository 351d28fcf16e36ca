#include "qpath/qrl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "qpath/error.hpp"
#include "qpath/kernels.hpp"

namespace qpath::qrl {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kPolicyStream = 2;
constexpr std::uint64_t kStartStream = 3;

std::string cell_text(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

}  // namespace

void TrainConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& rule) {
        throw Error(ErrorCode::ValidationError, "hyperparams." + field + " " + rule);
    };
    if (!(alpha_initial > 0.0) || !std::isfinite(alpha_initial)) fail("alpha_initial", "must be > 0");
    if (!(beta_density > 0.0) || !std::isfinite(beta_density)) fail("beta_density", "must be > 0");
    if (!(beta_smooth > 0.0 && beta_smooth < 1.0)) fail("beta_smooth", "must be in (0,1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon", "must be in [0,1]");
    if (!(smooth_radius > 0.0) || !std::isfinite(smooth_radius)) fail("smooth_radius", "must be > 0");
    if (episodes < 1) fail("episodes", "must be >= 1");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) fail("init_scale", "must be > 0");
    if (turn_window < 1) fail("turn_window", "must be >= 1");
    if (max_trajectory_steps < 1) fail("max_trajectory_steps", "must be >= 1");
}

QTables::QTables(const BoolGrid& static_mask, Cell goal)
    : width_(static_mask.width()), height_(static_mask.height()), goal_(goal),
      row_of_(static_mask.size(), -1) {
    for (std::size_t i = 0; i < static_mask.size(); ++i) {
        if (static_mask.raw()[i]) continue;
        row_of_[i] = static_cast<std::int32_t>(cells_.size());
        cells_.push_back(static_mask.cell(i));
    }
    q_action_.assign(cells_.size(), ActionRow{});
    q_density_.assign(cells_.size(), DensityRow{});
    updates_.assign(cells_.size(), 0);
    index_ = std::make_shared<SpatialIndex>(cells_);
}

std::int32_t QTables::row_index(Cell c) const noexcept {
    if (c.x < 0 || c.y < 0 || c.x >= width_ || c.y >= height_) return -1;
    return row_of_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(c.x)];
}

bool QTables::has_row(Cell c) const noexcept { return row_index(c) >= 0; }

std::size_t QTables::checked_row(Cell c) const {
    const std::int32_t r = row_index(c);
    if (r < 0) throw Error(ErrorCode::Blocked, "no Q-table row for cell " + cell_text(c));
    return static_cast<std::size_t>(r);
}

bool QTables::matches(const BoolGrid& static_mask) const {
    if (static_mask.width() != width_ || static_mask.height() != height_) return false;
    for (std::size_t i = 0; i < static_mask.size(); ++i)
        if ((static_mask.raw()[i] != 0) != (row_of_[i] < 0)) return false;
    return true;
}

QTables init_tables(const BoolGrid& static_mask, Cell goal, const TrainConfig& config) {
    if (static_mask.blocked(goal))
        throw Error(ErrorCode::EndpointBlocked, "goal " + cell_text(goal) + " is not a free cell");
    QTables tables(static_mask, goal);
    if (tables.rows() == 0) throw Error(ErrorCode::ValidationError, "grid has no free cells");

    const Cell far{static_mask.width() - 1, static_mask.height() - 1};
    const double d_max = std::max(octile_distance({0, 0}, far), 1.0);
    auto potential = [&](Cell c) { return -octile_distance(c, goal) / d_max * config.init_scale; };

    Rng rng = Rng::derive(config.seed, kInitStream);
    for (std::size_t r = 0; r < tables.rows(); ++r) {
        const Cell s = tables.cells()[r];
        ActionRow& row = tables.action_rows()[r];
        for (int a = 0; a < kNumActions; ++a) {
            const double noise = rng.uniform(0.0, config.init_scale);
            const auto target = next_state(static_mask, s, a);
            row[static_cast<std::size_t>(a)] = target ? noise + potential(*target) : kBlockedSentinel;
        }
        tables.density_rows()[r] = {config.init_scale / 2.0, config.init_scale / 2.0};
    }
    return tables;
}

QuantumDelta quantum_delta(const qsim::Measurements& m, const TrainConfig& config) {
    QuantumDelta d;
    for (int a = 0; a < kNumActions; ++a) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            const int bit = (a >> (2 - i)) & 1;
            s += m[static_cast<std::size_t>(i)] * (1.0 - 2.0 * bit);
        }
        d.action[static_cast<std::size_t>(a)] = config.alpha_initial * s / 3.0;
    }
    d.density = {config.beta_density * m[3], config.beta_density * m[4]};
    return d;
}

void apply_update(QTables& tables, Cell s, const QuantumDelta& delta) {
    const std::size_t r = tables.checked_row(s);
    ActionRow& row = tables.q_action_[r];
    for (std::size_t a = 0; a < row.size(); ++a)
        if (!is_sentinel(row[a])) row[a] += delta.action[a];
    DensityRow& d = tables.q_density_[r];
    d[0] += delta.density[0];
    d[1] += delta.density[1];
    ++tables.updates_[r];
}

int select_action(const QTables& tables, Cell s, double epsilon, Rng& rng) {
    const ActionRow& row = tables.action(s);
    std::array<int, kNumActions> feasible{};
    int n = 0;
    int best = -1;
    for (int a = 0; a < kNumActions; ++a) {
        const double v = row[static_cast<std::size_t>(a)];
        if (is_sentinel(v)) continue;
        feasible[static_cast<std::size_t>(n++)] = a;
        if (best < 0 || v > row[static_cast<std::size_t>(best)]) best = a;
    }
    if (n == 0) throw Error(ErrorCode::DeadEnd, "every action from " + cell_text(s) + " is blocked");
    // The coin is always drawn so the stream advances identically for every epsilon.
    const bool explore = rng.uniform01() < epsilon;
    if (explore) return feasible[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)))];
    return best;
}

void smooth_neighbors(QTables& tables, Cell s, const TrainConfig& config) {
    const double beta = config.beta_smooth;
    const ActionRow source = tables.action(s);
    for (const Cell n : tables.index().neighbors_within(s, config.smooth_radius)) {
        ActionRow& row = tables.action(n);
        for (std::size_t a = 0; a < row.size(); ++a) {
            if (is_sentinel(row[a]) || is_sentinel(source[a])) continue;
            row[a] = (1.0 - beta) * row[a] + beta * source[a];
        }
    }
}

std::array<double, kNumActions> normalized_action_row(const ActionRow& row) {
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (double v : row) {
        if (is_sentinel(v)) continue;
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
    }
    std::array<double, kNumActions> out{};
    if (!any || !(hi > lo)) {
        out.fill(1.0);
        return out;
    }
    for (std::size_t a = 0; a < row.size(); ++a)
        out[a] = is_sentinel(row[a]) ? 0.0 : (row[a] - lo) / (hi - lo);
    return out;
}

DensityRow normalized_density_row(const DensityRow& row) {
    const double lo = std::min(row[0], row[1]);
    const double hi = std::max(row[0], row[1]);
    if (!(hi > lo)) return {1.0, 1.0};  // amplitude_encode normalises to 1/sqrt(2)
    return {(row[0] - lo) / (hi - lo), (row[1] - lo) / (hi - lo)};
}

namespace {

// One quantum update at s; returns the epsilon-greedy successor if feasible.
std::optional<Cell> update_cell(QTables& tables, const BoolGrid& mask, const std::vector<double>& density,
                                Cell s, const TrainConfig& config, const qsim::CircuitParams& params,
                                Rng& policy_rng, TrainStats& stats) {
    const double turn = density[mask.index(s)];
    const auto q_in = normalized_action_row(tables.action(s));
    const auto d_in = normalized_density_row(tables.density(s));
    const qsim::Measurements m = qsim::run_turn_critic(q_in, d_in, turn, params);
    ++stats.critic_evaluations;
    apply_update(tables, s, quantum_delta(m, config));
    ++stats.cell_updates;

    std::optional<Cell> next;
    const ActionRow& row = tables.action(s);
    if (std::any_of(row.begin(), row.end(), [](double v) { return !is_sentinel(v); })) {
        const int a = select_action(tables, s, config.epsilon, policy_rng);
        next = next_state(mask, s, a);
    }
    smooth_neighbors(tables, s, config);
    return next;
}

}  // namespace

QTables train(const BoolGrid& static_mask, Cell goal, const TrainConfig& config,
              const qsim::CircuitParams& params, TrainStats* stats_out) {
    config.validate();
    QTables tables = init_tables(static_mask, goal, config);
    const std::vector<double> density = kernels::density_field(static_mask, config.turn_window);
    Rng policy_rng = Rng::derive(config.seed, kPolicyStream);
    TrainStats stats;

    if (config.mode == TrainMode::Sweep) {
        const std::vector<Cell> cells(tables.cells().begin(), tables.cells().end());
        for (int e = 0; e < config.episodes; ++e) {
            for (const Cell s : cells) {
                if (update_cell(tables, static_mask, density, s, config, params, policy_rng, stats))
                    ++stats.trajectory_steps;
            }
        }
    } else {
        Rng start_rng = Rng::derive(config.seed, kStartStream);
        for (int e = 0; e < config.episodes; ++e) {
            Cell s = tables.cells()[start_rng.below(tables.rows())];
            for (int step = 0; step < config.max_trajectory_steps && s != goal; ++step) {
                const auto next = update_cell(tables, static_mask, density, s, config, params, policy_rng, stats);
                if (!next) break;
                ++stats.trajectory_steps;
                s = *next;
            }
        }
    }
    if (stats_out) *stats_out = stats;
    return tables;
}

nlohmann::json tables_to_json(const QTables& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const Cell c = t.cells()[r];
        rows.push_back({{"cell", {c.x, c.y}},
                        {"q_action", t.action_rows()[r]},
                        {"q_density", t.density_rows()[r]},
                        {"updates", t.update_counts()[r]}});
    }
    return {{"format", "qpath-tables"},
            {"version", 1},
            {"width", t.width()},
            {"height", t.height()},
            {"goal", {t.goal().x, t.goal().y}},
            {"rows", std::move(rows)}};
}

QTables tables_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "qpath-tables" || doc.at("version").get<int>() != 1)
            throw Error(ErrorCode::ParseError, "not a version-1 qpath-tables document");
        const int w = doc.at("width").get<int>();
        const int h = doc.at("height").get<int>();
        if (w < 1 || h < 1) throw Error(ErrorCode::ParseError, "tables: bad dimensions");
        BoolGrid mask(w, h, true);
        const auto& rows = doc.at("rows");
        for (const auto& row : rows) {
            const Cell c{row.at("cell").at(0).get<int>(), row.at("cell").at(1).get<int>()};
            if (!mask.in_bounds(c)) throw Error(ErrorCode::ParseError, "tables: row cell outside grid");
            mask.set(c, false);
        }
        const Cell goal{doc.at("goal").at(0).get<int>(), doc.at("goal").at(1).get<int>()};
        QTables t(mask, goal);
        if (t.rows() != rows.size()) throw Error(ErrorCode::ParseError, "tables: duplicate row cells");
        for (const auto& row : rows) {
            const Cell c{row.at("cell").at(0).get<int>(), row.at("cell").at(1).get<int>()};
            const std::size_t r = t.checked_row(c);
            t.q_action_[r] = row.at("q_action").get<ActionRow>();
            t.q_density_[r] = row.at("q_density").get<DensityRow>();
            t.updates_[r] = row.at("updates").get<std::uint32_t>();
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("tables: ") + e.what());
    }
}

void save_tables(const QTables& tables, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << tables_to_json(tables).dump() << '\n';
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

QTables load_tables(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return tables_from_json(doc);
}

}  // namespace qpath::qrl
