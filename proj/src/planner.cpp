#include "qpath/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>

#include "qpath/error.hpp"

namespace qpath {
namespace {

std::string cell_text(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

struct FrontierEntry {
    double priority;
    std::uint64_t seq;
    std::uint32_t node;
};

struct LaterFirst {
    bool operator()(const FrontierEntry& a, const FrontierEntry& b) const noexcept {
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.seq > b.seq;
    }
};

using Frontier = std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, LaterFirst>;

void check_endpoints(const BoolGrid& occ, Cell src, Cell dst) {
    if (!occ.in_bounds(src) || !occ.in_bounds(dst))
        throw Error(ErrorCode::OutOfBounds, "endpoint outside grid");
    if (occ.at(src)) throw Error(ErrorCode::EndpointBlocked, "source " + cell_text(src) + " is blocked");
    if (occ.at(dst)) throw Error(ErrorCode::EndpointBlocked, "destination " + cell_text(dst) + " is blocked");
}

Path reconstruct(const BoolGrid& occ, const std::vector<std::int32_t>& parent, Cell dst) {
    std::vector<Cell> cells;
    for (std::int32_t n = static_cast<std::int32_t>(occ.index(dst)); n >= 0;
         n = parent[static_cast<std::size_t>(n)])
        cells.push_back(occ.cell(static_cast<std::size_t>(n)));
    std::reverse(cells.begin(), cells.end());
    return Path::from_cells(std::move(cells));
}

[[noreturn]] void no_path(Cell src, Cell dst) {
    throw Error(ErrorCode::NoPath, "no path from " + cell_text(src) + " to " + cell_text(dst));
}

}  // namespace

Path Path::from_cells(std::vector<Cell> cells) {
    Path p;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const int a = action_between(cells[i - 1], cells[i]);
        if (a < 0)
            throw Error(ErrorCode::ValidationError, "path cells " + cell_text(cells[i - 1]) + " and " +
                                                        cell_text(cells[i]) + " are not adjacent");
        if (is_diagonal(a))
            ++p.steps.diagonal;
        else
            ++p.steps.cardinal;
    }
    p.cells = std::move(cells);
    p.cost = p.steps.length();
    return p;
}

void PlannerConfig::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(q_weight)) throw Error(ErrorCode::ValidationError, "hyperparams.q_weight must be finite and >= 0");
    if (!ok(heuristic_weight))
        throw Error(ErrorCode::ValidationError, "hyperparams.heuristic_weight must be finite and >= 0");
    if (!ok(visited_penalty))
        throw Error(ErrorCode::ValidationError, "hyperparams.visited_penalty must be finite and >= 0");
}

double qval(const qrl::QTables& tables, const BoolGrid& occupancy, Cell s, int action,
            std::optional<int> prev_heading) {
    const auto target = next_state(occupancy, s, action);
    if (!target) throw Error(ErrorCode::Blocked, "action " + std::to_string(action) + " from " + cell_text(s));
    const qrl::DensityRow& row = tables.density(*target);
    const bool straight = !prev_heading || *prev_heading == action;
    return straight ? row[0] : row[1];
}

Path plan_hybrid(const BoolGrid& occ, const qrl::QTables& tables, Cell src, Cell dst,
                 const PlannerConfig& config, const BoolGrid* visited, SearchTrace* trace) {
    check_endpoints(occ, src, dst);
    if (tables.width() != occ.width() || tables.height() != occ.height())
        throw Error(ErrorCode::ValidationError, "tables do not match the grid dimensions");

    const std::size_t n = occ.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, kInf);        // geometric cost so far (+ visited penalties)
    std::vector<double> best(n, kInf);     // best totalcost seen on arrival
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::int8_t> heading(n, -1);
    std::vector<std::uint8_t> closed(n, 0);

    Frontier frontier;
    std::uint64_t seq = 0;
    const auto src_i = static_cast<std::uint32_t>(occ.index(src));
    g[src_i] = 0.0;
    best[src_i] = 0.0;
    frontier.push({config.heuristic_weight * octile_distance(src, dst), seq++, src_i});

    std::array<int, kNumActions> order{};
    while (!frontier.empty()) {
        const FrontierEntry top = frontier.top();
        frontier.pop();
        if (closed[top.node]) continue;
        closed[top.node] = 1;
        const Cell s = occ.cell(top.node);
        if (trace) trace->expansions.push_back(s);
        if (s == dst) return reconstruct(occ, parent, dst);

        // Candidate actions ranked by Q-action value, highest first.
        for (int a = 0; a < kNumActions; ++a) order[static_cast<std::size_t>(a)] = a;
        if (tables.has_row(s)) {
            const qrl::ActionRow& row = tables.action(s);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
            });
        }
        const std::optional<int> prev =
            heading[top.node] < 0 ? std::nullopt : std::optional<int>(heading[top.node]);
        for (const int a : order) {
            const auto next = next_state(occ, s, a);
            if (!next) continue;
            const std::size_t ni = occ.index(*next);
            if (closed[ni]) continue;
            double mc = move_cost(a);
            if (visited && visited->in_bounds(*next) && visited->at(*next)) mc += config.visited_penalty;
            const double qv = tables.has_row(*next) ? qval(tables, occ, s, a, prev) : 0.0;
            const double tc = total_cost(g[top.node], mc, qv, config);
            if (tc < best[ni]) {
                best[ni] = tc;
                g[ni] = tc;
                parent[ni] = static_cast<std::int32_t>(top.node);
                heading[ni] = static_cast<std::int8_t>(a);
                frontier.push({tc + config.heuristic_weight * octile_distance(*next, dst), seq++,
                               static_cast<std::uint32_t>(ni)});
            }
        }
    }
    no_path(src, dst);
}

Path plan_astar(const BoolGrid& occ, Cell src, Cell dst) {
    check_endpoints(occ, src, dst);
    const std::size_t n = occ.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, kInf);
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);

    Frontier frontier;
    std::uint64_t seq = 0;
    const auto src_i = static_cast<std::uint32_t>(occ.index(src));
    g[src_i] = 0.0;
    frontier.push({octile_distance(src, dst), seq++, src_i});
    while (!frontier.empty()) {
        const FrontierEntry top = frontier.top();
        frontier.pop();
        if (closed[top.node]) continue;
        closed[top.node] = 1;
        const Cell s = occ.cell(top.node);
        if (s == dst) return reconstruct(occ, parent, dst);
        for (int a = 0; a < kNumActions; ++a) {
            const auto next = next_state(occ, s, a);
            if (!next) continue;
            const std::size_t ni = occ.index(*next);
            if (closed[ni]) continue;
            const double cand = g[top.node] + move_cost(a);
            if (cand < g[ni]) {
                g[ni] = cand;
                parent[ni] = static_cast<std::int32_t>(top.node);
                frontier.push({cand + octile_distance(*next, dst), seq++, static_cast<std::uint32_t>(ni)});
            }
        }
    }
    no_path(src, dst);
}

}  // namespace qpath
