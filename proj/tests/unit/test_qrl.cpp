#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "oracles/chi_square.hpp"
#include "qpath/error.hpp"
#include "qpath/qrl.hpp"
#include "unit/helpers.hpp"

using namespace qpath;
using namespace qpath::qrl;

namespace {

TrainConfig config_with_seed(std::uint64_t seed) {
    TrainConfig c;
    c.seed = seed;
    return c;
}

// Bits of action a written out as a lookup table: {bit0 (MSB), bit1, bit2}.
constexpr int kBits[8][3] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}, {1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}};

double column_spread(const QTables& t, int a) {
    double lo = 1e300, hi = -1e300;
    for (const ActionRow& row : t.action_rows()) {
        if (is_sentinel(row[a])) continue;
        lo = std::min(lo, row[a]);
        hi = std::max(hi, row[a]);
    }
    return hi - lo;
}

}  // namespace

TEST_SUITE("qrl") {

TEST_CASE("init_tables: potential, sentinels and density") {
    const BoolGrid g = testing::grid_from({
        "......",
        "..#...",
        "......",
        "......",
    });
    const Cell goal{5, 3};
    const TrainConfig c = config_with_seed(1);
    const QTables t = init_tables(g, goal, c);
    CHECK(t.rows() == 23);
    CHECK_FALSE(t.has_row({2, 1}));
    const double d_max = octile_distance({0, 0}, {5, 3});
    for (Cell s : t.cells()) {
        for (int a = 0; a < kNumActions; ++a) {
            const Cell to = apply_offset(s, a);
            const double v = t.action(s)[a];
            if (g.blocked(to)) {
                CHECK(v == kBlockedSentinel);
                continue;
            }
            const double phi = -octile_distance(to, goal) / d_max * c.init_scale;
            CHECK(v >= phi);
            CHECK(v < phi + c.init_scale);
        }
        CHECK(t.density(s) == DensityRow{c.init_scale / 2, c.init_scale / 2});
    }
    // The action into the goal carries the maximal (zero) potential.
    CHECK(t.action({4, 3})[0] >= 0.0);
    CHECK(init_tables(g, goal, c) == t);
    CHECK_FALSE(init_tables(g, goal, config_with_seed(2)) == t);
}

TEST_CASE("init_tables errors") {
    const BoolGrid g = testing::grid_from({"..", ".#"});
    try {
        init_tables(g, {1, 1}, {});
        FAIL("expected EndpointBlocked");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EndpointBlocked);
    }
    CHECK_THROWS_AS(train(BoolGrid(3, 3, true), {0, 0}, {}, qsim::CircuitParams::zeros(1)), Error);
}

TEST_CASE("quantum_delta examples") {
    TrainConfig c;
    c.alpha_initial = 0.1;
    c.beta_density = 0.05;
    const QuantumDelta d = quantum_delta({1, 1, 1, 0, 0}, c);
    CHECK(d.action[0] == doctest::Approx(0.1));
    CHECK(d.action[7] == doctest::Approx(-0.1));

    const QuantumDelta z = quantum_delta({0, 0, 0, 0.4, -0.6}, c);
    for (double v : z.action) CHECK(v == 0.0);
    CHECK(z.density[0] == doctest::Approx(0.02));
    CHECK(z.density[1] == doctest::Approx(-0.03));
}

TEST_CASE("quantum_delta equals the enumerated bitplane formula") {
    TrainConfig c;
    Rng rng(8);
    const qsim::Measurements fixed{1, -1, 0, 0, 0};
    for (int trial = 0; trial < 200; ++trial) {
        qsim::Measurements m = fixed;
        if (trial > 0)
            for (double& v : m) v = rng.uniform(-1, 1);
        const QuantumDelta d = quantum_delta(m, c);
        double sum = 0;
        for (int a = 0; a < 8; ++a) {
            double expect = 0;
            for (int i = 0; i < 3; ++i) expect += m[i] * (kBits[a][i] ? -1.0 : 1.0);
            expect *= c.alpha_initial / 3.0;
            CHECK(d.action[a] == doctest::Approx(expect).epsilon(1e-14));
            CHECK(std::abs(d.action[a]) <= c.alpha_initial + 1e-15);
            sum += d.action[a];
        }
        CHECK(std::abs(sum) < 1e-15);
        CHECK(std::abs(d.density[0]) <= c.beta_density);
        CHECK(std::abs(d.density[1]) <= c.beta_density);
    }
    // m = [1, -1, 0]: only actions whose bits 0 and 1 differ move.
    const QuantumDelta d = quantum_delta(fixed, c);
    CHECK(d.action[0] == 0.0);
    CHECK(d.action[2] == doctest::Approx(2 * c.alpha_initial / 3));   // 010
    CHECK(d.action[4] == doctest::Approx(-2 * c.alpha_initial / 3));  // 100
}

TEST_CASE("apply_update") {
    const BoolGrid g = testing::grid_from({"...", "..#", "..."});
    QTables t = init_tables(g, {0, 0}, {});
    const QTables before = t;
    apply_update(t, {1, 1}, {});
    CHECK(t.action({1, 1}) == before.action({1, 1}));
    CHECK(t.update_count({1, 1}) == 1);

    QuantumDelta d;
    d.action.fill(5.0);
    d.density = {0.25, -0.5};
    apply_update(t, {1, 1}, d);
    CHECK(t.action({1, 1})[0] == kBlockedSentinel);  // east of (1,1) is blocked
    for (auto& v : d.action) v = -v;
    for (auto& v : d.density) v = -v;
    apply_update(t, {1, 1}, d);
    for (int a = 0; a < 8; ++a) CHECK(t.action({1, 1})[a] == doctest::Approx(before.action({1, 1})[a]).epsilon(1e-14));
    CHECK(t.density({1, 1})[0] == doctest::Approx(before.density({1, 1})[0]));
}

TEST_CASE("select_action: argmax, ties and dead ends") {
    const BoolGrid g(5, 5);
    QTables t = init_tables(g, {0, 0}, {});
    Rng rng(1);
    t.action({2, 2}) = {5, 1, 1, 1, 1, 1, 1, 1};
    CHECK(select_action(t, {2, 2}, 0.0, rng) == 0);
    t.action({2, 2}) = {2, 2, 2, 2, 2, 2, 2, 2};
    CHECK(select_action(t, {2, 2}, 0.0, rng) == 0);
    t.action({2, 2}) = {kBlockedSentinel, 1, 3, 3, 1, 1, 1, 1};
    CHECK(select_action(t, {2, 2}, 0.0, rng) == 2);
    t.action({2, 2}).fill(kBlockedSentinel);
    try {
        select_action(t, {2, 2}, 0.5, rng);
        FAIL("expected DeadEnd");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeadEnd);
    }
}

TEST_CASE("select_action with epsilon 1 is uniform over feasible actions") {
    const BoolGrid g = testing::grid_from({"...", "...", "..."});
    const QTables t = init_tables(g, {2, 2}, {});
    Rng rng(12345);
    // Corner (0,0): E, S, SE are the only feasible actions.
    std::vector<std::int64_t> counts(8, 0);
    for (int i = 0; i < 10000; ++i) ++counts[select_action(t, {0, 0}, 1.0, rng)];
    const std::vector<std::int64_t> feasible{counts[0], counts[6], counts[7]};
    CHECK(feasible[0] + feasible[1] + feasible[2] == 10000);
    CHECK(oracle::chi_square_uniform(feasible) < oracle::chi_square_critical_999(2));

    std::vector<std::int64_t> all(8, 0);
    for (int i = 0; i < 10000; ++i) ++all[select_action(t, {1, 1}, 1.0, rng)];
    CHECK(oracle::chi_square_uniform(all) < oracle::chi_square_critical_999(7));
}

TEST_CASE("smooth_neighbors") {
    const BoolGrid g(5, 5);
    TrainConfig c;
    c.smooth_radius = 1.0;
    QTables t = init_tables(g, {0, 0}, c);
    const QTables before = t;

    c.beta_smooth = 0.0;
    smooth_neighbors(t, {2, 2}, c);
    CHECK(t == before);

    c.beta_smooth = 1.0;
    smooth_neighbors(t, {2, 2}, c);
    for (Cell n : {Cell{2, 1}, Cell{1, 2}, Cell{3, 2}, Cell{2, 3}}) CHECK(t.action(n) == t.action({2, 2}));
    CHECK(t.action({1, 1}) == before.action({1, 1}));  // outside radius 1

    t = before;
    t.action({2, 2})[6] = 4.0;
    t.action({2, 1})[6] = 2.0;
    c.beta_smooth = 0.5;
    smooth_neighbors(t, {2, 2}, c);
    CHECK(t.action({2, 1})[6] == doctest::Approx(3.0));

    // Border rows keep their sentinels; entries blocked at s are skipped.
    t = before;
    smooth_neighbors(t, {2, 1}, c);
    CHECK(t.action({2, 0})[2] == kBlockedSentinel);
    t = before;
    smooth_neighbors(t, {2, 0}, c);
    CHECK(t.action({2, 1})[2] == before.action({2, 1})[2]);
}

TEST_CASE("smoothing is a contraction") {
    const BoolGrid g = testing::random_grid(12, 12, 0.15, 4);
    TrainConfig c;
    QTables t = init_tables(g, {0, 0}, c);
    std::vector<double> spread(8);
    for (int a = 0; a < 8; ++a) spread[a] = column_spread(t, a);
    for (int pass = 0; pass < 5; ++pass) {
        for (Cell s : std::vector<Cell>(t.cells().begin(), t.cells().end())) smooth_neighbors(t, s, c);
        for (int a = 0; a < 8; ++a) {
            const double now = column_spread(t, a);
            CHECK(now <= spread[a] + 1e-15);
            spread[a] = now;
        }
    }
}

TEST_CASE("training sweep covers every free cell once per episode") {
    const BoolGrid g = testing::random_grid(30, 30, 0.25, 11);
    Cell goal{0, 0};
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.raw()[i]) {
            goal = g.cell(i);
            break;
        }
    TrainStats stats;
    const QTables t = train(g, goal, config_with_seed(5), qsim::CircuitParams::random(2, 5), &stats);
    CHECK(stats.cell_updates == t.rows());
    for (auto n : t.update_counts()) CHECK(n == 1);
    for (Cell s : t.cells())
        for (int a = 0; a < 8; ++a) {
            const double v = t.action(s)[a];
            CHECK(std::isfinite(v));
            CHECK((g.blocked(apply_offset(s, a)) ? v == kBlockedSentinel : v > kBlockedSentinel));
        }

    TrainConfig three = config_with_seed(5);
    three.episodes = 3;
    const QTables t3 = train(g, goal, three, qsim::CircuitParams::random(2, 5));
    for (auto n : t3.update_counts()) CHECK(n == 3);
}

TEST_CASE("training is deterministic per seed") {
    const BoolGrid g = testing::random_grid(15, 15, 0.2, 2);
    const Cell goal = [&] {
        for (std::size_t i = g.size(); i-- > 0;)
            if (!g.raw()[i]) return g.cell(i);
        return Cell{};
    }();
    const auto p = qsim::CircuitParams::random(2, 3);
    const QTables a = train(g, goal, config_with_seed(1), p), b = train(g, goal, config_with_seed(1), p);
    CHECK(a == b);
    CHECK_FALSE(train(g, goal, config_with_seed(2), p) == a);

    TrainConfig traj = config_with_seed(1);
    traj.mode = TrainMode::Trajectory;
    traj.episodes = 5;
    TrainStats stats;
    const QTables t = train(g, goal, traj, p, &stats);
    CHECK(stats.trajectory_steps > 0);
    CHECK(train(g, goal, traj, p) == t);
}

TEST_CASE("normalised encoder rows") {
    const auto r = normalized_action_row({kBlockedSentinel, 1, 3, 2, 3, 1, 1, kBlockedSentinel});
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 1.0);
    CHECK(r[3] == doctest::Approx(0.5));
    const auto u = normalized_action_row({2, 2, 2, 2, 2, 2, 2, 2});
    for (double v : u) CHECK(v == u[0]);
    CHECK(u[0] > 0.0);
    // Equal density values encode as the balanced state.
    CHECK(normalized_density_row({0.05, 0.05}) == DensityRow{1.0, 1.0});
    CHECK(normalized_density_row({0.2, 0.1}) == DensityRow{1.0, 0.0});
}

TEST_CASE("tables round-trip exactly through JSON") {
    const BoolGrid g = testing::random_grid(10, 8, 0.2, 3);
    BoolGrid free = g;
    free.set({9, 7}, false);
    const QTables t = train(free, {9, 7}, config_with_seed(3), qsim::CircuitParams::random(2, 3));
    const auto path = std::filesystem::temp_directory_path() / "qpath_tables_rt.json";
    save_tables(t, path);
    const QTables back = load_tables(path);
    CHECK(back == t);
    CHECK(back.matches(free));
    CHECK(back.index().size() == t.rows());
    CHECK_THROWS_AS(tables_from_json(nlohmann::json{{"format", "other"}}), Error);
}

}  // TEST_SUITE
