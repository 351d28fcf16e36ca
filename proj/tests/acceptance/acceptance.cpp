// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles/dense_circuit.hpp"
#include "oracles/dijkstra.hpp"
#include "qpath/batch.hpp"
#include "qpath/classical_q.hpp"
#include "qpath/error.hpp"
#include "qpath/map_image.hpp"
#include "qpath/planner.hpp"
#include "qpath/qsim.hpp"
#include "qpath/suite.hpp"

using namespace qpath;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2024;

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %s %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<bool> bools(const BoolGrid& g) {
    std::vector<bool> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g.raw()[i] != 0;
    return out;
}

std::vector<BatchScenario> named(const std::vector<ScenarioSpec>& specs) {
    std::vector<BatchScenario> out;
    for (std::size_t i = 0; i < specs.size(); ++i) out.push_back({"s" + std::to_string(i), specs[i], {}});
    return out;
}

MissionResult fixture_run(const std::string& name) {
    const fs::path p = fs::path(QPATH_TEST_FIXTURES) / name;
    return run_planner({name, load_scenario(p), p.parent_path()}, PlannerKind::Hybrid);
}

void ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(kSeed);
    double worst = 0, worst_norm = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 8> q{};
        for (double& v : q) v = rng.uniform01();
        const std::array<double, 2> d{rng.uniform01(), rng.uniform01() + 1e-3};
        const double tf = rng.uniform01();
        const auto p = qsim::CircuitParams::random(1 + static_cast<int>(rng.below(4)), rng.next());
        const qsim::StateVector s = qsim::turn_critic_state(q, d, tf, p);
        std::vector<oracle::Layer> layers;
        for (const auto& l : p.thetas) {
            oracle::Layer L;
            for (int w = 0; w < qsim::kNumQubits; ++w) L[w] = {l[w][0], l[w][1], l[w][2]};
            layers.push_back(L);
        }
        const auto o = oracle::circuit_unitary(tf, layers) * oracle::product_state(q, {d[0], d[1], 0, 0});
        for (std::size_t i = 0; i < qsim::kDim; ++i) worst = std::max(worst, std::abs(s[i] - o[i]));
        worst_norm = std::max(worst_norm, std::abs(s.norm_squared() - 1.0));
    }
    const double secs = seconds_since(t0);
    report("AC1", worst <= 1e-10 && worst_norm <= 1e-12 && secs < 1.0,
           fmt("quantum core vs dense oracle, 100 circuits: max_abs=%.2e (tol 1e-10) norm_err=%.2e (tol 1e-12) "
               "time=%.3fs (< 1s)",
               worst, worst_norm, secs));
}

void ac2() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(kSeed);
    int solvable = 0, mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        BoolGrid g(20, 20);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) g.set({x, y}, rng.bernoulli(0.25));
        std::vector<Cell> free;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!g.raw()[i]) free.push_back(g.cell(i));
        const Cell s = free[rng.below(free.size())];
        Cell d = s;
        while (d == s) d = free[rng.below(free.size())];
        const auto expect = oracle::shortest(bools(g), 20, 20, s.x, s.y, d.x, d.y);
        if (!expect) continue;
        ++solvable;
        const Path p = plan_astar(g, s, d);
        if (p.steps.cardinal != expect->cardinal || p.steps.diagonal != expect->diagonal) ++mismatches;
    }
    const double secs = seconds_since(t0);
    report("AC2", mismatches == 0 && solvable > 0 && secs < 5.0,
           fmt("A* vs Dijkstra, 100 grids 20x20 @0.25: %d solvable, %d mismatches (exact) time=%.3fs (< 5s)", solvable,
               mismatches, secs));
}

void ac3() {
    StaticSuiteConfig cfg;
    const ScenarioSpec spec = random_static_scenario(cfg, kSeed);
    const OccupancyWorld world = build_world(spec);
    qrl::TrainConfig tc = train_config(spec);
    tc.episodes = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const qrl::QTables t = qrl::train(world.static_mask(), spec.destination, tc, circuit_params(spec));
    const double secs = seconds_since(t0);
    bool all_one = t.rows() == world.free_static_cells();
    for (auto n : t.update_counts()) all_one = all_one && n == 1;
    report("AC3", secs < 10.0 && all_one,
           fmt("one-shot training 50x50: %zu free cells, every update count == 1: %s, time=%.3fs (< 10s)", t.rows(),
               all_one ? "yes" : "no", secs));
}

void ac4() {
    int within_110 = 0, within_125 = 0, total = 0;
    double worst = 0;
    for (const ScenarioSpec& spec : static_suite(100, kSeed)) {
        const OccupancyWorld world = build_world(spec);
        const BoolGrid& mask = world.static_mask();
        const auto tables = train_hybrid(spec, mask, spec.destination);
        const double h = plan_hybrid(mask, *tables, spec.source, spec.destination, spec.hyper.planner).cost;
        const double a = plan_astar(mask, spec.source, spec.destination).cost;
        const double r = h / a;
        worst = std::max(worst, r);
        ++total;
        if (r <= 1.10 + 1e-12) ++within_110;
        if (r <= 1.25 + 1e-12) ++within_125;
    }
    report("AC4", total == 100 && within_110 >= 80 && within_125 == total,
           fmt("hybrid/A* length, 100 static 50x50: <=1.10x in %d (need >= 80), <=1.25x in %d/%d (need all), "
               "worst %.4f",
               within_110, within_125, total, worst));
}

void ac5() {
    int success = 0, collisions = 0, conflicted = 0, conflicted_paused = 0;
    for (const ScenarioSpec& spec : dynamic_suite(100, kSeed)) {
        const MissionResult r = run_planner({"d", spec, {}}, PlannerKind::Hybrid);
        if (!r.completed) continue;
        if (r.log.outcome == Outcome::Success) ++success;
        collisions += static_cast<int>(r.log.count(EventKind::Collision));
        // Conflicted: the same hybrid plan followed blindly would collide.
        const OccupancyWorld world = build_world(spec);
        const auto tables = train_hybrid(spec, world.static_mask(), spec.destination);
        const MissionLog blind = execute_mission(world, mission_for(spec, world),
                                                 hybrid_leg_planner(tables, spec.hyper.planner),
                                                 ExecutionMode::StaticReplay);
        if (blind.outcome == Outcome::Collision) {
            ++conflicted;
            if (r.log.pause_count >= 1) ++conflicted_paused;
        }
    }
    report("AC5", success >= 99 && collisions == 0 && conflicted_paused == conflicted,
           fmt("dynamic avoidance, 100 scenarios: %d Success (need >= 99), %d Collision events (need 0), "
               "%d/%d conflicted missions paused",
               success, collisions, conflicted_paused, conflicted));
}

void ac6() {
    const MissionResult a = fixture_run("transient_crossing.json");
    const bool a_ok = a.completed && a.log.count(EventKind::Pause) >= 1 && a.log.count(EventKind::Resume) >= 1 &&
                      a.log.count(EventKind::Replan) == 0 && a.log.outcome == Outcome::Success;

    const fs::path bp = fs::path(QPATH_TEST_FIXTURES) / "parked_blocker.json";
    const ScenarioSpec b_spec = load_scenario(bp);
    const MissionResult b = fixture_run("parked_blocker.json");
    bool b_ok = b.completed && b.log.count(EventKind::Replan) >= 1;
    std::int64_t gap = -1;
    std::optional<std::int64_t> pause_at;
    for (const MissionEvent& e : b.log.events) {
        if (e.kind == EventKind::Pause) pause_at = e.tick;
        if (e.kind == EventKind::Resume) pause_at.reset();
        if (e.kind == EventKind::Replan) {
            gap = pause_at ? e.tick - *pause_at : -1;
            b_ok = b_ok && gap == b_spec.hyper.wait_timeout;
            pause_at.reset();
        }
    }

    const auto scenarios = named(dynamic_suite(100, kSeed));
    const std::vector<PlannerKind> planners{PlannerKind::Hybrid, PlannerKind::AstarStatic};
    const BatchResult r = run_batch(scenarios, planners);
    const bool c_ok = r.rows[0].mean_replans > r.rows[1].mean_replans;
    report("AC6", a_ok && b_ok && c_ok,
           fmt("replanning: (a) transient Pause+Resume, 0 Replan: %s; (b) Replan - Pause = %lld (wait_timeout %lld): "
               "%s; (c) mean replans hybrid %.3f > astar_static %.3f: %s",
               a_ok ? "ok" : "no", static_cast<long long>(gap), static_cast<long long>(b_spec.hyper.wait_timeout),
               b_ok ? "ok" : "no", r.rows[0].mean_replans, r.rows[1].mean_replans, c_ok ? "ok" : "no"));
}

void ac7() {
    const std::vector<ScenarioSpec> suite = static_suite(100, kSeed);
    std::vector<ScenarioSpec> flat = suite;
    for (ScenarioSpec& s : flat) s.hyper.planner.q_weight = 0.0;
    const std::vector<PlannerKind> planners{PlannerKind::Hybrid};
    const double with_q = run_batch(named(suite), planners).rows[0].mean_turn_count;
    const double without_q = run_batch(named(flat), planners).rows[0].mean_turn_count;
    report("AC7", with_q <= without_q,
           fmt("smoothness, 100 static: mean turns q_weight=%.1f: %.3f <= q_weight=0: %.3f", PlannerConfig{}.q_weight,
               with_q, without_q));
}

void ac8() {
    StaticSuiteConfig cfg;
    cfg.width = 20;
    cfg.height = 20;
    const std::vector<ScenarioSpec> suite = static_suite(20, kSeed, cfg);
    std::vector<ClassicalQ> tables;
    std::vector<Rng> rngs;
    std::vector<OccupancyWorld> worlds;
    std::uint64_t sweep_updates = 0;
    int hybrid_ok = 0;
    for (const ScenarioSpec& s : suite) {
        worlds.push_back(build_world(s));
        const BoolGrid& mask = worlds.back().static_mask();
        tables.emplace_back(mask, s.destination);
        rngs.push_back(Rng::derive(s.seed, 21));
        qrl::TrainStats st;
        const auto t = train_hybrid(s, mask, s.destination, &st);
        sweep_updates += st.cell_updates;
        try {
            plan_hybrid(mask, *t, s.source, s.destination, s.hyper.planner);
            ++hybrid_ok;
        } catch (const Error&) {
        }
    }
    const ClassicalConfig cc;
    const int needed = (9 * static_cast<int>(suite.size()) + 9) / 10;
    int ok = 0, episodes = 0;
    std::uint64_t classical_updates = 0;
    for (; episodes <= 100000; episodes += 50) {
        ok = 0;
        classical_updates = 0;
        for (std::size_t i = 0; i < suite.size(); ++i) {
            const int cap = 4 * (cfg.width + cfg.height) * 4;
            if (greedy_rollout(tables[i], worlds[i].static_mask(), suite[i].source, cap)) ++ok;
            classical_updates += tables[i].updates();
        }
        if (ok >= needed) break;
        for (std::size_t i = 0; i < suite.size(); ++i) tables[i].train(50, cc, rngs[i]);
    }
    const double ratio = sweep_updates ? static_cast<double>(classical_updates) / static_cast<double>(sweep_updates) : 0;
    report("AC8", ok >= needed && hybrid_ok >= needed && ratio >= 100.0,
           fmt("training cost, 20 maps 20x20: classical reached %d/%zu after %d episodes/map with %llu updates; "
               "one-shot sweep %llu updates (hybrid %d/%zu); ratio %.1fx (need >= 100x)",
               ok, suite.size(), episodes, static_cast<unsigned long long>(classical_updates),
               static_cast<unsigned long long>(sweep_updates), hybrid_ok, suite.size(), ratio));
}

void ac9() {
    std::vector<ScenarioSpec> specs = dynamic_suite(20, kSeed);
    for (const ScenarioSpec& s : static_suite(10, kSeed)) specs.push_back(s);
    const auto scenarios = named(specs);
    const std::vector<PlannerKind> planners{PlannerKind::Hybrid, PlannerKind::AstarStatic, PlannerKind::AstarReplan,
                                            PlannerKind::ClassicalQ};
    const BatchResult a = run_batch(scenarios, planners, {.wall_clock = false, .threads = 0});
    const BatchResult b = run_batch(scenarios, planners, {.wall_clock = false, .threads = 2});
    const bool csv_same = format_csv(a.rows) == format_csv(b.rows);
    int log_diffs = 0;
    for (std::size_t p = 0; p < planners.size(); ++p)
        for (std::size_t s = 0; s < scenarios.size(); ++s)
            if (mission_log_to_string(a.results[p][s].log) != mission_log_to_string(b.results[p][s].log)) ++log_diffs;
    report("AC9", csv_same && log_diffs == 0,
           fmt("determinism, %zu scenarios x %zu planners: CSV identical: %s, differing logs: %d", scenarios.size(),
               planners.size(), csv_same ? "yes" : "no", log_diffs));
}

void ac10() {
    const fs::path dir(QPATH_TEST_FIXTURES);
    std::ifstream in(dir / "campus_landmarks.json");
    const auto fixture = nlohmann::json::parse(in);
    const GrayImage img = read_gray_image(dir / fixture["image"].get<std::string>());
    const BoolGrid g = ingest_map_image(img, fixture["threshold"], fixture["dims"][0], fixture["dims"][1]);
    int correct = 0, total = 0;
    std::string wrong;
    for (const auto& l : fixture["landmarks"]) {
        ++total;
        if (g.at({l["cell"][0], l["cell"][1]}) == l["blocked"].get<bool>())
            ++correct;
        else
            wrong += " " + l["name"].get<std::string>();
    }
    report("AC10", total == 10 && correct == total,
           fmt("campus image %dx%d -> %dx%d: %d/%d landmarks match%s", img.width, img.height, g.width(), g.height(),
               correct, total, wrong.c_str()));
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)()> criteria[] = {{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
                                                           {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8},
                                                           {"AC9", ac9}, {"AC10", ac10}};
    for (const auto& [id, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
