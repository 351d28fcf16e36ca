#include "qpath/suite.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "qpath/error.hpp"
#include "qpath/planner.hpp"
#include "qpath/rng.hpp"

namespace qpath {
namespace {

constexpr int kMaxAttempts = 1000;

BoolGrid random_mask(int w, int h, double density, Rng& rng) {
    BoolGrid mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask.set({x, y}, rng.bernoulli(density));
    return mask;
}

// Picks a connected (src, dst) pair at least `min_dist` apart, or returns false.
bool pick_endpoints(const BoolGrid& mask, double min_dist, Rng& rng, Cell& src, Cell& dst) {
    const std::vector<int> comp = free_components(mask);
    std::vector<Cell> free;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (comp[i] >= 0) free.push_back(mask.cell(i));
    if (free.size() < 2) return false;
    for (int attempt = 0; attempt < 200; ++attempt) {
        const Cell a = free[rng.below(free.size())];
        const Cell b = free[rng.below(free.size())];
        if (comp[mask.index(a)] != comp[mask.index(b)]) continue;
        if (octile_distance(a, b) < min_dist) continue;
        src = a;
        dst = b;
        return true;
    }
    return false;
}

Obstacle patrol(std::uint32_t id, Cell a, Cell b, std::int64_t start) {
    Obstacle o;
    o.id = id;
    o.kind = ObstacleKind::Moving;
    o.footprint = {{0, 0}};
    o.schedule.waypoints = {a, b};
    o.schedule.loop = true;
    o.start_tick = start;
    return o;
}

}  // namespace

Suite parse_suite(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed suite JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "suite must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "format" && key != "version" && key != "scenarios" && key != "planners")
            throw Error(ErrorCode::ParseError, "unknown field '" + key + "'");
    if (!doc.contains("format") || doc["format"] != "qpath-suite")
        throw Error(ErrorCode::ParseError, "field 'format': expected \"qpath-suite\"");
    if (!doc.contains("version") || doc["version"] != 1)
        throw Error(ErrorCode::ParseError, "field 'version': expected 1");
    Suite suite;
    for (const char* field : {"scenarios", "planners"}) {
        if (!doc.contains(field)) throw Error(ErrorCode::ParseError, std::string("missing field '") + field + "'");
        const auto& arr = doc[field];
        if (!arr.is_array() || arr.empty())
            throw Error(ErrorCode::ParseError, std::string("field '") + field + "': expected non-empty array");
        for (const auto& v : arr) {
            if (!v.is_string())
                throw Error(ErrorCode::ParseError, std::string("field '") + field + "': expected strings");
            if (std::string_view(field) == "scenarios")
                suite.scenarios.emplace_back(v.get<std::string>());
            else
                suite.planners.push_back(v.get<std::string>());
        }
    }
    return suite;
}

Suite load_suite(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open suite " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Suite suite = parse_suite(ss.str());
    for (auto& p : suite.scenarios)
        if (p.is_relative()) p = path.parent_path() / p;
    return suite;
}

void save_suite(const Suite& suite, const std::filesystem::path& path) {
    nlohmann::json doc{{"format", "qpath-suite"}, {"version", 1}};
    doc["scenarios"] = nlohmann::json::array();
    for (const auto& p : suite.scenarios) doc["scenarios"].push_back(p.generic_string());
    doc["planners"] = suite.planners;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write suite " + path.string());
    out << doc.dump(2) << '\n';
}

std::vector<int> free_components(const BoolGrid& mask) {
    std::vector<int> label(mask.size(), -1);
    int next = 0;
    std::deque<Cell> queue;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const Cell start = mask.cell(i);
        if (mask.at(start) || label[i] >= 0) continue;
        label[i] = next;
        queue.push_back(start);
        while (!queue.empty()) {
            const Cell c = queue.front();
            queue.pop_front();
            for (int a = 0; a < kNumActions; ++a) {
                const auto n = next_state(mask, c, a);
                if (!n || label[mask.index(*n)] >= 0) continue;
                label[mask.index(*n)] = next;
                queue.push_back(*n);
            }
        }
        ++next;
    }
    return label;
}

ScenarioSpec random_static_scenario(const StaticSuiteConfig& config, std::uint64_t seed) {
    if (config.width < 2 || config.height < 2) throw Error(ErrorCode::DegenerateDims, "suite maps need at least 2x2");
    if (!(config.density >= 0.0 && config.density < 1.0))
        throw Error(ErrorCode::ValidationError, "density must be in [0, 1)");
    Rng rng = Rng::derive(seed, 31);
    const double min_dist = config.min_separation * std::max(config.width, config.height);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        BoolGrid mask = random_mask(config.width, config.height, config.density, rng);
        ScenarioSpec spec;
        if (!pick_endpoints(mask, min_dist, rng, spec.source, spec.destination)) continue;
        spec.grid = InlineGrid{std::move(mask)};
        spec.seed = seed;
        return spec;
    }
    throw Error(ErrorCode::ValidationError, "could not generate a solvable map");
}

std::vector<ScenarioSpec> static_suite(int count, std::uint64_t seed, const StaticSuiteConfig& config) {
    std::vector<ScenarioSpec> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i)
        out.push_back(random_static_scenario(config, splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(i))));
    return out;
}

ScenarioSpec random_dynamic_scenario(const DynamicSuiteConfig& config, std::uint64_t seed) {
    const StaticSuiteConfig base{config.width, config.height, config.density, config.min_separation};
    Rng rng = Rng::derive(seed, 32);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        ScenarioSpec spec =
            random_static_scenario(base, splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(attempt) + 77)));
        spec.seed = seed;
        const BoolGrid& mask = std::get<InlineGrid>(spec.grid).mask;
        const Path route = plan_astar(mask, spec.source, spec.destination);
        const auto n = route.cells.size();
        if (n < 12) continue;

        auto far_from_endpoints = [&](Cell c) {
            return chebyshev_distance(c, spec.source) > 3 && chebyshev_distance(c, spec.destination) > 3;
        };
        // Perpendicular patrols across the route.
        std::vector<Obstacle> obstacles;
        bool ok = true;
        for (int m = 0; m < config.movers && ok; ++m) {
            const double frac = 0.25 + 0.5 * (config.movers == 1 ? 0.5 : static_cast<double>(m) / (config.movers - 1));
            const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(frac * static_cast<double>(n - 1)), 1, n - 2);
            const Cell p = route.cells[k];
            const int heading = action_between(route.cells[k], route.cells[k + 1]);
            const Offset perp = kActionOffsets[static_cast<std::size_t>((heading + 2) % kNumActions)];
            int half = config.patrol_half_length;
            Cell a{}, b{};
            for (; half >= 2; --half) {
                a = {p.x + perp.dx * half, p.y + perp.dy * half};
                b = {p.x - perp.dx * half, p.y - perp.dy * half};
                if (mask.in_bounds(a) && mask.in_bounds(b)) break;
            }
            if (half < 2) {
                ok = false;
                break;
            }
            for (int t = -half; t <= half; ++t)
                if (!far_from_endpoints({p.x + perp.dx * t, p.y + perp.dy * t})) ok = false;
            const std::int64_t cycle = 4 * half;
            obstacles.push_back(patrol(static_cast<std::uint32_t>(m + 1), a, b,
                                       static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cycle)))));
        }
        if (!ok) continue;

        if (config.parked_obstacle) {
            // A 2x2 block that drives onto the route early and stays there.
            const std::size_t k = std::clamp<std::size_t>((n - 1) * 3 / 5, 2, n - 3);
            const Cell p = route.cells[k];
            const int heading = action_between(route.cells[k], route.cells[k + 1]);
            const Offset perp = kActionOffsets[static_cast<std::size_t>((heading + 2) % kNumActions)];
            const Cell off{p.x + perp.dx * 3, p.y + perp.dy * 3};
            Obstacle o;
            o.id = static_cast<std::uint32_t>(config.movers + 1);
            o.kind = ObstacleKind::Dynamic;
            o.footprint = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
            o.schedule.waypoints = {off, p};
            o.schedule.dwell_ticks = {0, 0};
            try {
                validate_obstacle(o, mask.width(), mask.height());
            } catch (const Error&) {
                continue;
            }
            BoolGrid parked = mask;
            bool near_end = false;
            for (const Cell f : o.footprint) {
                const Cell c{p.x + f.x, p.y + f.y};
                parked.set(c, true);
                if (!far_from_endpoints(c) || !far_from_endpoints({off.x + f.x, off.y + f.y})) near_end = true;
            }
            if (near_end) continue;
            try {
                plan_astar(parked, spec.source, spec.destination);
            } catch (const Error&) {
                continue;  // parking would cut the route entirely
            }
            obstacles.push_back(std::move(o));
        }
        spec.obstacles = std::move(obstacles);
        return spec;
    }
    throw Error(ErrorCode::ValidationError, "could not generate a dynamic scenario");
}

std::vector<ScenarioSpec> dynamic_suite(int count, std::uint64_t seed, const DynamicSuiteConfig& config) {
    std::vector<ScenarioSpec> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i)
        out.push_back(random_dynamic_scenario(config, splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(i))));
    return out;
}

}  // namespace qpath
