#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpath/grid_world.hpp"
#include "qpath/mission.hpp"
#include "qpath/scenario.hpp"

namespace qpath::service {

inline constexpr int kProtocolVersion = 1;

/// A single cell. Non-static kinds may add a route: the obstacle starts at
/// `cell` on the current tick and loops through `cell` then `route`.
struct PlaceObstacle {
    Cell cell;
    ObstacleKind kind = ObstacleKind::Static;
    std::vector<Cell> route;
};
struct RemoveObstacle {
    std::uint32_t id = 0;
};
struct MoveDestination {
    Cell cell;
};
struct Start {};
struct Pause {};
struct Resume {};
struct Reset {
    std::optional<std::uint64_t> seed;
};
struct SetSpeed {
    double ticks_per_sec = 10.0;
};

using CommandBody = std::variant<PlaceObstacle, RemoveObstacle, MoveDestination, Start, Pause, Resume, Reset, SetSpeed>;

struct Command {
    std::uint64_t id = 0;  // the client's frame seq
    CommandBody body;
};

/// Outgoing event: frame type plus payload. The sequence number is stamped
/// per connection when the frame is sent.
struct Event {
    std::string type;
    nlohmann::json payload;
    friend bool operator==(const Event&, const Event&) = default;
};

struct FrameError {
    std::string reason;
    std::uint64_t command_id = 0;
};

/// Parses a client frame {"v", "type", "seq", "payload"}. Returns the
/// command, or a FrameError for a well-formed frame the protocol rejects.
/// Throws Error(ParseError) for frames that are not protocol frames at all.
std::variant<Command, FrameError> parse_command(const std::string& text);

/// Wire form of an event, with the connection's sequence number.
std::string encode_frame(const Event& event, std::uint64_t seq);
/// Client frame for a command (used by tests and scripted clients).
std::string encode_command(const Command& command);

/// One live mission. Not thread-safe: owned by the simulation worker, which
/// applies commands only between ticks.
class SimSession {
public:
    explicit SimSession(ScenarioSpec spec, std::filesystem::path base_dir = {});

    /// Applies a command; returns the Ack or Error event plus any events it
    /// caused (e.g. Replan after MoveDestination).
    std::vector<Event> apply(const Command& command);
    /// Advances one tick when running; TickState plus that tick's mission events.
    std::vector<Event> tick();

    bool running() const noexcept { return running_; }
    bool finished() const noexcept { return runner_->finished(); }
    double ticks_per_sec() const noexcept { return ticks_per_sec_; }
    std::int64_t current_tick() const noexcept { return runner_->tick(); }
    const MissionLog& log() const noexcept { return runner_->log(); }

    nlohmann::json tick_state() const;
    /// Full re-joinable state: tick_state fields plus grid and mission data.
    nlohmann::json snapshot() const;

private:
    void rebuild();
    std::vector<Event> drain_mission_events();
    Event error(std::uint64_t id, std::string reason) const;

    ScenarioSpec spec_;
    std::filesystem::path base_dir_;
    BoolGrid terrain_;
    std::unique_ptr<MissionRunner> runner_;
    std::size_t events_seen_ = 0;
    bool running_ = false;
    double ticks_per_sec_ = 10.0;
};

}  // namespace qpath::service
