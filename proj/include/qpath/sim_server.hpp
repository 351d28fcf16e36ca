#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "qpath/sim_session.hpp"

namespace qpath::service {

struct ServerConfig {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;  // 0 picks a free port
    /// Initial tick period; SetSpeed changes it at runtime.
    int tick_ms = 100;
};

/// WebSocket endpoint /session plus HTTP GET /snapshot and /health.
///
/// One simulation worker owns the session. Client commands are queued and
/// applied between ticks; Ack and Error go back to the sender, everything
/// else is broadcast. Each connection numbers its outgoing frames from 1,
/// starting with a Snapshot frame.
class SimServer {
public:
    /// Binds immediately. Throws Error(BindError) when the address or port
    /// cannot be used.
    SimServer(SimSession session, ServerConfig config);
    ~SimServer();
    SimServer(const SimServer&) = delete;
    SimServer& operator=(const SimServer&) = delete;

    std::uint16_t port() const noexcept;

    /// Starts the I/O and simulation threads and returns.
    void start();
    /// start() and block until stop() or SIGINT/SIGTERM.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qpath::service
